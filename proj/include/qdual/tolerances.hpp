#pragma once

#include <cstdlib>
#include <string>

#include "qdual/error.hpp"

namespace qdual {

// Numerical thresholds shared by every module. The relative ones are scaled
// by the magnitude of the quantity they guard (see the call sites).
struct Tolerances {
  // Eigenvalues with |w| <= definiteness * max(1, max|w|) count as zero.
  double definiteness = 1e-9;
  // Range membership: residual <= range * (|M| |x| + |rhs| + 1).
  double range = 1e-8;
  // Constraint satisfaction and the Gamma_J sign test.
  double feasibility = 1e-8;
  // Every scalar of a J-LKKT report must be below this.
  double kkt = 1e-7;

  Tolerances Scaled(double factor) const {
    return {definiteness * factor, range * factor, feasibility * factor,
            kkt * factor};
  }

  // Reads QDUAL_TOL_SCALE (default 1.0) and scales the defaults by it.
  static Tolerances FromEnvironment() {
    const char* raw = std::getenv("QDUAL_TOL_SCALE");
    if (raw == nullptr || *raw == '\0') return Tolerances{};
    char* end = nullptr;
    double factor = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !(factor > 0.0)) {
      throw Error(ErrorCode::kSchema,
                  std::string("QDUAL_TOL_SCALE must be a positive number, got '") +
                      raw + "'");
    }
    return Tolerances{}.Scaled(factor);
  }
};

}  // namespace qdual
