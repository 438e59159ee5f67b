#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdual/error.hpp"
#include "qdual/linalg.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

// q(x) = 1/2 <x, A x> - <b, x> + c
struct QuadForm {
  SymMatrix A;
  Vector b;
  double c = 0.0;

  QuadForm(SymMatrix a, Vector b_in, double c_in)
      : A(std::move(a)), b(std::move(b_in)), c(c_in) {
    if (b.size() != A.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "QuadForm: b has length " + std::to_string(b.size()) +
                      " but A is " + std::to_string(A.size()) + "x" +
                      std::to_string(A.size()));
    }
  }

  std::size_t dim() const { return A.size(); }

  double operator()(std::span<const double> x) const {
    CheckDim(x);
    return 0.5 * A.Bilinear(x, x) - Dot(b, x) + c;
  }

  // A x - b
  Vector Gradient(std::span<const double> x) const {
    CheckDim(x);
    return Subtract(A.Apply(x), b);
  }

  QuadForm Negated() const { return QuadForm(A * -1.0, Scaled(b, -1.0), -c); }

 private:
  void CheckDim(std::span<const double> x) const {
    if (x.size() != A.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "quadratic form of dimension " + std::to_string(A.size()) +
                      " evaluated at a vector of length " + std::to_string(x.size()));
    }
  }
};

inline double EvalQuadForm(const QuadForm& q, std::span<const double> x) { return q(x); }

// Constraint indices are 0-based here; the JSON schema and the CLI use 1-based.
using IndexSet = std::set<std::size_t>;

// min q0(x) s.t. q_j(x) = 0 for j in J, q_j(x) <= 0 for j not in J.
class Problem {
 public:
  Problem(QuadForm objective, std::vector<QuadForm> constraints, IndexSet equalities)
      : objective_(std::move(objective)),
        constraints_(std::move(constraints)),
        equalities_(std::move(equalities)) {
    for (const auto& q : constraints_) {
      if (q.dim() != objective_.dim()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "all quadratic forms of a problem must share dimension n");
      }
    }
    for (std::size_t j : equalities_) {
      if (j >= constraints_.size()) {
        throw Error(ErrorCode::kSchema, "J index out of range: " + std::to_string(j + 1) +
                                            " > m = " + std::to_string(constraints_.size()));
      }
    }
  }

  std::size_t n() const { return objective_.dim(); }
  std::size_t m() const { return constraints_.size(); }

  const QuadForm& objective() const { return objective_; }
  const std::vector<QuadForm>& constraints() const { return constraints_; }
  const QuadForm& constraint(std::size_t j) const { return constraints_.at(j); }
  const IndexSet& equalities() const { return equalities_; }
  bool IsEquality(std::size_t j) const { return equalities_.contains(j); }

  Problem WithEqualities(IndexSet equalities) const {
    return Problem(objective_, constraints_, std::move(equalities));
  }

  // Same constraints, objective -q0: maximizing q0 is minimizing this.
  Problem WithNegatedObjective() const {
    return Problem(objective_.Negated(), constraints_, equalities_);
  }

  // Every constraint is an equality.
  Problem AllEqualities() const {
    IndexSet all;
    for (std::size_t j = 0; j < m(); ++j) all.insert(j);
    return WithEqualities(std::move(all));
  }

 private:
  QuadForm objective_;
  std::vector<QuadForm> constraints_;
  IndexSet equalities_;
};

struct FeasibilityReport {
  bool feasible;
  double eq_violation;    // max |q_j(x)| over J
  double ineq_violation;  // max(0, q_j(x)) over J^c
};

inline FeasibilityReport CheckFeasible(const Problem& p, std::span<const double> x,
                                       const Tolerances& tol = {}) {
  double eq = 0.0;
  double ineq = 0.0;
  for (std::size_t j = 0; j < p.m(); ++j) {
    const double v = p.constraint(j)(x);
    if (p.IsEquality(j)) {
      eq = std::max(eq, std::abs(v));
    } else {
      ineq = std::max(ineq, std::max(0.0, v));
    }
  }
  if (p.m() == 0 && x.size() != p.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "check_feasible: dimension mismatch");
  }
  return {eq <= tol.feasibility && ineq <= tol.feasibility, eq, ineq};
}

}  // namespace qdual
