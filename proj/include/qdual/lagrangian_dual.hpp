#pragma once

// The Lagrangian L(x, lambda) = q0(x) + sum_j lambda_j q_j(x), its aggregate
// data A(lambda), b(lambda), c(lambda) (with lambda_0 = 1), and the dual
// function D(lambda) = L(x, lambda) for any x with A(lambda) x = b(lambda).
//
// D is defined on Y_col = {lambda : b(lambda) in Im A(lambda)}; its gradient
// and Hessian are only reported on Y0 = {lambda : A(lambda) invertible}:
//   dD/dlambda_j        = q_j(x(lambda))
//   d2D/dlambda_j dlambda_k = -<A_j x - b_j, A(lambda)^{-1} (A_k x - b_k)>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdual/error.hpp"
#include "qdual/linalg.hpp"
#include "qdual/quadratic_model.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

// lambda_1..lambda_m; lambda_0 = 1 is implicit.
using Multiplier = Vector;

struct Aggregate {
  SymMatrix A;
  Vector b;
  double c;
};

inline void CheckMultiplier(const Problem& p, std::span<const double> lambda) {
  if (lambda.size() != p.m()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "multiplier has length " + std::to_string(lambda.size()) +
                    " but the problem has m = " + std::to_string(p.m()) + " constraints");
  }
  for (double v : lambda) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kSchema, "multiplier entries must be finite");
  }
}

inline Aggregate Assemble(const Problem& p, std::span<const double> lambda) {
  CheckMultiplier(p, lambda);
  Aggregate agg{p.objective().A, p.objective().b, p.objective().c};
  for (std::size_t j = 0; j < p.m(); ++j) {
    const QuadForm& q = p.constraint(j);
    agg.A.AddScaled(q.A, lambda[j]);
    for (std::size_t i = 0; i < p.n(); ++i) agg.b[i] += lambda[j] * q.b[i];
    agg.c += lambda[j] * q.c;
  }
  return agg;
}

// q0(x) + sum_j lambda_j q_j(x)
inline double EvalL(const Problem& p, std::span<const double> x,
                    std::span<const double> lambda) {
  CheckMultiplier(p, lambda);
  double v = p.objective()(x);
  for (std::size_t j = 0; j < p.m(); ++j) v += lambda[j] * p.constraint(j)(x);
  return v;
}

// 1/2 <x, A(lambda) x> - <x, b(lambda)> + c(lambda)
inline double EvalLAggregate(const Problem& p, std::span<const double> x,
                             std::span<const double> lambda) {
  const Aggregate agg = Assemble(p, lambda);
  return 0.5 * agg.A.Bilinear(x, x) - Dot(x, agg.b) + agg.c;
}

inline Vector GradXL(const Problem& p, std::span<const double> x,
                     std::span<const double> lambda) {
  const Aggregate agg = Assemble(p, lambda);
  return Subtract(agg.A.Apply(x), agg.b);
}

inline SymMatrix HessXL(const Problem& p, std::span<const double> lambda) {
  return Assemble(p, lambda).A;
}

// (q_j(x))_j
inline Vector GradLambdaL(const Problem& p, std::span<const double> x) {
  if (x.size() != p.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "grad_lambda_L: x has wrong length");
  }
  Vector g(p.m());
  for (std::size_t j = 0; j < p.m(); ++j) g[j] = p.constraint(j)(x);
  return g;
}

struct SetMembership {
  bool in_Y0 = false;
  bool in_Yplus = false;
  bool in_Yminus = false;
  bool in_Ycol = false;
  bool in_Ycol_plus = false;
  bool in_Ycol_minus = false;
  bool in_Gamma_J = false;
  bool in_YJplus = false;        // Gamma_J and Y+
  bool in_YJminus = false;       // -Gamma_J and Y-
  bool in_Ycol_Jplus = false;    // Gamma_J and Y_col+
  bool in_Ycol_Jminus = false;   // -Gamma_J and Y_col-
};

// lambda_j >= -tol on the inequality indices.
inline bool InGammaJ(const Problem& p, std::span<const double> lambda, const Tolerances& tol) {
  for (std::size_t j = 0; j < p.m(); ++j) {
    if (!p.IsEquality(j) && lambda[j] < -tol.feasibility) return false;
  }
  return true;
}

inline bool InMinusGammaJ(const Problem& p, std::span<const double> lambda,
                          const Tolerances& tol) {
  for (std::size_t j = 0; j < p.m(); ++j) {
    if (!p.IsEquality(j) && lambda[j] > tol.feasibility) return false;
  }
  return true;
}

struct DualEval {
  std::optional<double> value;        // empty outside Y_col
  std::optional<Vector> gradient;     // empty outside Y0
  std::optional<SymMatrix> hessian;   // empty outside Y0
  Vector x_lambda;                    // min-norm solution of A(lambda) x = b(lambda)
  double x_residual = 0.0;
  SetMembership membership;
  Definiteness definiteness{};
  Aggregate aggregate;
  EigenDecomposition eig;
};

namespace dual_detail {

inline SetMembership Classify(const Problem& p, std::span<const double> lambda,
                              const EigenDecomposition& eig, const Definiteness& def,
                              bool in_range, const Tolerances& tol) {
  SetMembership s;
  const double tau = ZeroEigenvalueThreshold(eig, tol);
  bool singular = false;
  for (double w : eig.values) singular |= std::abs(w) <= tau;
  s.in_Y0 = !singular;
  s.in_Yplus = def.cls == DefinitenessClass::kPosDef;
  s.in_Yminus = def.cls == DefinitenessClass::kNegDef;
  s.in_Ycol = in_range;
  s.in_Ycol_plus = in_range && def.min_eig >= -tau;
  s.in_Ycol_minus = in_range && def.max_eig <= tau;
  s.in_Gamma_J = InGammaJ(p, lambda, tol);
  const bool in_minus_gamma = InMinusGammaJ(p, lambda, tol);
  s.in_YJplus = s.in_Gamma_J && s.in_Yplus;
  s.in_YJminus = in_minus_gamma && s.in_Yminus;
  s.in_Ycol_Jplus = s.in_Gamma_J && s.in_Ycol_plus;
  s.in_Ycol_Jminus = in_minus_gamma && s.in_Ycol_minus;
  return s;
}

}  // namespace dual_detail

inline DualEval EvalDual(const Problem& p, std::span<const double> lambda,
                         const Tolerances& tol = {}) {
  Aggregate agg = Assemble(p, lambda);
  EigenDecomposition eig = EigSym(agg.A);
  const Definiteness def = ClassifyDefiniteness(eig, tol);
  MinNormSolution sol = SolveMinNorm(agg.A, eig, agg.b, tol);
  const bool in_range = InRange(eig, sol, agg.b, tol);

  DualEval out{.value = std::nullopt,
               .gradient = std::nullopt,
               .hessian = std::nullopt,
               .x_lambda = sol.x,
               .x_residual = sol.residual,
               .membership = dual_detail::Classify(p, lambda, eig, def, in_range, tol),
               .definiteness = def,
               .aggregate = std::move(agg),
               .eig = std::move(eig)};
  const Vector& x = out.x_lambda;
  if (out.membership.in_Ycol) {
    out.value = 0.5 * out.aggregate.A.Bilinear(x, x) - Dot(x, out.aggregate.b) +
                out.aggregate.c;
  }
  if (out.membership.in_Y0) {
    const std::size_t m = p.m();
    out.gradient = GradLambdaL(p, x);
    // r_j = A_j x - b_j and y_j = A(lambda)^{-1} r_j
    std::vector<Vector> r(m), y(m);
    for (std::size_t j = 0; j < m; ++j) {
      r[j] = p.constraint(j).Gradient(x);
      y[j] = SolveMinNorm(out.aggregate.A, out.eig, r[j], tol).x;
    }
    SymMatrix h(std::max<std::size_t>(m, 1));
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = j; k < m; ++k) {
        h.Set(j, k, -0.5 * (Dot(r[j], y[k]) + Dot(r[k], y[j])));
      }
    }
    if (m > 0) out.hessian = std::move(h);
  }
  return out;
}

inline SetMembership ClassifyMembership(const Problem& p, std::span<const double> lambda,
                                        const Tolerances& tol = {}) {
  return EvalDual(p, lambda, tol).membership;
}

// D(lambda); throws DualUndefined outside Y_col.
inline double DualValue(const Problem& p, std::span<const double> lambda,
                        const Tolerances& tol = {}) {
  DualEval ev = EvalDual(p, lambda, tol);
  if (!ev.value) {
    throw Error(ErrorCode::kDualUndefined, "b(lambda) is not in the range of A(lambda)");
  }
  return *ev.value;
}

// grad D(lambda); throws GradientUndefined on Y_col \ Y0 and DualUndefined
// outside Y_col.
inline Vector DualGradient(const Problem& p, std::span<const double> lambda,
                           const Tolerances& tol = {}) {
  DualEval ev = EvalDual(p, lambda, tol);
  if (!ev.value) {
    throw Error(ErrorCode::kDualUndefined, "b(lambda) is not in the range of A(lambda)");
  }
  if (!ev.gradient) {
    throw Error(ErrorCode::kGradientUndefined,
                "A(lambda) is singular; the dual is not differentiable there");
  }
  return *ev.gradient;
}

// Critical points of D on [lo, hi] for a problem with a single constraint.
// Simple roots are located by sign changes of D', roots of even multiplicity
// by sign changes of D'' at which D' also vanishes. Grid points outside Y0 are
// skipped.
inline std::vector<double> CriticalPoints1D(const Problem& p, double lo, double hi,
                                            int samples, const Tolerances& tol = {}) {
  if (p.m() != 1) {
    throw Error(ErrorCode::kPreconditionFailed, "critical point scan needs m = 1");
  }
  struct Sample {
    double t;
    bool valid;
    double d1;
    double d2;
  };
  auto eval = [&](double t) -> Sample {
    Multiplier l{t};
    DualEval ev = EvalDual(p, l, tol);
    if (!ev.gradient) return {t, false, 0.0, 0.0};
    return {t, true, (*ev.gradient)[0], (*ev.hessian)(0, 0)};
  };
  auto bisect = [&](double a, double b, auto field) {
    Sample sa = eval(a);
    for (int it = 0; it < 200 && b - a > 4 * DBL_EPSILON * std::max(1.0, std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      Sample sm = eval(mid);
      if (!sm.valid) return std::optional<double>{};
      if ((field(sa) < 0) == (field(sm) < 0)) {
        a = mid;
        sa = sm;
      } else {
        b = mid;
      }
    }
    return std::optional<double>(0.5 * (a + b));
  };
  auto d1 = [](const Sample& s) { return s.d1; };
  auto d2 = [](const Sample& s) { return s.d2; };

  std::vector<Sample> grid;
  for (int i = 0; i <= samples; ++i) grid.push_back(eval(lo + (hi - lo) * i / samples));

  std::vector<double> roots;
  auto accept = [&](double t) {
    Sample s = eval(t);
    if (!s.valid) return;
    const Multiplier l{t};
    const double scale = 1.0 + std::abs(DualValue(p, l, tol));
    if (std::abs(s.d1) > 1e-9 * scale) return;
    for (double r : roots) {
      if (std::abs(r - t) <= 1e-9 * std::max(1.0, std::abs(t))) return;
    }
    roots.push_back(t);
  };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const Sample& a = grid[i];
    const Sample& b = grid[i + 1];
    if (a.valid && a.d1 == 0.0) accept(a.t);
    if (!a.valid || !b.valid) continue;
    if ((a.d1 < 0) != (b.d1 < 0)) {
      if (auto t = bisect(a.t, b.t, d1)) accept(*t);
    } else if ((a.d2 < 0) != (b.d2 < 0)) {
      if (auto t = bisect(a.t, b.t, d2)) accept(*t);
    }
  }
  if (grid.back().valid && grid.back().d1 == 0.0) accept(grid.back().t);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace qdual
