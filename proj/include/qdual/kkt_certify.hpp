#pragma once

// J-LKKT checks for the Lagrangian and for the dual, and graded optimality
// certificates. A pair (x, lambda) is a J-LKKT point of L when
//
//   grad_x L(x, lambda) = 0,  x in X_J,  lambda in Gamma_J,
//   lambda_j q_j(x) = 0 for every inequality index j.
//
// With A(lambda) positive semidefinite (and b(lambda) in its range) such a
// point gives a global minimizer of q0 on X_J with q0(x) = L(x, lambda) =
// D(lambda); with A(lambda) positive definite the minimizer is unique. The
// maximization variant flips the sign condition on lambda and the definiteness.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdual/error.hpp"
#include "qdual/lagrangian_dual.hpp"
#include "qdual/quadratic_model.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

enum class Sense { kMin, kMax };

inline std::string_view ToString(Sense s) { return s == Sense::kMin ? "min" : "max"; }

struct LKKTReport {
  double stationarity_x = 0.0;  // |grad_x L|
  double eq_violation = 0.0;    // max |q_j| on J
  double ineq_violation = 0.0;  // max(0, q_j) on J^c
  double sign_violation = 0.0;  // max(0, -lambda_j) on J^c (max variant: max(0, lambda_j))
  double compl_slack = 0.0;     // max |lambda_j q_j| on J^c
  bool holds = false;
};

namespace kkt_detail {

inline void Finish(LKKTReport& r, const Tolerances& tol) {
  r.holds = r.stationarity_x <= tol.kkt && r.eq_violation <= tol.kkt &&
            r.ineq_violation <= tol.kkt && r.sign_violation <= tol.kkt &&
            r.compl_slack <= tol.kkt;
}

// `constraint_values[j]` plays the role of dL/dlambda_j.
inline LKKTReport Report(std::span<const double> constraint_values,
                         std::span<const double> lambda, const IndexSet& equalities,
                         double stationarity, bool max_variant, const Tolerances& tol) {
  LKKTReport r;
  r.stationarity_x = stationarity;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const double v = constraint_values[j];
    if (equalities.contains(j)) {
      r.eq_violation = std::max(r.eq_violation, std::abs(v));
      continue;
    }
    r.ineq_violation = std::max(r.ineq_violation, std::max(0.0, v));
    const double wrong_sign = max_variant ? lambda[j] : -lambda[j];
    r.sign_violation = std::max(r.sign_violation, std::max(0.0, wrong_sign));
    r.compl_slack = std::max(r.compl_slack, std::abs(lambda[j] * v));
  }
  Finish(r, tol);
  return r;
}

inline void CheckIndices(const Problem& p, const IndexSet& equalities) {
  for (std::size_t j : equalities) {
    if (j >= p.m()) throw Error(ErrorCode::kSchema, "J index out of range");
  }
}

}  // namespace kkt_detail

inline LKKTReport CheckLkktL(const Problem& p, std::span<const double> x,
                             std::span<const double> lambda, const IndexSet& equalities,
                             const Tolerances& tol = {}) {
  kkt_detail::CheckIndices(p, equalities);
  const Vector grad = GradXL(p, x, lambda);
  return kkt_detail::Report(GradLambdaL(p, x), lambda, equalities, Norm2(grad),
                            /*max_variant=*/false, tol);
}

inline LKKTReport CheckLkktL(const Problem& p, std::span<const double> x,
                             std::span<const double> lambda, const Tolerances& tol = {}) {
  return CheckLkktL(p, x, lambda, p.equalities(), tol);
}

// Same structure as CheckLkktL but with lambda_j <= 0 on the inequality indices.
inline LKKTReport CheckMaxVariant(const Problem& p, std::span<const double> x,
                                  std::span<const double> lambda,
                                  const Tolerances& tol = {}) {
  const Vector grad = GradXL(p, x, lambda);
  return kkt_detail::Report(GradLambdaL(p, x), lambda, p.equalities(), Norm2(grad),
                            /*max_variant=*/true, tol);
}

// J-LKKT conditions on grad D; lambda must lie in Y0. The stationarity entry
// is the residual of A(lambda) x(lambda) = b(lambda).
inline LKKTReport CheckLkktD(const Problem& p, std::span<const double> lambda,
                             const Tolerances& tol = {}) {
  DualEval ev = EvalDual(p, lambda, tol);
  if (!ev.gradient) {
    throw Error(ErrorCode::kNotInY0, "A(lambda) is numerically singular");
  }
  return kkt_detail::Report(*ev.gradient, lambda, p.equalities(), ev.x_residual,
                            /*max_variant=*/false, tol);
}

enum class Grade {
  kUniqueGlobalMin,
  kGlobalMin,
  kUniqueGlobalMax,
  kGlobalMax,
  kKKTOnly,
  kNone,
};

inline std::string_view ToString(Grade g) {
  switch (g) {
    case Grade::kUniqueGlobalMin: return "UniqueGlobalMin";
    case Grade::kGlobalMin: return "GlobalMin";
    case Grade::kUniqueGlobalMax: return "UniqueGlobalMax";
    case Grade::kGlobalMax: return "GlobalMax";
    case Grade::kKKTOnly: return "KKTOnly";
    case Grade::kNone: return "None";
  }
  return "Unknown";
}

inline std::optional<Grade> GradeFromString(std::string_view s) {
  for (Grade g : {Grade::kUniqueGlobalMin, Grade::kGlobalMin, Grade::kUniqueGlobalMax,
                  Grade::kGlobalMax, Grade::kKKTOnly, Grade::kNone}) {
    if (ToString(g) == s) return g;
  }
  return std::nullopt;
}

inline bool IsOptimalityClaim(Grade g) {
  return g != Grade::kKKTOnly && g != Grade::kNone;
}

struct Certificate {
  Grade grade = Grade::kNone;
  std::string justification;
  double objective = 0.0;              // q0(x)
  std::optional<double> dual_value;    // D(lambda) when lambda is in Y_col
  std::optional<double> duality_gap;   // |q0(x) - D(lambda)|
  LKKTReport report;
  SetMembership membership;
  std::vector<std::string> diagnostics;
};

namespace kkt_detail {

inline std::string NoClaimDiagnostic(DefinitenessClass cls) {
  switch (cls) {
    case DefinitenessClass::kPosDef: return "A(λ) positive definite; no global claim";
    case DefinitenessClass::kPosSemiDefSingular:
      return "A(λ) positive semidefinite; no global claim";
    case DefinitenessClass::kNegDef: return "A(λ) negative definite; no global claim";
    case DefinitenessClass::kNegSemiDefSingular:
      return "A(λ) negative semidefinite; no global claim";
    case DefinitenessClass::kIndefinite: return "A(λ) indefinite; no global claim";
  }
  return "no global claim";
}

inline std::string DescribeFailure(const LKKTReport& r) {
  std::string s = "J-LKKT conditions fail:";
  auto add = [&](const char* name, double v) {
    s += std::string(" ") + name + "=" + std::to_string(v);
  };
  add("stationarity", r.stationarity_x);
  add("eq", r.eq_violation);
  add("ineq", r.ineq_violation);
  add("sign", r.sign_violation);
  add("compl", r.compl_slack);
  return s;
}

}  // namespace kkt_detail

inline Certificate Certify(const Problem& p, std::span<const double> x,
                           std::span<const double> lambda, Sense sense,
                           const Tolerances& tol = {}) {
  Certificate cert;
  cert.objective = p.objective()(x);
  cert.report = sense == Sense::kMin ? CheckLkktL(p, x, lambda, tol)
                                     : CheckMaxVariant(p, x, lambda, tol);
  DualEval ev = EvalDual(p, lambda, tol);
  cert.membership = ev.membership;
  if (ev.value) {
    cert.dual_value = ev.value;
    cert.duality_gap = std::abs(cert.objective - *ev.value);
  }
  if (!cert.report.holds) {
    cert.grade = Grade::kNone;
    cert.justification = "lkkt-failed";
    cert.diagnostics.push_back(kkt_detail::DescribeFailure(cert.report));
    return cert;
  }
  if (!cert.duality_gap || *cert.duality_gap > tol.kkt * (1.0 + std::abs(cert.objective))) {
    cert.grade = Grade::kNone;
    cert.justification = "perfect-duality-failed";
    cert.diagnostics.push_back("q0(x) and D(λ) disagree beyond tolerance");
    return cert;
  }
  const SetMembership& s = ev.membership;
  if (sense == Sense::kMin) {
    if (s.in_YJplus) {
      cert.grade = Grade::kUniqueGlobalMin;
      cert.justification = "lkkt+positive-definite";
    } else if (s.in_Ycol_Jplus) {
      cert.grade = Grade::kGlobalMin;
      cert.justification = "lkkt+positive-semidefinite";
      cert.diagnostics.push_back("A(λ) singular; other global minimizers may exist");
    } else {
      cert.grade = Grade::kKKTOnly;
      cert.justification = "lkkt-only";
      cert.diagnostics.push_back(kkt_detail::NoClaimDiagnostic(ev.definiteness.cls));
    }
  } else {
    if (s.in_YJminus) {
      cert.grade = Grade::kUniqueGlobalMax;
      cert.justification = "lkkt-max+negative-definite";
    } else if (s.in_Ycol_Jminus) {
      cert.grade = Grade::kGlobalMax;
      cert.justification = "lkkt-max+negative-semidefinite";
      cert.diagnostics.push_back("A(λ) singular; other global maximizers may exist");
    } else {
      cert.grade = Grade::kKKTOnly;
      cert.justification = "lkkt-max-only";
      cert.diagnostics.push_back(kkt_detail::NoClaimDiagnostic(ev.definiteness.cls));
    }
  }
  return cert;
}

struct RelaxResult {
  IndexSet relaxed_equalities;  // J' = J \ {j in J : lambda_j >= 0}
  Problem relaxed;
  Certificate certificate;      // re-certified on the relaxed problem
};

// Equality constraints with nonnegative multipliers can be relaxed to
// inequalities without losing global minimality of x.
inline RelaxResult RelaxJ(const Problem& p, std::span<const double> x,
                          std::span<const double> lambda, const Tolerances& tol = {}) {
  if (!CheckLkktL(p, x, lambda, tol).holds) {
    throw Error(ErrorCode::kPreconditionFailed, "(x, lambda) is not a J-LKKT point of L");
  }
  const Definiteness def = ClassifyDefiniteness(Assemble(p, lambda).A, tol);
  if (def.cls != DefinitenessClass::kPosDef &&
      def.cls != DefinitenessClass::kPosSemiDefSingular) {
    throw Error(ErrorCode::kPreconditionFailed, "A(lambda) is not positive semidefinite");
  }
  IndexSet relaxed;
  for (std::size_t j : p.equalities()) {
    if (lambda[j] < -tol.feasibility) relaxed.insert(j);
  }
  Problem rp = p.WithEqualities(relaxed);
  Certificate cert = Certify(rp, x, lambda, Sense::kMin, tol);
  return {std::move(relaxed), std::move(rp), std::move(cert)};
}

// Checks both directions of the monotonicity of J-LKKT in J (J subset of J'):
//  J'-LKKT and lambda_j >= 0 on J' \ J  implies  J-LKKT;
//  J-LKKT and lambda_j > 0 on J' \ J    implies  J'-LKKT.
// Returns false if either implication is violated.
inline bool LkktMonotone(const Problem& p, std::span<const double> x,
                         std::span<const double> lambda, const IndexSet& small_j,
                         const IndexSet& large_j, const Tolerances& tol = {}) {
  if (!std::includes(large_j.begin(), large_j.end(), small_j.begin(), small_j.end())) {
    throw Error(ErrorCode::kPreconditionFailed, "lkkt_monotone requires J subset of J'");
  }
  const bool lkkt_small = CheckLkktL(p, x, lambda, small_j, tol).holds;
  const bool lkkt_large = CheckLkktL(p, x, lambda, large_j, tol).holds;
  bool nonneg = true;
  bool positive = true;
  for (std::size_t j : large_j) {
    if (small_j.contains(j)) continue;
    nonneg &= lambda[j] >= 0.0;
    positive &= lambda[j] > tol.kkt;
  }
  const bool forward = !(lkkt_large && nonneg) || lkkt_small;
  const bool converse = !(lkkt_small && positive) || lkkt_large;
  return forward && converse;
}

}  // namespace qdual
