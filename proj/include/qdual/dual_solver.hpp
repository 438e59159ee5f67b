#pragma once

// Maximizes the concave dual D over Y^{J+} = Gamma_J ∩ Y+ by a projected
// damped Newton method, recovers x = x(lambda) and certifies it. The
// maximization sense runs the same method on the problem with objective -q0
// (multipliers mu = -lambda), which is the same as minimizing D over Y^{J-}.
//
// When the supremum sits on the boundary of Y+ (A(lambda) singular) the
// iterates pile up against the guard min_eig(A(lambda)) >= delta; the last
// iterate is then pushed onto the boundary by bisection and a primal point is
// recovered from x_min_norm + ker A(lambda).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdual/error.hpp"
#include "qdual/kkt_certify.hpp"
#include "qdual/lagrangian_dual.hpp"
#include "qdual/linalg.hpp"
#include "qdual/quadratic_model.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

struct SolveConfig {
  double tol_grad = 1e-10;
  int max_iter = 200;
  double min_eig_guard = 1e-8;
  std::optional<Multiplier> start;
  Sense sense = Sense::kMin;
  Tolerances tol;
  bool record_iterates = false;
};

enum class SolveStatus { kConverged, kBoundary, kInitNotFound, kIterLimit, kUnbounded };

inline std::string_view ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "Converged";
    case SolveStatus::kBoundary: return "Boundary";
    case SolveStatus::kInitNotFound: return "InitNotFound";
    case SolveStatus::kIterLimit: return "IterLimit";
    case SolveStatus::kUnbounded: return "Unbounded";
  }
  return "Unknown";
}

struct SolveResult {
  SolveStatus status = SolveStatus::kInitNotFound;
  Multiplier lambda;
  Vector x;
  Certificate certificate;
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  std::optional<double> dual_value;
  // D at the start and after every accepted step (and at the boundary point).
  std::vector<double> trajectory;
  // Further primal points recovered at a boundary multiplier.
  std::vector<Vector> alternatives;
  // Accepted multipliers, when SolveConfig::record_iterates is set.
  std::vector<Multiplier> iterates;
  std::vector<std::string> diagnostics;
};

namespace solver_detail {

constexpr double kArmijoSlope = 1e-4;
constexpr double kUnboundedLevel = 1e12;

// Minimal multiplier search for the minimization form: A(lambda) > delta I
// and lambda in Gamma_J.
inline std::optional<Multiplier> FindStartMinForm(const Problem& q,
                                                  const std::optional<Multiplier>& user,
                                                  double delta, const Tolerances& tol) {
  const std::size_t m = q.m();
  auto valid = [&](const Multiplier& l) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!q.IsEquality(j) && l[j] < 0.0) return false;
    }
    return EigSym(Assemble(q, l).A).MinEigenvalue() > delta;
  };
  if (user) {
    CheckMultiplier(q, *user);
    if (valid(*user)) return user;
  }
  Multiplier zero(m, 0.0);
  if (valid(zero)) return zero;

  std::vector<Multiplier> directions;
  auto signs = [&](std::size_t k) {
    return q.IsEquality(k) ? std::vector<double>{1.0, -1.0} : std::vector<double>{1.0};
  };
  for (std::size_t k = 0; k < m; ++k) {
    for (double s : signs(k)) {
      Multiplier d(m, 0.0);
      d[k] = s;
      directions.push_back(d);
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = k + 1; l < m; ++l) {
      for (double sk : signs(k)) {
        for (double sl : signs(l)) {
          Multiplier d(m, 0.0);
          d[k] = sk;
          d[l] = sl;
          directions.push_back(d);
        }
      }
    }
  }
  if (m > 2) directions.push_back(Multiplier(m, 1.0));

  for (int e = 0; e <= 20; ++e) {
    const double t = std::ldexp(1.0, e);
    for (const auto& d : directions) {
      Multiplier l = Scaled(d, t);
      if (valid(l)) return l;
    }
  }
  (void)tol;
  return std::nullopt;
}

// Points x = x0 + K v with K a kernel basis of A(lambda) that satisfy the
// active constraints (J and inequalities with positive multiplier) and the
// remaining inequalities.
inline std::vector<Vector> RecoverPrimal(const Problem& q, std::span<const double> lambda,
                                         const DualEval& ev, const Tolerances& tol) {
  const Matrix basis = KernelBasis(ev.eig, tol);
  const Vector& x0 = ev.x_lambda;
  const std::size_t k = basis.cols();
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < q.m(); ++j) {
    if (q.IsEquality(j) || lambda[j] > tol.feasibility) active.push_back(j);
  }
  auto point = [&](std::span<const double> v) {
    Vector x = x0;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += basis(i, c) * v[c];
    }
    return x;
  };
  auto acceptable = [&](const Vector& x) {
    for (std::size_t j = 0; j < q.m(); ++j) {
      const double v = q.constraint(j)(x);
      const bool is_active = std::find(active.begin(), active.end(), j) != active.end();
      if (is_active ? std::abs(v) > 0.1 * tol.kkt : v > tol.feasibility) return false;
    }
    return true;
  };

  std::vector<Vector> found;
  auto add = [&](Vector x) {
    if (!acceptable(x)) return;
    for (const auto& y : found) {
      if (NormInf(Subtract(x, y)) <= 1e-8 * (1.0 + NormInf(y))) return;
    }
    found.push_back(std::move(x));
  };

  if (k == 0 || active.empty()) {
    add(x0);
  } else if (k == 1) {
    const Vector u = basis.Column(0);
    bool solved = false;
    for (std::size_t j : active) {
      const QuadForm& c = q.constraint(j);
      const double a2 = 0.5 * c.A.Bilinear(u, u);
      const double a1 = Dot(c.Gradient(x0), u);
      const double a0 = c(x0);
      const double scale = std::abs(a2) + std::abs(a1) + std::abs(a0);
      if (std::abs(a2) <= 1e-14 * scale && std::abs(a1) <= 1e-14 * scale) continue;
      solved = true;
      std::vector<double> roots;
      if (std::abs(a2) <= 1e-14 * scale) {
        roots.push_back(-a0 / a1);
      } else {
        const double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc >= 0.0) {
          // Numerically stable pair of roots.
          const double s = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
          if (s != 0.0) {
            roots.push_back(s / a2);
            roots.push_back(a0 / s);
          } else {
            roots.push_back(0.0);
          }
        }
      }
      for (double t : roots) add(point(std::span<const double>(&t, 1)));
      break;
    }
    if (!solved) add(x0);
  } else {
    // Levenberg-Marquardt on the active residuals from deterministic starts.
    std::vector<Vector> starts{Vector(k, 0.0)};
    for (std::size_t c = 0; c < k; ++c) {
      for (double s : {1.0, -1.0, 10.0, -10.0}) {
        Vector v(k, 0.0);
        v[c] = s;
        starts.push_back(v);
      }
    }
    std::mt19937_64 rng(0);
    std::normal_distribution<double> normal;
    for (int r = 0; r < 16; ++r) {
      Vector v(k);
      for (double& e : v) e = normal(rng);
      starts.push_back(v);
    }
    for (Vector v : starts) {
      double mu = 1e-3;
      for (int it = 0; it < 200; ++it) {
        const Vector x = point(v);
        Vector res(active.size());
        Matrix jac(active.size(), k);
        for (std::size_t a = 0; a < active.size(); ++a) {
          const QuadForm& c = q.constraint(active[a]);
          res[a] = c(x);
          const Vector g = basis.ApplyTransposed(c.Gradient(x));
          for (std::size_t col = 0; col < k; ++col) jac(a, col) = g[col];
        }
        const double rn = Norm2(res);
        if (rn <= 1e-15) break;
        // (J^T J + mu I) dv = -J^T r
        SymMatrix jtj(k);
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t l = i; l < k; ++l) {
            double s = 0.0;
            for (std::size_t a = 0; a < active.size(); ++a) s += jac(a, i) * jac(a, l);
            jtj.Set(i, l, s + (i == l ? mu : 0.0));
          }
        }
        const Vector jtr = jac.ApplyTransposed(res);
        const Vector dv = Scaled(SolveMinNorm(jtj, jtr, tol).x, -1.0);
        const Vector trial = Add(v, dv);
        const Vector xt = point(trial);
        double tn = 0.0;
        for (std::size_t j : active) tn += std::pow(q.constraint(j)(xt), 2);
        if (std::sqrt(tn) < rn) {
          v = trial;
          mu = std::max(mu * 0.3, 1e-12);
        } else {
          mu *= 10.0;
          if (mu > 1e12) break;
        }
      }
      add(point(v));
    }
  }
  std::sort(found.begin(), found.end());
  return found;
}

// Moves from `inside` (min_eig > 0) toward `outside` until A(lambda) becomes
// singular; stays on the positive semidefinite side.
inline Multiplier SnapToBoundary(const Problem& q, const Multiplier& inside,
                                 Multiplier outside) {
  auto min_eig = [&](const Multiplier& l) { return EigSym(Assemble(q, l).A).MinEigenvalue(); };
  auto along = [&](double s) {
    Multiplier l = inside;
    for (std::size_t j = 0; j < l.size(); ++j) l[j] += s * (outside[j] - inside[j]);
    return l;
  };
  // Largest step keeping the inequality multipliers nonnegative.
  double s_max = 1e6;
  for (std::size_t j = 0; j < inside.size(); ++j) {
    const double d = outside[j] - inside[j];
    if (!q.IsEquality(j) && d < 0.0) s_max = std::min(s_max, -inside[j] / d);
  }
  double hi = 1.0;
  while (min_eig(along(std::min(hi, s_max))) > 0.0 && hi < s_max) hi *= 2.0;
  hi = std::min(hi, s_max);
  if (min_eig(along(hi)) > 0.0) return along(hi);
  double lo = 0.0;
  // Bisect to the resolution of double: the step may be many orders of
  // magnitude longer than the distance to the boundary.
  for (int it = 0; it < 2200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (min_eig(along(mid)) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return along(lo);
}

// Projected damped Newton ascent on D over Gamma_J ∩ {min_eig(A) >= delta}
// for a problem in minimization form.
inline SolveResult MaximizeMinForm(const Problem& q, const SolveConfig& cfg) {
  const Tolerances& tol = cfg.tol;
  const double delta = cfg.min_eig_guard;
  if (!(cfg.tol_grad > 0.0) || !(delta > 0.0)) {
    throw Error(ErrorCode::kPreconditionFailed, "tol_grad and min_eig_guard must be positive");
  }
  SolveResult res;
  std::optional<Multiplier> start = FindStartMinForm(q, cfg.start, delta, tol);
  if (!start) {
    res.status = SolveStatus::kInitNotFound;
    res.certificate.grade = Grade::kNone;
    res.certificate.justification = "no-start";
    res.diagnostics.push_back("no multiplier with A(λ) ≻ δI in Γ_J was found");
    return res;
  }
  const std::size_t m = q.m();
  Multiplier lambda = *start;
  DualEval ev = EvalDual(q, lambda, tol);
  double value = *ev.value;
  res.trajectory.push_back(value);
  if (cfg.record_iterates) res.iterates.push_back(lambda);
  res.status = SolveStatus::kIterLimit;
  std::optional<Multiplier> last_outside;

  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    const Vector& g = *ev.gradient;
    std::vector<std::size_t> free;
    Vector pg(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (q.IsEquality(j) || lambda[j] > 0.0 || g[j] > 0.0) {
        free.push_back(j);
        pg[j] = g[j];
      }
    }
    res.projected_gradient_norm = Norm2(pg);
    if (res.projected_gradient_norm <= cfg.tol_grad) {
      res.status = SolveStatus::kConverged;
      break;
    }

    // d_F = (sigma I - H_FF)^{-1} g_F, sigma makes H_FF - sigma I negative definite.
    const std::size_t f = free.size();
    SymMatrix hff(f);
    Vector gf(f);
    for (std::size_t a = 0; a < f; ++a) {
      gf[a] = g[free[a]];
      for (std::size_t b = a; b < f; ++b) hff.Set(a, b, (*ev.hessian)(free[a], free[b]));
    }
    const EigenDecomposition he = EigSym(hff);
    const double margin = tol.definiteness * std::max(1.0, he.Norm());
    const double sigma = std::max(0.0, he.MaxEigenvalue() + margin);
    Vector direction(m, 0.0);
    for (std::size_t c = 0; c < f; ++c) {
      double proj = 0.0;
      for (std::size_t a = 0; a < f; ++a) proj += he.vectors(a, c) * gf[a];
      const double coef = proj / (sigma - he.values[c]);
      for (std::size_t a = 0; a < f; ++a) direction[free[a]] += coef * he.vectors(a, c);
    }

    const double tiny = 1e-14 * (1.0 + Norm2(lambda));
    auto project = [&](const Vector& dir, double t) {
      Multiplier trial = lambda;
      for (std::size_t j = 0; j < m; ++j) {
        trial[j] += t * dir[j];
        if (!q.IsEquality(j) && trial[j] < 0.0) trial[j] = 0.0;
      }
      return trial;
    };
    struct Step {
      Multiplier lambda;
      DualEval ev;
      double t = 0.0;
    };
    bool guard_hit = false;
    double step_norm = 0.0;
    // Armijo backtracking with the feasibility guard along `dir`.
    auto search = [&](const Vector& dir) -> std::optional<Step> {
      bool blocked = false;
      for (int ls = 0; ls < 400; ++ls) {
        const double t = std::ldexp(1.0, -ls);
        Multiplier trial = project(dir, t);
        const Vector step = Subtract(trial, lambda);
        const double sn = Norm2(step);
        if (sn <= tiny) {
          step_norm = std::max(step_norm, sn);
          return std::nullopt;
        }
        DualEval tev = EvalDual(q, trial, tol);
        if (tev.eig.MinEigenvalue() < delta || !tev.value) {
          if (!blocked && !guard_hit) last_outside = trial;
          blocked = guard_hit = true;
          continue;
        }
        const double slope = Dot(g, step);
        const double slack = 1e-13 * (1.0 + std::abs(value));
        if (slope > 0.0 && *tev.value >= value + kArmijoSlope * t * slope - slack &&
            *tev.value >= value - slack) {
          step_norm = sn;
          return Step{std::move(trial), std::move(tev), t};
        }
        // Armijo failure inside the region; keep halving.
      }
      return std::nullopt;
    };

    std::optional<Step> best = search(direction);
    if (best && best->t == 1.0) {
      // Far from the optimum D can be nearly linear and the modified Newton
      // step short; extend while the value keeps improving.
      const double slack = 1e-13 * (1.0 + std::abs(value));
      for (int k = 1; k <= 60; ++k) {
        const double t = std::ldexp(1.0, k);
        Multiplier trial = project(direction, t);
        const Vector step = Subtract(trial, lambda);
        DualEval tev = EvalDual(q, trial, tol);
        if (tev.eig.MinEigenvalue() < delta || !tev.value ||
            *tev.value < value + kArmijoSlope * t * Dot(g, step) ||
            *tev.value <= *best->ev.value + slack) {
          break;
        }
        step_norm = Norm2(step);
        best = Step{std::move(trial), std::move(tev), t};
      }
    }
    if (guard_hit) {
      // The Newton step left the region. Near the singular boundary D can be
      // flat along some directions and sharply curved across them, and the
      // modified Newton step then runs far along the flat ones. Try damped
      // steps (mu I - H)^{-1} g over a range of mu, plus the gradient with its
      // outward component along grad min_eig A(lambda) turned inward, and
      // keep the best.
      const double gn = Norm2(gf);
      std::vector<Vector> candidates;
      for (int k = -8; k <= 8; ++k) {
        const double mu = sigma + gn * std::pow(10.0, k);
        Vector d(m, 0.0);
        for (std::size_t c = 0; c < f; ++c) {
          double proj = 0.0;
          for (std::size_t a = 0; a < f; ++a) proj += he.vectors(a, c) * gf[a];
          const double coef = proj / (mu - he.values[c]);
          for (std::size_t a = 0; a < f; ++a) d[free[a]] += coef * he.vectors(a, c);
        }
        candidates.push_back(std::move(d));
      }
      Vector w(m, 0.0);
      const Vector v = ev.eig.vectors.Column(0);
      for (std::size_t j : free) w[j] = q.constraint(j).A.Bilinear(v, v);
      const double wn = Norm2(w);
      if (wn > 0.0) {
        Vector gt = pg;
        const double gw = Dot(pg, w);
        if (gw < 0.0) gt = Subtract(pg, Scaled(w, gw / (wn * wn)));
        const double gtn = Norm2(gt);
        if (gtn > 0.0) {
          const double theta = 0.5 * gtn / Norm2(pg);
          candidates.push_back(Add(gt, Scaled(w, theta * gtn / wn)));
        }
      }
      for (const Vector& d : candidates) {
        std::optional<Step> other = search(d);
        if (other && (!best || *other->ev.value > *best->ev.value)) best = std::move(other);
      }
    }
    const bool accepted = best.has_value();
    if (accepted) {
      lambda = std::move(best->lambda);
      ev = std::move(best->ev);
      value = *ev.value;
      res.trajectory.push_back(value);
      if (cfg.record_iterates) res.iterates.push_back(lambda);
    }
    if (accepted && value > kUnboundedLevel) {
      res.status = SolveStatus::kUnbounded;
      ++iter;
      break;
    }
    if (guard_hit && step_norm <= tiny) {
      res.status = SolveStatus::kBoundary;
      ++iter;
      break;
    }
    if (!accepted) {
      // No representable ascent along any trial direction. A small gradient
      // here is rounding noise in q_j(x(lambda)), not a failure.
      if (res.projected_gradient_norm <= std::sqrt(cfg.tol_grad)) {
        res.status = SolveStatus::kConverged;
        res.diagnostics.push_back("converged at the rounding floor; projected gradient " +
                                  std::to_string(res.projected_gradient_norm));
        ++iter;
        break;
      }
      res.diagnostics.push_back("line search stalled with projected gradient " +
                                std::to_string(res.projected_gradient_norm));
      ++iter;
      break;
    }
  }
  res.iterations = iter;

  if (res.status == SolveStatus::kBoundary && last_outside) {
    Multiplier edge = SnapToBoundary(q, lambda, *last_outside);
    DualEval bev = EvalDual(q, edge, tol);
    if (bev.value && *bev.value >= value - 1e-12 * (1.0 + std::abs(value))) {
      lambda = std::move(edge);
      ev = std::move(bev);
      value = *ev.value;
      res.trajectory.push_back(value);
    } else {
      res.diagnostics.push_back("boundary point outside Y_col; kept last interior iterate");
    }
    std::vector<Vector> pts = RecoverPrimal(q, lambda, ev, tol);
    if (pts.empty()) {
      res.x = ev.x_lambda;
      res.diagnostics.push_back("no primal point recovered from ker A(λ)");
    } else {
      res.x = pts.front();
      res.alternatives.assign(pts.begin() + 1, pts.end());
    }
  } else {
    res.x = ev.x_lambda;
  }
  res.lambda = lambda;
  res.dual_value = ev.value;
  return res;
}

inline void Finalize(const Problem& p, Sense sense, SolveResult& res, const Tolerances& tol) {
  if (res.status == SolveStatus::kInitNotFound) return;
  res.certificate = Certify(p, res.x, res.lambda, sense, tol);
  const bool converged =
      res.status == SolveStatus::kConverged || res.status == SolveStatus::kBoundary;
  if (!converged && IsOptimalityClaim(res.certificate.grade)) {
    res.certificate.grade = Grade::kKKTOnly;
    res.certificate.diagnostics.push_back(
        "solver did not converge; optimality claim withheld");
  }
}

}  // namespace solver_detail

// Start multiplier: A(lambda) > delta I with lambda in Gamma_J (min) or
// A(lambda) < -delta I with lambda in -Gamma_J (max).
inline std::optional<Multiplier> FindStart(const Problem& p, Sense sense,
                                           const SolveConfig& cfg = {}) {
  if (sense == Sense::kMin) {
    return solver_detail::FindStartMinForm(p, cfg.start, cfg.min_eig_guard, cfg.tol);
  }
  std::optional<Multiplier> user;
  if (cfg.start) user = Scaled(*cfg.start, -1.0);
  auto mu = solver_detail::FindStartMinForm(p.WithNegatedObjective(), user,
                                            cfg.min_eig_guard, cfg.tol);
  if (!mu) return std::nullopt;
  return Scaled(*mu, -1.0);
}

// sup D over Y^{J+}; certificate for min q0 on X_J.
inline SolveResult MaximizeDual(const Problem& p, SolveConfig cfg) {
  cfg.sense = Sense::kMin;
  SolveResult res = solver_detail::MaximizeMinForm(p, cfg);
  solver_detail::Finalize(p, Sense::kMin, res, cfg.tol);
  return res;
}

// inf D over Y^{J-}; certificate for max q0 on X_J.
inline SolveResult MinimizeDualForMax(const Problem& p, SolveConfig cfg) {
  cfg.sense = Sense::kMax;
  if (cfg.start) cfg.start = Scaled(*cfg.start, -1.0);
  SolveResult res = solver_detail::MaximizeMinForm(p.WithNegatedObjective(), cfg);
  if (res.status != SolveStatus::kInitNotFound) {
    for (double& v : res.lambda) v = 0.0 - v;  // no negative zeros
    for (double& v : res.trajectory) v = -v;
    for (auto& it : res.iterates) {
      for (double& v : it) v = 0.0 - v;
    }
    if (res.dual_value) res.dual_value = -*res.dual_value;
  }
  solver_detail::Finalize(p, Sense::kMax, res, cfg.tol);
  return res;
}

inline SolveResult SolveDual(const Problem& p, const SolveConfig& cfg) {
  return cfg.sense == Sense::kMin ? MaximizeDual(p, cfg) : MinimizeDualForMax(p, cfg);
}

}  // namespace qdual
