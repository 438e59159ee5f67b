#pragma once

// Brute-force ground truth for small instances: exhaustive enumeration over
// {0,1}^n or {-1,1}^n, grid / arc / rejection sampling over low-dimensional
// continuous feasible sets, and a local perturbation test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "qdual/error.hpp"
#include "qdual/kkt_certify.hpp"
#include "qdual/linalg.hpp"
#include "qdual/quadratic_model.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

enum class OracleMode { kEnumerate01, kEnumeratePM1, kGridBox, kCircleParam, kRandomFeasible };

inline std::string_view ToString(OracleMode m) {
  switch (m) {
    case OracleMode::kEnumerate01: return "Enumerate01";
    case OracleMode::kEnumeratePM1: return "EnumeratePM1";
    case OracleMode::kGridBox: return "GridBox";
    case OracleMode::kCircleParam: return "CircleParam";
    case OracleMode::kRandomFeasible: return "RandomFeasible";
  }
  return "Unknown";
}

inline std::optional<OracleMode> OracleModeFromString(std::string_view s) {
  for (OracleMode m : {OracleMode::kEnumerate01, OracleMode::kEnumeratePM1, OracleMode::kGridBox,
                       OracleMode::kCircleParam, OracleMode::kRandomFeasible}) {
    if (ToString(m) == s) return m;
  }
  if (s == "enum01" || s == "01") return OracleMode::kEnumerate01;
  if (s == "enumpm1" || s == "pm1") return OracleMode::kEnumeratePM1;
  if (s == "grid") return OracleMode::kGridBox;
  if (s == "circle") return OracleMode::kCircleParam;
  if (s == "random") return OracleMode::kRandomFeasible;
  return std::nullopt;
}

enum class Alphabet { kZeroOne, kPlusMinusOne };

struct OracleResult {
  double best_value = 0.0;
  std::vector<Vector> argmins;  // sorted lexicographically
  std::uint64_t points_evaluated = 0;
  OracleMode mode = OracleMode::kEnumerate01;
  // Bound on how far best_value may sit above the true optimum (min sense).
  std::optional<double> slack;
};

namespace oracle_detail {

inline double ArgTolerance(double best) { return 1e-9 * (1.0 + std::abs(best)); }

// Best value and all points within tolerance of it; sense folded into `sign`.
class Tracker {
 public:
  explicit Tracker(double sign) : sign_(sign) {}

  void Offer(double value, const Vector& x) {
    const double v = sign_ * value;
    if (!any_ || v < best_) {
      best_ = v;
      any_ = true;
      std::erase_if(points_, [&](const auto& e) { return e.first > best_ + ArgTolerance(best_); });
    }
    if (v <= best_ + ArgTolerance(best_)) points_.emplace_back(v, x);
  }

  void Merge(const Tracker& other) {
    for (const auto& [v, x] : other.points_) Offer(sign_ * v, x);
  }

  bool any() const { return any_; }

  void Fill(OracleResult& out) const {
    out.best_value = sign_ * best_;
    out.argmins.clear();
    for (const auto& [v, x] : points_) {
      if (v <= best_ + ArgTolerance(best_)) out.argmins.push_back(x);
    }
    std::sort(out.argmins.begin(), out.argmins.end());
    out.argmins.erase(std::unique(out.argmins.begin(), out.argmins.end()), out.argmins.end());
  }

 private:
  double sign_;
  bool any_ = false;
  double best_ = 0.0;
  std::vector<std::pair<double, Vector>> points_;
};

inline bool PointFeasible(const Problem& p, std::span<const double> x, const Tolerances& tol) {
  return CheckFeasible(p, x, tol).feasible;
}

// Constraint of the form 1/2 a x_i^2 - beta x_i + c touching only coordinate i.
struct SingleCoordinate {
  std::size_t index;
  double a, beta, c;
};

inline std::optional<SingleCoordinate> AsSingleCoordinate(const QuadForm& q) {
  const std::size_t n = q.dim();
  std::optional<std::size_t> idx;
  auto touch = [&](std::size_t i) {
    if (idx && *idx != i) return false;
    idx = i;
    return true;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (q.A(i, k) == 0.0) continue;
      if (i != k || !touch(i)) return std::nullopt;
    }
    if (q.b[i] != 0.0 && !touch(i)) return std::nullopt;
  }
  if (!idx) return std::nullopt;
  return SingleCoordinate{*idx, q.A(*idx, *idx), q.b[*idx], q.c};
}

// Real roots of 1/2 a t^2 - beta t + c = 0.
inline std::vector<double> Roots(double a, double beta, double c) {
  if (a == 0.0) {
    if (beta == 0.0) return {};
    return {c / beta};
  }
  const double disc = beta * beta - 2.0 * a * c;
  if (disc < 0.0) return {};
  const double s = std::sqrt(disc);
  std::vector<double> r{(beta - s) / a, (beta + s) / a};
  std::sort(r.begin(), r.end());
  if (r[0] == r[1]) r.pop_back();
  return r;
}

struct Box {
  Vector lo, hi;
  std::vector<std::optional<std::vector<double>>> fixed;  // coordinate restricted to finite set
};

// Per-coordinate bounds implied by single-coordinate constraints.
inline std::optional<Box> RecognizeBox(const Problem& p) {
  const std::size_t n = p.n();
  Box box{Vector(n, -INFINITY), Vector(n, INFINITY), std::vector<std::optional<std::vector<double>>>(n)};
  for (std::size_t j = 0; j < p.m(); ++j) {
    auto s = AsSingleCoordinate(p.constraint(j));
    if (!s) continue;
    const std::size_t i = s->index;
    if (p.IsEquality(j)) {
      std::vector<double> r = Roots(s->a, s->beta, s->c);
      if (box.fixed[i]) {
        std::erase_if(r, [&](double t) {
          return std::none_of(box.fixed[i]->begin(), box.fixed[i]->end(),
                              [&](double u) { return std::abs(u - t) <= 1e-12 * (1.0 + std::abs(t)); });
        });
      }
      box.fixed[i] = r;
    } else if (s->a > 0.0) {
      std::vector<double> r = Roots(s->a, s->beta, s->c);
      if (r.empty()) return std::nullopt;
      box.lo[i] = std::max(box.lo[i], r.front());
      box.hi[i] = std::min(box.hi[i], r.back());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (box.fixed[i]) {
      std::erase_if(*box.fixed[i], [&](double t) { return t < box.lo[i] || t > box.hi[i]; });
      if (box.fixed[i]->empty()) continue;
      box.lo[i] = box.fixed[i]->front();
      box.hi[i] = box.fixed[i]->back();
    } else if (!std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i])) {
      return std::nullopt;
    }
  }
  return box;
}

// Bounding box from ellipsoid constraints q_j <= 0 (A_j > 0) or from a box.
inline std::optional<std::pair<Vector, Vector>> BoundingBox(const Problem& p,
                                                            const Tolerances& tol) {
  const std::size_t n = p.n();
  Vector lo(n, -INFINITY), hi(n, INFINITY);
  for (std::size_t j = 0; j < p.m(); ++j) {
    const QuadForm& q = p.constraint(j);
    const EigenDecomposition eig = EigSym(q.A);
    if (ClassifyDefiniteness(eig, tol).cls != DefinitenessClass::kPosDef) {
      if (auto s = AsSingleCoordinate(q); s && s->a > 0.0) {
        auto r = Roots(s->a, s->beta, s->c);
        if (r.empty()) continue;
        lo[s->index] = std::max(lo[s->index], r.front());
        hi[s->index] = std::min(hi[s->index], r.back());
      }
      continue;
    }
    const Vector center = SolveMinNorm(q.A, eig, q.b, tol).x;
    const double r2 = -2.0 * q(center);
    if (r2 < 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      double inv_ii = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        inv_ii += eig.vectors(i, k) * eig.vectors(i, k) / eig.values[k];
      }
      const double w = std::sqrt(r2 * inv_ii);
      lo[i] = std::max(lo[i], center[i] - w);
      hi[i] = std::min(hi[i], center[i] + w);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) return std::nullopt;
  }
  return std::make_pair(lo, hi);
}

// Gauss-Newton projection onto {q_j = 0, j in idx}; nullopt when it fails.
inline std::optional<Vector> ProjectOnto(const Problem& p, const std::vector<std::size_t>& idx,
                                         Vector x) {
  if (idx.empty()) return x;
  const std::size_t n = p.n();
  for (int it = 0; it < 60; ++it) {
    Vector r(idx.size());
    std::vector<Vector> grads;
    double rn = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      r[a] = p.constraint(idx[a])(x);
      rn = std::max(rn, std::abs(r[a]));
      grads.push_back(p.constraint(idx[a]).Gradient(x));
    }
    if (rn <= 1e-14) return x;
    // min-norm step: x -= G^T (G G^T)^+ r
    SymMatrix ggt(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) ggt.Set(a, b, Dot(grads[a], grads[b]));
    }
    const Vector y = SolveMinNorm(ggt, r).x;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t i = 0; i < n; ++i) x[i] -= grads[a][i] * y[a];
    }
  }
  for (std::size_t j : idx) {
    if (std::abs(p.constraint(j)(x)) > 1e-12) return std::nullopt;
  }
  return x;
}

inline double GradientBound(const Problem& p, double radius) {
  return SpectralNorm(p.objective().A) * radius + Norm2(p.objective().b);
}

}  // namespace oracle_detail

// Exact optimum of q0 over feasible points of the lattice {0,1}^n or {-1,1}^n.
inline OracleResult EnumerateDiscrete(const Problem& p, Alphabet alphabet, Sense sense,
                                      const Tolerances& tol = {}, unsigned workers = 0) {
  const std::size_t n = p.n();
  if (n > 24) {
    throw Error(ErrorCode::kTooLarge, "enumerate_discrete: n = " + std::to_string(n) + " > 24");
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  const double sign = sense == Sense::kMin ? 1.0 : -1.0;
  const double zero = alphabet == Alphabet::kZeroOne ? 0.0 : -1.0;
  if (workers == 0) {
    workers = total >= (1u << 14) ? std::max(1u, std::min(8u, std::thread::hardware_concurrency())) : 1u;
  }
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, total));
  std::vector<oracle_detail::Tracker> shards(workers, oracle_detail::Tracker(sign));
  auto run = [&](unsigned w) {
    const std::uint64_t begin = total * w / workers;
    const std::uint64_t end = total * (w + 1) / workers;
    Vector x(n);
    for (std::uint64_t code = begin; code < end; ++code) {
      for (std::size_t i = 0; i < n; ++i) x[i] = (code >> i) & 1u ? 1.0 : zero;
      if (!oracle_detail::PointFeasible(p, x, tol)) continue;
      shards[w].Offer(p.objective()(x), x);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  oracle_detail::Tracker merged(sign);
  for (const auto& s : shards) merged.Merge(s);
  if (!merged.any()) throw Error(ErrorCode::kEmptyFeasible, "no feasible lattice point");
  OracleResult out;
  out.mode = alphabet == Alphabet::kZeroOne ? OracleMode::kEnumerate01 : OracleMode::kEnumeratePM1;
  out.points_evaluated = total;
  out.slack = 0.0;
  merged.Fill(out);
  return out;
}

// Approximate optimum by sampling: a grid on a recognized box, an arc
// parametrization of a circle in R^2, or seeded rejection sampling.
inline OracleResult SampleContinuous(const Problem& p, OracleMode mode, int resolution,
                                     Sense sense, std::uint64_t seed = 0,
                                     const Tolerances& tol = {}) {
  using namespace oracle_detail;
  if (resolution < 2) throw Error(ErrorCode::kSchema, "resolution must be at least 2");
  const std::size_t n = p.n();
  const double sign = sense == Sense::kMin ? 1.0 : -1.0;
  Tracker tracker(sign);
  OracleResult out;
  out.mode = mode;
  std::vector<std::size_t> equalities(p.equalities().begin(), p.equalities().end());

  if (mode == OracleMode::kGridBox) {
    auto box = RecognizeBox(p);
    if (!box) {
      throw Error(ErrorCode::kUnrecognizedStructure,
                  "GridBox: feasible set is not bounded by single-coordinate constraints");
    }
    std::vector<Vector> axes(n);
    double mesh2 = 0.0;
    double radius2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (box->fixed[i]) {
        axes[i] = *box->fixed[i];
      } else {
        const double h = (box->hi[i] - box->lo[i]) / (resolution - 1);
        for (int k = 0; k < resolution; ++k) {
          axes[i].push_back(k + 1 == resolution ? box->hi[i] : box->lo[i] + k * h);
        }
        mesh2 += 0.25 * h * h;
      }
      if (axes[i].empty()) throw Error(ErrorCode::kEmptyFeasible, "GridBox: empty coordinate set");
      radius2 += std::pow(std::max(std::abs(box->lo[i]), std::abs(box->hi[i])), 2);
    }
    double count = 1.0;
    for (const auto& a : axes) count *= static_cast<double>(a.size());
    if (count > 5e7) throw Error(ErrorCode::kTooLarge, "GridBox: grid exceeds 5e7 points");
    std::vector<std::size_t> idx(n, 0);
    Vector x(n);
    for (bool done = false; !done;) {
      for (std::size_t i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
      ++out.points_evaluated;
      if (PointFeasible(p, x, tol)) tracker.Offer(p.objective()(x), x);
      done = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (++idx[i] < axes[i].size()) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
    }
    out.slack = GradientBound(p, std::sqrt(radius2)) * std::sqrt(mesh2);
  } else if (mode == OracleMode::kCircleParam) {
    if (n != 2) throw Error(ErrorCode::kUnrecognizedStructure, "CircleParam requires n = 2");
    std::optional<std::size_t> circle;
    for (std::size_t j = 0; j < p.m() && !circle; ++j) {
      const QuadForm& q = p.constraint(j);
      const double a = q.A(0, 0);
      if (!(a > 0.0) || q.A(1, 1) != a || q.A(0, 1) != 0.0) continue;
      if (p.IsEquality(j)) {
        circle = j;
        continue;
      }
      for (std::size_t k = 0; k < p.m(); ++k) {
        const QuadForm& r = p.constraint(k);
        if (k == j || p.IsEquality(k)) continue;
        if (r.A == q.A * -1.0 && r.b == Scaled(q.b, -1.0) && r.c == -q.c) circle = j;
      }
    }
    if (!circle) {
      throw Error(ErrorCode::kUnrecognizedStructure,
                  "CircleParam: no sphere constraint q_j = 0 with A_j = aI");
    }
    const QuadForm& q = p.constraint(*circle);
    const double a = q.A(0, 0);
    const Vector center = Scaled(q.b, 1.0 / a);
    const double rho2 = Dot(center, center) - 2.0 * q.c / a;
    if (rho2 < 0.0) throw Error(ErrorCode::kEmptyFeasible, "CircleParam: empty circle");
    const double rho = std::sqrt(rho2);
    for (int k = 1; k <= resolution; ++k) {
      const double t = -std::numbers::pi + 2.0 * std::numbers::pi * k / resolution;
      Vector x{center[0] + rho * std::cos(t), center[1] + rho * std::sin(t)};
      ++out.points_evaluated;
      if (PointFeasible(p, x, tol)) tracker.Offer(p.objective()(x), x);
    }
    const double radius = Norm2(center) + rho;
    out.slack = GradientBound(p, radius) * rho * std::numbers::pi / resolution;
  } else if (mode == OracleMode::kRandomFeasible) {
    auto bounds = BoundingBox(p, tol);
    if (!bounds) {
      throw Error(ErrorCode::kUnrecognizedStructure,
                  "RandomFeasible: no bounded constraint region recognized");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> dist;
    for (std::size_t i = 0; i < n; ++i) dist.emplace_back(bounds->first[i], bounds->second[i]);
    int accepted = 0;
    int rejections = 0;
    const int wanted = resolution;
    Vector x(n);
    while (accepted < wanted) {
      for (std::size_t i = 0; i < n; ++i) x[i] = dist[i](rng);
      ++out.points_evaluated;
      auto y = ProjectOnto(p, equalities, x);
      if (y && PointFeasible(p, *y, tol)) {
        tracker.Offer(p.objective()(*y), *y);
        ++accepted;
      } else if (++rejections >= 1000000) {
        throw Error(ErrorCode::kEmptyFeasible, "RandomFeasible: 1e6 rejections");
      }
    }
  } else {
    throw Error(ErrorCode::kSchema, "sample_continuous: enumeration modes are not sampling modes");
  }
  if (!tracker.any()) throw Error(ErrorCode::kEmptyFeasible, "no feasible sample");
  tracker.Fill(out);
  return out;
}

enum class LocalVerdict { kIsLocalMin, kIsLocalMax, kNeither };

inline std::string_view ToString(LocalVerdict v) {
  switch (v) {
    case LocalVerdict::kIsLocalMin: return "IsLocalMin";
    case LocalVerdict::kIsLocalMax: return "IsLocalMax";
    case LocalVerdict::kNeither: return "Neither";
  }
  return "Unknown";
}

// Samples feasible points near x: random ball points projected onto the
// equality constraints and a random subset of the inequalities active at x.
inline LocalVerdict LocalPerturbationTest(const Problem& p, std::span<const double> x,
                                          double radius, int trials, std::uint64_t seed,
                                          const Tolerances& tol = {}) {
  if (!CheckFeasible(p, x, tol).feasible) {
    throw Error(ErrorCode::kPreconditionFailed, "local_perturbation_test: x is not feasible");
  }
  const std::size_t n = p.n();
  std::vector<std::size_t> eq(p.equalities().begin(), p.equalities().end());
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p.m(); ++j) {
    if (!p.IsEquality(j) && std::abs(p.constraint(j)(x)) <= tol.feasibility) {
      active.push_back(j);
    }
  }
  const double f0 = p.objective()(x);
  constexpr double kMargin = 1e-10;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  bool better = false;
  bool worse = false;
  int neighbors = 0;
  const Vector x0(x.begin(), x.end());
  for (int t = 0; t < trials; ++t) {
    Vector d(n);
    for (double& e : d) e = normal(rng);
    const double scale = radius * std::pow(unit(rng), 1.0 / n) / std::max(Norm2(d), 1e-300);
    Vector y = Add(x0, Scaled(d, scale));
    std::vector<std::size_t> onto = eq;
    for (std::size_t j : active) {
      if (unit(rng) < 0.5) onto.push_back(j);
    }
    auto z = oracle_detail::ProjectOnto(p, onto, y);
    if (!z) continue;
    const double dist = Norm2(Subtract(*z, x0));
    if (dist > radius || dist <= 1e-12 * (1.0 + Norm2(x0))) continue;
    if (!CheckFeasible(p, *z, tol).feasible) continue;
    ++neighbors;
    const double f = p.objective()(*z);
    if (f < f0 - kMargin) better = true;
    if (f > f0 + kMargin) worse = true;
  }
  if (neighbors == 0) {
    throw Error(ErrorCode::kNoFeasibleNeighbors, "no feasible point found within the radius");
  }
  if (better && worse) return LocalVerdict::kNeither;
  if (better) return LocalVerdict::kIsLocalMax;
  return LocalVerdict::kIsLocalMin;
}

}  // namespace qdual
