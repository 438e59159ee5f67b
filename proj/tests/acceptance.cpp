// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace qdual {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  int failures = 0;
  std::string first_failure;

  void Fail(const std::string& what) {
    pass = false;
    if (failures++ == 0) first_failure = what;
  }
};

std::string Str(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// Boolean instance: q_j = x_j^2 - x_j = 0 for every j.
Problem BooleanProblem(QuadForm q0) {
  const std::size_t n = q0.dim();
  std::vector<QuadForm> cons;
  IndexSet all;
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    cons.emplace_back(SymMatrix::Outer(e) * 2.0, e, 0.0);
    all.insert(j);
  }
  return Problem(std::move(q0), cons, all);
}

// A Boolean instance whose minimizer z is planted with a multiplier in Y+.
Problem PlantedBoolean(std::mt19937_64& rng, std::size_t n) {
  Vector z(n);
  for (double& v : z) v = static_cast<double>(rng() % 2);
  Vector lambda = test::RandomVector(rng, n, 2.0);
  SymMatrix a0 = test::RandomSym(rng, n);
  SymMatrix agg = a0;
  for (std::size_t j = 0; j < n; ++j) agg.Set(j, j, agg(j, j) + 2.0 * lambda[j]);
  const double shift = test::Uniform(rng, 0.2, 1.0) - test::Eigenvalues(test::ToEigen(agg)).minCoeff();
  a0.AddScaled(SymMatrix::Identity(n), shift);
  agg.AddScaled(SymMatrix::Identity(n), shift);
  // b(lambda) = b0 + sum lambda_j e_j must equal A(lambda) z.
  Vector b0 = Subtract(agg.Apply(z), lambda);
  return BooleanProblem(QuadForm(a0, b0, 0.0));
}

// Criterion 1: the corpus reproduces, fast.
Outcome CorpusReproduction() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CaseReport> reports = RunAllCases();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int checks = 0;
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      ++checks;
      if (!c.passed) o.Fail(r.id + "/" + c.name + ": " + c.detail);
    }
  }
  if (reports.size() != 5) o.Fail("expected 5 cases, got " + std::to_string(reports.size()));
  if (secs >= 10.0) o.Fail("runtime " + Str(secs) + " s");
  o.detail = std::to_string(reports.size()) + " cases, " + std::to_string(checks) + " checks, " +
             Str(secs) + " s";
  return o;
}

// Criterion 2: gradient and Hessian against finite differences of an
// independent (LU-based) dual evaluation, and the Hessian sign on Y+ / Y-.
Outcome DerivativeCorrectness() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst_g = 0.0;
  double worst_h = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 5;
    Problem p = test::RandomProblem(rng, n, m);
    Vector l;
    for (int tries = 0; tries < 100; ++tries) {
      l = test::RandomVector(rng, m, 2.0);
      if (test::DistanceToSingular(p, l) >= 0.3) break;
      l.clear();
    }
    if (l.empty()) l = test::ShiftIntoDefinite(p, test::RandomVector(rng, m, 2.0), +1.0, 0.3);
    const DualEval ev = EvalDual(p, l);
    if (!ev.gradient) {
      o.Fail("instance " + std::to_string(inst) + ": lambda not in Y0");
      continue;
    }
    auto d = [&](const Vector& v) { return test::ReferenceDual(p, v); };
    const double hg = 1e-5;
    const double hh = 1e-4;
    double gscale = 1.0;
    double hscale = 1.0;
    Vector fd_g(m);
    std::vector<Vector> fd_h(m, Vector(m));
    for (std::size_t j = 0; j < m; ++j) {
      Vector lp = l, lm = l;
      lp[j] += hg;
      lm[j] -= hg;
      fd_g[j] = (d(lp) - d(lm)) / (2 * hg);
      gscale = std::max(gscale, std::abs(fd_g[j]));
      for (std::size_t k = 0; k < m; ++k) {
        Vector pp = l, pm = l, mp = l, mm = l;
        pp[j] += hh, pp[k] += hh;
        pm[j] += hh, pm[k] -= hh;
        mp[j] -= hh, mp[k] += hh;
        mm[j] -= hh, mm[k] -= hh;
        fd_h[j][k] = (d(pp) - d(pm) - d(mp) + d(mm)) / (4 * hh * hh);
        hscale = std::max(hscale, std::abs(fd_h[j][k]));
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double eg = std::abs((*ev.gradient)[j] - fd_g[j]) / gscale;
      worst_g = std::max(worst_g, eg);
      if (eg > 1e-5) o.Fail("gradient mismatch on instance " + std::to_string(inst));
      for (std::size_t k = 0; k < m; ++k) {
        const double eh = std::abs((*ev.hessian)(j, k) - fd_h[j][k]) / hscale;
        worst_h = std::max(worst_h, eh);
        if (eh > 1e-5) o.Fail("Hessian mismatch on instance " + std::to_string(inst));
      }
    }
  }
  int plus = 0;
  int minus = 0;
  for (int s = 0; s < 100; ++s) {
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 5;
    Problem p = test::RandomProblem(rng, n, m);
    const Vector base = test::RandomVector(rng, m, 2.0);
    for (double sign : {+1.0, -1.0}) {
      const Vector l = test::ShiftIntoDefinite(p, base, sign, 1e-3);
      const DualEval ev = EvalDual(p, l);
      const EigenDecomposition h = EigSym(*ev.hessian);
      const double tau = 1e-9 * std::max(1.0, h.Norm());
      if (sign > 0) {
        ++plus;
        if (!ev.membership.in_Yplus) o.Fail("sample not in Y+");
        if (h.MaxEigenvalue() > tau) o.Fail("Hessian not NSD on Y+ sample " + std::to_string(s));
      } else {
        ++minus;
        if (!ev.membership.in_Yminus) o.Fail("sample not in Y-");
        if (h.MinEigenvalue() < -tau) o.Fail("Hessian not PSD on Y- sample " + std::to_string(s));
      }
    }
  }
  o.detail = "200 instances, worst rel. error grad " + Str(worst_g) + ", Hessian " +
             Str(worst_h) + "; sign checked on " + std::to_string(plus) + " Y+ and " +
             std::to_string(minus) + " Y- samples";
  return o;
}

struct SolveLog {
  std::vector<std::vector<double>> trajectories;
  // (problem, x, lambda) triples with the J-LKKT property
  std::vector<std::tuple<Problem, Vector, Multiplier>> lkkt_points;

  void Record(const Problem& p, const SolveResult& r) {
    if (r.status == SolveStatus::kInitNotFound) return;
    trajectories.push_back(r.trajectory);
    if (r.certificate.report.holds) lkkt_points.emplace_back(p, r.x, r.lambda);
  }
};

// Criterion 3: Boolean instances against exhaustive enumeration.
Outcome OracleEquivalence(SolveLog& log) {
  Outcome o;
  std::mt19937_64 rng(77);
  int unique = 0;
  int other_claims = 0;
  int no_claim = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 2 + rng() % 9;
    Problem p = inst % 2 == 0 ? PlantedBoolean(rng, n) : BooleanProblem(test::RandomQuadForm(rng, n));
    SolveResult r = MaximizeDual(p, SolveConfig{});
    log.Record(p, r);
    const OracleResult e = EnumerateDiscrete(p, Alphabet::kZeroOne, Sense::kMin);
    const std::string tag = "instance " + std::to_string(inst) + " (n=" + std::to_string(n) + ")";
    const bool finished = r.status == SolveStatus::kConverged || r.status == SolveStatus::kBoundary;
    if (!finished && IsOptimalityClaim(r.certificate.grade)) {
      o.Fail(tag + ": claim without convergence");
    }
    if (r.certificate.grade == Grade::kUniqueGlobalMin) {
      ++unique;
      Vector rounded = r.x;
      for (double& v : rounded) v = std::round(v);
      if (e.argmins.size() != 1 || rounded != e.argmins.front() ||
          NormInf(Subtract(r.x, rounded)) > 1e-6) {
        o.Fail(tag + ": certified minimizer differs from enumeration");
      }
      if (std::abs(p.objective()(r.x) - e.best_value) > 1e-8) {
        o.Fail(tag + ": value differs from enumeration");
      }
    } else if (IsOptimalityClaim(r.certificate.grade)) {
      ++other_claims;
      if (std::abs(p.objective()(r.x) - e.best_value) > 1e-8) o.Fail(tag + ": unsound claim");
    } else {
      ++no_claim;
    }
    if (inst % 2 == 0 && r.certificate.grade != Grade::kUniqueGlobalMin) {
      o.Fail(tag + ": planted instance not certified");
    }
  }
  o.detail = std::to_string(unique) + " UniqueGlobalMin matched enumeration exactly, " +
             std::to_string(other_claims) + " other claims, " + std::to_string(no_claim) +
             " without claim";
  if (unique == 0) o.Fail("no certified instance");
  return o;
}

// Runs the solver on random and planted instances and on the corpus solver
// runs, recording trajectories and J-LKKT points.
void CollectSolverRuns(SolveLog& log) {
  std::mt19937_64 rng(99);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 4;
    IndexSet j;
    if (rng() % 2) j.insert(0);
    Problem p = inst % 2 ? test::RandomProblem(rng, n, m, j)
                         : test::PlantedProblem(rng, n, m, j, true).problem;
    log.Record(p, MaximizeDual(p, SolveConfig{}));
  }
  for (const auto& c : LoadCorpus()) {
    for (const auto& run : c.solver_runs) {
      if (run.sense != Sense::kMin) continue;
      SolveConfig cfg;
      cfg.start = run.start;
      log.Record(c.problem(run.problem), MaximizeDual(c.problem(run.problem), cfg));
    }
  }
}

// Criterion 4: perfect duality at every J-LKKT point produced or replayed.
Outcome PerfectDuality(const SolveLog& log) {
  Outcome o;
  double worst = 0.0;
  int count = 0;
  auto check = [&](const Problem& p, const Vector& x, const Multiplier& l, const std::string& tag) {
    ++count;
    const double defect = test::PerfectDualityDefect(p, x, l);
    worst = std::max(worst, defect);
    if (defect > 1e-8) o.Fail(tag + ": defect " + Str(defect));
  };
  for (const auto& [p, x, l] : log.lkkt_points) check(p, x, l, "solver point");
  int replayed = 0;
  for (const auto& c : LoadCorpus()) {
    for (const auto& kp : c.known_points) {
      const Problem& p = c.problem(kp.problem);
      const bool holds = kp.sense == Sense::kMin ? CheckLkktL(p, kp.x, kp.lambda).holds
                                                 : CheckMaxVariant(p, kp.x, kp.lambda).holds;
      if (!holds) continue;
      ++replayed;
      check(p, kp.x, kp.lambda, c.id + " known point");
    }
  }
  std::mt19937_64 rng(5);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t m = 1 + rng() % 4;
    IndexSet j;
    for (std::size_t k = 0; k < m; ++k) {
      if (rng() % 2) j.insert(k);
    }
    test::Planted pl = test::PlantedProblem(rng, 1 + rng() % 5, m, j, inst % 2 == 0);
    check(pl.problem, pl.x, pl.lambda, "planted point " + std::to_string(inst));
  }
  o.detail = std::to_string(count) + " points (" + std::to_string(replayed) +
             " corpus replays), worst relative defect " + Str(worst);
  return o;
}

// Criterion 5: range additivity and convexity of Y_col+.
Outcome RangeAndConvexity() {
  Outcome o;
  std::mt19937_64 rng(55);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng() % 5;
    SymMatrix a = test::RandomPsd(rng, n, 1 + rng() % n);
    SymMatrix b = test::RandomPsd(rng, n, 1 + rng() % n);
    if (rng() % 5 == 0) b = SymMatrix(n);
    const SymMatrix sum = a + b;
    const Vector v = test::RandomVector(rng, n);
    if (!InRange(sum, Add(a.Apply(v), b.Apply(v)))) o.Fail("Av + Bv not in Range(A + B), pair " + std::to_string(t));
    const Vector u = sum.Apply(test::RandomVector(rng, n));
    const Vector w = SolveMinNorm(sum, u).x;
    const Vector ua = a.Apply(w);
    const Vector ub = b.Apply(w);
    if (!InRange(a, ua) || !InRange(b, ub) ||
        Norm2(Subtract(Add(ua, ub), u)) > 1e-9 * (1.0 + Norm2(u))) {
      o.Fail("decomposition failed, pair " + std::to_string(t));
    }
  }
  int singular = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 4;
    const std::size_t m = 1 + rng() % 3;
    Problem p = test::RandomRangeProblem(rng, n, m);
    const Vector a = test::RandomNonnegative(rng, m);
    const Vector b = test::RandomNonnegative(rng, m);
    if (!ClassifyMembership(p, a).in_Ycol_plus || !ClassifyMembership(p, b).in_Ycol_plus) {
      o.Fail("generated member rejected, pair " + std::to_string(t));
      continue;
    }
    const double s = test::Uniform(rng, 0.0, 1.0);
    const Vector c = Add(Scaled(a, s), Scaled(b, 1.0 - s));
    const SetMembership mc = ClassifyMembership(p, c);
    if (!mc.in_Y0) ++singular;
    if (!mc.in_Ycol_plus) o.Fail("convex combination left Y_col+, pair " + std::to_string(t));
  }
  o.detail = "500 PSD pairs, 200 member pairs (" + std::to_string(singular) +
             " combinations with singular A)";
  return o;
}

// Criterion 6: monotone dual ascent and the envelope inequality.
Outcome AscentAndEnvelope(const SolveLog& log) {
  Outcome o;
  std::size_t steps = 0;
  for (std::size_t r = 0; r < log.trajectories.size(); ++r) {
    const auto& tr = log.trajectories[r];
    for (std::size_t k = 1; k < tr.size(); ++k, ++steps) {
      if (tr[k] < tr[k - 1] - 1e-12 * (1.0 + std::abs(tr[k - 1]))) {
        o.Fail("trajectory " + std::to_string(r) + " decreases at step " + std::to_string(k));
      }
    }
  }
  std::mt19937_64 rng(66);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    Problem p = test::RandomRangeProblem(rng, 2 + rng() % 4, 1 + rng() % 3);
    const Vector l = test::RandomNonnegative(rng, p.m());
    const DualEval ev = EvalDual(p, l);
    if (!ev.membership.in_Ycol_plus) {
      o.Fail("sample " + std::to_string(s) + " not in Y_col+");
      continue;
    }
    for (int k = 0; k < 100; ++k) {
      const Vector x = test::RandomVector(rng, p.n(), 3.0);
      const double gap = EvalL(p, x, l) - *ev.value;
      worst = std::min(worst, gap);
      if (gap < -1e-9) o.Fail("L < D at sample " + std::to_string(s));
    }
  }
  o.detail = std::to_string(log.trajectories.size()) + " trajectories (" +
             std::to_string(steps) + " steps); envelope on 50 x 100 points, min L - D " +
             Str(worst);
  return o;
}

}  // namespace
}  // namespace qdual

int main() {
  using namespace qdual;
  SolveLog log;
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"corpus reproduction", [] { return CorpusReproduction(); }},
      {"dual gradient and Hessian", [] { return DerivativeCorrectness(); }},
      {"oracle equivalence on Boolean instances", [&] { return OracleEquivalence(log); }},
      {"perfect duality at J-LKKT points",
       [&] {
         CollectSolverRuns(log);
         return PerfectDuality(log);
       }},
      {"range additivity and Y_col+ convexity", [] { return RangeAndConvexity(); }},
      {"monotone ascent and envelope", [&] { return AscentAndEnvelope(log); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.Fail(std::string("exception: ") + e.what());
    }
    std::printf("%s AC%zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    if (!o.pass) {
      ++failed;
      std::printf("     %d failure(s); first: %s\n", o.failures, o.first_failure.c_str());
    }
  }
  return failed == 0 ? 0 : 1;
}
