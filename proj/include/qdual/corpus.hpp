#pragma once

// The five worked examples as fixtures. A corpus directory holds JSON problem
// files plus manifest.json listing, per case, the known (x, lambda) points
// with their expected verdicts, oracle checks, solver runs and the claims
// whose refutation the case demonstrates.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qdual/dual_solver.hpp"
#include "qdual/error.hpp"
#include "qdual/kkt_certify.hpp"
#include "qdual/lagrangian_dual.hpp"
#include "qdual/oracle.hpp"
#include "qdual/problem_io.hpp"
#include "qdual/quadratic_model.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

struct KnownPoint {
  std::string problem;
  Vector x;
  Multiplier lambda;
  Sense sense = Sense::kMin;
  bool lkkt = true;
  Grade grade = Grade::kNone;
  double value = 0.0;
};

struct OracleCheck {
  std::string problem;
  OracleMode mode = OracleMode::kGridBox;
  int resolution = 0;
  Sense sense = Sense::kMin;
  std::uint64_t seed = 0;
  double expect_value = 0.0;
  double tol = 0.0;
  std::optional<std::vector<Vector>> expect_argmins;
};

struct SolverRun {
  std::string problem;
  Sense sense = Sense::kMin;
  std::optional<Multiplier> start;
  std::string expect_status;
  Grade expect_grade = Grade::kNone;
  double expect_value = 0.0;
  std::optional<Multiplier> expect_lambda;
  std::optional<Vector> expect_x;
  double tol = 1e-6;
};

struct Claim {
  std::string id;
  std::string description;
};

struct CorpusCase {
  std::string id;
  std::string title;
  std::string notes;
  std::map<std::string, Problem> problems;
  std::vector<KnownPoint> known_points;
  std::vector<OracleCheck> oracle_checks;
  std::vector<SolverRun> solver_runs;
  std::vector<Claim> claims;

  const Problem& problem(const std::string& key) const {
    auto it = problems.find(key);
    if (it == problems.end()) {
      throw Error(ErrorCode::kSchema, "case " + id + " has no problem '" + key + "'");
    }
    return it->second;
  }
};

struct CaseCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CaseReport {
  std::string id;
  bool passed = true;
  std::vector<CaseCheck> checks;
};

inline std::string DefaultCorpusDir() {
  if (const char* env = std::getenv("QDUAL_CORPUS_DIR")) return env;
#ifdef QDUAL_CORPUS_DIR
  return QDUAL_CORPUS_DIR;
#else
  return "corpus";
#endif
}

namespace corpus_detail {

inline nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSchema, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  }
}

inline Sense ParseSense(const std::string& s) {
  if (s == "min") return Sense::kMin;
  if (s == "max") return Sense::kMax;
  throw Error(ErrorCode::kSchema, "sense must be 'min' or 'max', got '" + s + "'");
}

inline Grade ParseGrade(const std::string& s) {
  auto g = GradeFromString(s);
  if (!g) throw Error(ErrorCode::kSchema, "unknown grade '" + s + "'");
  return *g;
}

inline CorpusCase ParseCase(const nlohmann::json& j, const std::filesystem::path& dir) {
  CorpusCase c;
  c.id = j.at("id").get<std::string>();
  c.title = j.value("title", "");
  c.notes = j.value("notes", "");
  for (const auto& [key, file] : j.at("problems").items()) {
    c.problems.emplace(key, ProblemFromJson(ReadJsonFile(dir / file.get<std::string>())));
  }
  for (const auto& k : j.value("known_points", nlohmann::json::array())) {
    c.known_points.push_back({k.at("problem"), k.at("x").get<Vector>(),
                              k.at("lambda").get<Vector>(), ParseSense(k.at("sense")),
                              k.at("lkkt").get<bool>(), ParseGrade(k.at("grade")),
                              k.at("value").get<double>()});
  }
  for (const auto& o : j.value("oracle_checks", nlohmann::json::array())) {
    OracleCheck oc;
    oc.problem = o.at("problem");
    auto mode = OracleModeFromString(o.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::kSchema, "unknown oracle mode in case " + c.id);
    oc.mode = *mode;
    oc.resolution = o.value("resolution", 0);
    oc.sense = ParseSense(o.at("sense"));
    oc.seed = o.value("seed", std::uint64_t{0});
    oc.expect_value = o.at("expect_value");
    oc.tol = o.at("tol");
    if (o.contains("expect_argmins")) oc.expect_argmins = o["expect_argmins"].get<std::vector<Vector>>();
    c.oracle_checks.push_back(std::move(oc));
  }
  for (const auto& s : j.value("solver_runs", nlohmann::json::array())) {
    SolverRun r;
    r.problem = s.at("problem");
    r.sense = ParseSense(s.at("sense"));
    if (s.contains("start")) r.start = s["start"].get<Vector>();
    r.expect_status = s.at("expect_status");
    r.expect_grade = ParseGrade(s.at("expect_grade"));
    r.expect_value = s.at("expect_value");
    if (s.contains("expect_lambda")) r.expect_lambda = s["expect_lambda"].get<Vector>();
    if (s.contains("expect_x")) r.expect_x = s["expect_x"].get<Vector>();
    r.tol = s.value("tol", 1e-6);
    c.solver_runs.push_back(std::move(r));
  }
  for (const auto& cl : j.value("claims", nlohmann::json::array())) {
    c.claims.push_back({cl.at("id"), cl.value("description", "")});
  }
  return c;
}

inline std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string Fmt(const Vector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + Fmt(v[i]);
  return s + ")";
}

inline bool Near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool Near(const Vector& a, const Vector& b, double tol) {
  return a.size() == b.size() && NormInf(Subtract(a, b)) <= tol;
}

class Checker {
 public:
  explicit Checker(CaseReport& r) : report_(r) {}

  void Expect(std::string name, bool ok, std::string detail = {}) {
    report_.passed &= ok;
    report_.checks.push_back({std::move(name), ok, std::move(detail)});
  }

 private:
  CaseReport& report_;
};

inline SolveConfig Config(const Tolerances& tol, Sense sense = Sense::kMin,
                          std::optional<Multiplier> start = std::nullopt) {
  SolveConfig cfg;
  cfg.tol = tol;
  cfg.sense = sense;
  cfg.start = std::move(start);
  return cfg;
}

// D at lambda or nullopt outside Y_col.
inline std::optional<double> D(const Problem& p, double lambda, const Tolerances& tol) {
  return EvalDual(p, Vector{lambda}, tol).value;
}

using ClaimFn = std::function<void(const CorpusCase&, const Tolerances&, Checker&)>;

inline void DualHasNoCriticalPoints(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("main");
  double worst = INFINITY;
  int samples = 0;
  for (int k = -400; k <= 400; ++k) {
    const double l = k / 40.0 + 1.0 / 7.0;
    DualEval ev = EvalDual(p, Vector{l}, tol);
    if (!ev.gradient) continue;
    ++samples;
    worst = std::min(worst, std::abs((*ev.gradient)[0]));
  }
  ck.Expect("D' stays away from zero on Y0", samples > 700 && Near(worst, 0.5, 1e-12),
            "min |D'| = " + Fmt(worst));
  for (double l : {1.0, -1.0}) {
    DualEval ev = EvalDual(p, Vector{l}, tol);
    ck.Expect("lambda = " + Fmt(l) + " is outside Y0 but in Y_col",
              !ev.membership.in_Y0 && ev.membership.in_Ycol && !ev.gradient &&
                  ev.value && Near(*ev.value, -0.5 * l, 1e-12));
  }
  DualEval two = EvalDual(p, Vector{2.0}, tol);
  ck.Expect("D(2) = -1 with x(2) = 0",
            two.value && Near(*two.value, -1.0, 1e-12) && Near(two.x_lambda, Vector{0, 0}, 1e-15));
}

inline void MinNotUnique(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("main");
  SolveResult r = MaximizeDual(p, Config(tol));
  std::vector<Vector> all{r.x};
  all.insert(all.end(), r.alternatives.begin(), r.alternatives.end());
  std::sort(all.begin(), all.end());
  const double h = std::numbers::sqrt2 / 2.0;
  const bool two = all.size() == 2 && Near(all[0], Vector{-h, h}, 1e-7) &&
                   Near(all[1], Vector{h, -h}, 1e-7);
  ck.Expect("boundary recovery returns both minimizers", two,
            std::to_string(all.size()) + " point(s), first " + Fmt(r.x));
  ck.Expect("certificate is GlobalMin, not unique", r.certificate.grade == Grade::kGlobalMin,
            std::string(ToString(r.certificate.grade)));
}

inline void DualClosedForm(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  for (const char* key : {"eq", "ineq"}) {
    const Problem& p = c.problem(key);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double l = -3.0 + 0.13 * k;
      if (std::abs(l - 1.0) < 1e-6) continue;
      const double closed = 1.0 / (8.0 * (1.0 - l)) - l / 2.0;
      auto d = D(p, l, tol);
      worst = std::max(worst, d ? std::abs(*d - closed) / (1.0 + std::abs(closed)) : INFINITY);
    }
    ck.Expect(std::string(key) + ": D matches 1/(8(1-l)) - l/2", worst <= 1e-10,
              "max rel err " + Fmt(worst));
    Certificate cert = Certify(p, Vector{1.0}, Vector{1.5}, Sense::kMin, tol);
    ck.Expect(std::string(key) + ": D(3/2) = -1 = q0(1), gap < 1e-10",
              cert.dual_value && Near(*cert.dual_value, -1.0, 1e-12) && cert.duality_gap &&
                  *cert.duality_gap < 1e-10);
  }
}

inline void IntervalMaxExceedsDualMin(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& eq = c.problem("eq");
  const Problem& ineq = c.problem("ineq");
  OracleResult interval = SampleContinuous(ineq, OracleMode::kGridBox, 2001, Sense::kMax, 0, tol);
  OracleResult pair = EnumerateDiscrete(eq, Alphabet::kPlusMinusOne, Sense::kMax, tol);
  ck.Expect("max over [-1,1] is 1/8", Near(interval.best_value, 0.125, 1e-12));
  ck.Expect("max over {-1,1} is 0 at -1",
            Near(pair.best_value, 0.0, 1e-15) && pair.argmins == std::vector<Vector>{{-1.0}});
  double dmin = INFINITY;
  double at = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double l = k / 1000.0;
    const double d = *D(eq, l, tol);
    if (d < dmin) {
      dmin = d;
      at = l;
    }
  }
  ck.Expect("min of D on [0,1) is D(1/2) = 0", Near(dmin, 0.0, 1e-12) && Near(at, 0.5, 1e-12),
            "min " + Fmt(dmin) + " at " + Fmt(at));
  bool growing = true;
  double last = -INFINITY;
  for (int k = 1; k <= 6; ++k) {
    auto d = D(eq, 1.0 - std::pow(10.0, -k), tol);
    growing &= d && *d > last;
    last = d ? *d : -INFINITY;
  }
  ck.Expect("D is unbounded above on [0,1)", growing && last > 1e5, "D(1-1e-6) = " + Fmt(last));
}

inline void NegdefKktPointNotLocalMin(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("main");
  const Vector x{1.0, 1.0};
  Certificate cert = Certify(p, x, Vector{0.0, 1.0}, Sense::kMin, tol);
  ck.Expect("(1,1), (0,1) is KKTOnly with A(lambda) negative definite",
            cert.grade == Grade::kKKTOnly &&
                std::find(cert.diagnostics.begin(), cert.diagnostics.end(),
                          "A(λ) negative definite; no global claim") != cert.diagnostics.end());
  for (double u : {0.5, 0.1, 1e-3}) {
    const Vector y{1.0 - u, 1.0};
    ck.Expect("q0(1-u,1) = -u^2/2 < 0 for u = " + Fmt(u),
              CheckFeasible(p, y, tol).feasible && Near(p.objective()(y), -0.5 * u * u, 1e-15));
  }
  LocalVerdict v = LocalPerturbationTest(p, x, 0.1, 4000, 11, tol);
  ck.Expect("perturbation test: Neither", v == LocalVerdict::kNeither, std::string(ToString(v)));
}

inline void FeasibleSetIsFullBox(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("main");
  auto box = oracle_detail::RecognizeBox(p);
  ck.Expect("constraints carve [-1,1]^2",
            box && Near(box->lo, Vector{-1, -1}, 1e-15) && Near(box->hi, Vector{1, 1}, 1e-15));
  ck.Expect("(1,-1) is feasible but outside [0,1]^2", CheckFeasible(p, Vector{1, -1}, tol).feasible);
  OracleResult full = SampleContinuous(p, OracleMode::kGridBox, 201, Sense::kMin, 0, tol);
  double unit_min = INFINITY;
  for (int i = 0; i <= 100; ++i) {
    for (int k = 0; k <= 100; ++k) unit_min = std::min(unit_min, p.objective()(Vector{i / 100.0, k / 100.0}));
  }
  ck.Expect("min over [0,1]^2 differs from the certified -4",
            Near(full.best_value, -4.0, 1e-12) && unit_min > -4.0 + 1.0,
            "[0,1]^2 min " + Fmt(unit_min));
}

inline void DualCriticalSet(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("main");
  std::vector<double> crit = CriticalPoints1D(p, -10.0, 20.0, 6000, tol);
  bool ok = crit.size() == 3;
  for (std::size_t i = 0; ok && i < 3; ++i) ok = Near(crit[i], std::vector<double>{1, 2, 5}[i], 1e-8);
  std::string found;
  for (double t : crit) found += Fmt(t) + " ";
  ck.Expect("critical set of D is {1,2,5} within 1e-8", ok, found);
  double worst = 0.0;
  for (int k = 0; k < 60; ++k) {
    const double l = -4.0 + 0.37 * k;
    DualEval ev = EvalDual(p, Vector{l}, tol);
    if (!ev.gradient) continue;
    const double den = l * l - 5.0 * l + 5.0;
    const double closed = -0.5 * (l - 2) * (l - 2) / (den * den) * (l - 1) * (l - 5);
    worst = std::max(worst, std::abs((*ev.gradient)[0] - closed) / (1e-300 + std::abs(closed) + 1e-12));
  }
  ck.Expect("D' matches its rational closed form", worst <= 1e-9, "max rel err " + Fmt(worst));
}

inline void NegdefCriticalPointIsGlobalMax(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("main");
  DualEval ev = EvalDual(p, Vector{1.0}, tol);
  ck.Expect("A(1) negative definite, x(1) = (1,0)",
            ev.definiteness.cls == DefinitenessClass::kNegDef &&
                Near(ev.x_lambda, Vector{1, 0}, 1e-14));
  OracleResult arc = SampleContinuous(p, OracleMode::kCircleParam, 3600, Sense::kMax, 0, tol);
  ck.Expect("circle sampling: (1,0) is the global max, value 0",
            Near(arc.best_value, 0.0, 1e-15) && arc.argmins.size() == 1 &&
                Near(arc.argmins[0], Vector{1, 0}, 1e-14));
  double worst = -INFINITY;
  for (int k = 1; k < 3600; ++k) {
    const double t = -std::numbers::pi + 2.0 * std::numbers::pi * k / 3600.0;
    if (k == 1800) continue;
    const double bound = (std::sqrt(5.0) - 3.0) * std::pow(std::sin(0.5 * t), 2);
    worst = std::max(worst, p.objective()(Vector{std::cos(t), std::sin(t)}) - bound);
  }
  ck.Expect("q0(cos t, sin t) <= (sqrt5 - 3) sin^2(t/2)", worst <= 1e-14, "max excess " + Fmt(worst));
  LocalVerdict v = LocalPerturbationTest(p, Vector{1, 0}, 0.1, 2000, 5, tol);
  ck.Expect("perturbation test: IsLocalMax, not a local min", v == LocalVerdict::kIsLocalMax,
            std::string(ToString(v)));
}

inline void FormulationsEquivalent(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& eq = c.problem("eq");
  const Problem& ineq = c.problem("ineq");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  bool q0_ok = true, feas_ok = true, lag_ok = true;
  for (int k = 0; k < 20; ++k) {
    Vector x{u(rng), u(rng)};
    if (k % 2 == 0) {
      const double nx = Norm2(x);
      x = Scaled(x, 1.0 / nx);
    }
    q0_ok &= eq.objective()(x) == ineq.objective()(x);
    feas_ok &= CheckFeasible(eq, x, tol).feasible == CheckFeasible(ineq, x, tol).feasible;
    const double l1 = u(rng) + 1.5, l2 = u(rng) + 1.5;
    lag_ok &= Near(EvalL(ineq, x, Vector{l1, l2}), EvalL(eq, x, Vector{l1 - l2}), 1e-13);
  }
  ck.Expect("q0 agrees on 20 random points", q0_ok);
  ck.Expect("feasibility verdicts agree on 20 random points", feas_ok);
  ck.Expect("L^i(x,l1,l2) = L^e(x,l1-l2)", lag_ok);
}

inline void DualOptimumNotUnique(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("ineq");
  SolveResult a = MaximizeDual(p, Config(tol, Sense::kMin, Multiplier{2.0, 0.0}));
  SolveResult b = MaximizeDual(p, Config(tol, Sense::kMin, Multiplier{5.0, 3.0}));
  const double s3 = std::sqrt(3.0);
  const bool both = a.status == SolveStatus::kConverged && b.status == SolveStatus::kConverged;
  ck.Expect("two starts converge", both);
  ck.Expect("both satisfy l1 - l2 = sqrt3 within 1e-6",
            Near(a.lambda[0] - a.lambda[1], s3, 1e-6) && Near(b.lambda[0] - b.lambda[1], s3, 1e-6),
            Fmt(a.lambda) + " " + Fmt(b.lambda));
  ck.Expect("the two dual optima are distinct", NormInf(Subtract(a.lambda, b.lambda)) > 1e-3);
  ck.Expect("equal dual values",
            a.dual_value && b.dual_value && Near(*a.dual_value, *b.dual_value, 1e-10));
}

inline void NonnegNegdefGivesGlobalMax(const CorpusCase& c, const Tolerances& tol, Checker& ck) {
  const Problem& p = c.problem("ineq");
  const double s3 = std::sqrt(3.0);
  const Vector x{-s3 / 2.0, -0.5};
  const Multiplier l{s3, 2.0 * s3};
  DualEval ev = EvalDual(p, l, tol);
  ck.Expect("(sqrt3, 2 sqrt3) is in R+^2 ∩ Y-", ev.membership.in_Gamma_J && ev.membership.in_Yminus);
  ck.Expect("it is critical for D with x(lambda) = (-sqrt3/2,-1/2)",
            ev.gradient && NormInf(*ev.gradient) < 1e-12 && Near(ev.x_lambda, x, 1e-12));
  OracleResult mx = SampleContinuous(p, OracleMode::kCircleParam, 3600, Sense::kMax, 0, tol);
  ck.Expect("x(lambda) is the global maximizer of q0",
            mx.argmins.size() == 1 && Near(mx.argmins[0], x, 1e-12) &&
                Near(mx.best_value, p.objective()(x), 1e-12));
  LocalVerdict v = LocalPerturbationTest(p, x, 0.1, 2000, 9, tol);
  ck.Expect("x(lambda) is not a local minimizer", v == LocalVerdict::kIsLocalMax,
            std::string(ToString(v)));
}

inline const std::map<std::string, ClaimFn>& ClaimRegistry() {
  static const std::map<std::string, ClaimFn> registry{
      {"dual_has_no_critical_points", DualHasNoCriticalPoints},
      {"min_not_unique", MinNotUnique},
      {"dual_closed_form", DualClosedForm},
      {"interval_max_exceeds_dual_min", IntervalMaxExceedsDualMin},
      {"negdef_kkt_point_not_local_min", NegdefKktPointNotLocalMin},
      {"feasible_set_is_full_box", FeasibleSetIsFullBox},
      {"dual_critical_set_1_2_5", DualCriticalSet},
      {"negdef_critical_point_is_global_max", NegdefCriticalPointIsGlobalMax},
      {"formulations_equivalent", FormulationsEquivalent},
      {"dual_optimum_not_unique", DualOptimumNotUnique},
      {"nonneg_negdef_multiplier_gives_global_max", NonnegNegdefGivesGlobalMax},
  };
  return registry;
}

inline OracleResult RunOracle(const Problem& p, const OracleCheck& o, const Tolerances& tol) {
  if (o.mode == OracleMode::kEnumerate01 || o.mode == OracleMode::kEnumeratePM1) {
    return EnumerateDiscrete(p,
                             o.mode == OracleMode::kEnumerate01 ? Alphabet::kZeroOne
                                                                : Alphabet::kPlusMinusOne,
                             o.sense, tol);
  }
  return SampleContinuous(p, o.mode, o.resolution, o.sense, o.seed, tol);
}

}  // namespace corpus_detail

inline std::vector<CorpusCase> LoadCorpus(const std::string& dir = DefaultCorpusDir()) {
  const std::filesystem::path root(dir);
  const nlohmann::json manifest = corpus_detail::ReadJsonFile(root / "manifest.json");
  std::vector<CorpusCase> cases;
  for (const auto& c : manifest.at("cases")) cases.push_back(corpus_detail::ParseCase(c, root));
  std::sort(cases.begin(), cases.end(),
            [](const CorpusCase& a, const CorpusCase& b) { return a.id < b.id; });
  return cases;
}

inline std::vector<std::string> ListCases(const std::string& dir = DefaultCorpusDir()) {
  std::vector<std::string> ids;
  for (const auto& c : LoadCorpus(dir)) ids.push_back(c.id);
  return ids;
}

inline CorpusCase GetCase(const std::string& id, const std::string& dir = DefaultCorpusDir()) {
  for (auto& c : LoadCorpus(dir)) {
    if (c.id == id) return std::move(c);
  }
  throw Error(ErrorCode::kUnknownCase, "unknown case '" + id + "'");
}

inline CaseReport RunCase(const CorpusCase& c, const Tolerances& tol = {}) {
  using namespace corpus_detail;
  CaseReport report{c.id, true, {}};
  Checker ck(report);
  // Certified points, for the oracle cross-check below.
  std::vector<std::pair<const KnownPoint*, Certificate>> certified;

  for (const KnownPoint& k : c.known_points) {
    const std::string name = "known " + k.problem + " x=" + Fmt(k.x) + " lambda=" +
                             Fmt(k.lambda) + " " + std::string(ToString(k.sense));
    try {
      const Problem& p = c.problem(k.problem);
      Certificate cert = Certify(p, k.x, k.lambda, k.sense, tol);
      const bool ok = cert.report.holds == k.lkkt && cert.grade == k.grade &&
                      Near(cert.objective, k.value, tol.kkt);
      ck.Expect(name, ok,
                "lkkt " + std::string(cert.report.holds ? "holds" : "fails") + ", grade " +
                    std::string(ToString(cert.grade)) + ", q0 " + Fmt(cert.objective));
      if (cert.report.holds) {
        const double gap = cert.duality_gap.value_or(INFINITY);
        // Perfect duality at every LKKT point with an optimality claim.
        if (IsOptimalityClaim(cert.grade)) {
          ck.Expect(name + " perfect duality", gap <= 1e-8 * (1.0 + std::abs(cert.objective)),
                    "gap " + Fmt(gap));
          certified.emplace_back(&k, cert);
        }
      }
    } catch (const Error& e) {
      ck.Expect(name, false, e.what());
    }
  }

  for (const OracleCheck& o : c.oracle_checks) {
    const std::string name = "oracle " + o.problem + " " + std::string(ToString(o.mode)) + " " +
                             std::string(ToString(o.sense));
    try {
      const Problem& p = c.problem(o.problem);
      OracleResult r = RunOracle(p, o, tol);
      bool ok = Near(r.best_value, o.expect_value, o.tol);
      if (o.expect_argmins) {
        ok &= r.argmins.size() == o.expect_argmins->size();
        for (std::size_t i = 0; ok && i < r.argmins.size(); ++i) {
          ok &= Near(r.argmins[i], (*o.expect_argmins)[i], 1e-9);
        }
      }
      for (const auto& x : r.argmins) ok &= CheckFeasible(p, x, tol).feasible;
      ck.Expect(name, ok, "best " + Fmt(r.best_value) + " over " +
                              std::to_string(r.argmins.size()) + " argmin(s)");
      // Certificates never beat the oracle.
      for (const auto& [k, cert] : certified) {
        if (k->problem != o.problem || k->sense != o.sense) continue;
        const double s = o.sense == Sense::kMin ? 1.0 : -1.0;
        ck.Expect(name + " vs certified " + Fmt(k->x),
                  s * r.best_value >= s * cert.objective - 1e-6,
                  "oracle " + Fmt(r.best_value) + ", certified " + Fmt(cert.objective));
        const bool unique =
            cert.grade == Grade::kUniqueGlobalMin || cert.grade == Grade::kUniqueGlobalMax;
        if (unique && Near(r.best_value, cert.objective, 1e-6)) {
          bool close = true;
          for (const auto& x : r.argmins) close &= Near(x, k->x, 1e-4);
          ck.Expect(name + " argmins near unique " + Fmt(k->x), close);
        }
      }
    } catch (const Error& e) {
      ck.Expect(name, false, e.what());
    }
  }

  for (const SolverRun& s : c.solver_runs) {
    std::string name = "solve " + s.problem + " " + std::string(ToString(s.sense));
    if (s.start) name += " from " + Fmt(*s.start);
    try {
      const Problem& p = c.problem(s.problem);
      SolveResult r = SolveDual(p, Config(tol, s.sense, s.start));
      bool ok = ToString(r.status) == s.expect_status && r.certificate.grade == s.expect_grade &&
                Near(r.certificate.objective, s.expect_value, s.tol);
      if (s.expect_lambda) ok &= Near(r.lambda, *s.expect_lambda, s.tol);
      if (s.expect_x) ok &= Near(r.x, *s.expect_x, s.tol);
      bool monotone = true;
      const double dir = s.sense == Sense::kMin ? 1.0 : -1.0;
      for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
        monotone &= dir * (r.trajectory[i] - r.trajectory[i - 1]) >=
                    -1e-12 * (1.0 + std::abs(r.trajectory[i - 1]));
      }
      ck.Expect(name, ok && monotone,
                std::string(ToString(r.status)) + ", " + std::string(ToString(r.certificate.grade)) +
                    ", lambda " + Fmt(r.lambda) + ", x " + Fmt(r.x) + ", q0 " +
                    Fmt(r.certificate.objective) + (monotone ? "" : ", trajectory not monotone"));
    } catch (const Error& e) {
      ck.Expect(name, false, e.what());
    }
  }

  const auto& registry = ClaimRegistry();
  for (const Claim& cl : c.claims) {
    auto it = registry.find(cl.id);
    if (it == registry.end()) {
      ck.Expect("claim " + cl.id, false, "no predicate registered");
      continue;
    }
    CaseReport sub{c.id, true, {}};
    Checker sub_ck(sub);
    try {
      it->second(c, tol, sub_ck);
    } catch (const Error& e) {
      sub_ck.Expect("exception", false, e.what());
    }
    for (auto& chk : sub.checks) ck.Expect("claim " + cl.id + ": " + chk.name, chk.passed, chk.detail);
  }
  return report;
}

inline CaseReport RunCase(const std::string& id, const std::string& dir = DefaultCorpusDir(),
                          const Tolerances& tol = {}) {
  return RunCase(GetCase(id, dir), tol);
}

// All cases, run concurrently, reported in id order.
inline std::vector<CaseReport> RunAllCases(const std::string& dir = DefaultCorpusDir(),
                                           const Tolerances& tol = {}) {
  std::vector<CorpusCase> cases = LoadCorpus(dir);
  std::vector<std::future<CaseReport>> futures;
  for (const auto& c : cases) {
    futures.push_back(std::async(std::launch::async, [&c, &tol] { return RunCase(c, tol); }));
  }
  std::vector<CaseReport> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace qdual
