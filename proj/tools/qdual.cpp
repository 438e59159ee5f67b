// qdual: JSON-in / JSON-out front end.
//
//   qdual eval     FILE --lambda l1,...,lm
//   qdual solve    FILE [--sense min|max] [--start ...] [--tol T] [--max-iter N]
//   qdual certify  FILE --x ... --lambda ... [--sense min|max]
//   qdual oracle   FILE --mode MODE [--sense min|max] [--seed S] [--resolution R]
//   qdual repro    [--case ID]
//
// FILE is a problem path, or a corpus file name with or without ".json", or
// a unique prefix of one ("ex3"). Exit codes: 0 success, 1 not certified,
// 2 input error, 3 dual undefined, 4 no start multiplier, 5 repro failure.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdual/qdual.hpp"
#include "qdual/report_json.hpp"

namespace fs = std::filesystem;
using qdual::Error;
using qdual::ErrorCode;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotCertified = 1;
constexpr int kExitInput = 2;
constexpr int kExitDualUndefined = 3;
constexpr int kExitInitNotFound = 4;
constexpr int kExitReproFailed = 5;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDualUndefined:
    case ErrorCode::kGradientUndefined:
    case ErrorCode::kNotInY0:
      return kExitDualUndefined;
    case ErrorCode::kInitNotFound:
      return kExitInitNotFound;
    case ErrorCode::kInternal:
      return kExitNotCertified;
    default:
      return kExitInput;
  }
}

void Print(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

qdual::Vector ParseVector(const std::string& text, const std::string& flag) {
  qdual::Vector out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kSchema, flag + ": '" + item + "' is not a number");
    }
  }
  return out;
}

qdual::Sense ParseSense(const std::string& s) {
  if (s == "min") return qdual::Sense::kMin;
  if (s == "max") return qdual::Sense::kMax;
  throw Error(ErrorCode::kSchema, "--sense must be min or max");
}

std::string ResolveProblemPath(const std::string& arg, const std::string& corpus) {
  if (fs::exists(arg)) return arg;
  const fs::path dir(corpus);
  for (const fs::path& p : {dir / arg, dir / (arg + ".json")}) {
    if (fs::exists(p)) return p.string();
  }
  std::vector<std::string> matches;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name != "manifest.json" && name.rfind(arg + "_", 0) == 0) matches.push_back(e.path().string());
    }
  }
  std::sort(matches.begin(), matches.end());
  if (matches.size() == 1) return matches.front();
  if (matches.empty()) throw Error(ErrorCode::kSchema, "no problem file '" + arg + "'");
  std::string list;
  for (const auto& m : matches) list += " " + fs::path(m).filename().string();
  throw Error(ErrorCode::kSchema, "'" + arg + "' is ambiguous:" + list);
}

void CheckLength(const qdual::Vector& v, std::size_t want, const std::string& flag) {
  if (v.size() != want) {
    throw Error(ErrorCode::kSchema, flag + " needs " + std::to_string(want) + " entries, got " +
                                        std::to_string(v.size()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian duality for quadratically constrained quadratic programs"};
  app.require_subcommand(1);
  std::string corpus = qdual::DefaultCorpusDir();
  app.add_option("--corpus", corpus, "corpus directory");

  std::string file, lambda_text, x_text, start_text, sense_text = "min", mode_text, case_id;
  double tol_grad = 1e-10;
  int max_iter = 200;
  int resolution = 0;
  std::uint64_t seed = 0;

  auto* eval = app.add_subcommand("eval", "evaluate D, its derivatives and memberships at lambda");
  eval->add_option("file", file)->required();
  eval->add_option("--lambda", lambda_text)->required();

  auto* solve = app.add_subcommand("solve", "optimize the dual and certify x(lambda)");
  solve->add_option("file", file)->required();
  solve->add_option("--sense", sense_text);
  solve->add_option("--start", start_text);
  solve->add_option("--tol", tol_grad);
  solve->add_option("--max-iter", max_iter);

  auto* certify = app.add_subcommand("certify", "grade a candidate pair (x, lambda)");
  certify->add_option("file", file)->required();
  certify->add_option("--x", x_text)->required();
  certify->add_option("--lambda", lambda_text)->required();
  certify->add_option("--sense", sense_text);

  auto* oracle = app.add_subcommand("oracle", "brute-force optimum by enumeration or sampling");
  oracle->add_option("file", file)->required();
  oracle->add_option("--mode", mode_text)->required();
  oracle->add_option("--sense", sense_text);
  oracle->add_option("--seed", seed);
  oracle->add_option("--resolution", resolution);

  auto* repro = app.add_subcommand("repro", "replay the corpus of worked examples");
  repro->add_option("--case", case_id);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    Print(qdual::ErrorEnvelope("", ErrorCode::kSchema, e.what()));
    return kExitInput;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const qdual::Tolerances tol = qdual::Tolerances::FromEnvironment();

    if (command == "repro") {
      std::vector<qdual::CaseReport> reports;
      if (case_id.empty()) {
        reports = qdual::RunAllCases(corpus, tol);
      } else {
        reports.push_back(qdual::RunCase(case_id, corpus, tol));
      }
      nlohmann::json cases = nlohmann::json::array();
      bool passed = true;
      for (const auto& r : reports) {
        cases.push_back(qdual::CaseReportJson(r));
        passed &= r.passed;
      }
      Print(qdual::Envelope(command, {{"passed", passed}, {"cases", cases}}));
      return passed ? kExitOk : kExitReproFailed;
    }

    const qdual::Problem p = qdual::LoadProblemFile(ResolveProblemPath(file, corpus));

    if (command == "eval") {
      const qdual::Vector lambda = ParseVector(lambda_text, "--lambda");
      CheckLength(lambda, p.m(), "--lambda");
      qdual::DualEval ev = qdual::EvalDual(p, lambda, tol);
      if (!ev.value) {
        throw Error(ErrorCode::kDualUndefined, "λ ∉ Y_col: b(λ) is not in the range of A(λ)");
      }
      std::vector<std::string> diags;
      if (!ev.gradient) diags.push_back("gradient omitted: λ ∉ Y0");
      Print(qdual::Envelope(command, qdual::DualEvalJson(lambda, ev), diags));
      return kExitOk;
    }

    if (command == "solve") {
      qdual::SolveConfig cfg;
      cfg.tol_grad = tol_grad;
      cfg.max_iter = max_iter;
      cfg.sense = ParseSense(sense_text);
      cfg.tol = tol;
      if (!start_text.empty()) {
        cfg.start = ParseVector(start_text, "--start");
        CheckLength(*cfg.start, p.m(), "--start");
      }
      qdual::SolveResult r = qdual::SolveDual(p, cfg);
      Print(qdual::Envelope(command, qdual::SolveResultJson(r), r.diagnostics));
      if (r.status == qdual::SolveStatus::kInitNotFound) return kExitInitNotFound;
      const bool done = r.status == qdual::SolveStatus::kConverged ||
                        r.status == qdual::SolveStatus::kBoundary;
      return done && r.certificate.grade != qdual::Grade::kNone ? kExitOk : kExitNotCertified;
    }

    if (command == "certify") {
      const qdual::Vector x = ParseVector(x_text, "--x");
      const qdual::Vector lambda = ParseVector(lambda_text, "--lambda");
      CheckLength(x, p.n(), "--x");
      CheckLength(lambda, p.m(), "--lambda");
      qdual::Certificate c = qdual::Certify(p, x, lambda, ParseSense(sense_text), tol);
      Print(qdual::Envelope(command, qdual::CertificateJson(c), c.diagnostics));
      return kExitOk;
    }

    if (command == "oracle") {
      auto mode = qdual::OracleModeFromString(mode_text);
      if (!mode) throw Error(ErrorCode::kSchema, "unknown --mode '" + mode_text + "'");
      const qdual::Sense sense = ParseSense(sense_text);
      qdual::OracleResult r;
      if (*mode == qdual::OracleMode::kEnumerate01 || *mode == qdual::OracleMode::kEnumeratePM1) {
        r = qdual::EnumerateDiscrete(p,
                                     *mode == qdual::OracleMode::kEnumerate01
                                         ? qdual::Alphabet::kZeroOne
                                         : qdual::Alphabet::kPlusMinusOne,
                                     sense, tol);
      } else {
        int res = resolution;
        if (res == 0) {
          res = *mode == qdual::OracleMode::kGridBox       ? 1001
                : *mode == qdual::OracleMode::kCircleParam ? 3600
                                                           : 10000;
        }
        r = qdual::SampleContinuous(p, *mode, res, sense, seed, tol);
      }
      Print(qdual::Envelope(command, qdual::OracleResultJson(r)));
      return kExitOk;
    }
  } catch (const Error& e) {
    Print(qdual::ErrorEnvelope(command, e.code(), e.what()));
    return ExitCodeFor(e.code());
  } catch (const nlohmann::json::exception& e) {
    Print(qdual::ErrorEnvelope(command, ErrorCode::kSchema, e.what()));
    return kExitInput;
  }
  return kExitInput;
}
