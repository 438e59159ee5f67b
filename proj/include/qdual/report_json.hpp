#pragma once

// JSON views of evaluation, certificate, solver, oracle and corpus results as
// printed by the command-line tool.

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdual/corpus.hpp"
#include "qdual/dual_solver.hpp"
#include "qdual/kkt_certify.hpp"
#include "qdual/lagrangian_dual.hpp"
#include "qdual/oracle.hpp"

namespace qdual {

inline constexpr const char* kSchemaVersion = "1.0";

inline nlohmann::json NumberJson(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json VectorJson(std::span<const double> v) {
  nlohmann::json out = nlohmann::json::array();
  for (double e : v) out.push_back(NumberJson(e));
  return out;
}

inline nlohmann::json MatrixJson(const SymMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) out.push_back(VectorJson(m.Row(i)));
  return out;
}

inline nlohmann::json MembershipJson(const SetMembership& s) {
  return {{"Y0", s.in_Y0},
          {"Yplus", s.in_Yplus},
          {"Yminus", s.in_Yminus},
          {"Ycol", s.in_Ycol},
          {"Ycol_plus", s.in_Ycol_plus},
          {"Ycol_minus", s.in_Ycol_minus},
          {"Gamma_J", s.in_Gamma_J},
          {"YJ_plus", s.in_YJplus},
          {"YJ_minus", s.in_YJminus},
          {"Ycol_J_plus", s.in_Ycol_Jplus},
          {"Ycol_J_minus", s.in_Ycol_Jminus}};
}

inline nlohmann::json DefinitenessJson(const Definiteness& d) {
  return {{"class", std::string(ToString(d.cls))},
          {"min_eig", NumberJson(d.min_eig)},
          {"max_eig", NumberJson(d.max_eig)}};
}

inline nlohmann::json DualEvalJson(std::span<const double> lambda, const DualEval& ev) {
  nlohmann::json out{{"lambda", VectorJson(lambda)},
                     {"x_lambda", VectorJson(ev.x_lambda)},
                     {"x_residual", NumberJson(ev.x_residual)},
                     {"definiteness", DefinitenessJson(ev.definiteness)},
                     {"membership", MembershipJson(ev.membership)}};
  out["value"] = ev.value ? NumberJson(*ev.value) : nlohmann::json(nullptr);
  if (ev.gradient) {
    out["gradient"] = VectorJson(*ev.gradient);
  } else {
    out["gradient"] = nullptr;
    out["gradient_omitted"] = "λ ∉ Y0: A(λ) is singular";
  }
  out["hessian"] = ev.hessian ? MatrixJson(*ev.hessian) : nlohmann::json(nullptr);
  return out;
}

inline nlohmann::json LkktJson(const LKKTReport& r) {
  return {{"stationarity_x", NumberJson(r.stationarity_x)},
          {"eq_violation", NumberJson(r.eq_violation)},
          {"ineq_violation", NumberJson(r.ineq_violation)},
          {"sign_violation", NumberJson(r.sign_violation)},
          {"compl_slack", NumberJson(r.compl_slack)},
          {"holds", r.holds}};
}

inline nlohmann::json CertificateJson(const Certificate& c) {
  return {{"grade", std::string(ToString(c.grade))},
          {"justification", c.justification},
          {"objective", NumberJson(c.objective)},
          {"dual_value", c.dual_value ? NumberJson(*c.dual_value) : nlohmann::json(nullptr)},
          {"duality_gap", c.duality_gap ? NumberJson(*c.duality_gap) : nlohmann::json(nullptr)},
          {"lkkt", LkktJson(c.report)},
          {"membership", MembershipJson(c.membership)},
          {"diagnostics", c.diagnostics}};
}

inline nlohmann::json SolveResultJson(const SolveResult& r) {
  nlohmann::json alts = nlohmann::json::array();
  for (const auto& a : r.alternatives) alts.push_back(VectorJson(a));
  return {{"status", std::string(ToString(r.status))},
          {"lambda", VectorJson(r.lambda)},
          {"x", VectorJson(r.x)},
          {"alternatives", alts},
          {"iterations", r.iterations},
          {"projected_gradient_norm", NumberJson(r.projected_gradient_norm)},
          {"dual_value", r.dual_value ? NumberJson(*r.dual_value) : nlohmann::json(nullptr)},
          {"trajectory", VectorJson(r.trajectory)},
          {"certificate", CertificateJson(r.certificate)}};
}

inline nlohmann::json OracleResultJson(const OracleResult& r) {
  nlohmann::json argmins = nlohmann::json::array();
  for (const auto& a : r.argmins) argmins.push_back(VectorJson(a));
  return {{"mode", std::string(ToString(r.mode))},
          {"best_value", NumberJson(r.best_value)},
          {"argmins", argmins},
          {"points_evaluated", r.points_evaluated},
          {"slack", r.slack ? NumberJson(*r.slack) : nlohmann::json(nullptr)}};
}

inline nlohmann::json CaseReportJson(const CaseReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return {{"id", r.id}, {"passed", r.passed}, {"checks", checks}};
}

inline nlohmann::json Envelope(const std::string& command, nlohmann::json payload,
                               std::vector<std::string> diagnostics = {}) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"payload", std::move(payload)},
          {"diagnostics", std::move(diagnostics)}};
}

inline nlohmann::json ErrorEnvelope(const std::string& command, ErrorCode code,
                                    const std::string& message) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"error", {{"code", std::string(ToString(code))}, {"message", message}}},
          {"diagnostics", nlohmann::json::array()}};
}

}  // namespace qdual
