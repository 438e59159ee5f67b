#pragma once

// JSON encoding of problems:
//
//   { "n": int, "m": int,
//     "objective": {"A": [[...], ...], "b": [...], "c": number},
//     "constraints": [ {"A": ..., "b": ..., "c": ...}, ... ],
//     "equality_indices": [1-based ints] }

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdual/error.hpp"
#include "qdual/quadratic_model.hpp"

namespace qdual {

namespace io_detail {

inline double SymmetryBand(const std::vector<Vector>& rows) {
  double scale = 1.0;
  for (const auto& r : rows) {
    for (double v : r) scale = std::max(scale, std::abs(v));
  }
  return 1e-12 * scale;
}

inline double ReadNumber(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::kSchema, where + " must be a number");
  return j.get<double>();
}

inline Vector ReadVector(const nlohmann::json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n) {
    throw Error(ErrorCode::kSchema,
                where + " must be an array of " + std::to_string(n) + " numbers");
  }
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = ReadNumber(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline QuadForm ReadQuadForm(const nlohmann::json& j, std::size_t n, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kSchema, where + " must be an object");
  for (const char* key : {"A", "b", "c"}) {
    if (!j.contains(key)) throw Error(ErrorCode::kSchema, where + " is missing '" + key + "'");
  }
  const auto& a = j["A"];
  if (!a.is_array() || a.size() != n) {
    throw Error(ErrorCode::kSchema, where + ".A must have " + std::to_string(n) + " rows");
  }
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(ReadVector(a[i], n, where + ".A[" + std::to_string(i) + "]"));
  }
  const double band = SymmetryBand(rows);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      if (std::abs(rows[i][k] - rows[k][i]) > band) {
        throw Error(ErrorCode::kSchema,
                    where + ".A is not symmetric at (" + std::to_string(i + 1) + "," +
                        std::to_string(k + 1) + ")");
      }
    }
  }
  return QuadForm(SymMatrix::FromRows(rows), ReadVector(j["b"], n, where + ".b"),
                  ReadNumber(j["c"], where + ".c"));
}

inline nlohmann::json WriteQuadForm(const QuadForm& q) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < q.dim(); ++i) rows.push_back(q.A.Row(i));
  return {{"A", rows}, {"b", q.b}, {"c", q.c}};
}

}  // namespace io_detail

inline Problem ProblemFromJson(const nlohmann::json& doc) {
  using io_detail::ReadQuadForm;
  if (!doc.is_object()) throw Error(ErrorCode::kSchema, "problem must be a JSON object");
  for (const char* key : {"n", "m", "objective", "constraints"}) {
    if (!doc.contains(key)) {
      throw Error(ErrorCode::kSchema, std::string("problem is missing '") + key + "'");
    }
  }
  if (!doc["n"].is_number_integer() || doc["n"].get<long long>() < 1) {
    throw Error(ErrorCode::kSchema, "'n' must be a positive integer");
  }
  if (!doc["m"].is_number_integer() || doc["m"].get<long long>() < 0) {
    throw Error(ErrorCode::kSchema, "'m' must be a non-negative integer");
  }
  const auto n = static_cast<std::size_t>(doc["n"].get<long long>());
  const auto m = static_cast<std::size_t>(doc["m"].get<long long>());
  const auto& cons = doc["constraints"];
  if (!cons.is_array() || cons.size() != m) {
    throw Error(ErrorCode::kSchema, "'constraints' must be an array of m = " +
                                        std::to_string(m) + " quadratic forms");
  }
  QuadForm objective = ReadQuadForm(doc["objective"], n, "objective");
  std::vector<QuadForm> constraints;
  for (std::size_t j = 0; j < m; ++j) {
    constraints.push_back(ReadQuadForm(cons[j], n, "constraints[" + std::to_string(j) + "]"));
  }
  IndexSet equalities;
  if (doc.contains("equality_indices")) {
    const auto& eq = doc["equality_indices"];
    if (!eq.is_array()) throw Error(ErrorCode::kSchema, "'equality_indices' must be an array");
    for (const auto& e : eq) {
      if (!e.is_number_integer()) {
        throw Error(ErrorCode::kSchema, "'equality_indices' entries must be integers");
      }
      const long long idx = e.get<long long>();
      if (idx < 1 || static_cast<std::size_t>(idx) > m) {
        throw Error(ErrorCode::kSchema, "J index out of range: " + std::to_string(idx) +
                                            " not in 1.." + std::to_string(m));
      }
      if (!equalities.insert(static_cast<std::size_t>(idx - 1)).second) {
        throw Error(ErrorCode::kSchema, "duplicate J index " + std::to_string(idx));
      }
    }
  }
  return Problem(std::move(objective), std::move(constraints), std::move(equalities));
}

inline nlohmann::json ProblemToJson(const Problem& p) {
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& q : p.constraints()) cons.push_back(io_detail::WriteQuadForm(q));
  std::vector<std::size_t> eq;
  for (std::size_t j : p.equalities()) eq.push_back(j + 1);
  return {{"n", p.n()},
          {"m", p.m()},
          {"objective", io_detail::WriteQuadForm(p.objective())},
          {"constraints", cons},
          {"equality_indices", eq}};
}

inline Problem LoadProblem(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("invalid JSON: ") + e.what());
  }
  return ProblemFromJson(doc);
}

inline std::string SaveProblem(const Problem& p) { return ProblemToJson(p).dump(2); }

inline Problem LoadProblemFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSchema, "cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return LoadProblem(buf.str());
}

}  // namespace qdual
