#include "qdual/quadratic_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qdual/problem_io.hpp"
#include "test_support.hpp"

namespace qdual {
namespace {

using test::kInvSqrt2;

QuadForm Bilinear() { return QuadForm({{0.0, 1.0}, {1.0, 0.0}}, {0.0, 0.0}, 0.0); }

TEST(QuadForm, EvaluatesBilinearObjective) {
  EXPECT_EQ(Bilinear()(Vector{1.0, 1.0}), 1.0);
  EXPECT_EQ(Bilinear()(Vector{3.0, -2.0}), -6.0);
}

TEST(QuadForm, ZeroGivesConstant) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    QuadForm q = test::RandomQuadForm(rng, 1 + t % 5);
    EXPECT_EQ(q(Vector(q.dim(), 0.0)), q.c);
  }
}

TEST(QuadForm, OneDimensionalConcave) {
  // -1/2 (x^2 + x)
  QuadForm q({{-1.0}}, {0.5}, 0.0);
  EXPECT_EQ(q(Vector{1.0}), -1.0);
  EXPECT_EQ(q(Vector{-1.0}), 0.0);
}

TEST(QuadForm, SignConvention) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 6;
    QuadForm q = test::RandomQuadForm(rng, n);
    Vector x = test::RandomVector(rng, n, 2.0);
    const Eigen::VectorXd ex = test::ToEigen(x);
    const double quad = 0.5 * ex.dot(test::ToEigen(q.A) * ex) - test::ToEigen(q.b).dot(ex);
    EXPECT_NEAR(q(x) - q(Vector(n, 0.0)) - quad, 0.0, 1e-13);
  }
}

TEST(QuadForm, GradientIsAxMinusB) {
  QuadForm q({{2.0, 1.0}, {1.0, 4.0}}, {1.0, -1.0}, 3.0);
  EXPECT_EQ(q.Gradient(Vector{1.0, 1.0}), (Vector{2.0, 6.0}));
}

TEST(QuadForm, DimensionMismatch) {
  EXPECT_THROW(QuadForm({{1.0}}, {1.0, 2.0}, 0.0), Error);
  EXPECT_THROW(Bilinear()(Vector{1.0}), Error);
}

Problem CircleProblem(IndexSet j) {
  return Problem(Bilinear(), {QuadForm(SymMatrix::Identity(2), {0.0, 0.0}, -0.5)}, std::move(j));
}

TEST(Problem, RejectsMixedDimensions) {
  EXPECT_THROW(Problem(Bilinear(), {QuadForm({{1.0}}, {0.0}, 0.0)}, {}), Error);
}

TEST(Problem, RejectsEqualityIndexOutOfRange) {
  try {
    Problem(Bilinear(), {}, {0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
}

TEST(CheckFeasible, PointOnCircle) {
  FeasibilityReport r = CheckFeasible(CircleProblem({0}), Vector{kInvSqrt2, -kInvSqrt2});
  EXPECT_TRUE(r.feasible);
  EXPECT_LE(r.eq_violation, 1e-15);
}

TEST(CheckFeasible, BoxCorner) {
  FeasibilityReport r = CheckFeasible(test::CorpusProblem("ex3_box.json"), Vector{1.0, 1.0});
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.ineq_violation, 0.0);
}

TEST(CheckFeasible, OriginMissesCircle) {
  FeasibilityReport r = CheckFeasible(CircleProblem({0}), Vector{0.0, 0.0});
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.eq_violation, 0.5);
  EXPECT_EQ(r.ineq_violation, 0.0);
}

TEST(CheckFeasible, InequalityFormNeverReportsEqualityViolation) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    Problem p = test::RandomProblem(rng, 3, 3);
    FeasibilityReport r = CheckFeasible(p, test::RandomVector(rng, 3, 5.0));
    EXPECT_EQ(r.eq_violation, 0.0);
    EXPECT_EQ(r.feasible, r.ineq_violation <= 1e-8);
  }
}

TEST(CheckFeasible, UnconstrainedAlwaysFeasible) {
  Problem p(Bilinear(), {}, {});
  EXPECT_TRUE(CheckFeasible(p, Vector{4.0, 2.0}).feasible);
  EXPECT_THROW(CheckFeasible(p, Vector{4.0}), Error);
}

TEST(ProblemIo, LoadsCorpusCircle) {
  Problem p = test::CorpusProblem("ex1_circle.json");
  EXPECT_EQ(p.n(), 2u);
  EXPECT_EQ(p.m(), 1u);
  EXPECT_EQ(p.equalities(), (IndexSet{0}));
  EXPECT_EQ(p.objective().A, Bilinear().A);
}

TEST(ProblemIo, UnconstrainedDocument) {
  Problem p = LoadProblem(R"({"n": 1, "m": 0, "objective": {"A": [[2]], "b": [1], "c": 0},
                              "constraints": [], "equality_indices": []})");
  EXPECT_EQ(p.m(), 0u);
  EXPECT_TRUE(p.equalities().empty());
}

TEST(ProblemIo, EqualityIndicesAreOptional) {
  Problem p = LoadProblem(R"({"n": 1, "m": 0, "objective": {"A": [[2]], "b": [1], "c": 0},
                              "constraints": []})");
  EXPECT_TRUE(p.equalities().empty());
}

void ExpectSchemaError(const std::string& text, const std::string& fragment) {
  try {
    LoadProblem(text);
    FAIL() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

constexpr const char* kTwoConstraints = R"({"n": 1, "m": 2,
  "objective": {"A": [[1]], "b": [0], "c": 0},
  "constraints": [{"A": [[1]], "b": [0], "c": -1}, {"A": [[0]], "b": [1], "c": 0}],
  "equality_indices": [%]})";

std::string WithJ(const std::string& j) {
  std::string s = kTwoConstraints;
  return s.replace(s.find('%'), 1, j);
}

TEST(ProblemIo, RejectsBadEqualityIndices) {
  ExpectSchemaError(WithJ("3"), "J index out of range");
  ExpectSchemaError(WithJ("0"), "J index out of range");
  ExpectSchemaError(WithJ("1, 1"), "duplicate");
  EXPECT_EQ(LoadProblem(WithJ("2")).equalities(), (IndexSet{1}));
}

TEST(ProblemIo, RejectsAsymmetryBeyondBand) {
  ExpectSchemaError(R"({"n": 2, "m": 0, "objective": {"A": [[1, 2], [2.001, 1]], "b": [0, 0],
                        "c": 0}, "constraints": []})",
                    "not symmetric");
  Problem p = LoadProblem(R"({"n": 2, "m": 0, "objective": {"A": [[1, 2], [2.0000000000001, 1]],
                              "b": [0, 0], "c": 0}, "constraints": []})");
  EXPECT_EQ(p.objective().A(0, 1), p.objective().A(1, 0));
}

TEST(ProblemIo, RejectsMalformedDocuments) {
  ExpectSchemaError("{", "invalid JSON");
  ExpectSchemaError(R"({"n": 1, "m": 0, "constraints": []})", "objective");
  ExpectSchemaError(R"({"n": 0, "m": 0, "objective": {}, "constraints": []})", "'n'");
  ExpectSchemaError(R"({"n": 1, "m": 1, "objective": {"A": [[1]], "b": [0], "c": 0},
                        "constraints": []})",
                    "constraints");
  ExpectSchemaError(R"({"n": 1, "m": 0, "objective": {"A": [[1]], "b": [0, 1], "c": 0},
                        "constraints": []})",
                    "objective.b");
  ExpectSchemaError(R"({"n": 1, "m": 0, "objective": {"A": [[1]], "b": ["x"], "c": 0},
                        "constraints": []})",
                    "number");
  ExpectSchemaError(R"({"n": 1, "m": 0, "objective": {"A": [[1]], "b": [0]},
                        "constraints": []})",
                    "'c'");
}

TEST(ProblemIo, RoundTripIsExact) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = t % 4;
    IndexSet j;
    for (std::size_t k = 0; k < m; ++k) {
      if (rng() % 2) j.insert(k);
    }
    Problem p = test::RandomProblem(rng, 1 + t % 5, m, j);
    Problem back = LoadProblem(SaveProblem(p));
    EXPECT_EQ(back.equalities(), p.equalities());
    EXPECT_EQ(back.objective().A, p.objective().A);
    EXPECT_EQ(back.objective().b, p.objective().b);
    EXPECT_EQ(back.objective().c, p.objective().c);
    for (std::size_t k = 0; k < m; ++k) {
      EXPECT_EQ(back.constraint(k).A, p.constraint(k).A);
      EXPECT_EQ(back.constraint(k).b, p.constraint(k).b);
      EXPECT_EQ(back.constraint(k).c, p.constraint(k).c);
    }
    EXPECT_EQ(SaveProblem(back), SaveProblem(p));
  }
}

TEST(ProblemIo, EqualityIndicesAreOneBasedOnDisk) {
  nlohmann::json j = ProblemToJson(CircleProblem({0}));
  EXPECT_EQ(j["equality_indices"], nlohmann::json::array({1}));
}

TEST(Problem, DerivedProblems) {
  Problem p = CircleProblem({0});
  EXPECT_TRUE(p.WithEqualities({}).equalities().empty());
  EXPECT_EQ(p.WithNegatedObjective().objective()(Vector{1.0, 1.0}), -1.0);
  EXPECT_EQ(CircleProblem({}).AllEqualities().equalities(), (IndexSet{0}));
}

}  // namespace
}  // namespace qdual
