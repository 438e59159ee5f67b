#pragma once

// Dense symmetric linear algebra for the small systems that appear in
// Lagrangian duality of quadratic programs: eigendecomposition by cyclic
// Jacobi rotations, pseudo-inverse solves, range tests and definiteness
// classification with explicit tolerances.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdual/error.hpp"
#include "qdual/tolerances.hpp"

namespace qdual {

using Vector = std::vector<double>;

inline double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dot: vector lengths differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double Norm2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

inline double NormInf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vector Add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "add: vector lengths differ");
  }
  Vector out(a.begin(), a.end());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

inline Vector Subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "subtract: vector lengths differ");
  }
  Vector out(a.begin(), a.end());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

inline Vector Scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

// General dense row-major matrix. Used for eigenvector bases and kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix Identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  Vector Column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Vector Apply(std::span<const double> x) const {
    if (x.size() != cols_) {
      throw Error(ErrorCode::kDimensionMismatch, "matrix-vector: size mismatch");
    }
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  Vector ApplyTransposed(std::span<const double> x) const {
    if (x.size() != rows_) {
      throw Error(ErrorCode::kDimensionMismatch, "matrix^T-vector: size mismatch");
    }
    Vector y(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) y[j] += (*this)(i, j) * x[i];
    }
    return y;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Square symmetric matrix. Construction from arbitrary entries symmetrizes
// (a_ij + a_ji) / 2, so entries(i, j) == entries(j, i) holds bit-for-bit.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
    if (n == 0) throw Error(ErrorCode::kDimensionMismatch, "SymMatrix: n must be >= 1");
  }

  SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : SymMatrix(FromRows(std::vector<Vector>(rows.begin(), rows.end()))) {}

  static SymMatrix FromRows(const std::vector<Vector>& rows) {
    const std::size_t n = rows.size();
    SymMatrix m(n);
    for (const auto& r : rows) {
      if (r.size() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "SymMatrix: rows must be square");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double v = 0.5 * (rows[i][j] + rows[j][i]);
        m.data_[i * n + j] = v;
        m.data_[j * n + i] = v;
      }
    }
    return m;
  }

  static SymMatrix Identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
  }

  static SymMatrix Diagonal(std::span<const double> d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.data_[i * d.size() + i] = d[i];
    return m;
  }

  // u u^T
  static SymMatrix Outer(std::span<const double> u) {
    SymMatrix m(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) m.data_[i * u.size() + j] = u[i] * u[j];
    }
    return m;
  }

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  void Set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

  Vector Row(std::size_t i) const {
    return Vector(data_.begin() + i * n_, data_.begin() + (i + 1) * n_);
  }

  Vector Apply(std::span<const double> x) const {
    if (x.size() != n_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "SymMatrix apply: expected length " + std::to_string(n_) +
                      ", got " + std::to_string(x.size()));
    }
    Vector y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += data_[i * n_ + j] * x[j];
      y[i] = s;
    }
    return y;
  }

  // <x, M y>
  double Bilinear(std::span<const double> x, std::span<const double> y) const {
    return Dot(x, Apply(y));
  }

  // this += s * other
  SymMatrix& AddScaled(const SymMatrix& other, double s) {
    if (other.n_ != n_) {
      throw Error(ErrorCode::kDimensionMismatch, "SymMatrix add: size mismatch");
    }
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
    return *this;
  }

  SymMatrix operator+(const SymMatrix& other) const {
    SymMatrix r = *this;
    r.AddScaled(other, 1.0);
    return r;
  }

  SymMatrix operator-(const SymMatrix& other) const {
    SymMatrix r = *this;
    r.AddScaled(other, -1.0);
    return r;
  }

  SymMatrix operator*(double s) const {
    SymMatrix r = *this;
    for (double& v : r.data_) v *= s;
    return r;
  }

  double FrobeniusNorm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double MaxAbsEntry() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool operator==(const SymMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

// M = V diag(values) V^T with values ascending; column k of `vectors` is the
// eigenvector for values[k].
struct EigenDecomposition {
  Vector values;
  Matrix vectors;

  double MinEigenvalue() const { return values.front(); }
  double MaxEigenvalue() const { return values.back(); }
  // Spectral norm of the decomposed matrix.
  double Norm() const {
    return std::max(std::abs(values.front()), std::abs(values.back()));
  }
};

inline EigenDecomposition EigSym(const SymMatrix& m) {
  constexpr int kMaxSweeps = 100;
  const std::size_t n = m.size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = m(i, j);
  }
  Matrix v = Matrix::Identity(n);
  const double frob = m.FrobeniusNorm();

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    }
    return std::sqrt(s);
  };

  bool converged = frob == 0.0 || n == 1;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    if (off_diagonal() <= DBL_EPSILON * frob) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(tau) > 1e150) {
          t = 0.5 / tau;
        } else {
          t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal() > DBL_EPSILON * frob) {
    throw Error(ErrorCode::kInternal, "Jacobi eigensolver exceeded its sweep cap");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline double SpectralNorm(const SymMatrix& m) { return EigSym(m).Norm(); }

enum class DefinitenessClass {
  kPosDef,
  kPosSemiDefSingular,
  kNegDef,
  kNegSemiDefSingular,
  kIndefinite,
};

inline std::string_view ToString(DefinitenessClass c) {
  switch (c) {
    case DefinitenessClass::kPosDef: return "PosDef";
    case DefinitenessClass::kPosSemiDefSingular: return "PosSemiDefSingular";
    case DefinitenessClass::kNegDef: return "NegDef";
    case DefinitenessClass::kNegSemiDefSingular: return "NegSemiDefSingular";
    case DefinitenessClass::kIndefinite: return "Indefinite";
  }
  return "Unknown";
}

struct Definiteness {
  DefinitenessClass cls;
  double min_eig;
  double max_eig;
};

// Eigenvalues with magnitude at or below this count as zero.
inline double ZeroEigenvalueThreshold(const EigenDecomposition& eig,
                                      const Tolerances& tol) {
  return tol.definiteness * std::max(1.0, eig.Norm());
}

inline Definiteness ClassifyDefiniteness(const EigenDecomposition& eig,
                                         const Tolerances& tol = {}) {
  const double tau = ZeroEigenvalueThreshold(eig, tol);
  const double lo = eig.MinEigenvalue();
  const double hi = eig.MaxEigenvalue();
  DefinitenessClass cls;
  if (lo > tau) {
    cls = DefinitenessClass::kPosDef;
  } else if (hi < -tau) {
    cls = DefinitenessClass::kNegDef;
  } else if (lo >= -tau) {
    // The zero matrix lands here: ties go to the positive semidefinite class.
    cls = DefinitenessClass::kPosSemiDefSingular;
  } else if (hi <= tau) {
    cls = DefinitenessClass::kNegSemiDefSingular;
  } else {
    cls = DefinitenessClass::kIndefinite;
  }
  return {cls, lo, hi};
}

inline Definiteness ClassifyDefiniteness(const SymMatrix& m, const Tolerances& tol = {}) {
  return ClassifyDefiniteness(EigSym(m), tol);
}

struct MinNormSolution {
  Vector x;
  double residual;
};

// x = M^+ rhs with eigenvalues |w| <= tau treated as zero.
inline MinNormSolution SolveMinNorm(const SymMatrix& m, const EigenDecomposition& eig,
                                    std::span<const double> rhs,
                                    const Tolerances& tol = {}) {
  const std::size_t n = m.size();
  if (rhs.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_minnorm: rhs length mismatch");
  }
  const double tau = ZeroEigenvalueThreshold(eig, tol);
  Vector x(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = eig.values[k];
    if (std::abs(w) <= tau) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += eig.vectors(i, k) * rhs[i];
    const double coef = proj / w;
    for (std::size_t i = 0; i < n; ++i) x[i] += coef * eig.vectors(i, k);
  }
  Vector r = m.Apply(x);
  for (std::size_t i = 0; i < n; ++i) r[i] -= rhs[i];
  return {std::move(x), Norm2(r)};
}

inline MinNormSolution SolveMinNorm(const SymMatrix& m, std::span<const double> rhs,
                                    const Tolerances& tol = {}) {
  return SolveMinNorm(m, EigSym(m), rhs, tol);
}

inline bool InRange(const EigenDecomposition& eig, const MinNormSolution& sol,
                    std::span<const double> rhs, const Tolerances& tol = {}) {
  return sol.residual <= tol.range * (eig.Norm() * Norm2(sol.x) + Norm2(rhs) + 1.0);
}

inline bool InRange(const SymMatrix& m, std::span<const double> rhs,
                    const Tolerances& tol = {}) {
  EigenDecomposition eig = EigSym(m);
  return InRange(eig, SolveMinNorm(m, eig, rhs, tol), rhs, tol);
}

// Orthonormal basis (as columns) of the numerical kernel.
inline Matrix KernelBasis(const EigenDecomposition& eig, const Tolerances& tol = {}) {
  const double tau = ZeroEigenvalueThreshold(eig, tol);
  const std::size_t n = eig.values.size();
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(eig.values[k]) <= tau) cols.push_back(k);
  }
  Matrix basis(n, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) basis(i, c) = eig.vectors(i, cols[c]);
  }
  return basis;
}

// Orthonormal basis (as columns) of the numerical range.
inline Matrix RangeBasis(const EigenDecomposition& eig, const Tolerances& tol = {}) {
  const double tau = ZeroEigenvalueThreshold(eig, tol);
  const std::size_t n = eig.values.size();
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(eig.values[k]) > tau) cols.push_back(k);
  }
  Matrix basis(n, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) basis(i, c) = eig.vectors(i, cols[c]);
  }
  return basis;
}

}  // namespace qdual
