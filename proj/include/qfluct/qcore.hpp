// Copyright 2026 The qfluct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense complex linear algebra for small bipartite Hilbert spaces: a value-type
// matrix, a Hermitian eigensolver with a deterministic degeneracy rule, tensor
// products, partial traces and spectral operator functions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfluct {

using complex = std::complex<double>;

/// Dense row-major complex matrix. Always at least 1x1.
class ComplexMatrix {
 public:
  ComplexMatrix() : ComplexMatrix(1, 1) {}

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
  }

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
    }
    if (data_.size() != rows * cols) {
      throw std::invalid_argument("ComplexMatrix: entry count != rows*cols");
    }
  }

  /// Row-major nested initializer, e.g. {{1, 0}, {0, -1}}.
  ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) {
      throw std::invalid_argument("ComplexMatrix: empty initializer");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw std::invalid_argument("ComplexMatrix: ragged initializer");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) {
    return ComplexMatrix(rows, cols);
  }

  static ComplexMatrix diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static ComplexMatrix diagonal(std::initializer_list<double> d) {
    std::vector<double> v(d);
    return diagonal(std::span<const double>(v));
  }

  /// |u><v|
  static ComplexMatrix outer(std::span<const complex> u, std::span<const complex> v) {
    ComplexMatrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const complex> data() const noexcept { return data_; }

  std::vector<complex> column(std::size_t j) const {
    std::vector<complex> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  complex trace() const {
    require_square("trace");
    complex t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  /// Largest deviation from Hermiticity, max |M_ij - conj(M_ji)|.
  double hermiticity_residual() const {
    require_square("hermiticity_residual");
    double r = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        r = std::max(r, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return r;
  }

  bool is_hermitian(double tol) const {
    return is_square() && hermiticity_residual() <= tol;
  }

  bool approx_equal(const ComplexMatrix& other, double tol) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return false;
    for (std::size_t k = 0; k < data_.size(); ++k)
      if (std::abs(data_[k] - other.data_[k]) > tol) return false;
    return true;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, complex s) { return a *= s; }
  friend ComplexMatrix operator*(complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) {
      throw std::invalid_argument("ComplexMatrix: product dimension mismatch");
    }
    ComplexMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const complex aik = a(i, k);
        if (aik == complex(0.0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  std::vector<complex> apply(std::span<const complex> v) const {
    if (v.size() != cols_) {
      throw std::invalid_argument("ComplexMatrix: apply dimension mismatch");
    }
    std::vector<complex> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      complex acc = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
      out[i] = acc;
    }
    return out;
  }

  /// <u|M|v>
  complex expectation(std::span<const complex> u, std::span<const complex> v) const {
    const auto mv = apply(v);
    complex acc = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) acc += std::conj(u[i]) * mv[i];
    return acc;
  }

 private:
  void require_square(const char* what) const {
    if (!is_square()) {
      throw std::invalid_argument(std::string("ComplexMatrix: ") + what +
                                  " requires a square matrix");
    }
  }
  void require_same_shape(const ComplexMatrix& o, const char* what) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument(std::string("ComplexMatrix: shape mismatch in ") + what);
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complex> data_;
};

inline complex inner(std::span<const complex> u, std::span<const complex> v) {
  complex acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i];
  return acc;
}

/// Spectral decomposition of a Hermitian matrix. Column k of `vectors` pairs
/// with `values[k]`; values are sorted descending.
struct EigenSystem {
  std::vector<double> values;
  ComplexMatrix vectors;

  std::size_t size() const noexcept { return values.size(); }
  std::vector<complex> vector(std::size_t k) const { return vectors.column(k); }

  /// V diag(f(values)) V^dagger
  template <class F>
  ComplexMatrix apply_function(F&& f) const {
    const std::size_t n = values.size();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const complex fk = f(values[k]);
      if (fk == complex(0.0)) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const complex vik = vectors(i, k) * fk;
        for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(vectors(j, k));
      }
    }
    return out;
  }

  ComplexMatrix reconstruct() const {
    return apply_function([](double x) { return complex(x); });
  }
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr int kMaxJacobiSweeps = 100;

// Cyclic complex Jacobi. On return `a` is (numerically) diagonal and
// `v` holds the accumulated unitary, so input = v diag(a) v^dagger.
inline void jacobi_diagonalize(ComplexMatrix& a, ComplexMatrix& v) {
  const std::size_t n = a.rows();
  v = ComplexMatrix::identity(n);
  if (n == 1) return;

  double fro2 = 0.0;
  for (const auto& z : a.data()) fro2 += std::norm(z);
  if (fro2 == 0.0) return;
  const double eps2 = 1e-32 * fro2;

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off2 = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off2 += 2.0 * std::norm(a(p, q));
    if (off2 <= eps2) return;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const complex apq = a(p, q);
        const double r = std::abs(apq);
        if (r == 0.0 || r * r <= 1e-40 * fro2) continue;
        const complex phase = apq / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
        const complex jpp = c;
        const complex jpq = s;
        const complex jqp = -s * std::conj(phase);
        const complex jqq = c * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {
          const complex akp = a(k, p);
          const complex akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const complex apk = a(p, k);
          const complex aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        for (std::size_t k = 0; k < n; ++k) {
          const complex vkp = v(k, p);
          const complex vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }
  throw ConvergenceError("hermitian_eigendecompose: Jacobi iteration did not converge");
}

// First component with non-negligible magnitude made real positive.
inline void fix_phase(ComplexMatrix& v, std::size_t col) {
  const std::size_t n = v.rows();
  double vmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(v(i, col)));
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::abs(v(i, col));
    if (m > 1e-10 * vmax) {
      const complex ph = std::conj(v(i, col)) / m;
      for (std::size_t k = 0; k < n; ++k) v(k, col) *= ph;
      v(i, col) = m;
      return;
    }
  }
}

inline EigenSystem sorted_eigensystem(const ComplexMatrix& m) {
  ComplexMatrix a = m;
  ComplexMatrix v(m.rows(), m.rows());
  jacobi_diagonalize(a, v);
  const std::size_t n = m.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() > a(j, j).real();
  });
  EigenSystem es{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    es.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) es.vectors(i, k) = v(i, order[k]);
  }
  return es;
}

}  // namespace detail

/// Relative width (w.r.t. the spectral range) under which eigenvalues count as
/// one degenerate subspace.
inline constexpr double kDegeneracyTolerance = 1e-9;

/// Tolerance used to accept an input as Hermitian, relative to its largest entry.
inline constexpr double kHermitianInputTolerance = 1e-10;

/// Eigendecomposition of a Hermitian matrix with a deterministic degeneracy
/// rule: each degenerate subspace is rotated to diagonalize the projection of
/// `tiebreak` (columns then ordered by ascending <v|tiebreak|v>), and every
/// eigenvector has its first non-negligible component real positive.
inline EigenSystem hermitian_eigendecompose(const ComplexMatrix& m,
                                            const std::optional<ComplexMatrix>& tiebreak = {}) {
  if (!m.is_square()) {
    throw std::invalid_argument("hermitian_eigendecompose: matrix is not square");
  }
  const double scale = std::max(1.0, m.max_abs());
  if (m.hermiticity_residual() > kHermitianInputTolerance * scale) {
    std::ostringstream os;
    os << "hermitian_eigendecompose: matrix is not Hermitian (residual "
       << m.hermiticity_residual() << ")";
    throw std::invalid_argument(os.str());
  }
  if (tiebreak) {
    if (tiebreak->rows() != m.rows() || tiebreak->cols() != m.cols()) {
      throw std::invalid_argument("hermitian_eigendecompose: tiebreak dimension mismatch");
    }
    if (tiebreak->hermiticity_residual() >
        kHermitianInputTolerance * std::max(1.0, tiebreak->max_abs())) {
      throw std::invalid_argument("hermitian_eigendecompose: tiebreak is not Hermitian");
    }
  }

  EigenSystem es = detail::sorted_eigensystem(m);
  const std::size_t n = es.size();
  const double range = es.values.front() - es.values.back();
  const double gap_tol = kDegeneracyTolerance * range;

  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    while (end < n && es.values[end - 1] - es.values[end] <= gap_tol) ++end;
    const std::size_t k = end - begin;
    if (k > 1) {
      double mean = 0.0;
      for (std::size_t i = begin; i < end; ++i) mean += es.values[i];
      mean /= static_cast<double>(k);
      for (std::size_t i = begin; i < end; ++i) es.values[i] = mean;

      if (tiebreak) {
        ComplexMatrix basis(n, k);
        for (std::size_t c = 0; c < k; ++c)
          for (std::size_t i = 0; i < n; ++i) basis(i, c) = es.vectors(i, begin + c);
        ComplexMatrix projected = basis.adjoint() * (*tiebreak) * basis;
        // Symmetrize away rounding before the inner solve.
        projected = (projected + projected.adjoint()) * complex(0.5);
        EigenSystem inner_es = detail::sorted_eigensystem(projected);
        const ComplexMatrix rotated = basis * inner_es.vectors;
        // inner values are descending; ascending tiebreak order reverses them.
        for (std::size_t c = 0; c < k; ++c)
          for (std::size_t i = 0; i < n; ++i)
            es.vectors(i, begin + c) = rotated(i, k - 1 - c);
      }
    }
    begin = end;
  }
  for (std::size_t c = 0; c < n; ++c) detail::fix_phase(es.vectors, c);
  return es;
}

/// Kronecker product, A-index major: ((iA,iB),(jA,jB)) -> A[iA,jA] * B[iB,jB].
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const complex aij = a(ia, ja);
      if (aij == complex(0.0)) continue;
      for (std::size_t ib = 0; ib < b.rows(); ++ib)
        for (std::size_t jb = 0; jb < b.cols(); ++jb)
          c(ia * b.rows() + ib, ja * b.cols() + jb) = aij * b(ib, jb);
    }
  return c;
}

inline std::vector<complex> tensor_product(std::span<const complex> u,
                                           std::span<const complex> v) {
  std::vector<complex> w(u.size() * v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) w[i * v.size() + j] = u[i] * v[j];
  return w;
}

enum class Subsystem { A, B };

/// Reduced operator on the kept subsystem of a (dim_a*dim_b)-square matrix.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b,
                                   Subsystem keep) {
  if (!m.is_square() || m.rows() != dim_a * dim_b) {
    throw std::invalid_argument("partial_trace: matrix dimension != dim_a*dim_b");
  }
  if (keep == Subsystem::A) {
    ComplexMatrix r(dim_a, dim_a);
    for (std::size_t i = 0; i < dim_a; ++i)
      for (std::size_t j = 0; j < dim_a; ++j)
        for (std::size_t k = 0; k < dim_b; ++k) r(i, j) += m(i * dim_b + k, j * dim_b + k);
    return r;
  }
  ComplexMatrix r(dim_b, dim_b);
  for (std::size_t i = 0; i < dim_b; ++i)
    for (std::size_t j = 0; j < dim_b; ++j)
      for (std::size_t k = 0; k < dim_a; ++k) r(i, j) += m(k * dim_b + i, k * dim_b + j);
  return r;
}

/// exp(-i t H), computed spectrally.
inline ComplexMatrix unitary_from_hamiltonian(const ComplexMatrix& h, double t) {
  const EigenSystem es = hermitian_eigendecompose(h);
  return es.apply_function([t](double e) { return std::exp(complex(0.0, -e * t)); });
}

/// max |AB - BA|
inline double commutator_norm(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows()) {
    throw std::invalid_argument("commutator_norm: dimension mismatch");
  }
  return (a * b - b * a).max_abs();
}

/// Eigenvalues of a density operator; entries within -tol..0 are clamped to 0.
inline std::vector<double> density_spectrum(const ComplexMatrix& rho, double tol = 1e-10) {
  auto values = hermitian_eigendecompose(rho).values;
  for (auto& p : values) {
    if (p < 0.0 && p >= -tol) p = 0.0;
  }
  return values;
}

/// -tr rho ln rho, with 0 ln 0 = 0.
inline double von_neumann_entropy(const ComplexMatrix& rho) {
  double s = 0.0;
  for (double p : density_spectrum(rho))
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

/// S(A) + S(B) - S(AB)
inline double mutual_information(const ComplexMatrix& rho, std::size_t dim_a, std::size_t dim_b) {
  return von_neumann_entropy(partial_trace(rho, dim_a, dim_b, Subsystem::A)) +
         von_neumann_entropy(partial_trace(rho, dim_a, dim_b, Subsystem::B)) -
         von_neumann_entropy(rho);
}

class SupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// tr[rho ln rho] - tr[rho ln sigma]. Throws SupportError when rho has weight
/// outside the support of sigma.
inline double relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& sigma,
                               double tol = 1e-12) {
  if (!rho.is_square() || rho.rows() != sigma.rows() || !sigma.is_square()) {
    throw std::invalid_argument("relative_entropy: dimension mismatch");
  }
  double s = 0.0;
  for (double p : density_spectrum(rho))
    if (p > 0.0) s += p * std::log(p);

  const EigenSystem sig = hermitian_eigendecompose(sigma);
  for (std::size_t j = 0; j < sig.size(); ++j) {
    const auto w = sig.vector(j);
    const double weight = rho.expectation(w, w).real();
    const double q = sig.values[j];
    if (q <= tol) {
      if (weight > tol) {
        std::ostringstream os;
        os << "relative_entropy: support violation (weight " << weight
           << " on a null direction of sigma)";
        throw SupportError(os.str());
      }
      continue;
    }
    s -= weight * std::log(q);
  }
  return s;
}

}  // namespace qfluct
