// Copyright 2026 The oqwalk Authors
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

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oqwalk {

using Complex = std::complex<double>;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonHermitianInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense square complex matrix, row-major. The qubit basis order is
/// (excited, ground) everywhere: index 0 = |e>, index 1 = |g>.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim) {
    if (dim <= 0) throw std::invalid_argument("ComplexMatrix: dimension must be positive");
  }

  static ComplexMatrix zero(int dim) { return ComplexMatrix(dim); }

  static ComplexMatrix identity(int dim) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return dim_; }

  Complex& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * dim_ + c]; }
  Complex operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * dim_ + c]; }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  bool is_finite() const {
    for (const Complex& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  Complex trace() const {
    Complex t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const Complex& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(dim_);
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  /// ||A - A^dagger||_F, used by the Hermiticity diagnostics.
  double hermiticity_defect() const {
    double s = 0.0;
    for (int r = 0; r < dim_; ++r)
      for (int c = r; c < dim_; ++c) {
        const Complex d = (*this)(r, c) - std::conj((*this)(c, r));
        s += (r == c ? 1.0 : 2.0) * std::norm(d);
      }
    return std::sqrt(s);
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_dim(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_dim(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  ComplexMatrix& operator*=(Complex s) {
    for (Complex& z : data_) z *= s;
    return *this;
  }

  void require_same_dim(const ComplexMatrix& o) const {
    if (dim_ != o.dim_)
      throw DimensionMismatch("matrix dimensions differ: " + std::to_string(dim_) + " vs " +
                              std::to_string(o.dim_));
  }

 private:
  int dim_ = 0;
  std::vector<Complex> data_;
};

inline ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
inline ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
inline ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
inline ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
inline ComplexMatrix operator*(ComplexMatrix a, double s) { return a *= Complex(s, 0.0); }
inline ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= Complex(s, 0.0); }

inline ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) { return a + b; }
inline ComplexMatrix scale(const ComplexMatrix& a, Complex s) { return a * s; }

/// out = a * b, written with explicit real/imaginary arithmetic so the inner
/// loop vectorizes without libgcc complex-multiplication calls.
inline void multiply_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out) {
  a.require_same_dim(b);
  const int n = a.dim();
  if (out.dim() != n) out = ComplexMatrix(n);
  const Complex* pa = a.data().data();
  const Complex* pb = b.data().data();
  Complex* po = out.data().data();
  for (int i = 0; i < n; ++i) {
    Complex* orow = po + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) orow[j] = 0.0;
    for (int k = 0; k < n; ++k) {
      const Complex av = pa[static_cast<std::size_t>(i) * n + k];
      const double ar = av.real(), ai = av.imag();
      const Complex* brow = pb + static_cast<std::size_t>(k) * n;
      for (int j = 0; j < n; ++j) {
        const double br = brow[j].real(), bi = brow[j].imag();
        orow[j] += Complex(ar * br - ai * bi, ar * bi + ai * br);
      }
    }
  }
}

inline ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.dim());
  multiply_into(a, b, out);
  return out;
}

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  return multiply(a, b);
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return multiply(a, b) - multiply(b, a);
}

inline ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return multiply(a, b) + multiply(b, a);
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.frobenius_norm(); }

/// Tensor product; row-major blocks of b scaled by entries of a.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int na = a.dim(), nb = b.dim();
  ComplexMatrix out(na * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) {
      const Complex v = a(i, j);
      if (v == 0.0) continue;
      for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l) out(i * nb + k, j * nb + l) = v * b(k, l);
    }
  return out;
}

enum class Pauli { Plus, Minus, Z, Identity };

/// Qubit operators in the fixed (e, g) basis: sigma_+ = |e><g|,
/// sigma_- = |g><e|, sigma_z = diag(+1, -1).
inline ComplexMatrix pauli(Pauli which) {
  ComplexMatrix m(2);
  switch (which) {
    case Pauli::Plus:
      m(0, 1) = 1.0;
      break;
    case Pauli::Minus:
      m(1, 0) = 1.0;
      break;
    case Pauli::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    case Pauli::Identity:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
  }
  return m;
}

/// Truncated Fock-space annihilation operator: a|k> = sqrt(k)|k-1> on 0..n_max.
/// The commutator [a, a^dag] deviates from identity only in the (n_max, n_max)
/// entry, where truncation forces the value -n_max.
inline ComplexMatrix annihilation(int n_max) {
  if (n_max < 1) throw std::invalid_argument("annihilation: n_max must be >= 1");
  ComplexMatrix a(n_max + 1);
  for (int k = 1; k <= n_max; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

/// Dissipative superoperator building block: n rho m - (m n rho + rho m n)/2.
inline ComplexMatrix lindblad_term(const ComplexMatrix& n, const ComplexMatrix& m,
                                   const ComplexMatrix& rho) {
  n.require_same_dim(m);
  n.require_same_dim(rho);
  const ComplexMatrix mn = multiply(m, n);
  ComplexMatrix out = multiply(multiply(n, rho), m);
  out -= 0.5 * (multiply(mn, rho) + multiply(rho, mn));
  return out;
}

/// exp(A) by scaling-and-squaring with a Taylor core. The input is scaled by
/// 2^-s until its Frobenius norm is below 0.5, the series is summed to double
/// precision, and the result squared s times.
inline ComplexMatrix matrix_exponential(const ComplexMatrix& a) {
  if (!a.is_finite()) throw NonFiniteInput("matrix_exponential: non-finite input");
  const int n = a.dim();
  const double norm = a.frobenius_norm();
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  ComplexMatrix x = a * std::ldexp(1.0, -squarings);
  ComplexMatrix result = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  ComplexMatrix scratch(n);
  for (int k = 1; k <= 40; ++k) {
    multiply_into(term, x, scratch);
    scratch *= Complex(1.0 / k, 0.0);
    std::swap(term, scratch);
    result += term;
    if (term.frobenius_norm() <= 1e-18 * result.frobenius_norm()) break;
  }
  for (int s = 0; s < squarings; ++s) {
    multiply_into(result, result, scratch);
    std::swap(result, scratch);
  }
  return result;
}

/// Eigenvalues of a Hermitian matrix, ascending.
struct HermitianSpectrum {
  std::vector<double> eigenvalues;
};

/// Closed-form eigenvalues (mean +/- radius) of a 2x2 Hermitian matrix.
inline HermitianSpectrum hermitian_eigenvalues_2x2(const ComplexMatrix& h,
                                                   double tolerance = 1e-10) {
  if (h.dim() != 2) throw DimensionMismatch("hermitian_eigenvalues_2x2: dimension must be 2");
  if (h.hermiticity_defect() > tolerance)
    throw NonHermitianInput("hermitian_eigenvalues_2x2: input not Hermitian within tolerance");
  const double mean = 0.5 * (h(0, 0).real() + h(1, 1).real());
  const double half_gap = 0.5 * (h(0, 0).real() - h(1, 1).real());
  const double off = 0.5 * std::abs(h(0, 1) + std::conj(h(1, 0)));
  const double radius = std::hypot(half_gap, off);
  return HermitianSpectrum{{mean - radius, mean + radius}};
}

}  // namespace oqwalk
