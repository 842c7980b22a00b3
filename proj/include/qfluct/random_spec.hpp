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

// Seeded random valid specs: equally spaced local spectra in random bases,
// an interaction and a correlation term both confined to the degenerate
// blocks of the bare Hamiltonian, the latter with vanishing marginals and
// scaled to stay inside the state space. Reduced states then remain diagonal
// in the local energy bases at every time.
// Only raw 64-bit engine output is consumed, so a seed gives the same spec on
// every platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "qfluct/qcore.hpp"
#include "qfluct/system.hpp"

namespace qfluct {

class SpecRng {
 public:
  explicit SpecRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    cached_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t pick(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
  bool cached_ = false;
  double spare_ = 0.0;
};

inline ComplexMatrix random_hermitian(SpecRng& rng, std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = rng.normal();
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

/// Gram-Schmidt on a complex Gaussian matrix.
inline ComplexMatrix random_unitary(SpecRng& rng, std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = complex(rng.normal(), rng.normal());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      complex proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += std::conj(m(i, k)) * m(i, j);
      for (std::size_t i = 0; i < n; ++i) m(i, j) -= proj * m(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += std::norm(m(i, j));
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) m(i, j) /= norm;
  }
  return m;
}

/// X minus its local parts, so both partial traces and the trace vanish.
inline ComplexMatrix remove_marginals(const ComplexMatrix& x, std::size_t da, std::size_t db) {
  const ComplexMatrix ia = ComplexMatrix::identity(da);
  const ComplexMatrix ib = ComplexMatrix::identity(db);
  const ComplexMatrix xa = partial_trace(x, da, db, Subsystem::A);
  const ComplexMatrix xb = partial_trace(x, da, db, Subsystem::B);
  const double d = static_cast<double>(da * db);
  return x - tensor_product(xa, ib) * complex(1.0 / static_cast<double>(db)) -
         tensor_product(ia, xb) * complex(1.0 / static_cast<double>(da)) +
         ComplexMatrix::identity(da * db) * (x.trace() / d);
}

struct RandomSpecOptions {
  std::size_t dim_A = 0;  // 0: drawn from {2, 3}
  std::size_t dim_B = 0;
  bool correlated = true;
  /// false: chi is a generic traceless-marginal term, so reduced states may
  /// acquire coherence in the local energy bases.
  bool block_chi = true;
};

struct RandomCase {
  BipartiteSpec spec;
  double time = 1.0;
};

inline RandomCase random_case(SpecRng& rng, const RandomSpecOptions& opt = {}) {
  const std::size_t da = opt.dim_A ? opt.dim_A : rng.pick(2, 3);
  const std::size_t db = opt.dim_B ? opt.dim_B : rng.pick(2, 3);
  RandomCase rc;
  BipartiteSpec& spec = rc.spec;

  auto ladder = [](std::size_t n) {
    std::vector<double> e(n);
    for (std::size_t k = 0; k < n; ++k) e[k] = static_cast<double>(k);
    return e;
  };
  const auto ea = ladder(da), eb = ladder(db);
  const ComplexMatrix va = random_unitary(rng, da);
  const ComplexMatrix vb = random_unitary(rng, db);
  spec.H_A = va * ComplexMatrix::diagonal(ea) * va.adjoint();
  spec.H_B = vb * ComplexMatrix::diagonal(eb) * vb.adjoint();
  spec.H_A = (spec.H_A + spec.H_A.adjoint()) * complex(0.5);
  spec.H_B = (spec.H_B + spec.H_B.adjoint()) * complex(0.5);
  spec.beta_A = rng.uniform(0.2, 2.0);
  spec.beta_B = rng.uniform(0.2, 2.0);

  const std::size_t d = da * db;
  const ComplexMatrix w = tensor_product(va, vb);
  ComplexMatrix r = random_hermitian(rng, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (ea[i / db] + eb[i % db] != ea[j / db] + eb[j % db]) r(i, j) = 0.0;
  spec.H_int = w * r * w.adjoint();
  spec.H_int = (spec.H_int + spec.H_int.adjoint()) * complex(0.5);

  ComplexMatrix x = random_hermitian(rng, d);
  if (opt.block_chi) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (ea[i / db] + eb[i % db] != ea[j / db] + eb[j % db]) x(i, j) = 0.0;
  }
  const double c = rng.uniform(0.3, 0.95);
  rc.time = rng.uniform(0.1, 3.0);
  spec.chi_AB = ComplexMatrix(d, d);
  if (opt.correlated) {
    ComplexMatrix chi = remove_marginals(w * x * w.adjoint(), da, db);
    chi = (chi + chi.adjoint()) * complex(0.5);
    const auto spectrum = hermitian_eigendecompose(chi).values;
    const double radius = std::max(std::abs(spectrum.front()), std::abs(spectrum.back()));
    const ComplexMatrix rho0 = tensor_product(gibbs_state(spec.H_A, spec.beta_A).rho,
                                              gibbs_state(spec.H_B, spec.beta_B).rho);
    const double lambda_min = hermitian_eigendecompose(rho0).values.back();
    if (radius > 0.0) spec.chi_AB = chi * complex(c * lambda_min / radius);
  }
  return rc;
}

/// `count` cases from one seed; every fifth case is uncorrelated.
inline std::vector<RandomCase> random_cases(std::uint64_t seed, std::size_t count) {
  SpecRng rng(seed);
  std::vector<RandomCase> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    RandomSpecOptions opt;
    opt.correlated = (k % 5) != 4;
    out.push_back(random_case(rng, opt));
  }
  return out;
}

}  // namespace qfluct
