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

// Two qubits with unit splitting, H = (1 - sigma_z)/2, exchanging one
// quantum through a resonant swap. Closed-form heat statistics serve as an
// oracle for the enumeration.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qfluct/qcore.hpp"
#include "qfluct/system.hpp"
#include "qfluct/thermo.hpp"

namespace qfluct {

struct QubitExampleParams {
  double beta_A = std::log(4.0);
  double beta_B = std::log(7.0 / 3.0);
  double tau = 1.0;
  bool correlated = false;

  /// Inverse temperatures from excited-state occupations p: beta = ln((1-p)/p).
  static QubitExampleParams from_occupations(double p_A, double p_B, double tau,
                                             bool correlated) {
    auto beta = [](double p) {
      if (!(p > 0.0 && p < 0.5)) {
        throw std::invalid_argument("occupation must lie in (0, 0.5) for a positive beta");
      }
      return std::log((1.0 - p) / p);
    };
    QubitExampleParams q;
    q.beta_A = beta(p_A);
    q.beta_B = beta(p_B);
    q.tau = tau;
    q.correlated = correlated;
    q.check();
    return q;
  }

  /// Excited occupations 0.2 (A) and 0.3 (B).
  static QubitExampleParams standard(bool correlated, double tau = 1.0) {
    return from_occupations(0.2, 0.3, tau, correlated);
  }

  void check() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
    if (!(beta_A > 0.0) || !(beta_B > 0.0) || !std::isfinite(beta_A) || !std::isfinite(beta_B)) {
      throw std::invalid_argument("betas must be finite and > 0");
    }
  }

  double Z_A() const { return 1.0 + std::exp(-beta_A); }
  double Z_B() const { return 1.0 + std::exp(-beta_B); }

  /// -i e^{-(beta_A + beta_B)/2} / (Z_A Z_B), or 0 when uncorrelated.
  complex alpha() const {
    if (!correlated) return 0.0;
    return complex(0.0, -std::exp(-(beta_A + beta_B) / 2.0) / (Z_A() * Z_B()));
  }
};

/// |0> has energy 0; sigma+ = |0><1|, so the interaction couples |01> and |10>.
inline ComplexMatrix qubit_hamiltonian() { return ComplexMatrix::diagonal({0.0, 1.0}); }

/// (pi / 2 tau)(|01><10| + |10><01|)
inline ComplexMatrix exchange_hamiltonian(double tau) {
  ComplexMatrix h(4, 4);
  const double g = std::numbers::pi / (2.0 * tau);
  h(1, 2) = g;
  h(2, 1) = g;
  return h;
}

inline BipartiteSpec build_example_spec(const QubitExampleParams& params) {
  params.check();
  BipartiteSpec spec;
  spec.H_A = qubit_hamiltonian();
  spec.H_B = qubit_hamiltonian();
  spec.beta_A = params.beta_A;
  spec.beta_B = params.beta_B;
  spec.chi_AB = ComplexMatrix(4, 4);
  const complex a = params.alpha();
  spec.chi_AB(1, 2) = a;
  spec.chi_AB(2, 1) = std::conj(a);
  spec.H_int = exchange_hamiltonian(params.tau);
  return spec;
}

/// Closed-form P_f over Q in {-1, 0, +1}. Exactly-zero points are omitted.
inline DiscreteDistribution analytic_forward(const QubitExampleParams& p, double t) {
  p.check();
  const double theta = std::numbers::pi * t / (2.0 * p.tau);
  const double c = std::cos(theta), s = std::sin(theta);
  const double ea = std::exp(-p.beta_A), eb = std::exp(-p.beta_B);
  const double zz = p.Z_A() * p.Z_B();
  double plus, minus, zero;
  if (!p.correlated) {
    plus = eb / zz * s * s;
    minus = ea / zz * s * s;
    zero = (1.0 + ea * eb) / zz + (ea + eb) / zz * c * c;
  } else {
    const double ha = std::exp(-p.beta_A / 2.0), hb = std::exp(-p.beta_B / 2.0);
    const double u = ha * c - hb * s;
    const double v = hb * c + ha * s;
    plus = eb / zz * u * u / (ea + eb);
    minus = ea / zz * v * v / (ea + eb);
    zero = (1.0 + ea * eb) / zz + ea / zz * u * u / (ea + eb) + eb / zz * v * v / (ea + eb);
  }
  DiscreteDistribution d;
  if (minus != 0.0) d.add(-1.0, minus);
  if (zero != 0.0) d.add(0.0, zero);
  if (plus != 0.0) d.add(1.0, plus);
  return d;
}

/// Reversed process: U_t replaced by its adjoint, i.e. t -> -t.
inline DiscreteDistribution analytic_reverse(const QubitExampleParams& p, double t) {
  return analytic_forward(p, -t);
}

}  // namespace qfluct
