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

#include <cmath>

#include <gtest/gtest.h>

#include "qfluct/qubit_example.hpp"

namespace qfluct {
namespace {

TEST(Params, FromOccupations) {
  const auto p = QubitExampleParams::from_occupations(0.2, 0.3, 2.0, true);
  EXPECT_NEAR(p.beta_A, std::log(4.0), 1e-15);
  EXPECT_NEAR(p.beta_B, std::log(7.0 / 3.0), 1e-15);
  EXPECT_NEAR(1.0 / p.Z_A(), 0.8, 1e-15);
  EXPECT_NEAR(1.0 / p.Z_B(), 0.7, 1e-15);
  EXPECT_THROW(QubitExampleParams::from_occupations(0.6, 0.3, 1.0, false), std::invalid_argument);
  EXPECT_THROW(QubitExampleParams::from_occupations(0.2, 0.3, 0.0, false), std::invalid_argument);
}

TEST(Spec, UncorrelatedHasZeroCorrelation) {
  const BipartiteSpec s = build_example_spec(QubitExampleParams::standard(false));
  EXPECT_EQ(s.chi_AB.max_abs(), 0.0);
  EXPECT_TRUE(validate(s).pass());
}

TEST(Spec, CorrelatedAlphaIsImaginaryNegative) {
  const auto p = QubitExampleParams::standard(true);
  const BipartiteSpec s = build_example_spec(p);
  const double mag = std::sqrt(0.25 * 3.0 / 7.0) / (1.25 * 10.0 / 7.0);
  EXPECT_NEAR(s.chi_AB(1, 2).real(), 0.0, 0.0);
  EXPECT_NEAR(s.chi_AB(1, 2).imag(), -mag, 1e-15);
  EXPECT_EQ(s.chi_AB(2, 1), std::conj(s.chi_AB(1, 2)));
  // |alpha|^2 = P(01) P(10) puts rho_AB(0) on the edge of positivity.
  EXPECT_NEAR(mag * mag, 0.24 * 0.14, 1e-15);
  EXPECT_TRUE(validate(s).pass());
}

TEST(Spec, SwapConvention) {
  const ComplexMatrix u = unitary_from_hamiltonian(exchange_hamiltonian(1.5), 1.5);
  EXPECT_NEAR(std::abs(u(2, 1) - complex(0.0, -1.0)), 0.0, 1e-12);
}

TEST(Analytic, UncorrelatedFullSwap) {
  const auto d = analytic_forward(QubitExampleParams::standard(false), 1.0);
  EXPECT_NEAR(d.at(1.0), 0.24, 1e-15);
  EXPECT_NEAR(d.at(-1.0), 0.14, 1e-15);
  EXPECT_NEAR(d.at(0.0), 0.62, 1e-15);
}

TEST(Analytic, UncorrelatedZeroTime) {
  const auto d = analytic_forward(QubitExampleParams::standard(false), 0.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d.at(0.0), 1.0, 1e-15);
}

TEST(Analytic, CorrelatedFullSwap) {
  const auto p = QubitExampleParams::standard(true);
  const double ea = 0.25, eb = 3.0 / 7.0, zz = 1.25 * 10.0 / 7.0;
  const auto d = analytic_forward(p, 1.0);
  EXPECT_NEAR(d.at(1.0), eb * eb / ((ea + eb) * zz), 1e-15);
  EXPECT_NEAR(d.at(-1.0), ea * ea / ((ea + eb) * zz), 1e-15);
}

TEST(Analytic, NormalizedAndPeriodic) {
  for (bool c : {false, true}) {
    const auto p = QubitExampleParams::standard(c, 1.3);
    for (double t : {0.0, 0.2, 0.9, 1.3, 2.1}) {
      const auto d = analytic_forward(p, t);
      EXPECT_NEAR(d.total(), 1.0, 1e-14);
      EXPECT_LE(d.max_abs_difference(analytic_forward(p, t + 2.0 * p.tau)), 1e-14);
    }
  }
}

TEST(Analytic, ReverseSymmetry) {
  const auto u = QubitExampleParams::standard(false);
  const auto c = QubitExampleParams::standard(true);
  for (double t : {0.1, 0.5, 1.0, 1.7}) {
    EXPECT_LE(analytic_forward(u, t).max_abs_difference(analytic_reverse(u, t)), 1e-15);
  }
  for (double t : {0.0, 1.0}) {
    EXPECT_LE(analytic_forward(c, t).max_abs_difference(analytic_reverse(c, t)), 1e-15);
  }
  EXPECT_GT(analytic_forward(c, 0.5).max_abs_difference(analytic_reverse(c, 0.5)), 1e-2);
}

TEST(Oracle, NumericMatchesClosedFormOnGrid) {
  for (bool c : {false, true}) {
    const auto p = QubitExampleParams::standard(c);
    const BipartiteSpec spec = build_example_spec(p);
    for (int k = 0; k <= 100; ++k) {
      const double t = 2.0 * p.tau * k / 100.0;
      const FluctuationAnalysis an(spec, t);
      EXPECT_LE(an.heat_distribution(Measure::forward).max_abs_difference(analytic_forward(p, t)), 1e-10)
          << "c=" << c << " t=" << t;
      EXPECT_LE(an.heat_distribution(Measure::reverse).max_abs_difference(analytic_reverse(p, t)), 1e-10)
          << "c=" << c << " t=" << t;
    }
  }
}

TEST(Oracle, OtherTemperaturesAndTau) {
  const auto p = QubitExampleParams::from_occupations(0.1, 0.45, 0.7, true);
  const BipartiteSpec spec = build_example_spec(p);
  for (double t : {0.05, 0.3, 0.7, 1.1}) {
    const FluctuationAnalysis an(spec, t);
    EXPECT_LE(an.heat_distribution(Measure::forward).max_abs_difference(analytic_forward(p, t)), 1e-10);
    EXPECT_LE(an.heat_distribution(Measure::reverse).max_abs_difference(analytic_reverse(p, t)), 1e-10);
  }
}

}  // namespace
}  // namespace qfluct
