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

// Conditional local trajectories. A latent global eigenstate |s> evolves
// deterministically; at each grid time the local observers measure in the
// eigenbases of their reduced states, conditioned on the evolved |s_n>.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfluct/qcore.hpp"
#include "qfluct/system.hpp"

namespace qfluct {

/// Measurement times t_1..t_N after the implicit t_0 = 0.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw std::invalid_argument("TimeGrid: at least one time required");
    double prev = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      if (!std::isfinite(t) || t < 0.0 || (i > 0 && !(t > prev))) {
        throw std::invalid_argument("TimeGrid: times must be finite, >= 0 and strictly increasing");
      }
      prev = t;
    }
  }

  static TimeGrid single(double t) { return TimeGrid({t}); }

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }

 private:
  std::vector<double> times_;
};

/// Weight of the second global tie-break term, H_A (x) I + c I (x) H_B.
inline constexpr double kGlobalTiebreakWeight = 0.6180339887;

struct BasisSet {
  std::size_t dim_A = 0;
  std::size_t dim_B = 0;
  std::vector<double> times;  // t_0 = 0 first

  EigenSystem global;                 // eigenpairs of rho_AB(0)
  std::vector<double> populations;    // P_s, clamped at 0
  std::vector<ComplexMatrix> unitaries;
  std::vector<ComplexMatrix> states;  // rho_AB(t_n)
  std::vector<ComplexMatrix> evolved; // column s is U(t_n)|s>

  std::vector<EigenSystem> local_A;
  std::vector<EigenSystem> local_B;
  std::vector<std::vector<double>> energy_A;  // <a_n|H_A|a_n>
  std::vector<std::vector<double>> energy_B;
  std::vector<ComplexMatrix> product;         // column a*dim_B+b is |a_n b_n>

  /// conditional[n][s * dim() + ab] = |<a_n b_n|s_n>|^2
  std::vector<std::vector<double>> conditional;

  GibbsState gibbs_A;
  GibbsState gibbs_B;
  BipartiteSpec spec;

  std::size_t dim() const noexcept { return dim_A * dim_B; }
  std::size_t steps() const noexcept { return times.size() - 1; }
  std::size_t last() const noexcept { return times.size() - 1; }
  const Tolerances& tolerances() const noexcept { return spec.tolerances; }

  /// Local eigenvalue of rho_A(t_n) on |a_n>.
  double local_population_A(std::size_t n, std::size_t a) const {
    return std::max(0.0, local_A.at(n).values.at(a));
  }
  double local_population_B(std::size_t n, std::size_t b) const {
    return std::max(0.0, local_B.at(n).values.at(b));
  }

  /// e^{-beta E_{a_n}} / Z_A with E_{a_n} the diagonal expectation.
  double thermal_A(std::size_t n, std::size_t a) const {
    return gibbs_A.occupation(energy_A.at(n).at(a));
  }
  double thermal_B(std::size_t n, std::size_t b) const {
    return gibbs_B.occupation(energy_B.at(n).at(b));
  }
};

namespace detail {

inline std::vector<double> clamp_populations(const std::vector<double>& values, double tol) {
  std::vector<double> p(values);
  for (auto& x : p) {
    if (x < -tol) throw SpecError("positivity_rho0", -x, tol);
    x = std::max(0.0, x);
  }
  return p;
}

inline ComplexMatrix product_basis(const EigenSystem& a, const EigenSystem& b) {
  const std::size_t da = a.size();
  const std::size_t db = b.size();
  ComplexMatrix m(da * db, da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < db; ++j)
      for (std::size_t ra = 0; ra < da; ++ra)
        for (std::size_t rb = 0; rb < db; ++rb)
          m(ra * db + rb, i * db + j) = a.vectors(ra, i) * b.vectors(rb, j);
  return m;
}

// table[s * D + ab] = |<ab|v_s>|^2 for columns v_s of `vectors`.
inline std::vector<double> overlap_table(const ComplexMatrix& product,
                                         const ComplexMatrix& vectors) {
  const ComplexMatrix overlaps = product.adjoint() * vectors;  // (ab, s)
  const std::size_t d = product.rows();
  std::vector<double> table(d * d);
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t ab = 0; ab < d; ++ab) table[s * d + ab] = std::norm(overlaps(ab, s));
  return table;
}

}  // namespace detail

inline BasisSet build_bases(const BipartiteSpec& spec, const TimeGrid& grid) {
  const ComplexMatrix rho0 = build_initial_state(spec);
  const Tolerances& tol = spec.tolerances;

  BasisSet basis;
  basis.spec = spec;
  basis.dim_A = spec.dim_A();
  basis.dim_B = spec.dim_B();
  basis.times.push_back(0.0);
  basis.times.insert(basis.times.end(), grid.times().begin(), grid.times().end());
  basis.gibbs_A = gibbs_state(spec.H_A, spec.beta_A);
  basis.gibbs_B = gibbs_state(spec.H_B, spec.beta_B);

  const ComplexMatrix global_tiebreak =
      tensor_product(spec.H_A, ComplexMatrix::identity(basis.dim_B)) +
      tensor_product(ComplexMatrix::identity(basis.dim_A), spec.H_B) *
          complex(kGlobalTiebreakWeight);
  basis.global = hermitian_eigendecompose(rho0, global_tiebreak);
  basis.populations = detail::clamp_populations(basis.global.values, tol.positivity);

  for (double t : basis.times) {
    const ComplexMatrix u = unitary_from_hamiltonian(spec.H_int, t);
    const ComplexMatrix rho = evolve(rho0, u, tol.unitarity);
    EigenSystem la = hermitian_eigendecompose(
        partial_trace(rho, basis.dim_A, basis.dim_B, Subsystem::A), spec.H_A);
    EigenSystem lb = hermitian_eigendecompose(
        partial_trace(rho, basis.dim_A, basis.dim_B, Subsystem::B), spec.H_B);

    std::vector<double> ea(basis.dim_A), eb(basis.dim_B);
    for (std::size_t a = 0; a < basis.dim_A; ++a) {
      const auto v = la.vector(a);
      ea[a] = spec.H_A.expectation(v, v).real();
    }
    for (std::size_t b = 0; b < basis.dim_B; ++b) {
      const auto v = lb.vector(b);
      eb[b] = spec.H_B.expectation(v, v).real();
    }

    ComplexMatrix prod = detail::product_basis(la, lb);
    ComplexMatrix ev = u * basis.global.vectors;
    basis.conditional.push_back(detail::overlap_table(prod, ev));
    basis.unitaries.push_back(u);
    basis.states.push_back(rho);
    basis.evolved.push_back(std::move(ev));
    basis.local_A.push_back(std::move(la));
    basis.local_B.push_back(std::move(lb));
    basis.energy_A.push_back(std::move(ea));
    basis.energy_B.push_back(std::move(eb));
    basis.product.push_back(std::move(prod));
  }
  return basis;
}

/// |<a_n b_n|s_n>|^2
inline double conditional_prob(const BasisSet& basis, std::size_t n, std::size_t a,
                               std::size_t b, std::size_t s) {
  if (n >= basis.times.size() || a >= basis.dim_A || b >= basis.dim_B || s >= basis.dim()) {
    throw std::out_of_range("conditional_prob: index out of range");
  }
  return basis.conditional[n][s * basis.dim() + a * basis.dim_B + b];
}

struct ConditionalTrajectory {
  std::size_t s = 0;
  /// (a_n, b_n) for n = 0..N in forward time order, also for reverse paths.
  std::vector<std::pair<std::size_t, std::size_t>> outcomes;
  double weight = 0.0;
};

/// Size of the flat index blocks the enumeration is split into. Blocks are
/// independent and merged in index order, so the result does not depend on
/// how (or whether) they are evaluated concurrently.
inline constexpr std::size_t kEnumerationChunk = 4096;

namespace detail {

// Enumerates the flat index space (s, ab_0, ..., ab_N), keeping entries whose
// weight populations[s] * prod_n tables[n][s*D + ab_n] reaches the floor.
inline std::vector<ConditionalTrajectory> enumerate_flat(
    std::size_t dim_b, std::size_t d, const std::vector<double>& populations,
    const std::vector<std::vector<double>>& tables, double floor) {
  const std::size_t steps = tables.size();
  std::size_t per_s = 1;
  for (std::size_t n = 0; n < steps; ++n) per_s *= d;
  const std::size_t total = d * per_s;

  std::vector<std::vector<ConditionalTrajectory>> chunks((total + kEnumerationChunk - 1) /
                                                         kEnumerationChunk);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    auto& out = chunks[c];
    const std::size_t end = std::min(total, (c + 1) * kEnumerationChunk);
    std::vector<std::size_t> ab(steps);
    for (std::size_t idx = c * kEnumerationChunk; idx < end; ++idx) {
      const std::size_t s = idx / per_s;
      std::size_t rest = idx % per_s;
      for (std::size_t n = steps; n-- > 0;) {
        ab[n] = rest % d;
        rest /= d;
      }
      double w = populations[s];
      for (std::size_t n = 0; n < steps && w >= floor; ++n) w *= tables[n][s * d + ab[n]];
      if (!(w >= floor)) continue;
      ConditionalTrajectory tr;
      tr.s = s;
      tr.weight = w;
      tr.outcomes.reserve(steps);
      for (std::size_t n = 0; n < steps; ++n) tr.outcomes.emplace_back(ab[n] / dim_b, ab[n] % dim_b);
      out.push_back(std::move(tr));
    }
  }
  std::vector<ConditionalTrajectory> all;
  for (auto& c : chunks) std::move(c.begin(), c.end(), std::back_inserter(all));
  return all;
}

}  // namespace detail

/// Every (s, a_0, b_0, ..., a_N, b_N) with P_s prod_n P(a_n,b_n|s_n) at or
/// above the probability floor, in flat-index order.
inline std::vector<ConditionalTrajectory> enumerate_trajectories(const BasisSet& basis) {
  return detail::enumerate_flat(basis.dim_B, basis.dim(), basis.populations, basis.conditional,
                                basis.tolerances().probability_floor);
}

/// Anchor states of the reversed process.
///  initial: eigenvectors of rho_AB(0), so the reversed protocol starts from
///           the same global populations in the same basis.
///  evolved: U(t_N)|s>, eigenvectors of rho_AB(t_N).
enum class ReverseAnchor { initial, evolved };

inline const char* to_string(ReverseAnchor a) {
  return a == ReverseAnchor::initial ? "initial" : "evolved";
}

/// table[n][s* * D + ab] = |<a_n b_n| U^dagger(t_{N-n}) |s*>|^2
inline std::vector<std::vector<double>> reverse_conditional(const BasisSet& basis,
                                                            ReverseAnchor anchor) {
  const std::size_t big_n = basis.last();
  const ComplexMatrix& anchors =
      anchor == ReverseAnchor::initial ? basis.global.vectors : basis.evolved[big_n];
  std::vector<std::vector<double>> tables;
  for (std::size_t n = 0; n <= big_n; ++n) {
    const ComplexMatrix back = basis.unitaries[big_n - n].adjoint() * anchors;
    tables.push_back(detail::overlap_table(basis.product[n], back));
  }
  return tables;
}

/// Reversed trajectories Gamma* = (s*, a_N, b_N, ..., a_0, b_0) weighted by
/// P_{s*} prod_n |<a_n b_n|U^dagger(t_{N-n})|s*>|^2, with P_{s*} = P_s.
/// Outcomes are stored in forward time order so a path and its reverse
/// partner share indices.
inline std::vector<ConditionalTrajectory> reverse_enumerate(
    const BasisSet& basis, ReverseAnchor anchor = ReverseAnchor::initial) {
  return detail::enumerate_flat(basis.dim_B, basis.dim(), basis.populations,
                                reverse_conditional(basis, anchor),
                                basis.tolerances().probability_floor);
}

struct LocalMarginals {
  std::vector<double> joint0;  // P(a_0, b_0), index a*dim_B + b
  std::vector<double> a0;
  std::vector<double> b0;
  std::vector<double> joint1;  // P(a_N, b_N)
  std::vector<double> a1;
  std::vector<double> b1;
  /// max |sum_s P_s P(a_N b_N|s_N) - <a_N b_N|rho(t_N)|a_N b_N>|
  double consistency_residual = 0.0;
};

namespace detail {

inline void split_marginals(const std::vector<double>& joint, std::size_t da, std::size_t db,
                            std::vector<double>& pa, std::vector<double>& pb) {
  pa.assign(da, 0.0);
  pb.assign(db, 0.0);
  for (std::size_t a = 0; a < da; ++a)
    for (std::size_t b = 0; b < db; ++b) {
      pa[a] += joint[a * db + b];
      pb[b] += joint[a * db + b];
    }
}

inline std::vector<double> sum_over_s(const BasisSet& basis, std::size_t n) {
  const std::size_t d = basis.dim();
  std::vector<double> joint(d, 0.0);
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t ab = 0; ab < d; ++ab)
      joint[ab] += basis.populations[s] * basis.conditional[n][s * d + ab];
  return joint;
}

}  // namespace detail

/// Local joint and single-party tables at t_0 and t_N, summed over s over the
/// full index space.
inline LocalMarginals local_marginals(const BasisSet& basis) {
  LocalMarginals m;
  const std::size_t d = basis.dim();
  const std::size_t n = basis.last();
  m.joint0 = detail::sum_over_s(basis, 0);
  m.joint1 = detail::sum_over_s(basis, n);
  detail::split_marginals(m.joint0, basis.dim_A, basis.dim_B, m.a0, m.b0);
  detail::split_marginals(m.joint1, basis.dim_A, basis.dim_B, m.a1, m.b1);
  for (std::size_t ab = 0; ab < d; ++ab) {
    const auto v = basis.product[n].column(ab);
    const double direct = basis.states[n].expectation(v, v).real();
    m.consistency_residual = std::max(m.consistency_residual, std::abs(direct - m.joint1[ab]));
  }
  return m;
}

/// Local joint table summed over retained trajectories at time index n.
inline std::vector<double> trajectory_marginal(const BasisSet& basis,
                                               const std::vector<ConditionalTrajectory>& trajs,
                                               std::size_t n) {
  std::vector<double> joint(basis.dim(), 0.0);
  for (const auto& tr : trajs) {
    const auto [a, b] = tr.outcomes.at(n);
    joint[a * basis.dim_B + b] += tr.weight;
  }
  return joint;
}

/// Local two-time path table P(a_0,b_0,a_N,b_N) = sum_s P_s P(a_0b_0|s) P(a_Nb_N|s_N),
/// row-major over (a_0 b_0, a_N b_N).
inline std::vector<double> path_table(const BasisSet& basis) {
  const std::size_t d = basis.dim();
  const std::size_t n = basis.last();
  std::vector<double> table(d * d, 0.0);
  for (std::size_t s = 0; s < d; ++s) {
    const double ps = basis.populations[s];
    if (ps == 0.0) continue;
    for (std::size_t i = 0; i < d; ++i) {
      const double c0 = ps * basis.conditional[0][s * d + i];
      for (std::size_t f = 0; f < d; ++f) table[i * d + f] += c0 * basis.conditional[n][s * d + f];
    }
  }
  return table;
}

/// Two-point-measurement table P_a P_b |<a'b'|U|ab>|^2 on the t_0 and t_N local bases.
inline std::vector<double> tpm_path_table(const BasisSet& basis) {
  const std::size_t d = basis.dim();
  const std::size_t n = basis.last();
  const ComplexMatrix amp = basis.product[n].adjoint() * basis.unitaries[n] * basis.product[0];
  std::vector<double> table(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    const double p0 = basis.local_population_A(0, i / basis.dim_B) *
                      basis.local_population_B(0, i % basis.dim_B);
    for (std::size_t f = 0; f < d; ++f) table[i * d + f] = p0 * std::norm(amp(f, i));
  }
  return table;
}

/// The same path table read off a doubled-space operator:
/// Omega = sum_s P_s |s><s| (x) |s><s|, Lambda = (I (x) U) Omega (I (x) U)^dagger,
/// entries <ab, a'b'|Lambda|ab, a'b'>.
inline std::vector<double> choi_path_probability(const BasisSet& basis) {
  const std::size_t d = basis.dim();
  const std::size_t n = basis.last();
  ComplexMatrix omega(d * d, d * d);
  for (std::size_t s = 0; s < d; ++s) {
    if (basis.populations[s] == 0.0) continue;
    const auto v = basis.global.vector(s);
    const auto vv = tensor_product(std::span<const complex>(v), std::span<const complex>(v));
    omega += ComplexMatrix::outer(vv, vv) * complex(basis.populations[s]);
  }
  const ComplexMatrix lift = tensor_product(ComplexMatrix::identity(d), basis.unitaries[n]);
  const ComplexMatrix lambda = lift * omega * lift.adjoint();

  std::vector<double> table(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto u = basis.product[0].column(i);
    for (std::size_t f = 0; f < d; ++f) {
      const auto w = basis.product[n].column(f);
      const auto uw = tensor_product(std::span<const complex>(u), std::span<const complex>(w));
      table[i * d + f] = lambda.expectation(uw, uw).real();
    }
  }
  return table;
}

inline std::vector<double> choi_path_probability(const BipartiteSpec& spec, const TimeGrid& grid) {
  return choi_path_probability(build_bases(spec, grid));
}

inline double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_difference: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace qfluct
