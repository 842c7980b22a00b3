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

// Two-time stochastic thermodynamics on conditional trajectories: per-path
// heat, information and entropy terms, the detailed and integral fluctuation
// relations, and binned heat statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfluct/bayesnet.hpp"
#include "qfluct/qcore.hpp"
#include "qfluct/system.hpp"

namespace qfluct {

/// A forward path (s, a0, b0, a1, b1) paired with a reverse anchor s*.
struct AugmentedTrajectory {
  std::size_t s = 0;
  std::size_t a0 = 0, b0 = 0, a1 = 0, b1 = 0;
  std::size_t s_star = 0;
  double W_f = 0.0;  // forward pair weight
  double W_r = 0.0;  // weight of the partner (s*, a1, b1, a0, b0 | s)
};

struct Ledger {
  double Q_A = 0.0, Q_B = 0.0;
  double I0 = 0.0, I1 = 0.0;
  double J0 = 0.0, J1 = 0.0;
  double C0 = 0.0, C1 = 0.0;
  double Sigma_A = 0.0, Sigma_B = 0.0;
  double gamma = 0.0;
  double K = 0.0;
  bool energy_conserving = false;
  double exponent = 0.0;        // beta_A Q_A + beta_B Q_B + I0 - I1 - Sigma_A - Sigma_B + gamma
  double dbeta_exponent = 0.0;  // same with Q_A (beta_A - beta_B) as the heat term
};

struct LedgerEntry {
  AugmentedTrajectory path;
  Ledger ledger;
  double residual = 0.0;  // ln W_f - ln W_r - exponent
};

/// How well the forward and reverse supports pair up. Pairs live on
/// S_f x S_r for each local quadruple (a0 b0, a1 b1), with the uniform
/// coupling 1/max(|S_f|, |S_r|).
struct CouplingStats {
  std::size_t quadruples = 0;
  std::size_t defects = 0;         // quadruples with |S_f| != |S_r|
  double unmatched_forward = 0.0;  // forward mass whose quadruple has empty S_r
  double unmatched_reverse = 0.0;
  double total_forward = 0.0;      // sum of W_f over pairs
  double total_reverse = 0.0;
};

enum class Quantity { I0, I1, J0, J1, C0, C1, Sigma_A, Sigma_B, gamma };
enum class Measure { forward, reverse };

inline constexpr std::array<Quantity, 9> kAllQuantities = {
    Quantity::I0, Quantity::I1,      Quantity::J0,      Quantity::J1,   Quantity::C0,
    Quantity::C1, Quantity::Sigma_A, Quantity::Sigma_B, Quantity::gamma};

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::I0: return "I0";
    case Quantity::I1: return "I1";
    case Quantity::J0: return "J0";
    case Quantity::J1: return "J1";
    case Quantity::C0: return "C0";
    case Quantity::C1: return "C1";
    case Quantity::Sigma_A: return "Sigma_A";
    case Quantity::Sigma_B: return "Sigma_B";
    case Quantity::gamma: return "gamma";
  }
  return "?";
}

inline const char* to_string(Measure m) { return m == Measure::forward ? "forward" : "reverse"; }

/// The measure under which <e^{-X}> = 1 is an identity.
inline Measure defining_measure(Quantity q) {
  return (q == Quantity::I1 || q == Quantity::J1 || q == Quantity::C1) ? Measure::reverse
                                                                      : Measure::forward;
}

/// <e^{-X}> two ways. `complete` sums over the full index space with the
/// population factor cancelled analytically, so null-population branches
/// still contribute their finite limit. `retained` averages over trajectories
/// kept by the probability floor only. `mean` is <X> over retained ones.
struct IntegralFT {
  Quantity quantity = Quantity::I0;
  Measure measure = Measure::forward;
  double complete = 0.0;
  double retained = 0.0;
  double mean = 0.0;
};

struct CombinedFT {
  double exact = 0.0;  // <e^{-exponent}> with beta_A Q_A + beta_B Q_B
  double dbeta = 0.0;  // with Q_A * delta beta
  double reverse_exact = 0.0;  // <e^{+exponent}> under the partner weights
  bool energy_conserving = false;
  /// The form that is an identity for this ensemble.
  double value() const { return energy_conserving ? dbeta : exact; }
};

/// Probability mass on real-valued points (scalars or tuples). Points within
/// `tolerance` on every coordinate share a bin; bins are sorted
/// lexicographically.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(double tolerance = 1e-9) : tol_(tolerance) {}

  void add(std::vector<double> point, double weight) {
    samples_.push_back({std::move(point), weight});
    finalized_ = false;
  }
  void add(double x, double weight) { add(std::vector<double>{x}, weight); }

  const std::vector<std::vector<double>>& points() const { return finalize().points_; }
  const std::vector<double>& probabilities() const { return finalize().probs_; }
  std::size_t size() const { return points().size(); }
  double tolerance() const noexcept { return tol_; }

  double total() const {
    const auto& p = probabilities();
    return std::accumulate(p.begin(), p.end(), 0.0);
  }

  /// Bin mass at `point` (0 when no bin matches).
  double at(const std::vector<double>& point) const {
    const auto& pts = points();
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (matches(pts[i], point)) return probs_[i];
    return 0.0;
  }
  double at(double x) const { return at(std::vector<double>{x}); }

  bool contains(const std::vector<double>& point) const {
    const auto& pts = points();
    return std::any_of(pts.begin(), pts.end(),
                       [&](const auto& p) { return matches(p, point); });
  }

  /// Projection onto the listed coordinates.
  DiscreteDistribution marginal(const std::vector<std::size_t>& coords) const {
    DiscreteDistribution m(tol_);
    const auto& pts = points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<double> q;
      for (std::size_t c : coords) q.push_back(pts[i].at(c));
      m.add(std::move(q), probs_[i]);
    }
    return m;
  }

  /// Largest pointwise |P - P'|, missing points counted as 0.
  double max_abs_difference(const DiscreteDistribution& other) const {
    double m = 0.0;
    const auto& pts = points();
    for (std::size_t i = 0; i < pts.size(); ++i)
      m = std::max(m, std::abs(probs_[i] - other.at(pts[i])));
    const auto& opts = other.points();
    for (std::size_t i = 0; i < opts.size(); ++i)
      if (!contains(opts[i])) m = std::max(m, std::abs(other.probabilities()[i]));
    return m;
  }

 private:
  struct Sample {
    std::vector<double> point;
    double weight;
  };

  bool matches(const std::vector<double>& a, const std::vector<double>& b) const {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::abs(a[k] - b[k]) > tol_) return false;
    return true;
  }

  const DiscreteDistribution& finalize() const {
    if (finalized_) return *this;
    std::vector<std::size_t> order(samples_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return samples_[i].point < samples_[j].point;
    });
    // Bin representatives are created in ascending first coordinate, so the
    // backward scan can stop once it falls out of the tolerance window.
    std::vector<std::vector<double>> reps;
    std::vector<double> mass;
    for (std::size_t idx : order) {
      const auto& smp = samples_[idx];
      std::optional<std::size_t> hit;
      for (std::size_t k = reps.size(); k-- > 0;) {
        if (!reps[k].empty() && !smp.point.empty() && reps[k][0] < smp.point[0] - tol_) break;
        if (matches(reps[k], smp.point)) {
          hit = k;
          break;
        }
      }
      if (hit) {
        mass[*hit] += smp.weight;
      } else {
        reps.push_back(smp.point);
        mass.push_back(smp.weight);
      }
    }
    std::vector<std::size_t> perm(reps.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t i, std::size_t j) { return reps[i] < reps[j]; });
    points_.clear();
    probs_.clear();
    for (std::size_t i : perm) {
      points_.push_back(reps[i]);
      probs_.push_back(mass[i]);
    }
    finalized_ = true;
    return *this;
  }

  double tol_;
  std::vector<Sample> samples_;
  mutable std::vector<std::vector<double>> points_;
  mutable std::vector<double> probs_;
  mutable bool finalized_ = true;
};

struct PsiRow {
  double Q = 0.0;       // Q_A
  double Q_B = 0.0;
  double P_f = 0.0;     // P_f(Q)
  double P_r_neg = 0.0; // P_r(-Q)
  double psi = 0.0;     // <e^{K - gamma} | Q>
  double psi_neg_k = 0.0;  // <e^{-K - gamma} | Q>, for reference
  double lhs = 0.0;     // P_f(Q) psi
  double rhs = 0.0;     // e^{beta_A Q_A + beta_B Q_B} P_r(-Q)
  bool verified = false;  // P_r(-Q) above the floor
};

struct PsiReport {
  std::vector<PsiRow> rows;
  double max_residual = 0.0;       // over verified rows
  double normalization = 0.0;      // sum P_r(-Q) e^{beta Q} / psi over verified rows
  std::size_t unverified = 0;
};

struct JointCheck {
  DiscreteDistribution forward;  // over (Q_A, Q_B, K, gamma), weights W_f
  DiscreteDistribution reverse;  // over reverse-evaluated (Q_A, Q_B, K, gamma), weights W_r
  double max_residual = 0.0;     // |P_f(x) - e^{...} P_r(-x)| over forward bins
  std::size_t unpartnered = 0;   // forward bins with no reverse partner bin
};

struct HeatBalance {
  double lhs_exact = 0.0;  // <beta_A Q_A + beta_B Q_B>
  double lhs_dbeta = 0.0;  // <Q_A> delta beta
  double mean_Q_A = 0.0;
  double delta_I = 0.0;
  double relative_entropy_A = 0.0;
  double relative_entropy_B = 0.0;
  double rhs = 0.0;
  double residual = 0.0;   // |lhs - rhs| for the applicable lhs form
  bool energy_conserving = false;
  bool reversal = false;   // rhs < -tolerance, i.e. heat into the colder side is negative
};

class FluctuationAnalysis;

namespace detail {

inline double safe_log(double x, const char* what) {
  const double l = std::log(x);
  if (!std::isfinite(l)) {
    std::ostringstream os;
    os << "compute_ledgers: log of " << x << " in " << what
       << " on a retained trajectory (probability floor misconfigured?)";
    throw std::domain_error(os.str());
  }
  return l;
}

}  // namespace detail

/// Builds the augmented ensemble and its ledgers from a two-time basis and
/// the forward / reversed (initial-anchor) enumerations. Throws when a
/// retained pair needs the log of zero.
inline std::vector<LedgerEntry> compute_ledgers(const BasisSet& basis,
                                                const LocalMarginals& marginals,
                                                const std::vector<ConditionalTrajectory>& forward,
                                                const std::vector<ConditionalTrajectory>& reverse,
                                                CouplingStats* stats = nullptr) {
  if (basis.steps() != 1) {
    throw std::invalid_argument("compute_ledgers: a two-time grid is required");
  }
  const std::size_t d = basis.dim();
  const std::size_t db = basis.dim_B;
  const Tolerances& tol = basis.tolerances();
  const double beta_a = basis.spec.beta_A;
  const double beta_b = basis.spec.beta_B;

  struct Member {
    std::size_t anchor;
    double weight;
  };
  auto quad = [&](const ConditionalTrajectory& t) {
    return (t.outcomes[0].first * db + t.outcomes[0].second) * d + t.outcomes[1].first * db +
           t.outcomes[1].second;
  };
  std::vector<std::vector<Member>> fwd(d * d), rev(d * d);
  for (const auto& t : forward) fwd[quad(t)].push_back({t.s, t.weight});
  for (const auto& t : reverse) rev[quad(t)].push_back({t.s, t.weight});

  CouplingStats cs;
  std::vector<LedgerEntry> entries;
  for (std::size_t q = 0; q < d * d; ++q) {
    const auto& sf = fwd[q];
    const auto& sr = rev[q];
    if (sf.empty() && sr.empty()) continue;
    ++cs.quadruples;
    if (sr.empty()) {
      for (const auto& m : sf) cs.unmatched_forward += m.weight;
      continue;
    }
    if (sf.empty()) {
      for (const auto& m : sr) cs.unmatched_reverse += m.weight;
      continue;
    }
    if (sf.size() != sr.size()) ++cs.defects;
    const double coupling = 1.0 / static_cast<double>(std::max(sf.size(), sr.size()));

    const std::size_t i = q / d, f = q % d;
    const std::size_t a0 = i / db, b0 = i % db, a1 = f / db, b1 = f % db;
    const double q_a = basis.energy_A[1][a1] - basis.energy_A[0][a0];
    const double q_b = basis.energy_B[1][b1] - basis.energy_B[0][b0];
    const double ln_pa0 = detail::safe_log(marginals.a0[a0], "P(a0)");
    const double ln_pb0 = detail::safe_log(marginals.b0[b0], "P(b0)");
    const double ln_pa1 = detail::safe_log(marginals.a1[a1], "P(a1)");
    const double ln_pb1 = detail::safe_log(marginals.b1[b1], "P(b1)");
    const double ln_p01 = detail::safe_log(marginals.joint0[i], "P(a0,b0)");
    const double ln_p11 = detail::safe_log(marginals.joint1[f], "P(a1,b1)");
    const double sigma_a = ln_pa1 - std::log(basis.thermal_A(1, a1));
    const double sigma_b = ln_pb1 - std::log(basis.thermal_B(1, b1));

    for (const auto& mf : sf) {
      const double ln_ps = detail::safe_log(basis.populations[mf.anchor], "P_s");
      const double ln_cf =
          std::log(basis.conditional[0][mf.anchor * d + i] * basis.conditional[1][mf.anchor * d + f]);
      for (const auto& mr : sr) {
        const double ln_pstar = detail::safe_log(basis.populations[mr.anchor], "P_s*");
        const double ln_rc = std::log(mr.weight) - ln_pstar;

        LedgerEntry e;
        e.path = {mf.anchor, a0, b0, a1, b1, mr.anchor, mf.weight * coupling, mr.weight * coupling};
        Ledger& l = e.ledger;
        l.Q_A = q_a;
        l.Q_B = q_b;
        l.I0 = ln_ps - ln_pa0 - ln_pb0;
        l.I1 = ln_pstar - ln_pa1 - ln_pb1;
        l.J0 = ln_p01 - ln_pa0 - ln_pb0;
        l.J1 = ln_p11 - ln_pa1 - ln_pb1;
        l.C0 = ln_ps - ln_p01;
        l.C1 = ln_pstar - ln_p11;
        l.Sigma_A = sigma_a;
        l.Sigma_B = sigma_b;
        l.gamma = ln_cf - ln_rc;
        if (!std::isfinite(l.gamma)) detail::safe_log(0.0, "gamma");
        l.K = l.I1 - l.I0 + l.Sigma_A + l.Sigma_B;
        l.energy_conserving = std::abs(q_a + q_b) <= tol.energy_conservation;
        const double info = l.I0 - l.I1 - l.Sigma_A - l.Sigma_B + l.gamma;
        l.exponent = beta_a * q_a + beta_b * q_b + info;
        l.dbeta_exponent = q_a * (beta_a - beta_b) + info;
        e.residual = std::log(e.path.W_f) - std::log(e.path.W_r) - l.exponent;
        cs.total_forward += e.path.W_f;
        cs.total_reverse += e.path.W_r;
        entries.push_back(e);
      }
    }
  }
  if (stats) *stats = cs;
  return entries;
}

/// Everything needed for the two-time fluctuation relations of one spec at one time.
class FluctuationAnalysis {
 public:
  FluctuationAnalysis(const BipartiteSpec& spec, double t1)
      : FluctuationAnalysis(build_bases(spec, TimeGrid::single(t1))) {}

  explicit FluctuationAnalysis(BasisSet basis) : basis_(std::move(basis)) {
    if (basis_.steps() != 1) {
      throw std::invalid_argument("FluctuationAnalysis: a two-time grid is required");
    }
    marginals_ = local_marginals(basis_);
    forward_ = enumerate_trajectories(basis_);
    reverse_ = reverse_enumerate(basis_, ReverseAnchor::initial);
    evolved_ = reverse_enumerate(basis_, ReverseAnchor::evolved);
    rc_initial_ = reverse_conditional(basis_, ReverseAnchor::initial);
    rc_evolved_ = reverse_conditional(basis_, ReverseAnchor::evolved);
    entries_ = compute_ledgers(basis_, marginals_, forward_, reverse_, &coupling_);
    for (const auto& e : entries_) {
      max_residual_ = std::max(max_residual_, std::abs(e.residual));
      const auto& l = e.ledger;
      max_decomposition_ = std::max(
          {max_decomposition_, std::abs(l.I0 - l.J0 - l.C0), std::abs(l.I1 - l.J1 - l.C1)});
      all_conserving_ = all_conserving_ && l.energy_conserving;
    }
  }

  const BasisSet& basis() const noexcept { return basis_; }
  const LocalMarginals& marginals() const noexcept { return marginals_; }
  const std::vector<ConditionalTrajectory>& forward() const noexcept { return forward_; }
  /// Reversed process anchored on the initial eigenbasis.
  const std::vector<ConditionalTrajectory>& reverse() const noexcept { return reverse_; }
  /// Final-state ensemble, anchors U(t1)|s>.
  const std::vector<ConditionalTrajectory>& evolved() const noexcept { return evolved_; }
  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
  const CouplingStats& coupling() const noexcept { return coupling_; }
  double time() const noexcept { return basis_.times[1]; }
  double delta_beta() const noexcept { return basis_.spec.beta_A - basis_.spec.beta_B; }

  /// max |ln W_f - ln W_r - exponent| over retained pairs.
  double max_pointwise_residual() const noexcept { return max_residual_; }
  /// max |I - J - C| at both times.
  double max_decomposition_residual() const noexcept { return max_decomposition_; }
  bool all_energy_conserving() const noexcept { return all_conserving_; }

  /// <e^{-X}> for one quantity. `measure` must be the quantity's defining measure.
  IntegralFT integral_ft(Quantity q, Measure measure) const {
    if (measure != defining_measure(q)) {
      throw std::invalid_argument(std::string("integral_ft: ") + to_string(q) +
                                  " is defined under the " + to_string(defining_measure(q)) +
                                  " measure, not " + to_string(measure));
    }
    IntegralFT r{q, measure, 0.0, 0.0, 0.0};
    const std::size_t d = basis_.dim();
    const std::size_t db = basis_.dim_B;
    const auto& m = marginals_;
    const auto& P = basis_.populations;
    const double floor = basis_.tolerances().probability_floor;

    auto pa0 = [&](std::size_t i) { return m.a0[i / db] * m.b0[i % db]; };
    auto pa1 = [&](std::size_t f) { return m.a1[f / db] * m.b1[f % db]; };

    if (q == Quantity::gamma) {
      // independent anchor s* ~ P_{s*}; weight P_s P_{s*} cf, e^{-gamma} = rc / cf
      for (std::size_t ss = 0; ss < d; ++ss) {
        for (std::size_t s = 0; s < d; ++s) {
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t f = 0; f < d; ++f) {
              const double rc = rc_initial_[0][ss * d + i] * rc_initial_[1][ss * d + f];
              const double cf = basis_.conditional[0][s * d + i] * basis_.conditional[1][s * d + f];
              r.complete += P[s] * P[ss] * rc;
              const double wf = P[s] * cf;
              const double wr = P[ss] * rc;
              if (wf >= floor && wr >= floor) {
                r.retained += P[s] * wr;
                r.mean += wf * P[ss] * (std::log(cf) - std::log(rc));
              }
            }
        }
      }
      return r;
    }

    const bool at_final = measure == Measure::reverse;
    const auto& c0 = at_final ? rc_evolved_[0] : basis_.conditional[0];
    const auto& c1 = at_final ? rc_evolved_[1] : basis_.conditional[1];
    for (std::size_t s = 0; s < d; ++s) {
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t f = 0; f < d; ++f) {
          const double cond = c0[s * d + i] * c1[s * d + f];
          const double w = P[s] * cond;
          // e^{-X} w, written so that any P_s in X cancels against w
          double term = 0.0;
          double x = 0.0;
          const bool keep = w >= floor;
          switch (q) {
            case Quantity::I0:
              term = cond * pa0(i);
              if (keep) x = std::log(P[s] / pa0(i));
              break;
            case Quantity::C0:
              term = cond * m.joint0[i];
              if (keep) x = std::log(P[s] / m.joint0[i]);
              break;
            case Quantity::J0:
              if (m.joint0[i] > 0.0) term = w * pa0(i) / m.joint0[i];
              if (keep) x = std::log(m.joint0[i] / pa0(i));
              break;
            case Quantity::I1:
              term = cond * pa1(f);
              if (keep) x = std::log(P[s] / pa1(f));
              break;
            case Quantity::C1:
              term = cond * m.joint1[f];
              if (keep) x = std::log(P[s] / m.joint1[f]);
              break;
            case Quantity::J1:
              if (m.joint1[f] > 0.0) term = w * pa1(f) / m.joint1[f];
              if (keep) x = std::log(m.joint1[f] / pa1(f));
              break;
            case Quantity::Sigma_A: {
              const std::size_t a1 = f / db;
              const double th = basis_.thermal_A(1, a1);
              if (m.a1[a1] > 0.0) term = w * th / m.a1[a1];
              if (keep) x = std::log(m.a1[a1] / th);
              break;
            }
            case Quantity::Sigma_B: {
              const std::size_t b1 = f % db;
              const double th = basis_.thermal_B(1, b1);
              if (m.b1[b1] > 0.0) term = w * th / m.b1[b1];
              if (keep) x = std::log(m.b1[b1] / th);
              break;
            }
            case Quantity::gamma: break;
          }
          r.complete += term;
          if (keep) {
            r.retained += w * std::exp(-x);
            r.mean += w * x;
          }
        }
    }
    return r;
  }

  IntegralFT integral_ft(Quantity q) const { return integral_ft(q, defining_measure(q)); }

  /// <e^{-exponent}> over the augmented forward weights.
  CombinedFT combined_integral_ft() const {
    CombinedFT c;
    c.energy_conserving = all_conserving_;
    for (const auto& e : entries_) {
      c.exact += e.path.W_f * std::exp(-e.ledger.exponent);
      c.dbeta += e.path.W_f * std::exp(-e.ledger.dbeta_exponent);
      c.reverse_exact += e.path.W_r * std::exp(e.ledger.exponent);
    }
    return c;
  }

  /// Forward: Q_A = E_{a1} - E_{a0} weighted by P[Gamma]. Reverse: the heat
  /// into A along the reversed path, E_{a0} - E_{a1}, weighted by P[Gamma*].
  DiscreteDistribution heat_distribution(Measure direction) const {
    DiscreteDistribution dist(basis_.tolerances().binning);
    const auto& trajs = direction == Measure::forward ? forward_ : reverse_;
    const double sign = direction == Measure::forward ? 1.0 : -1.0;
    for (const auto& t : trajs) {
      const double q =
          basis_.energy_A[1][t.outcomes[1].first] - basis_.energy_A[0][t.outcomes[0].first];
      dist.add(sign * q + 0.0, t.weight);
    }
    return dist;
  }

  /// Forward table over (Q_A, Q_B, K, gamma) and the reverse table over the
  /// partner's own quantities, which are the negated forward ones.
  JointCheck joint_distribution() const {
    const double tol = basis_.tolerances().binning;
    JointCheck jc{DiscreteDistribution(tol), DiscreteDistribution(tol), 0.0, 0};
    for (const auto& e : entries_) {
      const auto& l = e.ledger;
      jc.forward.add({l.Q_A, l.Q_B, l.K, l.gamma}, e.path.W_f);
      jc.reverse.add({-l.Q_A + 0.0, -l.Q_B + 0.0, -l.K + 0.0, -l.gamma + 0.0}, e.path.W_r);
    }
    const double ba = basis_.spec.beta_A, bb = basis_.spec.beta_B;
    const auto& pts = jc.forward.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& x = pts[k];
      const std::vector<double> partner{-x[0], -x[1], -x[2], -x[3]};
      if (!jc.reverse.contains(partner)) ++jc.unpartnered;
      const double rhs = std::exp(ba * x[0] + bb * x[1] - x[2] + x[3]) * jc.reverse.at(partner);
      jc.max_residual = std::max(jc.max_residual, std::abs(jc.forward.probabilities()[k] - rhs));
    }
    return jc;
  }

  PsiReport psi_factor() const { return psi_factor(joint_distribution()); }

  /// Psi(Q) = <e^{K - gamma} | Q> from the forward joint table, compared
  /// against P_r(-Q) of the reverse joint table.
  PsiReport psi_factor(const JointCheck& jc) const {
    const double tol = basis_.tolerances().binning;
    const double floor = basis_.tolerances().probability_floor;
    const double ba = basis_.spec.beta_A, bb = basis_.spec.beta_B;
    DiscreteDistribution fq = jc.forward.marginal({0, 1});
    DiscreteDistribution rq = jc.reverse.marginal({0, 1});
    DiscreteDistribution psi_plus(tol), psi_minus(tol);
    const auto& pts = jc.forward.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double p = jc.forward.probabilities()[k];
      psi_plus.add({pts[k][0], pts[k][1]}, p * std::exp(pts[k][2] - pts[k][3]));
      psi_minus.add({pts[k][0], pts[k][1]}, p * std::exp(-pts[k][2] - pts[k][3]));
    }
    PsiReport rep;
    const auto& qs = fq.points();
    for (std::size_t k = 0; k < qs.size(); ++k) {
      PsiRow row;
      row.Q = qs[k][0];
      row.Q_B = qs[k][1];
      row.P_f = fq.probabilities()[k];
      if (!(row.P_f > 0.0)) continue;
      row.P_r_neg = rq.at({-qs[k][0], -qs[k][1]});
      row.psi = psi_plus.at(qs[k]) / row.P_f;
      row.psi_neg_k = psi_minus.at(qs[k]) / row.P_f;
      const double boltz = std::exp(ba * row.Q + bb * row.Q_B);
      row.lhs = row.P_f * row.psi;
      row.rhs = boltz * row.P_r_neg;
      row.verified = row.P_r_neg > floor;
      if (row.verified) {
        rep.max_residual = std::max(rep.max_residual, std::abs(row.lhs - row.rhs));
        rep.normalization += row.P_r_neg * boltz / row.psi;
      } else {
        ++rep.unverified;
      }
      rep.rows.push_back(row);
    }
    return rep;
  }

  HeatBalance mean_heat_balance() const {
    HeatBalance hb;
    const auto& spec = basis_.spec;
    double mean_q_b = 0.0;
    for (const auto& t : forward_) {
      const auto [a0, b0] = t.outcomes[0];
      const auto [a1, b1] = t.outcomes[1];
      hb.mean_Q_A += t.weight * (basis_.energy_A[1][a1] - basis_.energy_A[0][a0]);
      mean_q_b += t.weight * (basis_.energy_B[1][b1] - basis_.energy_B[0][b0]);
    }
    hb.lhs_exact = spec.beta_A * hb.mean_Q_A + spec.beta_B * mean_q_b;
    hb.lhs_dbeta = hb.mean_Q_A * delta_beta();

    const std::size_t da = basis_.dim_A, db = basis_.dim_B;
    const ComplexMatrix& rho0 = basis_.states[0];
    const ComplexMatrix& rho1 = basis_.states[1];
    hb.delta_I = mutual_information(rho1, da, db) - mutual_information(rho0, da, db);
    hb.relative_entropy_A =
        relative_entropy(partial_trace(rho1, da, db, Subsystem::A), basis_.gibbs_A.rho);
    hb.relative_entropy_B =
        relative_entropy(partial_trace(rho1, da, db, Subsystem::B), basis_.gibbs_B.rho);
    hb.rhs = hb.delta_I + hb.relative_entropy_A + hb.relative_entropy_B;
    hb.energy_conserving = all_conserving_ &&
                           std::abs(hb.mean_Q_A + mean_q_b) <= spec.tolerances.energy_conservation;
    hb.residual = std::abs((hb.energy_conserving ? hb.lhs_dbeta : hb.lhs_exact) - hb.rhs);
    hb.reversal = hb.rhs < -spec.tolerances.identity;
    return hb;
  }

 private:
  BasisSet basis_;
  LocalMarginals marginals_;
  std::vector<ConditionalTrajectory> forward_, reverse_, evolved_;
  std::vector<std::vector<double>> rc_initial_, rc_evolved_;
  std::vector<LedgerEntry> entries_;
  CouplingStats coupling_;
  double max_residual_ = 0.0;
  double max_decomposition_ = 0.0;
  bool all_conserving_ = true;
};

}  // namespace qfluct
