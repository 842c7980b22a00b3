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

// Command bodies behind the qfluct CLI verbs. Each returns data (reports,
// rows); argument parsing and file output live in tools/.

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfluct/config.hpp"
#include "qfluct/qfluct.hpp"

namespace qfluct {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// "START:STOP:STEPS" with STEPS >= 1 evenly spaced points, both ends included.
inline std::vector<double> parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw std::invalid_argument("sweep must be START:STOP:STEPS");
  double start = 0.0, stop = 0.0;
  long steps = 0;
  try {
    std::size_t pos = 0;
    start = std::stod(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("start");
    stop = std::stod(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("stop");
    steps = std::stol(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("steps");
  } catch (const std::exception&) {
    throw std::invalid_argument("sweep must be START:STOP:STEPS, got '" + text + "'");
  }
  if (steps < 1) throw std::invalid_argument("sweep STEPS must be >= 1");
  if (!(start >= 0.0) || !(stop >= start)) {
    throw std::invalid_argument("sweep needs 0 <= START <= STOP");
  }
  std::vector<double> t(static_cast<std::size_t>(steps));
  for (long k = 0; k < steps; ++k) {
    t[static_cast<std::size_t>(k)] =
        steps == 1 ? start : start + (stop - start) * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
  return t;
}

/// Splits "NAME=VALUE" and applies it.
inline void apply_tolerance_override(Tolerances& tol, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("--tol expects NAME=VALUE, got '" + text + "'");
  const std::string name = text.substr(0, eq);
  double value = 0.0;
  try {
    std::size_t pos = 0;
    value = std::stod(text.substr(eq + 1), &pos);
    if (pos != text.size() - eq - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument("--tol value for '" + name + "' is not a number");
  }
  tol.set(name, value);
}

inline Report cmd_validate(const ExperimentConfig& cfg) {
  Report rep("validate", config_digest(cfg));
  const ValidationReport v = validate(cfg.spec);
  for (const auto& c : v.checks) rep.bound(c.name, c.residual, c.tolerance);
  return rep;
}

/// All integral relations, the combined relation, the pointwise identity and
/// the supporting table equalities for one spec at one time.
inline Report cmd_verify(const ExperimentConfig& cfg, double t) {
  Report rep("verify", config_digest(cfg));
  const Tolerances& tol = cfg.spec.tolerances;
  const ValidationReport v = validate(cfg.spec);
  for (const auto& c : v.checks) rep.bound("validate." + c.name, c.residual, c.tolerance);
  if (!v.pass()) return rep;

  rep.note("time", t);
  const FluctuationAnalysis an(cfg.spec, t);
  const BasisSet& basis = an.basis();

  nlohmann::ordered_json fts = nlohmann::ordered_json::array();
  for (Quantity q : kAllQuantities) {
    const IntegralFT r = an.integral_ft(q);
    const std::string name = to_string(q);
    rep.check("integral_ft." + name, r.complete, 1.0, tol.integral_ft);
    if (q != Quantity::gamma) rep.bound("jensen." + name, -r.mean, tol.identity);
    fts.push_back({{"quantity", name},
                   {"measure", to_string(r.measure)},
                   {"complete", r.complete},
                   {"retained", r.retained},
                   {"mean", r.mean}});
  }
  rep.table("integral_ft", fts);

  const CombinedFT c = an.combined_integral_ft();
  rep.check("combined_ft", c.value(), 1.0, tol.identity);
  rep.note("combined_ft", {{"form", c.energy_conserving ? "Q_A*delta_beta" : "beta_A*Q_A+beta_B*Q_B"},
                           {"exact", c.exact},
                           {"dbeta", c.dbeta},
                           {"reverse_exact", c.reverse_exact}});
  rep.bound("pointwise_detailed_ft", an.max_pointwise_residual(), tol.identity);
  rep.bound("decomposition_I_eq_J_plus_C", an.max_decomposition_residual(), tol.identity);

  double fwd = 0.0, rev = 0.0, evo = 0.0;
  for (const auto& tr : an.forward()) fwd += tr.weight;
  for (const auto& tr : an.reverse()) rev += tr.weight;
  for (const auto& tr : an.evolved()) evo += tr.weight;
  rep.check("normalization.forward", fwd, 1.0, tol.integral_ft);
  rep.check("normalization.reverse", rev, 1.0, tol.integral_ft);
  rep.check("normalization.final_state_ensemble", evo, 1.0, tol.integral_ft);
  const CouplingStats& cs = an.coupling();
  rep.check("normalization.augmented_forward", cs.total_forward, 1.0, tol.identity);
  rep.check("normalization.augmented_reverse", cs.total_reverse, 1.0, tol.identity);
  rep.note("coupling", {{"quadruples", cs.quadruples},
                        {"defects", cs.defects},
                        {"unmatched_forward", cs.unmatched_forward},
                        {"unmatched_reverse", cs.unmatched_reverse}});

  const HeatBalance hb = an.mean_heat_balance();
  rep.bound("mean_heat_balance", hb.residual, tol.identity);
  rep.note("mean_heat_balance", {{"lhs_dbeta", hb.lhs_dbeta},
                                 {"lhs_exact", hb.lhs_exact},
                                 {"rhs", hb.rhs},
                                 {"delta_I", hb.delta_I},
                                 {"S_A", hb.relative_entropy_A},
                                 {"S_B", hb.relative_entropy_B},
                                 {"heat_reversal", hb.reversal}});

  const std::size_t da = basis.dim_A, db = basis.dim_B;
  rep.check("mutual_information.t0", an.integral_ft(Quantity::I0).mean,
            mutual_information(basis.states[0], da, db), tol.identity);
  rep.check("mutual_information.t1", an.integral_ft(Quantity::I1).mean,
            mutual_information(basis.states[1], da, db), tol.identity);

  const auto table = path_table(basis);
  rep.bound("marginal_consistency", an.marginals().consistency_residual, tol.table);
  rep.bound("choi_equivalence", max_abs_difference(choi_path_probability(basis), table), tol.table);
  if (cfg.spec.chi_AB.max_abs() == 0.0) {
    rep.bound("tpm_reduction", max_abs_difference(tpm_path_table(basis), table), tol.table);
  }

  const JointCheck jc = an.joint_distribution();
  rep.bound("joint_fluctuation_theorem", jc.max_residual, tol.identity);
  const PsiReport ps = an.psi_factor(jc);
  rep.bound("modified_heat_ft", ps.max_residual, tol.identity);
  rep.note("psi", {{"normalization", ps.normalization},
                   {"unverified_bins", ps.unverified},
                   {"mean_gamma", an.integral_ft(Quantity::gamma).mean}});
  return rep;
}

struct HeatRow {
  double t = 0.0;
  double Q = 0.0;
  double P_f = 0.0;
  double P_r = 0.0;      // P_r(Q)
  double ratio = kNaN;   // P_f(Q) / P_r(-Q)
  double exp_q_dbeta = 0.0;
  double psi = kNaN;
};

inline std::vector<HeatRow> heat_rows(const FluctuationAnalysis& an) {
  const double floor = an.basis().tolerances().probability_floor;
  const double tol = an.basis().tolerances().binning;
  const DiscreteDistribution pf = an.heat_distribution(Measure::forward);
  const DiscreteDistribution pr = an.heat_distribution(Measure::reverse);
  const PsiReport psi = an.psi_factor();

  DiscreteDistribution qs(tol);
  for (const auto& p : pf.points()) qs.add(p, 0.0);
  for (const auto& p : pr.points()) qs.add(p, 0.0);

  std::vector<HeatRow> rows;
  for (const auto& p : qs.points()) {
    HeatRow r;
    r.t = an.time();
    r.Q = p[0];
    r.P_f = pf.at(r.Q);
    r.P_r = pr.at(r.Q);
    const double pr_neg = pr.at(-r.Q);
    if (pr_neg > floor) r.ratio = r.P_f / pr_neg;
    r.exp_q_dbeta = std::exp(r.Q * an.delta_beta());
    double num = 0.0, den = 0.0;
    for (const auto& row : psi.rows) {
      if (std::abs(row.Q - r.Q) <= tol) {
        num += row.P_f * row.psi;
        den += row.P_f;
      }
    }
    if (den > 0.0) r.psi = num / den;
    rows.push_back(r);
  }
  return rows;
}

inline void write_heat_csv(std::ostream& out, const std::vector<HeatRow>& rows) {
  CsvWriter csv(out);
  csv.header({"t", "Q", "P_f", "P_r", "ratio", "exp_QDbeta", "Psi"});
  for (const auto& r : rows) csv.row({r.t, r.Q, r.P_f, r.P_r, r.ratio, r.exp_q_dbeta, r.psi});
}

struct ExampleRow {
  double t = 0.0;
  double Q = 0.0;
  double P_f_numeric = 0.0;
  double P_f_analytic = 0.0;
  double P_r_numeric = 0.0;
  double P_r_analytic = 0.0;
};

struct ExampleResult {
  std::vector<ExampleRow> rows;
  double max_forward_deviation = 0.0;
  double max_reverse_deviation = 0.0;
  double max_forward_reverse_difference = 0.0;  // numeric |P_f(Q) - P_r(Q)|
  Report report{"example", ""};
};

/// Numeric and closed-form heat distributions of the two-qubit example side by side.
inline ExampleResult cmd_example(const QubitExampleParams& params, const std::vector<double>& times,
                                 const Tolerances& tol = {}) {
  ExampleResult res;
  BipartiteSpec spec = build_example_spec(params);
  spec.tolerances = tol;
  ExperimentConfig cfg;
  cfg.spec = spec;
  cfg.times = times;
  res.report = Report("example", config_digest(cfg));
  for (double t : times) {
    const FluctuationAnalysis an(spec, t);
    const DiscreteDistribution pf = an.heat_distribution(Measure::forward);
    const DiscreteDistribution pr = an.heat_distribution(Measure::reverse);
    const DiscreteDistribution af = analytic_forward(params, t);
    const DiscreteDistribution ar = analytic_reverse(params, t);
    res.max_forward_deviation = std::max(res.max_forward_deviation, pf.max_abs_difference(af));
    res.max_reverse_deviation = std::max(res.max_reverse_deviation, pr.max_abs_difference(ar));
    res.max_forward_reverse_difference =
        std::max(res.max_forward_reverse_difference, pf.max_abs_difference(pr));
    for (double q : {-1.0, 0.0, 1.0}) {
      res.rows.push_back({t, q, pf.at(q), af.at(q), pr.at(q), ar.at(q)});
    }
  }
  Report& rep = res.report;
  rep.note("correlated", params.correlated);
  rep.note("beta_A", params.beta_A);
  rep.note("beta_B", params.beta_B);
  rep.note("tau", params.tau);
  rep.note("points", times.size());
  rep.bound("oracle.forward_max_deviation", res.max_forward_deviation, tol.oracle);
  rep.bound("oracle.reverse_max_deviation", res.max_reverse_deviation, tol.oracle);
  rep.note("max_forward_reverse_difference", res.max_forward_reverse_difference);
  rep.note("forward_equals_reverse", res.max_forward_reverse_difference == 0.0);
  if (!params.correlated) {
    rep.bound("uncorrelated.forward_equals_reverse", res.max_forward_reverse_difference, tol.oracle);
  }
  return res;
}

inline void write_example_csv(std::ostream& out, const std::vector<ExampleRow>& rows) {
  CsvWriter csv(out);
  csv.header({"t", "Q", "P_f_numeric", "P_f_analytic", "P_r_numeric", "P_r_analytic"});
  for (const auto& r : rows)
    csv.row({r.t, r.Q, r.P_f_numeric, r.P_f_analytic, r.P_r_numeric, r.P_r_analytic});
}

}  // namespace qfluct
