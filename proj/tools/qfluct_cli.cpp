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

// qfluct: validate, verify, heat, example.
//
// Exit status: 0 every check passed, 1 a physics check failed, 2 bad input.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfluct/commands.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kPhysicsFailure = 1;
constexpr int kInputError = 2;

struct Options {
  std::string config;
  std::optional<double> time;
  std::string sweep;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string report;
  bool correlated = false;
  double occ_a = 0.2;
  double occ_b = 0.3;
  double tau = 1.0;
  std::vector<std::string> tol;
};

// Config from --config, else a random 3x2 spec from --seed, else the two-qubit example.
qfluct::ExperimentConfig resolve_config(const Options& o) {
  qfluct::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = qfluct::load_config(o.config);
  } else if (o.seed) {
    qfluct::SpecRng rng(*o.seed);
    qfluct::RandomSpecOptions ro;
    ro.dim_A = 3;
    ro.dim_B = 2;
    const auto rc = qfluct::random_case(rng, ro);
    cfg.spec = rc.spec;
    cfg.times = {rc.time};
  } else {
    const auto p = qfluct::QubitExampleParams::from_occupations(o.occ_a, o.occ_b, o.tau, o.correlated);
    cfg.spec = qfluct::build_example_spec(p);
  }
  for (const auto& t : o.tol) qfluct::apply_tolerance_override(cfg.spec.tolerances, t);
  return cfg;
}

void emit_report(const qfluct::Report& rep, const std::string& path) {
  const std::string text = rep.to_json().dump(2);
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw qfluct::ConfigError("io", "cannot write '" + path + "'");
  f << text << '\n';
}

int finish(const qfluct::Report& rep) {
  if (const auto* bad = rep.first_failure()) {
    std::cerr << "qfluct " << rep.to_json()["command"].get<std::string>() << ": check '"
              << bad->name << "' failed (value " << bad->value << ", expected " << bad->expected
              << ", tolerance " << bad->tolerance << ")\n";
    return kPhysicsFailure;
  }
  return kPass;
}

template <class Write>
void emit_csv(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw qfluct::ConfigError("io", "cannot write '" + path + "'");
  write(f);
}

std::vector<double> resolve_times(const Options& o, const qfluct::ExperimentConfig& cfg,
                                  const std::string& fallback) {
  if (!o.sweep.empty()) return qfluct::parse_sweep(o.sweep);
  if (o.time) return {*o.time};
  if (!cfg.times.empty()) return cfg.times;
  return qfluct::parse_sweep(fallback);
}

int run_validate(const Options& o) {
  if (o.config.empty()) throw qfluct::ConfigError("usage", "validate needs --config");
  auto cfg = resolve_config(o);
  const auto rep = qfluct::cmd_validate(cfg);
  emit_report(rep, o.out.empty() ? cfg.report_path : o.out);
  return finish(rep);
}

int run_verify(const Options& o) {
  auto cfg = resolve_config(o);
  const double t = o.time ? *o.time : (cfg.times.empty() ? 1.0 : cfg.times.front());
  if (!(t >= 0.0)) throw qfluct::ConfigError("usage", "--time must be >= 0");
  const auto rep = qfluct::cmd_verify(cfg, t);
  emit_report(rep, o.out.empty() ? cfg.report_path : o.out);
  return finish(rep);
}

int run_heat(const Options& o) {
  auto cfg = resolve_config(o);
  const auto v = qfluct::validate(cfg.spec);
  if (!v.pass()) {
    qfluct::Report rep("heat", qfluct::config_digest(cfg));
    for (const auto& c : v.checks) rep.bound("validate." + c.name, c.residual, c.tolerance);
    if (!o.report.empty()) emit_report(rep, o.report);
    return finish(rep);
  }
  const auto times = resolve_times(o, cfg, "0:2:21");
  std::vector<qfluct::HeatRow> rows;
  for (double t : times) {
    const qfluct::FluctuationAnalysis an(cfg.spec, t);
    const auto r = qfluct::heat_rows(an);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  emit_csv(o.out.empty() ? cfg.csv_path : o.out,
           [&](std::ostream& os) { qfluct::write_heat_csv(os, rows); });
  if (!o.report.empty()) {
    qfluct::Report rep("heat", qfluct::config_digest(cfg));
    rep.note("rows", rows.size());
    emit_report(rep, o.report);
  }
  return kPass;
}

int run_example(const Options& o) {
  const auto params = qfluct::QubitExampleParams::from_occupations(o.occ_a, o.occ_b, o.tau, o.correlated);
  qfluct::Tolerances tol;
  for (const auto& t : o.tol) qfluct::apply_tolerance_override(tol, t);
  std::vector<double> times;
  if (!o.sweep.empty()) {
    times = qfluct::parse_sweep(o.sweep);
  } else if (o.time) {
    times = {*o.time};
  } else {
    times = qfluct::parse_sweep("0:" + std::to_string(2.0 * o.tau) + ":101");
  }
  const auto res = qfluct::cmd_example(params, times, tol);
  emit_csv(o.out, [&](std::ostream& os) { qfluct::write_example_csv(os, res.rows); });
  if (!o.report.empty()) emit_report(res.report, o.report);
  return finish(res.report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfluct: conditional-trajectory heat fluctuation theorems for correlated bipartite systems"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool source_flags) {
    sub->add_option("--out", o.out, "output path (report for validate/verify, CSV for heat/example)");
    sub->add_option("--tol", o.tol, "tolerance override NAME=VALUE (repeatable)");
    if (source_flags) {
      sub->add_option("--config", o.config, "experiment config (JSON)");
      sub->add_option("--seed", o.seed, "random 3x2 spec from this 64-bit seed");
    }
    sub->add_option("--correlated", o.correlated, "two-qubit example branch (true/false)");
    sub->add_option("--occ-a", o.occ_a, "excited occupation of qubit A");
    sub->add_option("--occ-b", o.occ_b, "excited occupation of qubit B");
    sub->add_option("--tau", o.tau, "swap duration of the example interaction");
  };

  auto* validate = app.add_subcommand("validate", "check a config's spec invariants");
  validate->add_option("--config", o.config, "experiment config (JSON)")->required();
  validate->add_option("--out", o.out, "report path");
  validate->add_option("--tol", o.tol, "tolerance override NAME=VALUE (repeatable)");

  auto* verify = app.add_subcommand("verify", "integral and detailed fluctuation relations at one time");
  common(verify, true);
  verify->add_option("--time", o.time, "measurement time t1");

  auto* heat = app.add_subcommand("heat", "forward/reverse heat distributions and Psi as CSV");
  common(heat, true);
  heat->add_option("--time", o.time, "single time");
  heat->add_option("--sweep", o.sweep, "START:STOP:STEPS");
  heat->add_option("--report", o.report, "optional JSON report path");

  auto* example = app.add_subcommand("example", "two-qubit example against closed forms");
  common(example, false);
  example->add_option("--time", o.time, "single time");
  example->add_option("--sweep", o.sweep, "START:STOP:STEPS (default 0:2tau:101)");
  example->add_option("--report", o.report, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInputError;
  }

  try {
    if (*validate) return run_validate(o);
    if (*verify) return run_verify(o);
    if (*heat) return run_heat(o);
    if (*example) return run_example(o);
  } catch (const qfluct::ConfigError& e) {
    std::cerr << "qfluct: config error: " << e.what() << '\n';
    return kInputError;
  } catch (const qfluct::SpecError& e) {
    std::cerr << "qfluct: " << e.what() << '\n';
    return kPhysicsFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qfluct: invalid input: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "qfluct: error: " << e.what() << '\n';
    return kPhysicsFailure;
  }
  return kInputError;
}
