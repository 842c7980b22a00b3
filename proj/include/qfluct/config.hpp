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

// JSON experiment configs and machine-readable reports.
//
// Config layout (complex entries are [re, im], matrices row-major):
//   {
//     "dims": [dA, dB],
//     "H_A": [[[re, im], ...], ...], "H_B": ..., "chi_AB": ..., "H_int": ...,
//     "beta_A": 1.386, "beta_B": 0.847,      or "occupation_A"/"occupation_B" for qubits
//     "times": [0.5, 1.0],
//     "tolerances": {"identity": 1e-9},
//     "output": {"report": "report.json", "csv": "heat.csv"}
//   }

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfluct/qcore.hpp"
#include "qfluct/system.hpp"

namespace qfluct {

/// Malformed or structurally invalid input. `check` names what failed.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string check, const std::string& message)
      : std::runtime_error(check + ": " + message), check_(std::move(check)) {}
  const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

struct ExperimentConfig {
  BipartiteSpec spec;
  std::vector<double> times;
  std::string report_path;
  std::string csv_path;
};

namespace detail {

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double number_at(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError("format", where + " must be a number");
  return j.get<double>();
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& doc, const std::string& key,
                                      std::size_t n) {
  if (!doc.contains(key)) throw ConfigError("format", "missing matrix '" + key + "'");
  const auto& rows = doc.at(key);
  if (!rows.is_array() || rows.size() != n) {
    throw ConfigError("dimensions", "'" + key + "' must have " + std::to_string(n) + " rows");
  }
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != n) {
      throw ConfigError("dimensions",
                        "'" + key + "' row " + std::to_string(i) + " must have " +
                            std::to_string(n) + " entries");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto& z = row[j];
      const std::string where = key + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      if (z.is_number()) {
        m(i, j) = number_at(z, where);
      } else if (z.is_array() && z.size() == 2) {
        m(i, j) = complex(number_at(z[0], where), number_at(z[1], where));
      } else {
        throw ConfigError("format", where + " must be [re, im]");
      }
    }
  }
  return m;
}

// beta for a two-level Hamiltonian from the upper-level occupation p.
inline double beta_from_occupation(const ComplexMatrix& h, double p, const std::string& key) {
  if (h.rows() != 2) {
    throw ConfigError("format", "'" + key + "' is only defined for two-level subsystems");
  }
  if (!(p > 0.0 && p < 0.5)) throw ConfigError("beta_range", "'" + key + "' must lie in (0, 0.5)");
  const auto e = hermitian_eigendecompose(h).values;
  const double gap = e[0] - e[1];
  if (!(gap > 0.0)) throw ConfigError("format", "'" + key + "' needs a nondegenerate Hamiltonian");
  return std::log((1.0 - p) / p) / gap;
}

inline double beta_from(const nlohmann::json& doc, const ComplexMatrix& h, const char* side) {
  const std::string bkey = std::string("beta_") + side;
  const std::string okey = std::string("occupation_") + side;
  if (doc.contains(bkey)) {
    if (doc.contains(okey)) throw ConfigError("format", "give '" + bkey + "' or '" + okey + "', not both");
    return number_at(doc.at(bkey), bkey);
  }
  if (doc.contains(okey)) return beta_from_occupation(h, number_at(doc.at(okey), okey), okey);
  throw ConfigError("format", "missing '" + bkey + "'");
}

inline void require_hermitian(const ComplexMatrix& m, const std::string& name, double tol) {
  const double r = m.hermiticity_residual();
  if (r > tol) {
    std::ostringstream os;
    os << "matrix '" << name << "' is not Hermitian (residual " << r << ")";
    throw ConfigError("hermiticity_" + name, os.str());
  }
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  const BipartiteSpec& s = cfg.spec;
  doc["dims"] = {s.dim_A(), s.dim_B()};
  doc["H_A"] = detail::matrix_to_json(s.H_A);
  doc["H_B"] = detail::matrix_to_json(s.H_B);
  doc["chi_AB"] = detail::matrix_to_json(s.chi_AB);
  doc["H_int"] = detail::matrix_to_json(s.H_int);
  doc["beta_A"] = s.beta_A;
  doc["beta_B"] = s.beta_B;
  doc["times"] = cfg.times;
  nlohmann::json tol = nlohmann::json::object();
  for (const auto& name : Tolerances::names()) tol[name] = s.tolerances.get(name);
  doc["tolerances"] = tol;
  nlohmann::json out = nlohmann::json::object();
  if (!cfg.report_path.empty()) out["report"] = cfg.report_path;
  if (!cfg.csv_path.empty()) out["csv"] = cfg.csv_path;
  if (!out.empty()) doc["output"] = out;
  return doc;
}

/// Parses and structurally checks a config. Physics invariants (marginals,
/// positivity, energy conservation) are left to `validate`.
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("format", "config must be a JSON object");
  ExperimentConfig cfg;
  Tolerances& tol = cfg.spec.tolerances;
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    if (!t.is_object()) throw ConfigError("format", "'tolerances' must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      try {
        tol.set(it.key(), detail::number_at(it.value(), "tolerances." + it.key()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("tolerances", e.what());
      }
    }
  }

  std::size_t da = 0, db = 0;
  if (doc.contains("dims")) {
    const auto& d = doc.at("dims");
    if (!d.is_array() || d.size() != 2 || !d[0].is_number_unsigned() || !d[1].is_number_unsigned()) {
      throw ConfigError("dimensions", "'dims' must be [dA, dB] with positive integers");
    }
    da = d[0].get<std::size_t>();
    db = d[1].get<std::size_t>();
  } else if (doc.contains("H_A") && doc.contains("H_B") && doc.at("H_A").is_array() &&
             doc.at("H_B").is_array()) {
    da = doc.at("H_A").size();
    db = doc.at("H_B").size();
  }
  if (da == 0 || db == 0) throw ConfigError("dimensions", "subsystem dimensions must be positive");

  cfg.spec.H_A = detail::matrix_from_json(doc, "H_A", da);
  cfg.spec.H_B = detail::matrix_from_json(doc, "H_B", db);
  cfg.spec.H_int = detail::matrix_from_json(doc, "H_int", da * db);
  cfg.spec.chi_AB = doc.contains("chi_AB") ? detail::matrix_from_json(doc, "chi_AB", da * db)
                                           : ComplexMatrix(da * db, da * db);
  detail::require_hermitian(cfg.spec.H_A, "H_A", tol.hermiticity);
  detail::require_hermitian(cfg.spec.H_B, "H_B", tol.hermiticity);
  detail::require_hermitian(cfg.spec.H_int, "H_int", tol.hermiticity);
  detail::require_hermitian(cfg.spec.chi_AB, "chi", tol.hermiticity);

  cfg.spec.beta_A = detail::beta_from(doc, cfg.spec.H_A, "A");
  cfg.spec.beta_B = detail::beta_from(doc, cfg.spec.H_B, "B");
  for (double b : {cfg.spec.beta_A, cfg.spec.beta_B}) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("beta_range", "betas must be finite and >= 0");
  }

  if (doc.contains("times")) {
    const auto& t = doc.at("times");
    if (!t.is_array()) throw ConfigError("format", "'times' must be an array");
    for (const auto& x : t) cfg.times.push_back(detail::number_at(x, "times[]"));
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    if (!o.is_object()) throw ConfigError("format", "'output' must be an object");
    if (o.contains("report")) cfg.report_path = o.at("report").get<std::string>();
    if (o.contains("csv")) cfg.csv_path = o.at("csv").get<std::string>();
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("io", "cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("format", std::string("JSON parse error: ") + e.what());
  }
  return config_from_json(doc);
}

inline void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("io", "cannot write '" + path + "'");
  out << config_to_json(cfg).dump(2) << '\n';
}

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
inline std::string config_digest(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Command output: every numerical claim with its tolerance and pass flag,
/// plus free-form tables.
class Report {
 public:
  Report(std::string command, std::string digest)
      : command_(std::move(command)), digest_(std::move(digest)) {}

  /// |value - expected| <= tolerance
  bool check(const std::string& name, double value, double expected, double tolerance) {
    const bool ok = std::isfinite(value) && std::abs(value - expected) <= tolerance;
    checks_.push_back({name, value, expected, tolerance, ok});
    return ok;
  }

  /// value <= bound
  bool bound(const std::string& name, double value, double bound) {
    const bool ok = std::isfinite(value) && value <= bound;
    checks_.push_back({name, value, 0.0, bound, ok});
    return ok;
  }

  bool flag(const std::string& name, bool ok) {
    checks_.push_back({name, ok ? 1.0 : 0.0, 1.0, 0.0, ok});
    return ok;
  }

  void note(const std::string& key, nlohmann::ordered_json value) { notes_[key] = std::move(value); }
  void table(const std::string& key, nlohmann::ordered_json rows) { tables_[key] = std::move(rows); }

  bool pass() const {
    for (const auto& c : checks_)
      if (!c.pass) return false;
    return true;
  }
  const std::vector<CheckRecord>& checks() const noexcept { return checks_; }
  const CheckRecord* first_failure() const {
    for (const auto& c : checks_)
      if (!c.pass) return &c;
    return nullptr;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["config_digest"] = digest_;
    j["pass"] = pass();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : checks_) {
      nlohmann::ordered_json r;
      r["name"] = c.name;
      r["value"] = finite_or_null(c.value);
      r["expected"] = c.expected;
      r["tolerance"] = c.tolerance;
      r["pass"] = c.pass;
      arr.push_back(std::move(r));
    }
    j["checks"] = std::move(arr);
    if (!notes_.empty()) j["notes"] = notes_;
    if (!tables_.empty()) j["tables"] = tables_;
    return j;
  }

  static nlohmann::ordered_json finite_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
  }

 private:
  std::string command_;
  std::string digest_;
  std::vector<CheckRecord> checks_;
  nlohmann::ordered_json notes_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json tables_ = nlohmann::ordered_json::object();
};

/// Fixed-format CSV writer: '.' decimal, 17 significant digits, "nan" for
/// undefined cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {
    out_.imbue(std::locale::classic());
    out_ << std::setprecision(17);
  }

  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      if (std::isnan(values[i])) {
        out_ << "nan";
      } else {
        out_ << values[i];
      }
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace qfluct
