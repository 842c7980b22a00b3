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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfluct/qcore.hpp"

namespace qfluct {

/// Named numerical tolerances. Every check in the library reads its bound
/// from here so callers (and the CLI's --tol flag) can override them.
struct Tolerances {
  double hermiticity = 1e-10;
  double marginal = 1e-10;
  double trace = 1e-10;
  double positivity = 1e-10;
  double energy_conservation = 1e-10;
  double unitarity = 1e-10;
  double probability_floor = 1e-14;
  double binning = 1e-9;
  double identity = 1e-9;
  double integral_ft = 1e-10;
  double table = 1e-12;
  double oracle = 1e-10;

  /// Sets a tolerance by name; throws std::invalid_argument for unknown names.
  void set(const std::string& name, double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument("tolerance '" + name + "' must be finite and >= 0");
    }
    field(name) = value;
  }

  double get(const std::string& name) const {
    return const_cast<Tolerances*>(this)->field(name);
  }

  static std::vector<std::string> names() {
    return {"hermiticity",       "marginal", "trace",    "positivity",
            "energy_conservation", "unitarity", "probability_floor",
            "binning",           "identity", "integral_ft", "table", "oracle"};
  }

 private:
  double& field(const std::string& name) {
    if (name == "hermiticity") return hermiticity;
    if (name == "marginal") return marginal;
    if (name == "trace") return trace;
    if (name == "positivity") return positivity;
    if (name == "energy_conservation") return energy_conservation;
    if (name == "unitarity") return unitarity;
    if (name == "probability_floor") return probability_floor;
    if (name == "binning") return binning;
    if (name == "identity") return identity;
    if (name == "integral_ft") return integral_ft;
    if (name == "table") return table;
    if (name == "oracle") return oracle;
    throw std::invalid_argument("unknown tolerance name '" + name + "'");
  }
};

/// One experiment: two local Hamiltonians at their own inverse temperatures,
/// a traceless correlation term and an interaction generator on the joint space.
struct BipartiteSpec {
  ComplexMatrix H_A;
  ComplexMatrix H_B;
  double beta_A = 1.0;
  double beta_B = 1.0;
  ComplexMatrix chi_AB;
  ComplexMatrix H_int;
  Tolerances tolerances;

  std::size_t dim_A() const noexcept { return H_A.rows(); }
  std::size_t dim_B() const noexcept { return H_B.rows(); }
  std::size_t dim() const noexcept { return dim_A() * dim_B(); }

  /// H_A (x) I + I (x) H_B
  ComplexMatrix bare_hamiltonian() const {
    return tensor_product(H_A, ComplexMatrix::identity(dim_B())) +
           tensor_product(ComplexMatrix::identity(dim_A()), H_B);
  }
};

struct GibbsState {
  ComplexMatrix rho;
  double Z = 1.0;
  double beta = 0.0;
  std::vector<double> energies;  // descending

  /// e^{-beta E} / Z
  double occupation(double energy) const { return std::exp(-beta * energy) / Z; }
};

/// exp(-beta H)/Z. The exponent is shifted by the ground energy before
/// exponentiating; Z is reported unshifted.
inline GibbsState gibbs_state(const ComplexMatrix& h, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("gibbs_state: beta must be finite and >= 0");
  }
  const EigenSystem es = hermitian_eigendecompose(h);
  const double e_min = es.values.back();
  double z_shifted = 0.0;
  for (double e : es.values) z_shifted += std::exp(-beta * (e - e_min));
  GibbsState g;
  g.beta = beta;
  g.energies = es.values;
  g.Z = z_shifted * std::exp(-beta * e_min);
  g.rho = es.apply_function(
      [&](double e) { return complex(std::exp(-beta * (e - e_min)) / z_shifted); });
  return g;
}

/// Raised when a spec fails one of its invariants. `check` is the name of the
/// first failed check and `residual` its magnitude.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string check, double residual, double tolerance)
      : std::runtime_error(format(check, residual, tolerance)),
        check_(std::move(check)),
        residual_(residual),
        tolerance_(tolerance) {}

  const std::string& check() const noexcept { return check_; }
  double residual() const noexcept { return residual_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  static std::string format(const std::string& check, double residual, double tol) {
    std::ostringstream os;
    os << "spec check '" << check << "' failed: residual " << residual << " > tolerance "
       << tol;
    return os.str();
  }

  std::string check_;
  double residual_;
  double tolerance_;
};

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.pass; });
  }

  const ValidationCheck* first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }

  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).max_abs();
}

inline ComplexMatrix product_state(const BipartiteSpec& spec) {
  return tensor_product(gibbs_state(spec.H_A, spec.beta_A).rho,
                        gibbs_state(spec.H_B, spec.beta_B).rho);
}

}  // namespace detail

/// Runs every spec invariant and records its residual. Never throws for a
/// physically invalid spec; failures are data.
inline ValidationReport validate(const BipartiteSpec& spec) {
  const Tolerances& tol = spec.tolerances;
  ValidationReport report;
  auto add = [&](std::string name, double residual, double tolerance) {
    const bool ok = std::isfinite(residual) && residual <= tolerance;
    report.checks.push_back({std::move(name), residual, tolerance, ok});
    return ok;
  };

  const std::size_t d = spec.dim();
  const bool square = spec.H_A.is_square() && spec.H_B.is_square() &&
                      spec.chi_AB.is_square() && spec.H_int.is_square();
  const bool shapes = square && spec.chi_AB.rows() == d && spec.H_int.rows() == d;
  if (!add("dimensions", shapes ? 0.0 : 1.0, 0.0)) return report;

  const bool betas = std::isfinite(spec.beta_A) && std::isfinite(spec.beta_B) &&
                     spec.beta_A >= 0.0 && spec.beta_B >= 0.0;
  if (!add("beta_range", betas ? 0.0 : 1.0, 0.0)) return report;

  bool herm = true;
  herm &= add("hermiticity_H_A", spec.H_A.hermiticity_residual(), tol.hermiticity);
  herm &= add("hermiticity_H_B", spec.H_B.hermiticity_residual(), tol.hermiticity);
  herm &= add("hermiticity_H_int", spec.H_int.hermiticity_residual(), tol.hermiticity);
  herm &= add("hermiticity_chi", spec.chi_AB.hermiticity_residual(), tol.hermiticity);
  if (!herm) return report;

  add("trace_chi", std::abs(spec.chi_AB.trace()), tol.trace);
  const ComplexMatrix chi_a = partial_trace(spec.chi_AB, spec.dim_A(), spec.dim_B(), Subsystem::A);
  const ComplexMatrix chi_b = partial_trace(spec.chi_AB, spec.dim_A(), spec.dim_B(), Subsystem::B);
  add("marginal_chi_A", chi_a.max_abs(), tol.marginal);
  add("marginal_chi_B", chi_b.max_abs(), tol.marginal);

  const ComplexMatrix rho0 = detail::product_state(spec) + spec.chi_AB;
  add("trace_rho0", std::abs(rho0.trace() - complex(1.0)), tol.trace);
  const double lambda_min = hermitian_eigendecompose(rho0).values.back();
  add("positivity_rho0", std::max(0.0, -lambda_min), tol.positivity);
  add("energy_conservation", commutator_norm(spec.H_int, spec.bare_hamiltonian()),
      tol.energy_conservation);
  return report;
}

/// rho_A^0 (x) rho_B^0 + chi_AB. Throws SpecError naming the first failed check.
inline ComplexMatrix build_initial_state(const BipartiteSpec& spec) {
  const ValidationReport report = validate(spec);
  if (const auto* bad = report.first_failure()) {
    throw SpecError(bad->name, bad->residual, bad->tolerance);
  }
  return detail::product_state(spec) + spec.chi_AB;
}

/// Largest entry of U^dagger U - I.
inline double unitarity_residual(const ComplexMatrix& u) {
  if (!u.is_square()) return std::numeric_limits<double>::infinity();
  return (u.adjoint() * u - ComplexMatrix::identity(u.rows())).max_abs();
}

/// U rho U^dagger
inline ComplexMatrix evolve(const ComplexMatrix& rho, const ComplexMatrix& u,
                            double unitarity_tol = 1e-10) {
  if (!rho.is_square() || !u.is_square() || rho.rows() != u.rows()) {
    throw std::invalid_argument("evolve: dimension mismatch");
  }
  const double r = unitarity_residual(u);
  if (r > unitarity_tol) {
    std::ostringstream os;
    os << "evolve: operator is not unitary (residual " << r << ")";
    throw std::invalid_argument(os.str());
  }
  return u * rho * u.adjoint();
}

}  // namespace qfluct
