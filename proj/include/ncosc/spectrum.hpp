#pragma once

// Closed-form stationary spectrum and the dense diagonalization used to check it.

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "ncosc/fockspace.hpp"
#include "ncosc/linalg.hpp"
#include "ncosc/ncspace.hpp"

namespace ncosc {

enum class EnergySource { closed_form, numerical };

struct EnergyLevel {
  int n_g = 0;
  int n_d = 0;
  double energy = 0.0;
  EnergySource source = EnergySource::closed_form;
};

/// hbar Omega (n_g + n_d + 1) - c kappa (n_g - n_d).
inline double energy_closed_form(int n_g, int n_d, const OscParams& osc, const NCParams& nc,
                                 Coupling coupling = Coupling::hbar) {
  if (n_g < 0 || n_d < 0) throw invalid_parameter("quantum numbers must be >= 0");
  const double c = coupling_constant(coupling, nc.hbar);
  return nc.hbar * effective_frequency(osc, nc) * (n_g + n_d + 1) -
         c * angular_coupling(osc, nc) * (n_g - n_d);
}

/// Every (n_g, n_d) with n_g + n_d <= max_total_quanta, ascending in energy,
/// ties broken by (n_g, n_d).
inline std::vector<EnergyLevel> spectrum_table(const OscParams& osc, const NCParams& nc,
                                               int max_total_quanta,
                                               Coupling coupling = Coupling::hbar) {
  if (max_total_quanta < 0) throw invalid_parameter("max_total_quanta must be >= 0");
  std::vector<EnergyLevel> out;
  for (int k = 0; k <= max_total_quanta; ++k)
    for (int ng = k; ng >= 0; --ng)
      out.push_back({ng, k - ng, energy_closed_form(ng, k - ng, osc, nc, coupling),
                     EnergySource::closed_form});
  std::sort(out.begin(), out.end(), [](const EnergyLevel& a, const EnergyLevel& b) {
    return std::tie(a.energy, a.n_g, a.n_d) < std::tie(b.energy, b.n_g, b.n_d);
  });
  return out;
}

/// Ascending eigenvalues of a Hermitian operator.
inline std::vector<double> diagonalize(const OperatorMatrix& h) {
  const double scale = std::max(1.0, max_abs(h.entries()));
  if (h.hermiticity_error() > 1e-10 * scale)
    throw invalid_parameter("diagonalize: operator '" + h.label() + "' is not Hermitian");
  const auto eig = hermitian_eigen(h.entries(), false);
  return {eig.values.data(), eig.values.data() + eig.values.size()};
}

/// Energy shift per unit of n_g - n_d, i.e. c kappa. Neighbouring sublevels
/// of one multiplet differ by 2 in n_g - n_d and so sit 2 c kappa apart.
inline double level_splitting(const OscParams& osc, const NCParams& nc, int k,
                              Coupling coupling = Coupling::hbar) {
  if (k < 1) throw invalid_parameter("multiplet index must be >= 1");
  return coupling_constant(coupling, nc.hbar) * angular_coupling(osc, nc);
}

}  // namespace ncosc
