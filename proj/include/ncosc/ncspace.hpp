#pragma once

// Noncommutative phase-space constants and the effective-parameter reduction
// of the 2D oscillator after the Bopp shift.

#include <cmath>
#include <string>

#include "ncosc/errors.hpp"

namespace ncosc {

/// Noncommutativity constants. theta has units of length^2, theta_bar of
/// momentum^2. The antisymmetric structure is fixed by eps_12 = +1.
struct NCParams {
  double theta = 0.0;
  double theta_bar = 0.0;
  double hbar = 1.0;

  NCParams() = default;
  NCParams(double theta_, double theta_bar_, double hbar_ = 1.0)
      : theta(theta_), theta_bar(theta_bar_), hbar(hbar_) {
    validate();
  }

  void validate() const {
    if (!std::isfinite(theta) || theta < 0.0)
      throw invalid_parameter("theta must be finite and >= 0");
    if (!std::isfinite(theta_bar) || theta_bar < 0.0)
      throw invalid_parameter("theta_bar must be finite and >= 0");
    if (!std::isfinite(hbar) || hbar <= 0.0)
      throw invalid_parameter("hbar must be finite and > 0");
  }

  bool commutative() const { return theta == 0.0 && theta_bar == 0.0; }
};

struct OscParams {
  double mass = 1.0;
  double omega = 1.0;

  OscParams() = default;
  OscParams(double mass_, double omega_) : mass(mass_), omega(omega_) {
    validate();
  }

  void validate() const {
    if (!std::isfinite(mass) || mass <= 0.0)
      throw invalid_parameter("mass must be finite and > 0");
    if (!std::isfinite(omega) || omega <= 0.0)
      throw invalid_parameter("omega must be finite and > 0");
  }
};

/// Parameters of the equivalent commutative oscillator plus the strength of
/// the angular-momentum coupling it acquires.
struct EffectiveParams {
  double mass_eff;
  double omega_eff;
  double kappa;
};

/// Which constant multiplies kappa in front of (N_g - N_d).
///
/// `hbar` is the reading in which the Bopp-shifted Hamiltonian
/// H = ... - kappa L_z with L_z = hbar (N_g - N_d) is reproduced exactly;
/// `unit` is the literal printed coefficient. The two coincide at hbar = 1.
enum class Coupling { hbar, unit };

inline double coupling_constant(Coupling c, double hbar) {
  return c == Coupling::hbar ? hbar : 1.0;
}

inline const char* to_string(Coupling c) {
  return c == Coupling::hbar ? "hbar" : "unit";
}

namespace detail {
// m^2 w^2 theta^2 / 4
inline double position_deformation(const OscParams& osc, const NCParams& nc) {
  const double mw = osc.mass * osc.omega;
  return mw * mw * nc.theta * nc.theta / 4.0;
}
// theta_bar^2 / (4 m^2 w^2)
inline double momentum_deformation(const OscParams& osc, const NCParams& nc) {
  const double mw = osc.mass * osc.omega;
  return nc.theta_bar * nc.theta_bar / (4.0 * mw * mw);
}
}  // namespace detail

inline double effective_mass(const OscParams& osc, const NCParams& nc) {
  return osc.mass / (1.0 + detail::position_deformation(osc, nc));
}

inline double effective_frequency(const OscParams& osc, const NCParams& nc) {
  return osc.omega * std::sqrt((1.0 + detail::position_deformation(osc, nc)) *
                               (1.0 + detail::momentum_deformation(osc, nc)));
}

inline double angular_coupling(const OscParams& osc, const NCParams& nc) {
  return 0.5 * (nc.theta_bar / osc.mass + osc.mass * osc.omega * osc.omega * nc.theta);
}

inline EffectiveParams effective_params(const OscParams& osc, const NCParams& nc) {
  return {effective_mass(osc, nc), effective_frequency(osc, nc),
          angular_coupling(osc, nc)};
}

/// True when either deformation factor exceeds 0.5, i.e. the constants are
/// no longer small on the oscillator's own scale.
inline bool large_deformation(const OscParams& osc, const NCParams& nc) {
  return detail::position_deformation(osc, nc) > 0.5 ||
         detail::momentum_deformation(osc, nc) > 0.5;
}

}  // namespace ncosc
