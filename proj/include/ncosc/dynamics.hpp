#pragma once

// Time-dependent oscillator: H(t) = W1(t) N_g + W2(t) N_d + hbar Omega(t),
// its Lewis-Riesenfeld invariants (one per circular sector), the displacement
// unitaries that diagonalize them, and the dynamical/geometric phase ledger.
//
// All phases are dimensionless: (1/hbar) * integral of an energy, or a pure
// number. The two circular sectors carry independent invariant constants.

#include <cmath>
#include <optional>
#include <string>

#include "ncosc/errors.hpp"
#include "ncosc/fockspace.hpp"
#include "ncosc/linalg.hpp"
#include "ncosc/ncspace.hpp"
#include "ncosc/profile.hpp"
#include "ncosc/quadrature.hpp"

namespace ncosc {

enum class Sector { g, d };

inline const char* to_string(Sector s) { return s == Sector::g ? "g" : "d"; }

struct TDParams {
  TimeProfile mass;
  TimeProfile omega;
  NCParams nc;
  double horizon = 1.0;
  Coupling coupling = Coupling::hbar;

  void validate() const {
    nc.validate();
    mass.validate(horizon);
    omega.validate(horizon);
  }

  bool stationary() const { return mass.is_constant() && omega.is_constant(); }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= horizon))
      throw invalid_parameter("time " + std::to_string(t) + " outside [0, " +
                              std::to_string(horizon) + "]");
  }

  OscParams osc_at(double t) const { return OscParams(mass(t), omega(t)); }
};

/// Constants of the invariant alpha N + beta a^dag + gamma a + delta.
/// Hermitian invariants need gamma01 = conj(beta01); the relaxed form keeps
/// an arbitrary gamma01 (e.g. real beta01 = gamma01 as printed).
struct InvariantConstants {
  double alpha01 = 1.0;
  cplx beta01{0.0, 0.0};
  cplx gamma01{0.0, 0.0};
  double delta01 = 0.0;
  bool hermitian = true;

  static InvariantConstants make_hermitian(double alpha, cplx beta, double delta) {
    InvariantConstants c{alpha, beta, std::conj(beta), delta, true};
    c.validate();
    return c;
  }
  static InvariantConstants make_relaxed(double alpha, cplx beta, cplx gamma, double delta) {
    InvariantConstants c{alpha, beta, gamma, delta, false};
    c.validate();
    return c;
  }

  void validate() const {
    if (!std::isfinite(alpha01) || alpha01 == 0.0) throw invalid_parameter("alpha01 must be finite and nonzero");
    if (!std::isfinite(beta01.real()) || !std::isfinite(beta01.imag()) ||
        !std::isfinite(gamma01.real()) || !std::isfinite(gamma01.imag()) || !std::isfinite(delta01))
      throw invalid_parameter("invariant constants must be finite");
    if (hermitian && std::abs(gamma01 - std::conj(beta01)) > 1e-14 * (1.0 + std::abs(beta01)))
      throw invalid_parameter("hermitian invariant requires gamma01 = conj(beta01)");
  }

  /// |beta01|^2 / alpha01^2 = |rho|^2.
  double rho_modulus_sq() const { return std::norm(beta01) / (alpha01 * alpha01); }

  /// Eigenvalue of the invariant on its n-th eigenvector.
  double eigenvalue(int n) const { return alpha01 * n + delta01 - std::norm(beta01) / alpha01; }
};

inline double omega_eff_t(const TDParams& p, double t) {
  p.check_time(t);
  return effective_frequency(p.osc_at(t), p.nc);
}

struct WCoefficients {
  double w1;
  double w2;
};

/// W1 = hbar Omega - c kappa, W2 = hbar Omega + c kappa at time t.
inline WCoefficients coefficients_W(const TDParams& p, double t) {
  p.check_time(t);
  const auto osc = p.osc_at(t);
  const double hw = p.nc.hbar * effective_frequency(osc, p.nc);
  const double ck = coupling_constant(p.coupling, p.nc.hbar) * angular_coupling(osc, p.nc);
  return {hw - ck, hw + ck};
}

inline double sector_W(const TDParams& p, Sector s, double t) {
  const auto w = coefficients_W(p, t);
  return s == Sector::g ? w.w1 : w.w2;
}

/// Integrals over [0, t] of W1, W2 and Omega. Every phase in the ledger goes
/// through this one engine.
class PhaseIntegrals {
 public:
  explicit PhaseIntegrals(const TDParams& p, double tol = 1e-10) : p_(p), quad_(tol) {}

  double w(Sector s, double t) const { return integrate(t, [&](double u) { return sector_W(p_, s, u); }); }
  double w(Sector s, double t0, double t1) const {
    return quad_([&](double u) { return sector_W(p_, s, u); }, t0, t1);
  }
  double omega(double t) const { return integrate(t, [&](double u) { return omega_eff_t(p_, u); }); }

  const TDParams& params() const { return p_; }
  double tolerance() const { return quad_.tolerance(); }

 private:
  template <class F>
  double integrate(double t, F&& f) const {
    p_.check_time(t);
    return quad_(f, 0.0, t);
  }
  const TDParams& p_;
  AdaptiveSimpson quad_;
};

struct InvariantCoefficients {
  double alpha;
  cplx beta;
  cplx gamma;
  double delta;
};

namespace detail {
inline InvariantCoefficients coefficients_from_integral(const InvariantConstants& c, double w_int,
                                                        double hbar) {
  const cplx rot = std::exp(-I_unit * (w_int / hbar));
  return {c.alpha01, c.beta01 * rot, c.gamma01 * std::conj(rot), c.delta01};
}
}  // namespace detail

/// alpha, delta constant; beta = beta01 exp(-(i/hbar) int W), gamma = gamma01 exp(+(i/hbar) int W).
inline InvariantCoefficients invariant_coefficients(const InvariantConstants& c, const TDParams& p,
                                                    double t, Sector s = Sector::g,
                                                    double tol = 1e-10) {
  c.validate();
  const double w_int = PhaseIntegrals(p, tol).w(s, t);
  return detail::coefficients_from_integral(c, w_int, p.nc.hbar);
}

/// rho = beta / alpha01.
inline cplx rho(const InvariantConstants& c, const TDParams& p, double t, Sector s = Sector::g,
                double tol = 1e-10) {
  return invariant_coefficients(c, p, t, s, tol).beta / c.alpha01;
}

namespace detail {
struct SectorOps {
  OperatorMatrix a;
  OperatorMatrix a_dag;
  OperatorMatrix n;
};
inline SectorOps sector_ops(const FockBasis& basis, Sector s) {
  const auto circ = circular_operators(basis);
  if (s == Sector::g) return {circ.a_g, circ.a_g_dag(), circ.n_g()};
  return {circ.a_d, circ.a_d_dag(), circ.n_d()};
}
inline OperatorMatrix invariant_from(const InvariantCoefficients& k, const SectorOps& ops) {
  const auto id = OperatorMatrix::identity(ops.n.basis());
  return (k.alpha * ops.n + k.beta * ops.a_dag + k.gamma * ops.a + cplx(k.delta) * id)
      .relabel("I");
}
}  // namespace detail

inline OperatorMatrix invariant_matrix(const InvariantConstants& c, const TDParams& p, double t,
                                       const FockBasis& basis, Sector s = Sector::g,
                                       double tol = 1e-10) {
  return detail::invariant_from(invariant_coefficients(c, p, t, s, tol), detail::sector_ops(basis, s));
}

/// W(t) N for the requested sector.
inline OperatorMatrix sector_hamiltonian(const TDParams& p, double t, const FockBasis& basis,
                                         Sector s = Sector::g) {
  return (sector_W(p, s, t) * detail::sector_ops(basis, s).n).relabel("H_sector");
}

struct LvnResidual {
  double analytic;           ///< dI/dt from the closed-form derivative of beta, gamma
  double finite_difference;  ///< dI/dt by central difference with step dt_fd
};

/// Interior-subspace Frobenius norm of dI/dt + [I, H_s]/(i hbar), H_s = W N.
inline LvnResidual lvn_residual(const InvariantConstants& c, const TDParams& p, double t,
                                const FockBasis& basis, double dt_fd = -1.0,
                                Sector s = Sector::g, double tol = 1e-10) {
  if (dt_fd <= 0.0) dt_fd = 1e-5 * p.horizon;
  if (t - dt_fd < 0.0 || t + dt_fd > p.horizon)
    throw invalid_parameter("lvn_residual: t too close to the boundary for central differencing");
  const auto ops = detail::sector_ops(basis, s);
  const PhaseIntegrals integrals(p, tol);
  const double hbar = p.nc.hbar;
  const double w_int = integrals.w(s, t);
  const auto k = detail::coefficients_from_integral(c, w_int, hbar);
  const auto inv = detail::invariant_from(k, ops);
  const double w = sector_W(p, s, t);
  const auto h = w * ops.n;
  const auto flow = (cplx(1.0) / (I_unit * hbar)) * commutator(inv, h);

  const cplx beta_dot = -I_unit * (w / hbar) * k.beta;
  const cplx gamma_dot = I_unit * (w / hbar) * k.gamma;
  const auto d_analytic = beta_dot * ops.a_dag + gamma_dot * ops.a;

  // Short integrals keep the difference free of the quadrature error of int_0^t.
  const auto k_plus = detail::coefficients_from_integral(c, w_int + integrals.w(s, t, t + dt_fd), hbar);
  const auto k_minus = detail::coefficients_from_integral(c, w_int - integrals.w(s, t - dt_fd, t), hbar);
  const auto d_fd = (1.0 / (2.0 * dt_fd)) *
                    (detail::invariant_from(k_plus, ops) - detail::invariant_from(k_minus, ops));

  return {(d_analytic + flow).interior().norm(), (d_fd + flow).interior().norm()};
}

/// U = exp(-G), G = rho a^dag - conj(rho) a, for the sector's mode.
/// Requires |rho|^2 <= n_max / 4 so the displaced states fit in the basis.
inline OperatorMatrix displacement_unitary(cplx rho_value, const FockBasis& basis,
                                           Sector s = Sector::g) {
  if (std::norm(rho_value) > basis.n_max() / 4.0)
    throw invalid_parameter("displacement |rho|^2 = " + std::to_string(std::norm(rho_value)) +
                            " exceeds truncation guard n_max/4 = " +
                            std::to_string(basis.n_max() / 4.0));
  if (rho_value == cplx(0.0)) return OperatorMatrix::identity(basis, "U");
  const auto ops = detail::sector_ops(basis, s);
  // G is skew-Hermitian: G = -i K with K = i G Hermitian, so exp(-G) = exp(i K).
  const Matrix g = rho_value * ops.a_dag.entries() - std::conj(rho_value) * ops.a.entries();
  const Matrix k = I_unit * g;
  return {basis, unitary_exp(0.5 * (k + k.adjoint()), 1.0), "U"};
}

/// exp(-G) v without forming the unitary: Taylor series on s sub-steps with
/// ||G||_1 / s <= 1/2, summed until terms fall below 1e-17 |v|.
inline Vector displace(cplx rho_value, const Vector& v, const FockBasis& basis, Sector s = Sector::g) {
  if (std::norm(rho_value) > basis.n_max() / 4.0)
    throw invalid_parameter("displacement |rho|^2 = " + std::to_string(std::norm(rho_value)) +
                            " exceeds truncation guard n_max/4 = " +
                            std::to_string(basis.n_max() / 4.0));
  if (rho_value == cplx(0.0)) return v;
  const auto ops = detail::sector_ops(basis, s);
  const Eigen::SparseMatrix<cplx> g =
      (std::conj(rho_value) * ops.a.entries() - rho_value * ops.a_dag.entries()).sparseView();  // -G
  double col_max = 0.0;
  for (int c = 0; c < g.outerSize(); ++c) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(g, c); it; ++it) sum += std::abs(it.value());
    col_max = std::max(col_max, sum);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * col_max)));
  const double scale = 1.0 / steps;
  Vector out = v;
  const double floor = 1e-17 * v.norm();
  for (int st = 0; st < steps; ++st) {
    Vector term = out;
    Vector acc = out;
    for (int k = 1; k < 60; ++k) {
      term = (scale / k) * (g * term);
      acc += term;
      if (term.norm() <= floor) break;
    }
    out = std::move(acc);
  }
  return out;
}

struct DynamicalPhase {
  double stated;      ///< -(n/hbar) int W
  double corrected;  ///< -((n + |rho|^2)/hbar) int W
};

inline DynamicalPhase dynamical_phase(const InvariantConstants& c, const TDParams& p, int n,
                                      double t, Sector s = Sector::g, double tol = 1e-10) {
  if (n < 0) throw invalid_parameter("quantum number must be >= 0");
  const double w_int = PhaseIntegrals(p, tol).w(s, t) / p.nc.hbar;
  return {-n * w_int, -(n + c.rho_modulus_sq()) * w_int};
}

/// (|beta01|^2 / (hbar alpha01^2)) int W.
inline double geometric_phase(const InvariantConstants& c, const TDParams& p, double t,
                              Sector s = Sector::g, double tol = 1e-10) {
  return c.rho_modulus_sq() * PhaseIntegrals(p, tol).w(s, t) / p.nc.hbar;
}

struct SectorPhases {
  double dynamical_stated = 0.0;
  double dynamical_corrected = 0.0;
  double geometric = 0.0;
};

/// Phase bookkeeping of the assembled solution at one time.
///
/// The printed split adds the geometric phase to -(n/hbar) int W. Conjugating
/// N by the displacement gives <N> = n + |rho|^2, which moves exactly the
/// geometric phase into the dynamical one with opposite sign, so the corrected
/// total of each sector is -(n/hbar) int W and the two totals differ by
/// geometric_g + geometric_d.
struct PhaseLedger {
  double t = 0.0;
  SectorPhases g;
  SectorPhases d;
  double zero_point = 0.0;  ///< -int Omega
  double total_stated = 0.0;
  double total_corrected = 0.0;
  std::optional<double> total_numeric;

  double convention_delta() const { return total_stated - total_corrected; }
  std::optional<double> discrepancy_stated() const {
    if (!total_numeric) return std::nullopt;
    return *total_numeric - total_stated;
  }
  std::optional<double> discrepancy_corrected() const {
    if (!total_numeric) return std::nullopt;
    return *total_numeric - total_corrected;
  }
};

inline PhaseLedger assemble_solution_phase(const InvariantConstants& cg, const InvariantConstants& cd,
                                           const TDParams& p, int n_g, int n_d, double t,
                                           double tol = 1e-10) {
  if (n_g < 0 || n_d < 0) throw invalid_parameter("quantum numbers must be >= 0");
  cg.validate();
  cd.validate();
  const PhaseIntegrals integrals(p, tol);
  const double hbar = p.nc.hbar;
  auto sector = [&](const InvariantConstants& c, Sector s, int n) {
    const double w_int = integrals.w(s, t) / hbar;
    const double geo = c.rho_modulus_sq() * w_int;
    return SectorPhases{-n * w_int, -(n + c.rho_modulus_sq()) * w_int, geo};
  };
  PhaseLedger led;
  led.t = t;
  led.g = sector(cg, Sector::g, n_g);
  led.d = sector(cd, Sector::d, n_d);
  led.zero_point = -integrals.omega(t);
  led.total_stated = led.zero_point + led.g.dynamical_stated + led.g.geometric +
                    led.d.dynamical_stated + led.d.geometric;
  led.total_corrected = led.zero_point + led.g.dynamical_corrected + led.g.geometric +
                        led.d.dynamical_corrected + led.d.geometric;
  return led;
}

/// Largest |rho|^2 a displacement will need over [0, T]; |rho| is constant in t.
inline void check_displacement_guard(const InvariantConstants& c, const FockBasis& basis) {
  if (c.rho_modulus_sq() > basis.n_max() / 4.0)
    throw invalid_parameter("|beta01/alpha01|^2 = " + std::to_string(c.rho_modulus_sq()) +
                            " exceeds truncation guard n_max/4 = " +
                            std::to_string(basis.n_max() / 4.0));
}

/// U_g(t) U_d(t) |n_g, n_d>, normalized, with no phase attached.
inline QuantumState reference_state(const InvariantConstants& cg, const InvariantConstants& cd,
                                    const TDParams& p, int n_g, int n_d, double t,
                                    const FockBasis& basis, double tol = 1e-10) {
  check_displacement_guard(cg, basis);
  check_displacement_guard(cd, basis);
  const auto base = eigenstate_circular(n_g, n_d, basis);
  Vector v = base.amplitudes();
  if (cd.beta01 != cplx(0.0))
    v = displace(rho(cd, p, t, Sector::d, tol), v, basis, Sector::d);
  if (cg.beta01 != cplx(0.0))
    v = displace(rho(cg, p, t, Sector::g, tol), v, basis, Sector::g);
  return {basis, v};
}

}  // namespace ncosc
