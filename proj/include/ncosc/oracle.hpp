#pragma once

// Independent numerical checks: direct propagation of the Schroedinger
// equation in the truncated basis, phase extraction against a reference
// state, invariant-expectation drift, and the spectrum cross-check.
//
// The propagator only uses matrix construction from fockspace and the scalar
// reductions from ncspace; it never evaluates the analytic phase formulas.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ncosc/dynamics.hpp"
#include "ncosc/errors.hpp"
#include "ncosc/fockspace.hpp"
#include "ncosc/linalg.hpp"
#include "ncosc/ncspace.hpp"
#include "ncosc/spectrum.hpp"

namespace ncosc {

enum class HamiltonianSource { ladder, direct, sector_g, sector_d, custom };

inline const char* to_string(HamiltonianSource s) {
  switch (s) {
    case HamiltonianSource::ladder: return "ladder";
    case HamiltonianSource::direct: return "direct";
    case HamiltonianSource::sector_g: return "sector_g";
    case HamiltonianSource::sector_d: return "sector_d";
    case HamiltonianSource::custom: return "custom";
  }
  return "?";
}

/// H(t) = sum_i c_i(t) G_i over fixed Hermitian generators.
struct HamiltonianTerm {
  OperatorMatrix generator;
  std::function<double(double)> coefficient;
};

struct HamiltonianFamily {
  FockBasis basis;
  double hbar = 1.0;
  HamiltonianSource source = HamiltonianSource::custom;
  std::vector<HamiltonianTerm> terms;

  OperatorMatrix at(double t) const {
    Matrix h = Matrix::Zero(basis.dim(), basis.dim());
    for (const auto& term : terms) h += term.coefficient(t) * term.generator.entries();
    return {basis, h, "H(t)"};
  }
};

namespace detail {
inline double ladder_frequency(const TDParams& p, double t) {
  return effective_frequency(p.osc_at(t), p.nc);
}
inline double ladder_coupling(const TDParams& p, double t) {
  return coupling_constant(p.coupling, p.nc.hbar) * angular_coupling(p.osc_at(t), p.nc);
}
}  // namespace detail

inline HamiltonianFamily constant_family(const OperatorMatrix& h, double hbar) {
  return {h.basis(), hbar, HamiltonianSource::custom, {{h, [](double) { return 1.0; }}}};
}

/// hbar Omega(t) (N_g + N_d + 1) - c kappa(t) (N_g - N_d).
inline HamiltonianFamily ladder_family(const TDParams& p, const FockBasis& basis) {
  const auto circ = circular_operators(basis);
  const auto ng = circ.n_g();
  const auto nd = circ.n_d();
  const auto id = OperatorMatrix::identity(basis);
  const double hbar = p.nc.hbar;
  return {basis, hbar, HamiltonianSource::ladder,
          {{ng + nd + id, [p, hbar](double t) { return hbar * detail::ladder_frequency(p, t); }},
           {ng - nd, [p](double t) { return -detail::ladder_coupling(p, t); }}}};
}

/// The Bopp-shifted oscillator with m(t), omega(t), written in the Fock basis
/// of the effective oscillator at t = 0.
inline HamiltonianFamily direct_family(const TDParams& p, const FockBasis& basis) {
  if (p.stationary()) {
    HamiltonianFamily f = constant_family(hamiltonian_direct(p.osc_at(0.0), p.nc, basis), p.nc.hbar);
    f.source = HamiltonianSource::direct;
    return f;
  }
  const auto ops = position_momentum(effective_params(p.osc_at(0.0), p.nc), p.nc.hbar, basis);
  const auto nco = bopp_shift(ops, p.nc);
  const auto kinetic = nco.px_hat * nco.px_hat + nco.py_hat * nco.py_hat;
  const auto potential = nco.x_hat * nco.x_hat + nco.y_hat * nco.y_hat;
  return {basis, p.nc.hbar, HamiltonianSource::direct,
          {{kinetic, [p](double t) { return 1.0 / (2.0 * p.mass(t)); }},
           {potential, [p](double t) {
              const double w = p.omega(t);
              return 0.5 * p.mass(t) * w * w;
            }}}};
}

/// W(t) N for one circular sector alone.
inline HamiltonianFamily sector_family(const TDParams& p, const FockBasis& basis, Sector s) {
  const auto circ = circular_operators(basis);
  const double hbar = p.nc.hbar;
  const double sign = s == Sector::g ? -1.0 : 1.0;
  return {basis, hbar, s == Sector::g ? HamiltonianSource::sector_g : HamiltonianSource::sector_d,
          {{s == Sector::g ? circ.n_g() : circ.n_d(), [p, hbar, sign](double t) {
              return hbar * detail::ladder_frequency(p, t) + sign * detail::ladder_coupling(p, t);
            }}}};
}

inline HamiltonianFamily make_family(const TDParams& p, const FockBasis& basis, HamiltonianSource src) {
  switch (src) {
    case HamiltonianSource::ladder: return ladder_family(p, basis);
    case HamiltonianSource::direct: return direct_family(p, basis);
    case HamiltonianSource::sector_g: return sector_family(p, basis, Sector::g);
    case HamiltonianSource::sector_d: return sector_family(p, basis, Sector::d);
    case HamiltonianSource::custom: break;
  }
  throw invalid_parameter("custom Hamiltonian families must be built explicitly");
}

/// Midpoint-exponential (second-order Magnus) stepping,
/// psi(t + h) = exp(-(i/hbar) h H(t + h/2)) psi(t), with exact exponentials.
///
/// When all generators commute they are diagonalized once jointly and each
/// step is a diagonal phase; otherwise H(t + h/2) is diagonalized per step.
class MagnusPropagator {
 public:
  explicit MagnusPropagator(HamiltonianFamily family) : family_(std::move(family)) {
    if (family_.terms.empty()) throw invalid_parameter("empty Hamiltonian family");
    try_joint_diagonalization();
  }

  bool commuting() const { return commuting_; }
  const HamiltonianFamily& family() const { return family_; }

  /// Advances `psi` (lab-basis amplitudes) from t0 to t1 in n equal substeps.
  Vector advance(const Vector& psi, double t0, double t1, long n) const {
    const double h = (t1 - t0) / static_cast<double>(n);
    if (commuting_) {
      Vector c = vectors_.adjoint() * psi;
      c = advance_diagonal(c, t0, h, n);
      return vectors_ * c;
    }
    Vector v = psi;
    for (long k = 0; k < n; ++k) {
      const double mid = t0 + (static_cast<double>(k) + 0.5) * h;
      v = unitary_exp(family_.at(mid).entries(), -h / family_.hbar) * v;
    }
    return v;
  }

 private:
  Vector advance_diagonal(Vector c, double t0, double h, long n) const {
    const auto dim = c.size();
    RealVector energy(dim);
    for (long k = 0; k < n; ++k) {
      const double mid = t0 + (static_cast<double>(k) + 0.5) * h;
      energy.setZero();
      for (std::size_t i = 0; i < family_.terms.size(); ++i)
        energy += family_.terms[i].coefficient(mid) * diagonals_[i];
      for (Eigen::Index j = 0; j < dim; ++j)
        c[j] *= std::exp(-I_unit * (h * energy[j] / family_.hbar));
    }
    return c;
  }

  void try_joint_diagonalization() {
    const auto& terms = family_.terms;
    double scale = 0.0;
    for (const auto& t : terms) scale = std::max(scale, max_abs(t.generator.entries()));
    scale = std::max(scale, 1.0);
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = i + 1; j < terms.size(); ++j)
        if (max_abs(commutator(terms[i].generator, terms[j].generator).entries()) > 1e-10 * scale * scale)
          return;
    // Diagonalize the generators in turn, each one inside the degenerate
    // eigenspaces left by the previous ones.
    const auto dim = family_.basis.dim();
    Matrix v = Matrix::Identity(dim, dim);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> groups{{0, dim}};  // [begin, size)
    for (const auto& t : terms) {
      std::vector<std::pair<Eigen::Index, Eigen::Index>> next;
      for (auto [begin, size] : groups) {
        const Matrix block = v.middleCols(begin, size);
        Matrix sub = block.adjoint() * t.generator.entries() * block;
        sub = 0.5 * (sub + sub.adjoint()).eval();
        const auto eig = hermitian_eigen(sub);
        v.middleCols(begin, size) = block * eig.vectors;
        Eigen::Index run = begin;
        for (Eigen::Index j = 1; j <= size; ++j) {
          if (j == size || eig.values[j] - eig.values[j - 1] > 1e-9 * scale) {
            next.emplace_back(run, begin + j - run);
            run = begin + j;
          }
        }
      }
      groups = std::move(next);
    }
    std::vector<RealVector> diagonals;
    for (const auto& t : terms) {
      const Matrix d = v.adjoint() * t.generator.entries() * v;
      Matrix off = d;
      off.diagonal().setZero();
      if (max_abs(off) > 1e-9 * scale) return;
      diagonals.push_back(d.diagonal().real());
    }
    vectors_ = std::move(v);
    diagonals_ = std::move(diagonals);
    commuting_ = true;
  }

  HamiltonianFamily family_;
  bool commuting_ = false;
  Matrix vectors_;
  std::vector<RealVector> diagonals_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;
  double norm_drift = 0.0;
  HamiltonianSource hamiltonian_source = HamiltonianSource::custom;
  std::vector<long> substeps;  ///< accepted substeps per grid interval

  static constexpr double accepted_norm_drift = 1e-8;
  bool accepted() const { return norm_drift <= accepted_norm_drift; }
};

inline constexpr long max_substeps = 1L << 18;

namespace detail {
inline void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw invalid_parameter("time grid needs at least two nodes");
  if (grid.front() != 0.0) throw invalid_parameter("time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw invalid_parameter("time grid must be strictly increasing");
}
inline void check_normalized(const QuantumState& psi0) {
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw invalid_parameter("initial state is not normalized");
}
inline Trajectory start_trajectory(const MagnusPropagator& prop, const QuantumState& psi0,
                                   const std::vector<double>& grid) {
  check_grid(grid);
  check_normalized(psi0);
  if (!(psi0.basis() == prop.family().basis)) throw basis_mismatch("initial state basis differs");
  Trajectory traj;
  traj.hamiltonian_source = prop.family().source;
  traj.times = grid;
  traj.states.reserve(grid.size());
  traj.states.push_back(psi0);
  traj.norm_drift = std::abs(psi0.norm() - 1.0);
  return traj;
}
inline void push_state(Trajectory& traj, const FockBasis& basis, Vector v) {
  auto s = QuantumState::unnormalized(basis, std::move(v));
  traj.norm_drift = std::max(traj.norm_drift, std::abs(s.norm() - 1.0));
  traj.states.push_back(std::move(s));
}
}  // namespace detail

/// Adaptive propagation: each grid interval is split into n substeps, n
/// doubling until two successive refinements agree to `tol` (Euclidean norm).
inline Trajectory evolve(const MagnusPropagator& prop, const QuantumState& psi0,
                         const std::vector<double>& grid, double tol) {
  if (!(tol > 0.0)) throw invalid_parameter("tolerance must be > 0");
  auto traj = detail::start_trajectory(prop, psi0, grid);
  const auto& basis = prop.family().basis;
  Vector psi = psi0.amplitudes();
  long n = 1;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t0 = grid[k - 1], t1 = grid[k];
    n = std::max(1L, n / 2);
    Vector coarse = prop.advance(psi, t0, t1, n);
    while (true) {
      if (2 * n > max_substeps)
        throw numerical_failure("evolve: tolerance " + std::to_string(tol) +
                                " unreachable within " + std::to_string(max_substeps) +
                                " substeps on [" + std::to_string(t0) + ", " + std::to_string(t1) + "]");
      Vector fine = prop.advance(psi, t0, t1, 2 * n);
      const double err = (fine - coarse).norm();
      n *= 2;
      if (err <= tol) {
        psi = std::move(fine);
        break;
      }
      coarse = std::move(fine);
    }
    traj.substeps.push_back(n);
    detail::push_state(traj, basis, psi);
  }
  return traj;
}

inline Trajectory evolve(const TDParams& p, const QuantumState& psi0, const std::vector<double>& grid,
                         double tol, HamiltonianSource src = HamiltonianSource::direct) {
  p.validate();
  if (grid.back() > p.horizon) throw invalid_parameter("time grid extends past the horizon");
  return evolve(MagnusPropagator(make_family(p, psi0.basis(), src)), psi0, grid, tol);
}

/// Fixed number of substeps per grid interval (for convergence studies).
inline Trajectory evolve_fixed(const MagnusPropagator& prop, const QuantumState& psi0,
                               const std::vector<double>& grid, long substeps) {
  if (substeps < 1) throw invalid_parameter("substeps must be >= 1");
  auto traj = detail::start_trajectory(prop, psi0, grid);
  Vector psi = psi0.amplitudes();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    psi = prop.advance(psi, grid[k - 1], grid[k], substeps);
    traj.substeps.push_back(substeps);
    detail::push_state(traj, prop.family().basis, psi);
  }
  return traj;
}

inline std::vector<double> uniform_grid(double horizon, std::size_t points) {
  if (points < 2) throw invalid_parameter("grid needs at least two points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = horizon * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = horizon;
  return g;
}

/// Uniform grid over [0, T] with at least `min_points` nodes and spacing small
/// enough that the phase of (n_g, n_d) states moves by less than pi/2 per node.
inline std::vector<double> phase_safe_grid(const TDParams& p, std::size_t min_points, int n_g, int n_d) {
  double rate = 0.0;
  constexpr int samples = 1024;
  const double hbar = p.nc.hbar;
  for (int i = 0; i < samples; ++i) {
    const double t = p.horizon * i / (samples - 1);
    const double hw = hbar * detail::ladder_frequency(p, t);
    const double ck = detail::ladder_coupling(p, t);
    const double r = ((n_g + 1) * std::abs(hw - ck) + (n_d + 1) * std::abs(hw + ck)) / hbar +
                     detail::ladder_frequency(p, t);
    rate = std::max(rate, r);
  }
  const double h_max = 0.5 * std::numbers::pi / rate;
  const auto needed = static_cast<std::size_t>(std::ceil(p.horizon / h_max)) + 1;
  return uniform_grid(p.horizon, std::max(min_points, needed));
}

struct PhaseTrack {
  std::vector<double> phase;
  std::vector<double> overlap;  ///< |<reference|psi>| per node
  double min_overlap = 1.0;
  bool ok = true;
  std::size_t first_failure = 0;  ///< valid when !ok
  static constexpr double threshold = 0.99;
};

/// arg<reference(t)|psi(t)>, continued onto the nearest branch of the
/// previous node. Nodes whose overlap falls below 0.99 mark the track failed;
/// phases are still reported for inspection.
inline PhaseTrack extract_phase(const Trajectory& traj,
                                const std::function<QuantumState(double)>& reference) {
  PhaseTrack out;
  double prev = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const cplx ov = reference(traj.times[k]).overlap(traj.states[k]);
    const double mag = std::abs(ov);
    double phi = std::arg(ov);
    if (k > 0) {
      const double two_pi = 2.0 * std::numbers::pi;
      phi = prev + std::remainder(phi - prev, two_pi);
    }
    out.phase.push_back(phi);
    out.overlap.push_back(mag);
    out.min_overlap = std::min(out.min_overlap, mag);
    if (mag < PhaseTrack::threshold && out.ok) {
      out.ok = false;
      out.first_failure = k;
    }
    prev = phi;
  }
  return out;
}

/// max_t |<psi(t)|I(t)|psi(t)> - <psi(0)|I(0)|psi(0)>|.
inline double invariant_drift(const Trajectory& traj, const InvariantConstants& c, const TDParams& p,
                              Sector s = Sector::g, double tol = 1e-10) {
  if (!traj.accepted())
    throw invalid_parameter("invariant_drift: trajectory norm drift " +
                            std::to_string(traj.norm_drift) + " exceeds acceptance bound");
  const auto& basis = traj.states.front().basis();
  const auto ops = detail::sector_ops(basis, s);
  const PhaseIntegrals integrals(p, tol);
  double w_int = 0.0;
  double ref = 0.0, drift = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (k > 0) w_int += integrals.w(s, traj.times[k - 1], traj.times[k]);
    const auto inv = detail::invariant_from(detail::coefficients_from_integral(c, w_int, p.nc.hbar), ops);
    const double e = traj.states[k].expectation(inv).real();
    if (k == 0) ref = e;
    drift = std::max(drift, std::abs(e - ref));
  }
  return drift;
}

struct CrosscheckRow {
  int index;
  int n_g, n_d;             ///< closed-form labels (hbar convention ordering)
  double closed_hbar;       ///< closed form with c = hbar
  double closed_unit;       ///< closed form with c = 1
  double ladder;            ///< eigenvalue of the ladder-form matrix (c = hbar)
  double direct;            ///< eigenvalue of the Bopp-shifted matrix
};

struct CrosscheckReport {
  std::vector<CrosscheckRow> rows;
  double deviation_hbar = 0.0;    ///< max relative |closed_hbar - direct|
  double deviation_unit = 0.0;    ///< max relative |closed_unit - direct|
  double deviation_ladder = 0.0;  ///< max relative |ladder - direct|
  Coupling best = Coupling::hbar;

  double max_relative_deviation() const {
    return std::max(deviation_ladder, best == Coupling::hbar ? deviation_hbar : deviation_unit);
  }
};

namespace detail {
inline double rel_dev(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}
/// Lowest n closed-form levels, checked against the truncation-validity guard
/// (only shells with n_g + n_d <= n_max - 6 may take part).
inline std::vector<EnergyLevel> guarded_levels(const OscParams& osc, const NCParams& nc, int n_max,
                                               int n_levels, Coupling c) {
  const int max_total = n_max - 6;
  if (max_total < 0)
    throw invalid_parameter("truncation guard: n_max = " + std::to_string(n_max) +
                            " leaves no shells below n_max - 6");
  auto table = spectrum_table(osc, nc, max_total, c);
  if (static_cast<int>(table.size()) < n_levels)
    throw invalid_parameter("truncation guard: only " + std::to_string(table.size()) +
                            " levels satisfy n_g + n_d <= n_max - 6; asked for " +
                            std::to_string(n_levels));
  table.resize(static_cast<std::size_t>(n_levels));
  // Every level of the next shell must lie above the ones kept.
  double next_min = std::numeric_limits<double>::infinity();
  for (int ng = 0; ng <= max_total + 1; ++ng)
    next_min = std::min(next_min, energy_closed_form(ng, max_total + 1 - ng, osc, nc, c));
  if (!(next_min > table.back().energy))
    throw invalid_parameter("truncation guard: shell n_max - 5 intrudes into the requested levels");
  return table;
}
}  // namespace detail

inline CrosscheckReport spectrum_crosscheck(const OscParams& osc, const NCParams& nc,
                                            const FockBasis& basis, int n_levels) {
  if (n_levels < 1) throw invalid_parameter("n_levels must be >= 1");
  const auto closed_h = detail::guarded_levels(osc, nc, basis.n_max(), n_levels, Coupling::hbar);
  const auto closed_u = detail::guarded_levels(osc, nc, basis.n_max(), n_levels, Coupling::unit);
  const auto ladder = diagonalize(hamiltonian_ladder(osc, nc, basis, Coupling::hbar));
  const auto direct = diagonalize(hamiltonian_direct(osc, nc, basis));
  CrosscheckReport rep;
  for (int i = 0; i < n_levels; ++i) {
    const auto k = static_cast<std::size_t>(i);
    CrosscheckRow row{i, closed_h[k].n_g, closed_h[k].n_d, closed_h[k].energy, closed_u[k].energy,
                      ladder[k], direct[k]};
    rep.deviation_hbar = std::max(rep.deviation_hbar, detail::rel_dev(row.closed_hbar, row.direct));
    rep.deviation_unit = std::max(rep.deviation_unit, detail::rel_dev(row.closed_unit, row.direct));
    rep.deviation_ladder = std::max(rep.deviation_ladder, detail::rel_dev(row.ladder, row.direct));
    rep.rows.push_back(row);
  }
  rep.best = rep.deviation_unit < rep.deviation_hbar ? Coupling::unit : Coupling::hbar;
  return rep;
}

}  // namespace ncosc
