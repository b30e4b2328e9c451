#pragma once

// Dense operator matrices over a truncated two-mode Fock basis.
//
// Basis ordering is row-major over Cartesian occupations (n_x, n_y) with the
// x-mode as the first tensor factor: index = n_x * (n_max + 1) + n_y.
// Truncation corrupts identities that need the state just above the cutoff,
// so operator identities are compared on the interior subspace
// (total quanta <= n_max - 2) unless a construction is exact everywhere.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ncosc/errors.hpp"
#include "ncosc/linalg.hpp"
#include "ncosc/ncspace.hpp"

namespace ncosc {

class FockBasis {
 public:
  FockBasis() = default;
  explicit FockBasis(int n_max, int modes = 2) : n_max_(n_max), modes_(modes) {
    if (n_max < 2) throw invalid_parameter("n_max must be >= 2");
    if (modes != 1 && modes != 2) throw invalid_parameter("modes must be 1 or 2");
  }

  int n_max() const { return n_max_; }
  int modes() const { return modes_; }
  Eigen::Index mode_dim() const { return n_max_ + 1; }
  Eigen::Index dim() const { return modes_ == 1 ? mode_dim() : mode_dim() * mode_dim(); }

  Eigen::Index index(int n_x, int n_y) const { return n_x * mode_dim() + n_y; }
  std::pair<int, int> occupation(Eigen::Index i) const {
    return {static_cast<int>(i / mode_dim()), static_cast<int>(i % mode_dim())};
  }
  int total_quanta(Eigen::Index i) const {
    if (modes_ == 1) return static_cast<int>(i);
    auto [nx, ny] = occupation(i);
    return nx + ny;
  }

  /// Indices with total quanta <= max_total, in basis order.
  std::vector<Eigen::Index> indices_up_to(int max_total) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (total_quanta(i) <= max_total) out.push_back(i);
    return out;
  }
  int default_interior() const { return n_max_ - 2; }

  friend bool operator==(const FockBasis&, const FockBasis&) = default;

 private:
  int n_max_ = 2;
  int modes_ = 2;
};

namespace detail {
// Ladder-built operators are mostly zeros; a sparse left factor makes the
// product O(nnz n) instead of O(n^3).
inline Matrix product(const Matrix& a, const Matrix& b) {
  const auto nnz = (a.array() != cplx(0.0)).count();
  if (nnz * 8 > a.size()) return a * b;
  const Eigen::SparseMatrix<cplx> sa = a.sparseView();
  return sa * b;
}
}  // namespace detail

class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  OperatorMatrix(FockBasis basis, Matrix entries, std::string label = {})
      : basis_(basis), entries_(std::move(entries)), label_(std::move(label)) {
    if (entries_.rows() != basis_.dim() || entries_.cols() != basis_.dim())
      throw basis_mismatch("matrix dimension does not match basis");
  }

  static OperatorMatrix identity(const FockBasis& b, std::string label = "I") {
    return {b, Matrix::Identity(b.dim(), b.dim()), std::move(label)};
  }
  static OperatorMatrix zero(const FockBasis& b, std::string label = "0") {
    return {b, Matrix::Zero(b.dim(), b.dim()), std::move(label)};
  }

  const FockBasis& basis() const { return basis_; }
  const Matrix& entries() const { return entries_; }
  const std::string& label() const { return label_; }
  Eigen::Index dim() const { return entries_.rows(); }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

  OperatorMatrix adjoint() const {
    return {basis_, entries_.adjoint(), label_ + "^dag"};
  }
  double hermiticity_error() const { return ncosc::hermiticity_error(entries_); }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() <= tol; }

  OperatorMatrix relabel(std::string label) const& {
    return {basis_, entries_, std::move(label)};
  }

  /// Submatrix on the states with total quanta <= max_total.
  Matrix restricted(int max_total) const {
    const auto idx = basis_.indices_up_to(max_total);
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix out(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) out(r, c) = entries_(idx[r], idx[c]);
    return out;
  }
  Matrix interior() const { return restricted(basis_.default_interior()); }

  Vector apply(const Vector& v) const { return entries_ * v; }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return {a.basis_, a.entries_ + b.entries_};
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return {a.basis_, a.entries_ - b.entries_};
  }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    check_same(a, b);
    return {a.basis_, detail::product(a.entries_, b.entries_)};
  }
  friend OperatorMatrix operator*(cplx s, const OperatorMatrix& a) {
    return {a.basis_, s * a.entries_};
  }
  friend OperatorMatrix operator*(double s, const OperatorMatrix& a) {
    return {a.basis_, s * a.entries_};
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a) { return {a.basis_, -a.entries_}; }

  static void check_same(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (!(a.basis_ == b.basis_)) throw basis_mismatch("operands built over different bases");
  }

 private:
  FockBasis basis_;
  Matrix entries_;
  std::string label_;
};

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  OperatorMatrix::check_same(a, b);
  return {a.basis(), detail::product(a.entries(), b.entries()) - detail::product(b.entries(), a.entries()),
          "[" + a.label() + "," + b.label() + "]"};
}

class QuantumState {
 public:
  QuantumState() = default;
  /// Normalizes on construction; a zero vector is rejected.
  QuantumState(FockBasis basis, Vector amplitudes)
      : basis_(basis), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != basis_.dim())
      throw basis_mismatch("state length does not match basis");
    const double n = amplitudes_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw invalid_parameter("state has zero or non-finite norm");
    amplitudes_ /= n;
  }
  /// Wraps amplitudes without renormalizing (used for propagated states,
  /// whose norm is itself a diagnostic).
  static QuantumState unnormalized(FockBasis basis, Vector amplitudes) {
    QuantumState s;
    s.basis_ = basis;
    s.amplitudes_ = std::move(amplitudes);
    if (s.amplitudes_.size() != basis.dim())
      throw basis_mismatch("state length does not match basis");
    return s;
  }

  static QuantumState basis_state(const FockBasis& b, int n_x, int n_y) {
    Vector v = Vector::Zero(b.dim());
    v[b.index(n_x, n_y)] = 1.0;
    return {b, v};
  }

  const FockBasis& basis() const { return basis_; }
  const Vector& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

  cplx overlap(const QuantumState& other) const {
    if (!(basis_ == other.basis_)) throw basis_mismatch("states built over different bases");
    return amplitudes_.dot(other.amplitudes_);
  }
  cplx expectation(const OperatorMatrix& op) const {
    if (!(basis_ == op.basis())) throw basis_mismatch("state and operator bases differ");
    return amplitudes_.dot(op.entries() * amplitudes_);
  }

 private:
  FockBasis basis_;
  Vector amplitudes_;
};

struct LadderPair {
  OperatorMatrix a;
  OperatorMatrix a_dag;
};

/// Single-mode lowering operator a[n-1, n] = sqrt(n) and its adjoint.
inline LadderPair ladder_1d(int n_max) {
  const FockBasis b(n_max, 1);
  Matrix a = Matrix::Zero(b.dim(), b.dim());
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  OperatorMatrix low(b, a, "a");
  return {low, low.adjoint().relabel("a^dag")};
}

namespace detail {
inline Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  return out;
}
}  // namespace detail

struct ModeOperators {
  OperatorMatrix a_x, a_x_dag, a_y, a_y_dag;
};

inline ModeOperators mode_operators(const FockBasis& basis) {
  if (basis.modes() != 2) throw invalid_parameter("mode operators need a two-mode basis");
  const auto [a, a_dag] = ladder_1d(basis.n_max());
  const Matrix id = Matrix::Identity(basis.mode_dim(), basis.mode_dim());
  return {
      {basis, detail::kron(a.entries(), id), "a_x"},
      {basis, detail::kron(a_dag.entries(), id), "a_x^dag"},
      {basis, detail::kron(id, a.entries()), "a_y"},
      {basis, detail::kron(id, a_dag.entries()), "a_y^dag"},
  };
}

struct CircularOperators {
  OperatorMatrix a_g, a_d;

  OperatorMatrix a_g_dag() const { return a_g.adjoint().relabel("a_g^dag"); }
  OperatorMatrix a_d_dag() const { return a_d.adjoint().relabel("a_d^dag"); }
  OperatorMatrix n_g() const { return (a_g_dag() * a_g).relabel("N_g"); }
  OperatorMatrix n_d() const { return (a_d_dag() * a_d).relabel("N_d"); }
};

/// a_g = (a_x - i a_y)/sqrt2, a_d = (a_x + i a_y)/sqrt2.
inline CircularOperators circular_operators(const OperatorMatrix& a_x, const OperatorMatrix& a_y) {
  OperatorMatrix::check_same(a_x, a_y);
  const double s = 1.0 / std::sqrt(2.0);
  return {(s * (a_x - I_unit * a_y)).relabel("a_g"), (s * (a_x + I_unit * a_y)).relabel("a_d")};
}

inline CircularOperators circular_operators(const FockBasis& basis) {
  const auto m = mode_operators(basis);
  return circular_operators(m.a_x, m.a_y);
}

struct PhaseSpaceOperators {
  OperatorMatrix x, y, p_x, p_y;
};

/// Canonical operators of the oscillator with mass M and frequency Omega:
/// x = sqrt(hbar/2M Omega)(a + a^dag), p = i sqrt(hbar M Omega/2)(a^dag - a).
inline PhaseSpaceOperators position_momentum(const EffectiveParams& eff, double hbar,
                                             const FockBasis& basis) {
  const auto m = mode_operators(basis);
  const double lx = std::sqrt(hbar / (2.0 * eff.mass_eff * eff.omega_eff));
  const double lp = std::sqrt(hbar * eff.mass_eff * eff.omega_eff / 2.0);
  return {
      (lx * (m.a_x + m.a_x_dag)).relabel("x"),
      (lx * (m.a_y + m.a_y_dag)).relabel("y"),
      (cplx(0.0, lp) * (m.a_x_dag - m.a_x)).relabel("p_x"),
      (cplx(0.0, lp) * (m.a_y_dag - m.a_y)).relabel("p_y"),
  };
}

struct NCOperators {
  OperatorMatrix x_hat, y_hat, px_hat, py_hat;
};

inline NCOperators bopp_shift(const PhaseSpaceOperators& ops, const NCParams& nc) {
  const double ht = nc.theta / 2.0;
  const double hb = nc.theta_bar / 2.0;
  return {
      (ops.x - ht * ops.p_y).relabel("x_hat"),
      (ops.y + ht * ops.p_x).relabel("y_hat"),
      (ops.p_x + hb * ops.y).relabel("px_hat"),
      (ops.p_y - hb * ops.x).relabel("py_hat"),
  };
}

inline OperatorMatrix angular_momentum(const PhaseSpaceOperators& ops) {
  return (ops.x * ops.p_y - ops.y * ops.p_x).relabel("L_z");
}

/// Right-hand side used for [x^, p^x] and [y^, p^y].
///   literal  i hbar
///   shifted  i hbar (1 + theta theta_bar / 4), what the Bopp shift produces
enum class CanonicalValue { literal, shifted };

struct RelationResidual {
  std::string relation;
  double residual;  ///< max elementwise deviation on shells <= max_total
};

/// The ten commutators among x^, y^, p^x, p^y in the basis of the effective
/// oscillator with unit m, omega, restricted to total quanta <= max_total.
inline std::vector<RelationResidual> algebra_residuals(const NCParams& nc, const FockBasis& basis,
                                                       int max_total, CanonicalValue canonical) {
  nc.validate();
  if (max_total < 0 || max_total > basis.n_max() - 2)
    throw invalid_parameter("algebra check needs 0 <= max_total <= n_max - 2");
  const auto ops = position_momentum(effective_params({1.0, 1.0}, nc), nc.hbar, basis);
  const auto s = bopp_shift(ops, nc);
  const auto n = static_cast<Eigen::Index>(basis.indices_up_to(max_total).size());
  const Matrix id = Matrix::Identity(n, n);
  const double h = canonical == CanonicalValue::literal
                       ? nc.hbar
                       : nc.hbar * (1.0 + nc.theta * nc.theta_bar / 4.0);
  auto res = [&](const char* name, const OperatorMatrix& a, const OperatorMatrix& b, cplx rhs) {
    return RelationResidual{name, max_abs(commutator(a, b).restricted(max_total) - rhs * id)};
  };
  return {
      res("[x,y]", s.x_hat, s.y_hat, I_unit * nc.theta),
      res("[y,x]", s.y_hat, s.x_hat, -I_unit * nc.theta),
      res("[px,py]", s.px_hat, s.py_hat, I_unit * nc.theta_bar),
      res("[py,px]", s.py_hat, s.px_hat, -I_unit * nc.theta_bar),
      res("[x,px]", s.x_hat, s.px_hat, I_unit * h),
      res("[px,x]", s.px_hat, s.x_hat, -I_unit * h),
      res("[y,py]", s.y_hat, s.py_hat, I_unit * h),
      res("[py,y]", s.py_hat, s.y_hat, -I_unit * h),
      res("[x,py]", s.x_hat, s.py_hat, 0.0),
      res("[y,px]", s.y_hat, s.px_hat, 0.0),
  };
}

/// The oscillator written in the noncommutative operators,
/// (1/2m)(px_hat^2 + py_hat^2) + (m w^2/2)(x_hat^2 + y_hat^2), with the
/// canonical operators taken in the Fock basis of the effective oscillator.
inline OperatorMatrix hamiltonian_direct(const OscParams& osc, const NCParams& nc,
                                         const FockBasis& basis) {
  const auto ops = position_momentum(effective_params(osc, nc), nc.hbar, basis);
  const auto nco = bopp_shift(ops, nc);
  const double kin = 1.0 / (2.0 * osc.mass);
  const double pot = 0.5 * osc.mass * osc.omega * osc.omega;
  return (kin * (nco.px_hat * nco.px_hat + nco.py_hat * nco.py_hat) +
          pot * (nco.x_hat * nco.x_hat + nco.y_hat * nco.y_hat))
      .relabel("H_direct");
}

/// hbar Omega (N_g + N_d + 1) - c kappa (N_g - N_d).
inline OperatorMatrix hamiltonian_ladder(const OscParams& osc, const NCParams& nc,
                                         const FockBasis& basis,
                                         Coupling coupling = Coupling::hbar) {
  const auto eff = effective_params(osc, nc);
  const auto circ = circular_operators(basis);
  const auto ng = circ.n_g();
  const auto nd = circ.n_d();
  const double c = coupling_constant(coupling, nc.hbar);
  const auto id = OperatorMatrix::identity(basis);
  return (nc.hbar * eff.omega_eff * (ng + nd + id) - (c * eff.kappa) * (ng - nd))
      .relabel("H_ladder");
}

/// (a_g^dag)^n_g (a_d^dag)^n_d |0,0> / sqrt(n_g! n_d!), normalized.
inline QuantumState eigenstate_circular(int n_g, int n_d, const FockBasis& basis) {
  if (n_g < 0 || n_d < 0) throw invalid_parameter("circular quantum numbers must be >= 0");
  if (n_g + n_d > basis.n_max())
    throw invalid_parameter("n_g + n_d exceeds the basis cutoff");
  const auto circ = circular_operators(basis);
  const Matrix ag_dag = circ.a_g.entries().adjoint();
  const Matrix ad_dag = circ.a_d.entries().adjoint();
  Vector v = Vector::Zero(basis.dim());
  v[basis.index(0, 0)] = 1.0;
  for (int k = 1; k <= n_d; ++k) v = (ad_dag * v) / std::sqrt(static_cast<double>(k));
  for (int k = 1; k <= n_g; ++k) v = (ag_dag * v) / std::sqrt(static_cast<double>(k));
  return {basis, v};
}

}  // namespace ncosc
