#pragma once

// Subcommands behind the ncosc CLI. Each returns an Artifact (tables plus a
// summary) that write_artifact turns into CSV or JSON files; nothing in a
// data file depends on wall-clock time or worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ncosc/config.hpp"
#include "ncosc/dynamics.hpp"
#include "ncosc/oracle.hpp"
#include "ncosc/spectrum.hpp"

namespace ncosc {

inline constexpr int schema_version = 1;
inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_verification = 2, exit_numerical = 3 };

enum class OutputFormat { csv, json };

// ---------------------------------------------------------------------------
// Tables and serialization

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table '" + name + "': row width mismatch");
    rows.push_back(std::move(row));
  }
};

struct Artifact {
  std::string command;
  std::vector<Table> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
  int exit_code = exit_ok;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // no signed zeros in artifacts
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180: quote fields containing comma, quote, CR or LF; double quotes.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return "";
  if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&c)) return format_double(*d);
  return std::get<std::string>(c);
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += "\r\n";
  }
  return out;
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (auto i = std::get_if<long long>(&c)) return *i;
  if (auto d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_double(*d);
    return *d == 0.0 ? 0.0 : *d;
  }
  return std::get<std::string>(c);
}

inline nlohmann::ordered_json to_json(const Table& t) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline std::string json_text(const nlohmann::ordered_json& j) {
  return j.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::strict) + "\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct RunInfo {
  std::string config_path;
  std::string config_text;
  unsigned workers = 1;
};

/// Writes data files plus <command>.meta.json; returns the data file names.
/// CSV: one <command>_<table>.csv per table and <command>_summary.json.
/// JSON: a single <command>.json holding summary and tables.
inline std::vector<std::string> write_artifact(const Artifact& a, const std::filesystem::path& dir,
                                               OutputFormat fmt, const RunInfo& info) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  if (fmt == OutputFormat::csv) {
    for (const auto& t : a.tables) {
      const std::string name = a.command + "_" + t.name + ".csv";
      write_file(dir / name, to_csv(t));
      files.push_back(name);
    }
    nlohmann::ordered_json s;
    s["schema_version"] = schema_version;
    s["command"] = a.command;
    s["summary"] = a.summary;
    const std::string name = a.command + "_summary.json";
    write_file(dir / name, json_text(s));
    files.push_back(name);
  } else {
    nlohmann::ordered_json doc;
    doc["schema_version"] = schema_version;
    doc["command"] = a.command;
    doc["summary"] = a.summary;
    doc["tables"] = nlohmann::ordered_json::object();
    for (const auto& t : a.tables) doc["tables"][t.name] = to_json(t);
    const std::string name = a.command + ".json";
    write_file(dir / name, json_text(doc));
    files.push_back(name);
  }

  nlohmann::ordered_json meta;
  meta["schema_version"] = schema_version;
  meta["tool"] = "ncosc";
  meta["tool_version"] = tool_version;
  meta["command"] = a.command;
  meta["format"] = fmt == OutputFormat::csv ? "csv" : "json";
  meta["config_path"] = info.config_path;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(info.config_text)));
  meta["config_fnv1a64"] = hash;
  meta["workers"] = info.workers;
  meta["files"] = files;
  meta["tables"] = nlohmann::ordered_json::object();
  for (const auto& t : a.tables) meta["tables"][t.name] = t.columns;
  meta["warnings"] = a.warnings;
  meta["exit_code"] = a.exit_code;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  meta["created_utc"] = stamp;
  write_file(dir / (a.command + ".meta.json"), json_text(meta));
  return files;
}

// ---------------------------------------------------------------------------
// Shared helpers

inline std::vector<std::string> config_warnings(const RunConfig& c) {
  std::vector<std::string> w;
  if (large_deformation(c.osc, c.nc)) {
    w.push_back("large deformation: m^2 w^2 theta^2/4 = " + format_double(detail::position_deformation(c.osc, c.nc)) +
                ", theta_bar^2/(4 m^2 w^2) = " + format_double(detail::momentum_deformation(c.osc, c.nc)) +
                " (above 0.5)");
  }
  return w;
}

inline nlohmann::ordered_json params_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["m"] = c.osc.mass;
  j["omega"] = c.osc.omega;
  j["theta"] = c.nc.theta;
  j["theta_bar"] = c.nc.theta_bar;
  j["hbar"] = c.nc.hbar;
  j["n_max"] = c.n_max;
  j["coupling"] = to_string(c.coupling);
  const auto eff = effective_params(c.osc, c.nc);
  j["mass_eff"] = eff.mass_eff;
  j["omega_eff"] = eff.omega_eff;
  j["kappa"] = eff.kappa;
  return j;
}

/// Invariant constants that describe the configured initial state: the
/// configured ones when the state is displaced, beta = 0 otherwise.
inline InvariantConstants effective_invariant(const InvariantConstants& c, bool displaced) {
  if (displaced) return c;
  return c.hermitian ? InvariantConstants::make_hermitian(c.alpha01, 0.0, c.delta01)
                     : InvariantConstants::make_relaxed(c.alpha01, 0.0, 0.0, c.delta01);
}

struct Run {
  TDParams params;
  FockBasis basis;
  InvariantConstants cg, cd;
  std::vector<double> grid;
  Trajectory traj;
  PhaseTrack track;
};

inline Run run_trajectory(const RunConfig& c) {
  auto p = c.td_params();
  const FockBasis basis = c.basis();
  const auto cg = effective_invariant(c.invariant_g, c.displaced);
  const auto cd = effective_invariant(c.invariant_d, c.displaced);
  auto reference = [&](double t) { return reference_state(cg, cd, p, c.n_g, c.n_d, t, basis, c.tol_quad); };
  const auto grid = phase_safe_grid(p, static_cast<std::size_t>(c.grid_points), c.n_g, c.n_d);
  const auto psi0 = reference(0.0);
  auto traj = evolve(MagnusPropagator(make_family(p, basis, c.source(p))), psi0, grid, c.tol_ode);
  if (!traj.accepted())
    throw numerical_failure("trajectory norm drift " + format_double(traj.norm_drift) + " exceeds 1e-8");
  auto track = extract_phase(traj, reference);
  return {std::move(p), basis, cg, cd, grid, std::move(traj), std::move(track)};
}

// ---------------------------------------------------------------------------
// spectrum

inline Artifact cmd_spectrum(const RunConfig& c) {
  Artifact a;
  a.command = "spectrum";
  a.warnings = config_warnings(c);
  a.summary["parameters"] = params_json(c);

  Table levels{"levels", {"n_g", "n_d", "total_quanta", "energy", "source"}, {}};
  for (const auto& lvl : spectrum_table(c.osc, c.nc, c.spectrum_max_total, c.coupling))
    levels.add({(long long)lvl.n_g, (long long)lvl.n_d, (long long)(lvl.n_g + lvl.n_d), lvl.energy,
                std::string("closed_form")});
  a.summary["level_splitting"] = level_splitting(c.osc, c.nc, 1, c.coupling);
  a.tables.push_back(std::move(levels));

  Table cross{"crosscheck",
              {"index", "n_g", "n_d", "closed_hbar", "closed_unit", "ladder", "direct", "relative_deviation"},
              {}};
  try {
    const auto rep = spectrum_crosscheck(c.osc, c.nc, c.basis(), c.crosscheck_levels);
    for (const auto& r : rep.rows) {
      const double closed = rep.best == Coupling::hbar ? r.closed_hbar : r.closed_unit;
      cross.add({(long long)r.index, (long long)r.n_g, (long long)r.n_d, r.closed_hbar, r.closed_unit, r.ladder,
                 r.direct, std::abs(closed - r.direct) / std::abs(r.direct)});
    }
    a.summary["crosscheck"] = {{"levels", c.crosscheck_levels},
                               {"deviation_hbar", rep.deviation_hbar},
                               {"deviation_unit", rep.deviation_unit},
                               {"deviation_ladder", rep.deviation_ladder},
                               {"matching_coupling", to_string(rep.best)},
                               {"max_relative_deviation", rep.max_relative_deviation()}};
  } catch (const invalid_parameter& e) {
    a.summary["crosscheck"] = {{"error", e.what()}};
    a.warnings.push_back(std::string("crosscheck unavailable: ") + e.what());
    a.exit_code = exit_numerical;
  }
  a.tables.push_back(std::move(cross));
  return a;
}

// ---------------------------------------------------------------------------
// evolve

inline Artifact cmd_evolve(const RunConfig& c) {
  Artifact a;
  a.command = "evolve";
  a.warnings = config_warnings(c);
  const auto run = run_trajectory(c);
  const auto& p = run.params;
  const auto circ = circular_operators(run.basis);
  const auto ng = circ.n_g(), nd = circ.n_d();
  const auto lz = angular_momentum(position_momentum(effective_params(p.osc_at(0.0), p.nc), p.nc.hbar, run.basis));

  Table t{"trajectory",
          {"t", "norm_drift", "n_g", "n_d", "l_z", "invariant_g", "invariant_d", "phase", "overlap"},
          {}};
  const auto ops_g = detail::sector_ops(run.basis, Sector::g);
  const auto ops_d = detail::sector_ops(run.basis, Sector::d);
  double inv0_g = 0.0, inv0_d = 0.0, drift_g = 0.0, drift_d = 0.0;
  for (std::size_t k = 0; k < run.traj.times.size(); ++k) {
    const double time = run.traj.times[k];
    const auto& psi = run.traj.states[k];
    const double ig =
        psi.expectation(detail::invariant_from(invariant_coefficients(run.cg, p, time, Sector::g, c.tol_quad), ops_g))
            .real();
    const double id =
        psi.expectation(detail::invariant_from(invariant_coefficients(run.cd, p, time, Sector::d, c.tol_quad), ops_d))
            .real();
    if (k == 0) {
      inv0_g = ig;
      inv0_d = id;
    }
    drift_g = std::max(drift_g, std::abs(ig - inv0_g));
    drift_d = std::max(drift_d, std::abs(id - inv0_d));
    t.add({time, std::abs(psi.norm() - 1.0), psi.expectation(ng).real(), psi.expectation(nd).real(),
           psi.expectation(lz).real(), ig, id, run.track.phase[k], run.track.overlap[k]});
  }
  a.tables.push_back(std::move(t));

  a.summary["parameters"] = params_json(c);
  a.summary["hamiltonian_source"] = to_string(run.traj.hamiltonian_source);
  a.summary["grid_points"] = run.grid.size();
  long long substeps = 0;
  for (long s : run.traj.substeps) substeps += s;
  a.summary["substeps"] = substeps;
  a.summary["norm_drift"] = run.traj.norm_drift;
  a.summary["invariant_drift_g"] = drift_g;
  a.summary["invariant_drift_d"] = drift_d;
  a.summary["phase_track_ok"] = run.track.ok;
  a.summary["min_overlap"] = run.track.min_overlap;
  return a;
}

// ---------------------------------------------------------------------------
// phases

inline Artifact cmd_phases(const RunConfig& c) {
  Artifact a;
  a.command = "phases";
  a.warnings = config_warnings(c);
  const auto run = run_trajectory(c);

  Table t{"ledger",
          {"t", "xi_g_dynamical_stated", "xi_g_dynamical_corrected", "xi_g_geometric", "xi_d_dynamical_stated",
           "xi_d_dynamical_corrected", "xi_d_geometric", "zero_point", "total_stated", "total_corrected",
           "total_numeric", "discrepancy_stated", "discrepancy_corrected", "convention_delta", "overlap"},
          {}};
  double max_corrected = 0.0, max_stated = 0.0;
  PhaseLedger last;
  for (std::size_t k = 0; k < run.traj.times.size(); ++k) {
    auto led = assemble_solution_phase(run.cg, run.cd, run.params, c.n_g, c.n_d, run.traj.times[k], c.tol_quad);
    led.total_numeric = run.track.phase[k];
    max_corrected = std::max(max_corrected, std::abs(*led.discrepancy_corrected()));
    max_stated = std::max(max_stated, std::abs(*led.discrepancy_stated()));
    t.add({led.t, led.g.dynamical_stated, led.g.dynamical_corrected, led.g.geometric, led.d.dynamical_stated,
           led.d.dynamical_corrected, led.d.geometric, led.zero_point, led.total_stated, led.total_corrected,
           *led.total_numeric, *led.discrepancy_stated(), *led.discrepancy_corrected(), led.convention_delta(),
           run.track.overlap[k]});
    last = led;
  }
  a.tables.push_back(std::move(t));

  a.summary["parameters"] = params_json(c);
  a.summary["state"] = {{"n_g", c.n_g}, {"n_d", c.n_d}, {"displaced", c.displaced}};
  a.summary["hamiltonian_source"] = to_string(run.traj.hamiltonian_source);
  a.summary["horizon"] = c.horizon;
  a.summary["total_stated"] = last.total_stated;
  a.summary["total_corrected"] = last.total_corrected;
  a.summary["total_numeric"] = *last.total_numeric;
  a.summary["max_discrepancy_corrected"] = max_corrected;
  a.summary["max_discrepancy_stated"] = max_stated;
  a.summary["convention_delta"] = last.convention_delta();
  a.summary["geometric_sum"] = last.g.geometric + last.d.geometric;
  a.summary["phase_track_ok"] = run.track.ok;
  a.summary["min_overlap"] = run.track.min_overlap;
  if (!run.track.ok) {
    a.summary["phase_track_failure_t"] = run.traj.times[run.track.first_failure];
    a.warnings.push_back("reference overlap fell below " + format_double(PhaseTrack::threshold) + " at t = " +
                         format_double(run.traj.times[run.track.first_failure]));
    a.exit_code = exit_verification;
  }
  return a;
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string module;
  std::string name;
  double measured = std::nan("");
  double tolerance = std::nan("");
  bool pass = false;
  bool counted = true;  ///< informational rows do not affect the exit status
  std::string detail;
};

namespace detail {

/// Runs fn; an exception turns into a failed check carrying its message.
template <class F>
void run_check(std::vector<Check>& out, const std::string& module, const std::string& name, double tol, F&& fn) {
  Check chk{module, name, std::nan(""), tol, false, true, ""};
  try {
    fn(chk);
  } catch (const std::exception& e) {
    chk.pass = false;
    chk.detail = e.what();
  }
  out.push_back(std::move(chk));
}

inline void le(Check& c, double v, const std::string& detail = "") {
  c.measured = v;
  c.pass = std::isfinite(v) && v <= c.tolerance;
  if (!detail.empty()) c.detail = detail;
}

}  // namespace detail

inline std::vector<Check> verification_checks(const RunConfig& c) {
  using detail::le;
  using detail::run_check;
  std::vector<Check> out;
  const FockBasis basis = c.basis();
  const TDParams p = c.td_params();
  const int interior = basis.default_interior();

  run_check(out, "ncspace", "commutative_reduction", 0.0, [&](Check& k) {
    const auto e = effective_params(c.osc, NCParams(0.0, 0.0, c.nc.hbar));
    le(k, std::max({std::abs(e.mass_eff - c.osc.mass), std::abs(e.omega_eff - c.osc.omega), std::abs(e.kappa)}));
  });
  run_check(out, "ncspace", "effective_params_positive", 0.0, [&](Check& k) {
    const auto e = effective_params(c.osc, c.nc);
    const bool ok = e.mass_eff > 0.0 && e.omega_eff > 0.0 && std::isfinite(e.kappa);
    k.measured = std::min(e.mass_eff, e.omega_eff);
    k.pass = ok;
    k.detail = "M and Omega must be finite and > 0";
  });

  run_check(out, "fockspace", "hamiltonian_direct_hermitian", 1e-12, [&](Check& k) {
    const auto h = hamiltonian_direct(c.osc, c.nc, basis);
    le(k, h.hermiticity_error() / std::max(1.0, max_abs(h.entries())));
  });
  run_check(out, "fockspace", "algebra_bopp_value", 1e-12, [&](Check& k) {
    double worst = 0.0;
    std::string which;
    for (const auto& r : algebra_residuals(c.nc, basis, interior, CanonicalValue::shifted))
      if (r.residual >= worst) {
        worst = r.residual;
        which = r.relation;
      }
    le(k, worst, "ten relations on shells <= " + std::to_string(interior) +
                     " with [x,px] = [y,py] = i hbar (1 + theta theta_bar / 4); worst " + which);
  });
  run_check(out, "fockspace", "algebra_literal_i_hbar", 1e-12, [&](Check& k) {
    double worst = 0.0;
    for (const auto& r : algebra_residuals(c.nc, basis, interior, CanonicalValue::literal))
      worst = std::max(worst, r.residual);
    le(k, worst, "informational: the shift gives i hbar (1 + theta theta_bar / 4), so the deviation is "
                 "hbar theta theta_bar / 4 = " + format_double(c.nc.hbar * c.nc.theta * c.nc.theta_bar / 4.0));
    k.counted = false;
  });
  run_check(out, "fockspace", "angular_momentum_circular", 1e-12, [&](Check& k) {
    const auto ops = position_momentum(effective_params(c.osc, c.nc), c.nc.hbar, basis);
    const auto circ = circular_operators(basis);
    le(k, max_abs(angular_momentum(ops).interior() - (c.nc.hbar * (circ.n_g() - circ.n_d())).interior()),
       "L_z = hbar (N_g - N_d) on shells <= " + std::to_string(interior));
  });

  run_check(out, "spectrum", "crosscheck_direct", 1e-6, [&](Check& k) {
    const auto rep = spectrum_crosscheck(c.osc, c.nc, basis, c.crosscheck_levels);
    le(k, rep.max_relative_deviation(),
       "lowest " + std::to_string(c.crosscheck_levels) + " levels; matching coupling " + to_string(rep.best) +
           " (hbar: " + format_double(rep.deviation_hbar) + ", unit: " + format_double(rep.deviation_unit) + ")");
  });
  run_check(out, "spectrum", "ladder_vs_closed_form", 1e-10, [&](Check& k) {
    const auto rep = spectrum_crosscheck(c.osc, c.nc, basis, c.crosscheck_levels);
    double worst = 0.0;
    for (const auto& r : rep.rows) worst = std::max(worst, std::abs(r.ladder - r.closed_hbar));
    le(k, worst);
  });

  for (auto [sec, inv, name] : {std::tuple{Sector::g, &c.invariant_g, "g"}, std::tuple{Sector::d, &c.invariant_d, "d"}}) {
    const auto s = sec;
    const auto& cst = *inv;
    const std::string tag = name;
    run_check(out, "dynamics", "lvn_residual_" + tag, 1e-10, [&](Check& k) {
      const FockBasis small(std::min(c.n_max, 10));
      double worst = 0.0;
      for (int i = 1; i <= 9; ++i) worst = std::max(worst, lvn_residual(cst, p, p.horizon * i / 10.0, small, -1.0, s, c.tol_quad).analytic);
      le(k, worst, "analytic dI/dt + (i/hbar)[H, I] at 9 interior times");
    });
    run_check(out, "dynamics", "invariant_spectrum_constant_" + tag, 1e-9, [&](Check& k) {
      const FockBasis small(std::min(c.n_max, 10));
      const auto ref = hermitian_eigen(invariant_matrix(cst, p, 0.0, small, s, c.tol_quad).entries(), false).values;
      double worst = 0.0;
      for (int i = 1; i <= 10; ++i) {
        const auto ev =
            hermitian_eigen(invariant_matrix(cst, p, p.horizon * i / 10.0, small, s, c.tol_quad).entries(), false).values;
        worst = std::max(worst, (ev - ref).cwiseAbs().maxCoeff());
      }
      le(k, worst);
    });
    run_check(out, "dynamics", "displacement_guard_" + tag, basis.n_max() / 4.0, [&](Check& k) {
      le(k, cst.rho_modulus_sq(), "|beta01/alpha01|^2 against n_max/4");
    });
  }

  // One trajectory feeds the remaining oracle checks.
  std::optional<Run> run;
  std::string run_error;
  try {
    run = run_trajectory(c);
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  auto with_run = [&](Check& k, auto&& fn) {
    if (!run) throw numerical_failure("trajectory unavailable: " + run_error);
    fn(k, *run);
  };
  run_check(out, "oracle", "norm_drift", 1e-8, [&](Check& k) {
    with_run(k, [&](Check& kk, const Run& r) { le(kk, r.traj.norm_drift); });
  });
  for (auto [sec, name] : {std::pair{Sector::g, "g"}, std::pair{Sector::d, "d"}}) {
    const Sector s = sec;
    const std::string tag = name;
    run_check(out, "oracle", "invariant_drift_" + tag, 1e-6, [&](Check& k) {
      with_run(k, [&](Check& kk, const Run& r) {
        le(kk, invariant_drift(r.traj, s == Sector::g ? r.cg : r.cd, r.params, s, c.tol_quad));
      });
    });
  }
  run_check(out, "oracle", "phase_numeric_vs_corrected", 1e-5, [&](Check& k) {
    with_run(k, [&](Check& kk, const Run& r) {
      if (!r.track.ok)
        throw numerical_failure("reference overlap fell to " + format_double(r.track.min_overlap) +
                                " (threshold 0.99)");
      double worst = 0.0;
      for (std::size_t i = 0; i < r.traj.times.size(); ++i) {
        const auto led = assemble_solution_phase(r.cg, r.cd, r.params, c.n_g, c.n_d, r.traj.times[i], c.tol_quad);
        worst = std::max(worst, std::abs(r.track.phase[i] - led.total_corrected));
      }
      le(kk, worst, "max over grid nodes");
    });
  });
  run_check(out, "oracle", "step_halving_ratio", 3.5, [&](Check& k) {
    const FockBasis small(std::min(c.n_max, 6));
    const MagnusPropagator prop(direct_family(p, small));
    if (prop.commuting()) {
      k.pass = true;
      k.counted = false;
      k.detail = "skipped: Hamiltonian family commutes, the midpoint rule is exact";
      return;
    }
    const auto psi0 = eigenstate_circular(0, 0, small);
    const std::vector<double> grid{0.0, p.horizon};
    const Vector ref = evolve_fixed(prop, psi0, grid, 512).states.back().amplitudes();
    const double e1 = (evolve_fixed(prop, psi0, grid, 16).states.back().amplitudes() - ref).norm();
    const double e2 = (evolve_fixed(prop, psi0, grid, 32).states.back().amplitudes() - ref).norm();
    k.measured = e1 / e2;
    k.pass = k.measured >= k.tolerance;
    k.detail = "error ratio for 16 vs 32 substeps (minimum)";
  });
  return out;
}

inline Artifact cmd_verify(const RunConfig& c) {
  Artifact a;
  a.command = "verify";
  a.warnings = config_warnings(c);
  const auto checks = verification_checks(c);
  Table t{"checks", {"module", "check", "measured", "tolerance", "pass", "counted", "detail"}, {}};
  int failed = 0;
  for (const auto& k : checks) {
    t.add({k.module, k.name, k.measured, k.tolerance, std::string(k.pass ? "true" : "false"),
           std::string(k.counted ? "true" : "false"), k.detail});
    if (k.counted && !k.pass) ++failed;
  }
  a.tables.push_back(std::move(t));
  a.summary["parameters"] = params_json(c);
  a.summary["checks"] = checks.size();
  a.summary["failed"] = failed;
  a.summary["pass"] = failed == 0;
  a.exit_code = failed == 0 ? exit_ok : exit_verification;
  return a;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepRow {
  std::string observable;
  int n_g = -1, n_d = -1;
  double value = 0.0;
};

inline std::vector<SweepRow> sweep_point(const RunConfig& c) {
  std::vector<SweepRow> rows;
  const auto eff = effective_params(c.osc, c.nc);
  rows.push_back({"mass_eff", -1, -1, eff.mass_eff});
  rows.push_back({"omega_eff", -1, -1, eff.omega_eff});
  rows.push_back({"kappa", -1, -1, eff.kappa});
  rows.push_back({"splitting", -1, -1, level_splitting(c.osc, c.nc, 1, c.coupling)});
  for (int k = 0; k <= c.sweep_max_total; ++k)
    for (int ng = k; ng >= 0; --ng)
      rows.push_back({"energy", ng, k - ng, energy_closed_form(ng, k - ng, c.osc, c.nc, c.coupling)});
  const auto p = c.td_params();
  rows.push_back({"geometric_g", -1, -1, geometric_phase(c.invariant_g, p, c.horizon, Sector::g, c.tol_quad)});
  rows.push_back({"geometric_d", -1, -1, geometric_phase(c.invariant_d, p, c.horizon, Sector::d, c.tol_quad)});
  return rows;
}

/// Grid points in row-major order, last axis fastest.
inline std::vector<std::vector<double>> sweep_grid(const RunConfig& c) {
  std::vector<std::vector<double>> pts{{}};
  for (const auto& axis : c.sweep_axes) {
    std::vector<std::vector<double>> next;
    for (const auto& p : pts)
      for (double v : axis.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

inline Artifact cmd_sweep(const RunConfig& c, unsigned workers = 1) {
  if (c.sweep_axes.empty()) throw config_error("", "sweep needs a [sweep] section with at least one axis");
  if (c.sweep_points() > max_sweep_points) throw config_error("", "sweep grid exceeds 10000 points");
  Artifact a;
  a.command = "sweep";
  a.warnings = config_warnings(c);
  const auto pts = sweep_grid(c);

  struct Result {
    std::vector<SweepRow> rows;
    std::string error;
  };
  std::vector<Result> results(pts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      try {
        RunConfig pc = c;
        for (std::size_t j = 0; j < c.sweep_axes.size(); ++j) pc = pc.with(c.sweep_axes[j].name, pts[i][j]);
        results[i].rows = sweep_point(pc);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(pts.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  Table t{"grid", {"point"}, {}};
  for (const auto& axis : c.sweep_axes) t.columns.push_back(axis.name);
  for (const char* col : {"observable", "n_g", "n_d", "value", "error"}) t.columns.push_back(col);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Cell> head{(long long)i};
    for (double v : pts[i]) head.push_back(v);
    if (!results[i].error.empty()) {
      ++failed;
      auto row = head;
      row.insert(row.end(), {std::string(), Cell{}, Cell{}, Cell{}, results[i].error});
      t.add(std::move(row));
      continue;
    }
    for (const auto& r : results[i].rows) {
      auto row = head;
      row.push_back(r.observable);
      row.push_back(r.n_g >= 0 ? Cell{(long long)r.n_g} : Cell{});
      row.push_back(r.n_d >= 0 ? Cell{(long long)r.n_d} : Cell{});
      row.push_back(r.value);
      row.push_back(std::string());
      t.add(std::move(row));
    }
  }
  a.tables.push_back(std::move(t));
  a.summary["points"] = pts.size();
  a.summary["failed_points"] = failed;
  auto axes = nlohmann::ordered_json::array();
  for (const auto& axis : c.sweep_axes) axes.push_back({{"name", axis.name}, {"count", axis.values.size()}});
  a.summary["axes"] = axes;
  a.summary["max_total_quanta"] = c.sweep_max_total;
  if (failed) a.warnings.push_back(std::to_string(failed) + " sweep point(s) failed; see the error column");
  return a;
}

}  // namespace ncosc
