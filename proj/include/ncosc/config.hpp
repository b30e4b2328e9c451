#pragma once

// Run configuration: a strict subset of TOML and the typed RunConfig built from it.
//
// Supported syntax: [section] and [section.sub] headers, key = value lines,
// # comments, double-quoted strings with \" \\ \n \t escapes, integers,
// floats (with exponent), true/false, and single-line arrays of those.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ncosc/dynamics.hpp"
#include "ncosc/errors.hpp"
#include "ncosc/oracle.hpp"

namespace ncosc {

class config_error : public std::invalid_argument {
 public:
  config_error(const std::string& where, const std::string& what)
      : std::invalid_argument(where.empty() ? what : where + ": " + what) {}
};

namespace toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<long long, double, bool, std::string, Array> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<long long>(data) || std::holds_alternative<double>(data); }
  bool is_integer() const { return std::holds_alternative<long long>(data); }
};

struct Entry {
  Value value;
  bool used = false;
};

/// section name -> key -> entry. Keys at top level live in section "".
struct Document {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::map<std::string, int> section_lines;
  std::string source = "config";
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class LineParser {
 public:
  LineParser(std::string_view text, std::string where, int line)
      : s_(text), where_(std::move(where)), line_(line) {}

  Value value() {
    skip_ws();
    if (at_end()) fail("missing value");
    const char c = s_[pos_];
    Value v;
    v.line = line_;
    if (c == '"') {
      v.data = string();
    } else if (c == '[') {
      v.data = array();
    } else if (starts_with("true")) {
      pos_ += 4;
      v.data = true;
    } else if (starts_with("false")) {
      pos_ += 5;
      v.data = false;
    } else {
      number(v);
    }
    return v;
  }

  void expect_end() {
    skip_ws();
    if (!at_end() && s_[pos_] != '#') fail("unexpected trailing text '" + std::string(s_.substr(pos_)) + "'");
  }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  bool starts_with(std::string_view w) const {
    if (s_.substr(pos_, w.size()) != w) return false;
    const std::size_t e = pos_ + w.size();
    return e >= s_.size() || !bare_key_char(s_[e]);
  }
  void skip_ws() {
    while (!at_end() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw config_error(where_ + ":" + std::to_string(line_), msg);
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (at_end()) fail("unterminated escape");
      switch (s_[pos_++]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail("unsupported escape sequence");
      }
    }
  }

  Array array() {
    ++pos_;
    Array out;
    while (true) {
      skip_ws();
      if (at_end()) fail("unterminated array (arrays must fit on one line)");
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_ws();
      if (at_end()) fail("unterminated array (arrays must fit on one line)");
      if (s_[pos_] == ',') {
        ++pos_;
      } else if (s_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  void number(Value& v) {
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                               s_[end] == '+' || s_[end] == '-' || s_[end] == '_'))
      ++end;
    std::string tok(s_.substr(pos_, end - pos_));
    if (tok.empty()) fail("malformed value");
    std::string digits;
    for (char c : tok)
      if (c != '_') digits += c;
    const char* first = digits.data();
    if (*first == '+') ++first;
    const char* last = digits.data() + digits.size();
    const bool floating = digits.find_first_of(".eE") != std::string::npos;
    if (floating) {
      double d = 0.0;
      auto [p, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || p != last || !std::isfinite(d)) fail("malformed number '" + tok + "'");
      v.data = d;
    } else {
      long long i = 0;
      auto [p, ec] = std::from_chars(first, last, i);
      if (ec != std::errc() || p != last) fail("malformed value '" + tok + "'");
      v.data = i;
    }
    pos_ = end;
  }

  std::string_view s_;
  std::string where_;
  int line_;
  std::size_t pos_ = 0;
};

/// Position of a '#' that starts a comment (outside strings), or npos.
inline std::size_t comment_start(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return i;
    }
  }
  return std::string_view::npos;
}

}  // namespace detail

inline Document parse(std::string_view text, const std::string& source = "config") {
  Document doc;
  doc.source = source;
  std::string section;
  doc.sections[section];
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto where = source + ":" + std::to_string(line_no);
    const auto cpos = detail::comment_start(raw);
    const std::string line = detail::trim(raw.substr(0, cpos));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw config_error(where, "malformed section header");
      const std::string name = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (name.empty() || name.front() == '.' || name.back() == '.' || name.find("..") != std::string::npos)
        throw config_error(where, "malformed section name '" + name + "'");
      for (char c : name)
        if (!detail::bare_key_char(c) && c != '.') throw config_error(where, "malformed section name '" + name + "'");
      if (doc.section_lines.count(name)) throw config_error(where, "duplicate section [" + name + "]");
      doc.section_lines[name] = line_no;
      section = name;
      doc.sections[section];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw config_error(where, "missing key");
    for (char c : key)
      if (!detail::bare_key_char(c)) throw config_error(where, "malformed key '" + key + "'");
    detail::LineParser p(std::string_view(line).substr(eq + 1), source, line_no);
    Value v = p.value();
    p.expect_end();
    auto& sec = doc.sections[section];
    if (sec.count(key))
      throw config_error(where, "duplicate key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    sec[key] = Entry{std::move(v), false};
    if (nl == text.size()) break;
  }
  return doc;
}

}  // namespace toml

// ---------------------------------------------------------------------------

struct ProfileSpec {
  ProfileKind kind = ProfileKind::constant;
  double rate = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  std::vector<double> table_t, table_v;

  TimeProfile build(double base) const {
    switch (kind) {
      case ProfileKind::constant: return TimeProfile::constant(base);
      case ProfileKind::linear: return TimeProfile::linear(base, rate);
      case ProfileKind::exponential: return TimeProfile::exponential(base, rate);
      case ProfileKind::sinusoidal: return TimeProfile::sinusoidal(base, amplitude, frequency, phase);
      case ProfileKind::tabulated: return TimeProfile::tabulated(table_t, table_v);
    }
    return TimeProfile::constant(base);
  }
};

enum class HamiltonianChoice { automatic, ladder, direct };

inline const char* to_string(HamiltonianChoice h) {
  switch (h) {
    case HamiltonianChoice::automatic: return "auto";
    case HamiltonianChoice::ladder: return "ladder";
    case HamiltonianChoice::direct: return "direct";
  }
  return "?";
}

/// One sweep axis. Names are system keys (m, omega, theta, theta_bar, hbar),
/// profile parameters (e.g. omega_amplitude), horizon, or theta_both
/// (sets theta and theta_bar together).
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

inline const std::set<std::string>& sweepable_names() {
  static const std::set<std::string> names{
      "m",           "omega",          "theta",           "theta_bar",       "theta_both",    "hbar",
      "horizon",     "m_rate",         "m_amplitude",     "m_frequency",     "m_phase",       "omega_rate",
      "omega_amplitude", "omega_frequency", "omega_phase"};
  return names;
}

inline constexpr std::size_t max_sweep_points = 10000;

struct RunConfig {
  OscParams osc{1.0, 1.0};
  NCParams nc{0.0, 0.0, 1.0};
  int n_max = 14;
  Coupling coupling = Coupling::hbar;

  ProfileSpec mass_profile, omega_profile;
  double horizon = 1.0;

  InvariantConstants invariant_g = InvariantConstants::make_hermitian(1.0, 0.0, 0.0);
  InvariantConstants invariant_d = InvariantConstants::make_hermitian(1.0, 0.0, 0.0);

  int n_g = 0;
  int n_d = 0;
  bool displaced = true;

  double tol_ode = 1e-10;
  double tol_quad = 1e-10;
  int grid_points = 101;
  HamiltonianChoice hamiltonian = HamiltonianChoice::automatic;

  int spectrum_max_total = 4;
  int crosscheck_levels = 6;

  std::vector<SweepAxis> sweep_axes;
  int sweep_max_total = 2;

  FockBasis basis() const { return FockBasis(n_max); }

  TDParams td_params() const {
    TDParams p{mass_profile.build(osc.mass), omega_profile.build(osc.omega), nc, horizon, coupling};
    p.validate();
    return p;
  }

  HamiltonianSource source(const TDParams& p) const {
    switch (hamiltonian) {
      case HamiltonianChoice::ladder: return HamiltonianSource::ladder;
      case HamiltonianChoice::direct: return HamiltonianSource::direct;
      case HamiltonianChoice::automatic: break;
    }
    return p.stationary() ? HamiltonianSource::direct : HamiltonianSource::ladder;
  }

  std::size_t sweep_points() const {
    std::size_t n = 1;
    for (const auto& a : sweep_axes) n *= a.values.size();
    return n;
  }

  /// Copy with one sweep coordinate applied; throws invalid_parameter when
  /// the result violates a type invariant.
  RunConfig with(const std::string& name, double v) const {
    RunConfig c = *this;
    if (name == "m") c.osc.mass = v;
    else if (name == "omega") c.osc.omega = v;
    else if (name == "theta") c.nc.theta = v;
    else if (name == "theta_bar") c.nc.theta_bar = v;
    else if (name == "theta_both") c.nc.theta = c.nc.theta_bar = v;
    else if (name == "hbar") c.nc.hbar = v;
    else if (name == "horizon") c.horizon = v;
    else {
      const bool is_m = name.rfind("m_", 0) == 0;
      ProfileSpec& ps = is_m ? c.mass_profile : c.omega_profile;
      const std::string field = name.substr(is_m ? 2 : 6);
      if (field == "rate") ps.rate = v;
      else if (field == "amplitude") ps.amplitude = v;
      else if (field == "frequency") ps.frequency = v;
      else if (field == "phase") ps.phase = v;
      else throw invalid_parameter("unknown sweep axis '" + name + "'");
    }
    c.osc = OscParams(c.osc.mass, c.osc.omega);
    c.nc = NCParams(c.nc.theta, c.nc.theta_bar, c.nc.hbar);
    return c;
  }
};

namespace detail {

class Reader {
 public:
  explicit Reader(toml::Document& doc) : doc_(doc) {}

  bool has_section(const std::string& s) const { return doc_.section_lines.count(s) > 0; }

  toml::Entry* find(const std::string& sec, const std::string& key) {
    auto s = doc_.sections.find(sec);
    if (s == doc_.sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  [[noreturn]] void fail(const std::string& sec, const std::string& key, const toml::Value* v,
                         const std::string& msg) const {
    std::string where = doc_.source;
    if (v) where += ":" + std::to_string(v->line);
    else if (doc_.section_lines.count(sec)) where += ":" + std::to_string(doc_.section_lines.at(sec));
    throw config_error(where, "[" + sec + "] " + key + ": " + msg);
  }

  double number(const toml::Value& v, const std::string& sec, const std::string& key) const {
    if (auto i = std::get_if<long long>(&v.data)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v.data)) return *d;
    fail(sec, key, &v, "expected a number");
  }

  std::optional<double> opt_number(const std::string& sec, const std::string& key) {
    auto e = find(sec, key);
    if (!e) return std::nullopt;
    return number(e->value, sec, key);
  }

  double req_number(const std::string& sec, const std::string& key) {
    auto v = opt_number(sec, key);
    if (!v) fail(sec, key, nullptr, "required key is missing");
    return *v;
  }

  std::optional<long long> opt_integer(const std::string& sec, const std::string& key) {
    auto e = find(sec, key);
    if (!e) return std::nullopt;
    if (auto i = std::get_if<long long>(&e->value.data)) return *i;
    fail(sec, key, &e->value, "expected an integer");
  }

  std::optional<std::string> opt_string(const std::string& sec, const std::string& key) {
    auto e = find(sec, key);
    if (!e) return std::nullopt;
    if (auto s = std::get_if<std::string>(&e->value.data)) return *s;
    fail(sec, key, &e->value, "expected a string");
  }

  std::optional<bool> opt_bool(const std::string& sec, const std::string& key) {
    auto e = find(sec, key);
    if (!e) return std::nullopt;
    if (auto b = std::get_if<bool>(&e->value.data)) return *b;
    fail(sec, key, &e->value, "expected true or false");
  }

  std::optional<std::vector<double>> opt_numbers(const std::string& sec, const std::string& key) {
    auto e = find(sec, key);
    if (!e) return std::nullopt;
    auto a = std::get_if<toml::Array>(&e->value.data);
    if (!a) fail(sec, key, &e->value, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : *a) out.push_back(number(v, sec, key));
    return out;
  }

  std::optional<std::vector<std::string>> opt_strings(const std::string& sec, const std::string& key) {
    auto e = find(sec, key);
    if (!e) return std::nullopt;
    auto a = std::get_if<toml::Array>(&e->value.data);
    if (!a) fail(sec, key, &e->value, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *a) {
      auto s = std::get_if<std::string>(&v.data);
      if (!s) fail(sec, key, &v, "expected an array of strings");
      out.push_back(*s);
    }
    return out;
  }

  const toml::Value* value_of(const std::string& sec, const std::string& key) const {
    auto s = doc_.sections.find(sec);
    if (s == doc_.sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second.value;
  }

  /// Unknown sections and unread keys are errors.
  void reject_unused(const std::set<std::string>& known_sections) const {
    for (const auto& [sec, line] : doc_.section_lines)
      if (!known_sections.count(sec))
        throw config_error(doc_.source + ":" + std::to_string(line), "unknown section [" + sec + "]");
    for (const auto& [sec, keys] : doc_.sections)
      for (const auto& [key, e] : keys)
        if (!e.used)
          throw config_error(doc_.source + ":" + std::to_string(e.value.line),
                             "unknown key '" + key + "'" + (sec.empty() ? " outside any section" : " in [" + sec + "]"));
  }

 private:
  toml::Document& doc_;
};

inline void require(bool ok, Reader& r, const std::string& sec, const std::string& key, const std::string& msg) {
  if (!ok) r.fail(sec, key, r.value_of(sec, key), msg);
}

inline ProfileSpec read_profile(Reader& r, const std::string& q) {
  const std::string sec = "profiles";
  ProfileSpec ps;
  const auto kind = r.opt_string(sec, q + "_kind").value_or("constant");
  try {
    ps.kind = parse_profile_kind(kind);
  } catch (const invalid_parameter& e) {
    r.fail(sec, q + "_kind", r.value_of(sec, q + "_kind"), e.what());
  }
  auto need = [&](const std::string& field) {
    auto v = r.opt_number(sec, q + "_" + field);
    if (!v) r.fail(sec, q + "_" + field, nullptr, std::string("required for ") + to_string(ps.kind) + " profiles");
    return *v;
  };
  switch (ps.kind) {
    case ProfileKind::constant: break;
    case ProfileKind::linear:
    case ProfileKind::exponential: ps.rate = need("rate"); break;
    case ProfileKind::sinusoidal:
      ps.amplitude = need("amplitude");
      ps.frequency = need("frequency");
      ps.phase = r.opt_number(sec, q + "_phase").value_or(0.0);
      break;
    case ProfileKind::tabulated: {
      auto t = r.opt_numbers(sec, q + "_table_t");
      auto v = r.opt_numbers(sec, q + "_table_v");
      if (!t || !v) r.fail(sec, q + "_table_t", nullptr, "tabulated profiles need _table_t and _table_v");
      ps.table_t = *t;
      ps.table_v = *v;
      break;
    }
  }
  return ps;
}

inline InvariantConstants read_invariant(Reader& r, const std::string& sec) {
  const double alpha = r.opt_number(sec, "alpha01").value_or(1.0);
  const cplx beta(r.opt_number(sec, "beta01_re").value_or(0.0), r.opt_number(sec, "beta01_im").value_or(0.0));
  const double delta = r.opt_number(sec, "delta01").value_or(0.0);
  const bool hermitian = r.opt_bool(sec, "hermitian").value_or(true);
  const auto g_re = r.opt_number(sec, "gamma01_re");
  const auto g_im = r.opt_number(sec, "gamma01_im");
  try {
    if (hermitian) {
      if (g_re || g_im) r.fail(sec, "gamma01_re", nullptr, "gamma01 is fixed to conj(beta01) when hermitian = true");
      return InvariantConstants::make_hermitian(alpha, beta, delta);
    }
    return InvariantConstants::make_relaxed(alpha, beta, cplx(g_re.value_or(0.0), g_im.value_or(0.0)), delta);
  } catch (const invalid_parameter& e) {
    r.fail(sec, "alpha01", r.value_of(sec, "alpha01"), e.what());
  }
}

}  // namespace detail

/// Builds a validated RunConfig. Every failure is a config_error naming the
/// source line and key.
inline RunConfig parse_config(std::string_view text, const std::string& source = "config") {
  auto doc = toml::parse(text, source);
  detail::Reader r(doc);
  using detail::require;
  RunConfig c;

  const std::string sys = "system";
  if (!r.has_section(sys)) throw config_error(source, "missing required section [system]");
  const double m = r.req_number(sys, "m");
  const double omega = r.req_number(sys, "omega");
  const double theta = r.req_number(sys, "theta");
  const double theta_bar = r.req_number(sys, "theta_bar");
  const double hbar = r.opt_number(sys, "hbar").value_or(1.0);
  require(m > 0.0, r, sys, "m", "must be > 0");
  require(omega > 0.0, r, sys, "omega", "must be > 0");
  require(theta >= 0.0, r, sys, "theta", "must be >= 0");
  require(theta_bar >= 0.0, r, sys, "theta_bar", "must be >= 0");
  require(hbar > 0.0, r, sys, "hbar", "must be > 0");
  c.osc = OscParams(m, omega);
  c.nc = NCParams(theta, theta_bar, hbar);
  const auto n_max = r.opt_integer(sys, "n_max");
  if (!n_max) r.fail(sys, "n_max", nullptr, "required key is missing");
  require(*n_max >= 2 && *n_max <= 40, r, sys, "n_max", "must be in [2, 40]");
  c.n_max = static_cast<int>(*n_max);
  const auto coupling = r.opt_string(sys, "coupling").value_or("hbar");
  require(coupling == "hbar" || coupling == "unit", r, sys, "coupling", "must be \"hbar\" or \"unit\"");
  c.coupling = coupling == "unit" ? Coupling::unit : Coupling::hbar;

  c.mass_profile = detail::read_profile(r, "m");
  c.omega_profile = detail::read_profile(r, "omega");
  c.horizon = r.opt_number("profiles", "horizon").value_or(1.0);
  require(c.horizon > 0.0, r, "profiles", "horizon", "must be > 0");

  c.invariant_g = detail::read_invariant(r, "invariant.g");
  c.invariant_d = detail::read_invariant(r, "invariant.d");

  const std::string st = "state";
  c.n_g = static_cast<int>(r.opt_integer(st, "n_g").value_or(0));
  c.n_d = static_cast<int>(r.opt_integer(st, "n_d").value_or(0));
  require(c.n_g >= 0, r, st, "n_g", "must be >= 0");
  require(c.n_d >= 0, r, st, "n_d", "must be >= 0");
  require(c.n_g + c.n_d <= c.n_max, r, st, "n_g", "n_g + n_d exceeds n_max");
  c.displaced = r.opt_bool(st, "displaced").value_or(true);

  const std::string nu = "numerics";
  c.tol_ode = r.opt_number(nu, "tol_ode").value_or(1e-10);
  c.tol_quad = r.opt_number(nu, "tol_quad").value_or(1e-10);
  require(c.tol_ode > 0.0 && c.tol_ode < 1.0, r, nu, "tol_ode", "must be in (0, 1)");
  require(c.tol_quad > 0.0 && c.tol_quad < 1.0, r, nu, "tol_quad", "must be in (0, 1)");
  const auto gp = r.opt_integer(nu, "grid_points").value_or(101);
  require(gp >= 2 && gp <= 100000, r, nu, "grid_points", "must be in [2, 100000]");
  c.grid_points = static_cast<int>(gp);
  const auto ham = r.opt_string(nu, "hamiltonian").value_or("auto");
  require(ham == "auto" || ham == "ladder" || ham == "direct", r, nu, "hamiltonian",
          "must be \"auto\", \"ladder\" or \"direct\"");
  c.hamiltonian = ham == "ladder" ? HamiltonianChoice::ladder
                  : ham == "direct" ? HamiltonianChoice::direct
                                    : HamiltonianChoice::automatic;

  const std::string sp = "spectrum";
  const auto smt = r.opt_integer(sp, "max_total_quanta").value_or(4);
  require(smt >= 0 && smt <= 60, r, sp, "max_total_quanta", "must be in [0, 60]");
  c.spectrum_max_total = static_cast<int>(smt);
  const auto cl = r.opt_integer(sp, "crosscheck_levels").value_or(6);
  require(cl >= 1 && cl <= 200, r, sp, "crosscheck_levels", "must be in [1, 200]");
  c.crosscheck_levels = static_cast<int>(cl);

  const std::string sw = "sweep";
  if (r.has_section(sw)) {
    const auto axes = r.opt_strings(sw, "axes");
    if (!axes || axes->empty()) r.fail(sw, "axes", r.value_of(sw, "axes"), "required non-empty list of axis names");
    std::set<std::string> seen;
    for (const auto& name : *axes) {
      require(sweepable_names().count(name) > 0, r, sw, "axes", "unknown axis '" + name + "'");
      require(seen.insert(name).second, r, sw, "axes", "duplicate axis '" + name + "'");
      SweepAxis axis{name, {}};
      const auto list = r.opt_numbers(sw, name);
      const auto lin = r.opt_numbers(sw, name + "_linspace");
      if (list && lin) r.fail(sw, name, r.value_of(sw, name), "give either a value list or _linspace, not both");
      if (list) {
        axis.values = *list;
      } else if (lin) {
        const auto* lv = r.value_of(sw, name + "_linspace");
        if (lin->size() != 3) r.fail(sw, name + "_linspace", lv, "expected [start, stop, count]");
        const double cnt = (*lin)[2];
        if (!(cnt >= 1.0) || cnt != std::floor(cnt) || cnt > static_cast<double>(max_sweep_points))
          r.fail(sw, name + "_linspace", lv, "count must be an integer in [1, 10000]");
        const auto n = static_cast<std::size_t>(cnt);
        for (std::size_t i = 0; i < n; ++i)
          axis.values.push_back(n == 1 ? (*lin)[0]
                                       : (*lin)[0] + ((*lin)[1] - (*lin)[0]) * static_cast<double>(i) /
                                                         static_cast<double>(n - 1));
      } else {
        r.fail(sw, name, nullptr, "axis listed in 'axes' has no values");
      }
      require(!axis.values.empty(), r, sw, name, "axis has no values");
      c.sweep_axes.push_back(std::move(axis));
    }
    std::size_t points = 1;
    for (const auto& a : c.sweep_axes) {
      points *= a.values.size();
      require(points <= max_sweep_points, r, sw, "axes",
              "grid has more than " + std::to_string(max_sweep_points) + " points");
    }
    const auto mt = r.opt_integer(sw, "max_total_quanta").value_or(2);
    require(mt >= 0 && mt <= 60, r, sw, "max_total_quanta", "must be in [0, 60]");
    c.sweep_max_total = static_cast<int>(mt);
  }

  r.reject_unused({"system", "profiles", "invariant.g", "invariant.d", "state", "numerics", "spectrum", "sweep"});

  // Cross-field checks that need the whole configuration.
  try {
    c.td_params();
  } catch (const invalid_parameter& e) {
    throw config_error(source, std::string("[profiles] ") + e.what());
  }
  for (auto [sec, inv] : {std::pair{"invariant.g", &c.invariant_g}, std::pair{"invariant.d", &c.invariant_d}})
    if (!inv->hermitian && c.displaced && inv->beta01 != cplx(0.0))
      throw config_error(source, std::string("[") + sec +
                                     "] displaced initial states need a Hermitian invariant (hermitian = true)");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error(path, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace ncosc
