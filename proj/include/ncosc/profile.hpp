#pragma once

// Positive scalar functions of time used for m(t) and omega(t).

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "ncosc/errors.hpp"

namespace ncosc {

enum class ProfileKind { constant, linear, exponential, sinusoidal, tabulated };

inline const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::linear: return "linear";
    case ProfileKind::exponential: return "exponential";
    case ProfileKind::sinusoidal: return "sinusoidal";
    case ProfileKind::tabulated: return "tabulated";
  }
  return "?";
}

inline ProfileKind parse_profile_kind(std::string_view s) {
  if (s == "constant") return ProfileKind::constant;
  if (s == "linear") return ProfileKind::linear;
  if (s == "exponential") return ProfileKind::exponential;
  if (s == "sinusoidal") return ProfileKind::sinusoidal;
  if (s == "tabulated") return ProfileKind::tabulated;
  throw invalid_parameter("unknown profile kind '" + std::string(s) + "'");
}

/// v(t) for one of:
///   constant     v0
///   linear       v0 + rate t
///   exponential  v0 exp(rate t)
///   sinusoidal   v0 + amplitude sin(frequency t + phase)
///   tabulated    monotone piecewise-cubic (Fritsch-Carlson) through nodes
class TimeProfile {
 public:
  TimeProfile() = default;

  static TimeProfile constant(double v0) { return TimeProfile(ProfileKind::constant, v0); }
  static TimeProfile linear(double v0, double rate) {
    TimeProfile p(ProfileKind::linear, v0);
    p.rate_ = rate;
    return p;
  }
  static TimeProfile exponential(double v0, double rate) {
    TimeProfile p(ProfileKind::exponential, v0);
    p.rate_ = rate;
    return p;
  }
  static TimeProfile sinusoidal(double v0, double amplitude, double frequency, double phase = 0.0) {
    TimeProfile p(ProfileKind::sinusoidal, v0);
    p.amplitude_ = amplitude;
    p.frequency_ = frequency;
    p.phase_ = phase;
    return p;
  }
  static TimeProfile tabulated(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.size() < 2)
      throw invalid_parameter("tabulated profile needs >= 2 matching (t, v) nodes");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw invalid_parameter("tabulated profile times must increase");
    TimeProfile p(ProfileKind::tabulated, v.front());
    p.nodes_t_ = std::move(t);
    p.nodes_v_ = std::move(v);
    p.build_slopes();
    return p;
  }

  ProfileKind kind() const { return kind_; }
  double base() const { return v0_; }
  double rate() const { return rate_; }
  double amplitude() const { return amplitude_; }
  double frequency() const { return frequency_; }
  double phase() const { return phase_; }
  const std::vector<double>& nodes_t() const { return nodes_t_; }
  const std::vector<double>& nodes_v() const { return nodes_v_; }

  bool is_constant() const {
    switch (kind_) {
      case ProfileKind::constant: return true;
      case ProfileKind::linear:
      case ProfileKind::exponential: return rate_ == 0.0;
      case ProfileKind::sinusoidal: return amplitude_ == 0.0;
      case ProfileKind::tabulated:
        return std::all_of(nodes_v_.begin(), nodes_v_.end(),
                           [&](double v) { return v == nodes_v_.front(); });
    }
    return false;
  }

  double operator()(double t) const {
    switch (kind_) {
      case ProfileKind::constant: return v0_;
      case ProfileKind::linear: return v0_ + rate_ * t;
      case ProfileKind::exponential: return v0_ * std::exp(rate_ * t);
      case ProfileKind::sinusoidal: return v0_ + amplitude_ * std::sin(frequency_ * t + phase_);
      case ProfileKind::tabulated: return interpolate(t);
    }
    return v0_;
  }

  /// Throws unless the profile is finite and strictly positive on [0, horizon]:
  /// an analytic lower bound per kind plus a 1024-point sample.
  void validate(double horizon) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw invalid_parameter("profile horizon must be finite and > 0");
    double bound = 0.0;
    switch (kind_) {
      case ProfileKind::constant: bound = v0_; break;
      case ProfileKind::linear: bound = std::min(v0_, v0_ + rate_ * horizon); break;
      case ProfileKind::exponential: bound = v0_; break;  // sign of v0 decides
      case ProfileKind::sinusoidal: bound = v0_ - std::abs(amplitude_); break;
      case ProfileKind::tabulated: {
        if (nodes_t_.front() > 0.0 || nodes_t_.back() < horizon)
          throw invalid_parameter("tabulated profile does not cover [0, horizon]");
        // The monotone interpolant stays between neighbouring node values.
        bound = *std::min_element(nodes_v_.begin(), nodes_v_.end());
        break;
      }
    }
    if (!(bound > 0.0) && kind_ != ProfileKind::sinusoidal)
      throw invalid_parameter(std::string(to_string(kind_)) + " profile is not positive on [0, T]");
    constexpr int samples = 1024;
    for (int i = 0; i < samples; ++i) {
      const double t = horizon * i / (samples - 1);
      const double v = (*this)(t);
      if (!std::isfinite(v) || !(v > 0.0))
        throw invalid_parameter(std::string(to_string(kind_)) +
                                " profile is not positive on [0, T] (t = " + std::to_string(t) + ")");
    }
  }

 private:
  TimeProfile(ProfileKind k, double v0) : kind_(k), v0_(v0) {
    if (!std::isfinite(v0)) throw invalid_parameter("profile base value must be finite");
  }

  void build_slopes() {
    const std::size_t n = nodes_t_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = nodes_t_[i + 1] - nodes_t_[i];
      delta[i] = (nodes_v_[i + 1] - nodes_v_[i]) / h[i];
    }
    slopes_.assign(n, 0.0);
    if (n == 2) {
      slopes_[0] = slopes_[1] = delta[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      // Weighted harmonic mean (Fritsch-Butland form of Fritsch-Carlson).
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    slopes_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  static double end_slope(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) d = 3.0 * d0;
    return d;
  }

  double interpolate(double t) const {
    const auto& ts = nodes_t_;
    if (t <= ts.front()) return nodes_v_.front();
    if (t >= ts.back()) return nodes_v_.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
    const double h = ts[i + 1] - ts[i];
    const double s = (t - ts[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * nodes_v_[i] + h10 * h * slopes_[i] + h01 * nodes_v_[i + 1] +
           h11 * h * slopes_[i + 1];
  }

  ProfileKind kind_ = ProfileKind::constant;
  double v0_ = 1.0;
  double rate_ = 0.0;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double phase_ = 0.0;
  std::vector<double> nodes_t_, nodes_v_, slopes_;
};

}  // namespace ncosc
