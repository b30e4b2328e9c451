#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include "ncosc/config.hpp"

using namespace ncosc;

namespace {

const char* minimal = R"(
[system]
m = 1.0
omega = 1
theta = 0.1
theta_bar = 0.1
n_max = 14
)";

std::string with(const std::string& extra) { return std::string(minimal) + extra; }

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg");
  } catch (const config_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Toml, ScalarsArraysCommentsAndSections) {
  const auto doc = toml::parse(R"(top = 1
# comment
[a]
x = -2.5e-1   # trailing
s = "q\"#\\"
b = true
arr = [1, 2.0, +3,]
[a.b]
names = ["u", "v"]
)");
  const auto& a = doc.sections.at("a");
  EXPECT_EQ(std::get<double>(a.at("x").value.data), -0.25);
  EXPECT_EQ(a.at("x").value.line, 4);
  EXPECT_EQ(std::get<std::string>(a.at("s").value.data), "q\"#\\");
  EXPECT_TRUE(std::get<bool>(a.at("b").value.data));
  EXPECT_EQ(std::get<toml::Array>(a.at("arr").value.data).size(), 3u);
  EXPECT_EQ(std::get<long long>(doc.sections.at("").at("top").value.data), 1);
  EXPECT_EQ(std::get<toml::Array>(doc.sections.at("a.b").at("names").value.data).size(), 2u);
}

TEST(Toml, SyntaxErrorsCarryLineNumbers) {
  auto msg = [](const std::string& text) {
    try {
      toml::parse(text, "f");
    } catch (const config_error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg("[a]\nx = 1\nx = 2\n").find("f:3"), std::string::npos);
  EXPECT_NE(msg("[a]\n[a]\n").find("duplicate section"), std::string::npos);
  EXPECT_NE(msg("x = \"open\n").find("unterminated string"), std::string::npos);
  EXPECT_NE(msg("x = [1, 2\n").find("unterminated array"), std::string::npos);
  EXPECT_NE(msg("x = 1 2\n").find("trailing"), std::string::npos);
  EXPECT_NE(msg("x = 1.2.3\n").find("malformed"), std::string::npos);
  EXPECT_NE(msg("just text\n").find("key = value"), std::string::npos);
  EXPECT_NE(msg("[bad name]\n").find("section name"), std::string::npos);
  EXPECT_NE(msg("x = nan\n").find("malformed"), std::string::npos);
}

TEST(RunConfig, MinimalDefaults) {
  const auto c = parse_config(minimal);
  EXPECT_EQ(c.osc.mass, 1.0);
  EXPECT_EQ(c.nc.hbar, 1.0);
  EXPECT_EQ(c.n_max, 14);
  EXPECT_EQ(c.coupling, Coupling::hbar);
  EXPECT_EQ(c.mass_profile.kind, ProfileKind::constant);
  EXPECT_EQ(c.horizon, 1.0);
  EXPECT_EQ(c.invariant_g.beta01, cplx(0.0));
  EXPECT_EQ(c.grid_points, 101);
  EXPECT_EQ(c.hamiltonian, HamiltonianChoice::automatic);
  EXPECT_TRUE(c.sweep_axes.empty());
  EXPECT_EQ(c.source(c.td_params()), HamiltonianSource::direct);
}

TEST(RunConfig, FullProfileAndInvariantSections) {
  const auto c = parse_config(with(R"(
[profiles]
m_kind = "linear"
m_rate = 0.2
omega_kind = "tabulated"
omega_table_t = [0, 0.5, 2]
omega_table_v = [1, 1.2, 0.9]
horizon = 2
[invariant.g]
alpha01 = 2
beta01_re = 0.3
beta01_im = -0.1
delta01 = 0.5
[invariant.d]
hermitian = false
gamma01_re = 0.4
[state]
n_g = 2
n_d = 1
displaced = false
[numerics]
hamiltonian = "direct"
)"));
  EXPECT_EQ(c.mass_profile.kind, ProfileKind::linear);
  EXPECT_EQ(c.omega_profile.table_v.size(), 3u);
  const auto p = c.td_params();
  EXPECT_NEAR(p.mass(1.0), 1.2, 1e-15);
  EXPECT_NEAR(p.omega(0.5), 1.2, 1e-15);
  EXPECT_EQ(c.invariant_g.gamma01, cplx(0.3, 0.1));
  EXPECT_FALSE(c.invariant_d.hermitian);
  EXPECT_EQ(c.invariant_d.gamma01, cplx(0.4, 0.0));
  EXPECT_EQ(c.source(p), HamiltonianSource::direct);
}

TEST(RunConfig, AutoPicksLadderForDrivenProfiles) {
  const auto c = parse_config(with(R"(
[profiles]
omega_kind = "sinusoidal"
omega_amplitude = 0.3
omega_frequency = 6
)"));
  EXPECT_EQ(c.source(c.td_params()), HamiltonianSource::ladder);
}

TEST(RunConfig, UnknownAndMissingKeysAreRejected) {
  EXPECT_NE(error_of(with("[system2]\nx = 1\n")).find("unknown section [system2]"), std::string::npos);
  EXPECT_NE(error_of(with("[state]\nn_q = 1\n")).find("unknown key 'n_q' in [state]"), std::string::npos);
  EXPECT_NE(error_of("stray = 1\n" + std::string(minimal)).find("outside any section"), std::string::npos);
  EXPECT_NE(error_of("[system]\nm = 1\nomega = 1\ntheta = 0\nn_max = 4\n").find("theta_bar: required"),
            std::string::npos);
  EXPECT_NE(error_of("[state]\nn_g = 1\n").find("missing required section [system]"), std::string::npos);
  // A key that does not apply to the chosen profile kind is unknown.
  EXPECT_NE(error_of(with("[profiles]\nm_rate = 0.1\n")).find("unknown key 'm_rate'"), std::string::npos);
  EXPECT_NE(error_of(with("[profiles]\nomega_kind = \"linear\"\n")).find("omega_rate: required"), std::string::npos);
}

TEST(RunConfig, OutOfRangeValuesAreRejectedWithLine) {
  const auto neg = error_of("[system]\nm = 1\nomega = 1\ntheta = -0.1\ntheta_bar = 0\nn_max = 4\n");
  EXPECT_NE(neg.find("cfg:4"), std::string::npos) << neg;
  EXPECT_NE(neg.find("theta: must be >= 0"), std::string::npos) << neg;
  EXPECT_NE(error_of("[system]\nm = 0\nomega = 1\ntheta = 0\ntheta_bar = 0\nn_max = 4\n").find("m: must be > 0"),
            std::string::npos);
  EXPECT_NE(error_of("[system]\nm = 1\nomega = 1\ntheta = 0\ntheta_bar = 0\nn_max = 1\n").find("n_max"),
            std::string::npos);
  EXPECT_NE(error_of("[system]\nm = 1\nomega = 1\ntheta = 0\ntheta_bar = 0\nn_max = 4.0\n").find("expected an integer"),
            std::string::npos);
  EXPECT_NE(error_of(with("[state]\nn_g = 10\nn_d = 5\n")).find("exceeds n_max"), std::string::npos);
  EXPECT_NE(error_of(with("[numerics]\ntol_ode = 0\n")).find("tol_ode"), std::string::npos);
  EXPECT_NE(error_of(with("[numerics]\nhamiltonian = \"exact\"\n")).find("hamiltonian"), std::string::npos);
  EXPECT_NE(error_of(with("[system.x]\n")).find("unknown section"), std::string::npos);
  EXPECT_NE(error_of(with("[invariant.g]\nalpha01 = 0\n")).find("alpha01"), std::string::npos);
  EXPECT_NE(error_of(with("[invariant.g]\ngamma01_re = 1\n")).find("conj(beta01)"), std::string::npos);
  EXPECT_NE(error_of(with("[profiles]\nm_kind = \"cubic\"\n")).find("unknown profile kind"), std::string::npos);
}

TEST(RunConfig, NonPositiveProfileIsConfigError) {
  const auto msg = error_of(with(R"(
[profiles]
omega_kind = "sinusoidal"
omega_amplitude = 1.5
omega_frequency = 3
omega_phase = 3.5
)"));
  EXPECT_NE(msg.find("[profiles]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("not positive"), std::string::npos) << msg;
  EXPECT_NE(error_of(with("[profiles]\nomega_kind = \"tabulated\"\nomega_table_t = [0, 0.5]\nomega_table_v = [1, 1]\n"))
                .find("does not cover"),
            std::string::npos);
}

TEST(RunConfig, SweepAxes) {
  const auto c = parse_config(with(R"(
[sweep]
axes = ["theta", "omega_amplitude"]
theta = [0, 0.1, 0.2]
omega_amplitude_linspace = [0.0, 0.2, 5]
max_total_quanta = 3
)"));
  ASSERT_EQ(c.sweep_axes.size(), 2u);
  EXPECT_EQ(c.sweep_axes[1].values.size(), 5u);
  EXPECT_DOUBLE_EQ(c.sweep_axes[1].values[2], 0.1);
  EXPECT_EQ(c.sweep_axes[1].values.back(), 0.2);
  EXPECT_EQ(c.sweep_points(), 15u);
  EXPECT_EQ(c.sweep_max_total, 3);

  const auto moved = c.with("theta_both", 0.3);
  EXPECT_EQ(moved.nc.theta, 0.3);
  EXPECT_EQ(moved.nc.theta_bar, 0.3);
  EXPECT_EQ(c.with("omega_amplitude", 0.7).omega_profile.amplitude, 0.7);
  EXPECT_THROW(c.with("theta", -1.0), invalid_parameter);
}

TEST(RunConfig, SweepErrors) {
  EXPECT_NE(error_of(with("[sweep]\naxes = [\"spin\"]\n")).find("unknown axis"), std::string::npos);
  EXPECT_NE(error_of(with("[sweep]\naxes = [\"theta\"]\n")).find("no values"), std::string::npos);
  EXPECT_NE(error_of(with("[sweep]\naxes = [\"theta\", \"theta\"]\ntheta = [1]\n")).find("duplicate axis"),
            std::string::npos);
  EXPECT_NE(error_of(with("[sweep]\naxes = [\"theta\"]\ntheta_linspace = [0, 1]\n")).find("[start, stop, count]"),
            std::string::npos);
  EXPECT_NE(error_of(with("[sweep]\naxes = [\"theta\", \"m\"]\ntheta_linspace = [0, 1, 101]\nm_linspace = [1, 2, 100]\n"))
                .find("more than 10000"),
            std::string::npos);
  EXPECT_NE(error_of(with("[sweep]\naxes = [\"theta\"]\ntheta = [0]\ntheta_linspace = [0, 1, 2]\n")).find("not both"),
            std::string::npos);
}

TEST(RunConfig, ShippedConfigsParse) {
  const char* root = std::getenv("NCOSC_SOURCE_DIR");
  if (!root) GTEST_SKIP() << "NCOSC_SOURCE_DIR not set";
  for (const char* name : {"default", "sinusoidal", "commutative", "truncated", "sweep"})
    EXPECT_NO_THROW(load_config(std::string(root) + "/configs/" + name + ".toml")) << name;
  EXPECT_THROW(load_config(std::string(root) + "/configs/missing.toml"), config_error);
}
