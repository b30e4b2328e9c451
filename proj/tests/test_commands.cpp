#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

#include "ncosc/commands.hpp"

using namespace ncosc;
namespace fs = std::filesystem;

namespace {

const std::string config_dir = NCOSC_CONFIG_DIR;
const std::string cli = NCOSC_CLI_PATH;

RunConfig base(double theta = 0.1, double theta_bar = 0.1) {
  std::ostringstream s;
  s << "[system]\nm = 1\nomega = 1\ntheta = " << theta << "\ntheta_bar = " << theta_bar << "\nn_max = 14\n";
  return parse_config(s.str());
}

const Table& table(const Artifact& a, const std::string& name) {
  for (const auto& t : a.tables)
    if (t.name == name) return t;
  throw std::runtime_error("no table " + name);
}

std::size_t col(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  throw std::runtime_error("no column " + name);
}

double num(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return *d;
  return static_cast<double>(std::get<long long>(c));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ncosc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Csv, QuotingAndFloats) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1.0), "1");
  Table t{"x", {"a", "b,c"}, {}};
  t.add({1LL, std::string("q\"")});
  t.add({Cell{}, 2.5});
  EXPECT_EQ(to_csv(t), "a,\"b,c\"\r\n1,\"q\"\"\"\r\n,2.5\r\n");
  EXPECT_THROW(t.add({1LL}), std::logic_error);
}

TEST(Spectrum, DefaultSystemRows) {
  const auto a = cmd_spectrum(base());
  const auto& lv = table(a, "levels");
  const auto e = col(lv, "energy");
  EXPECT_NEAR(num(lv.rows[0][e]), 1.0025, 1e-14);
  EXPECT_NEAR(num(lv.rows[1][e]), 1.905, 1e-14);
  EXPECT_NEAR(num(lv.rows[2][e]), 2.105, 1e-14);
  EXPECT_EQ(std::get<long long>(lv.rows[1][col(lv, "n_g")]), 1);
  EXPECT_EQ(a.summary["crosscheck"]["matching_coupling"], "hbar");
  EXPECT_LE(a.summary["crosscheck"]["max_relative_deviation"].get<double>(), 1e-6);
  EXPECT_EQ(a.exit_code, exit_ok);
}

TEST(Spectrum, CommutativeMultipletsAreDegenerate) {
  auto c = base(0.0, 0.0);
  c.crosscheck_levels = 10;
  const auto a = cmd_spectrum(c);
  const auto& lv = table(a, "levels");
  for (const auto& row : lv.rows)
    EXPECT_EQ(num(row[col(lv, "energy")]), num(row[col(lv, "total_quanta")]) + 1.0);
  const auto& cc = table(a, "crosscheck");
  for (const auto& row : cc.rows) EXPECT_LE(num(row[col(cc, "relative_deviation")]), 1e-9);
}

TEST(Evolve, StationaryEigenstateKeepsExpectations) {
  auto c = base();
  c.n_g = 2;
  c.n_d = 1;
  const auto a = cmd_evolve(c);
  const auto& t = table(a, "trajectory");
  for (const auto* name : {"n_g", "n_d", "l_z", "invariant_g", "invariant_d"}) {
    const auto k = col(t, name);
    for (const auto& row : t.rows) EXPECT_NEAR(num(row[k]), num(t.rows.front()[k]), 1e-8) << name;
  }
  EXPECT_NEAR(num(t.rows.front()[col(t, "n_g")]), 2.0, 1e-12);
  EXPECT_NEAR(num(t.rows.front()[col(t, "l_z")]), 1.0, 1e-12);
  EXPECT_NEAR(num(t.rows.back()[col(t, "phase")]), -energy_closed_form(2, 1, c.osc, c.nc), 1e-6);
}

TEST(Evolve, SinusoidalDriveConservesCircularNumbersAndInvariant) {
  const auto c = load_config(config_dir + "/sinusoidal.toml");
  const auto a = cmd_evolve(c);
  EXPECT_EQ(a.summary["hamiltonian_source"], "ladder");
  const auto& t = table(a, "trajectory");
  for (const auto* name : {"n_g", "n_d", "invariant_g", "invariant_d"}) {
    const auto k = col(t, name);
    for (const auto& row : t.rows) EXPECT_NEAR(num(row[k]), num(t.rows.front()[k]), 1e-6) << name;
  }
  for (const auto& row : t.rows) EXPECT_LE(num(row[col(t, "norm_drift")]), 1e-8);
}

TEST(Phases, ZeroDisplacementConventionsCoincide) {
  auto c = load_config(config_dir + "/sinusoidal.toml");
  c.displaced = false;
  const auto a = cmd_phases(c);
  const auto& t = table(a, "ledger");
  for (const auto& row : t.rows) {
    EXPECT_EQ(num(row[col(t, "convention_delta")]), 0.0);
    EXPECT_LE(std::abs(num(row[col(t, "discrepancy_corrected")])), 1e-5);
  }
  EXPECT_EQ(a.exit_code, exit_ok);
}

TEST(Phases, DisplacedConstantRunFavoursCorrectedConvention) {
  const auto c = load_config(config_dir + "/default.toml");
  const auto a = cmd_phases(c);
  EXPECT_LE(a.summary["max_discrepancy_corrected"].get<double>(), 1e-5);
  // The printed split overcounts by the geometric phase of each sector.
  EXPECT_NEAR(a.summary["convention_delta"].get<double>(), a.summary["geometric_sum"].get<double>(), 1e-12);
  EXPECT_GT(a.summary["max_discrepancy_stated"].get<double>(), 1e-2);
}

TEST(Phases, CommutativeGeometricColumn) {
  const auto c = load_config(config_dir + "/commutative.toml");
  const auto a = cmd_phases(c);
  const auto& t = table(a, "ledger");
  for (const auto& row : t.rows) {
    const double time = num(row[col(t, "t")]);
    EXPECT_NEAR(num(row[col(t, "xi_g_geometric")]), 0.25 * time, 1e-12);
  }
}

TEST(Verify, DefaultConfigPasses) {
  const auto a = cmd_verify(load_config(config_dir + "/default.toml"));
  EXPECT_EQ(a.exit_code, exit_ok);
  EXPECT_TRUE(a.summary["pass"].get<bool>());
  const auto& t = table(a, "checks");
  bool literal_reported = false;
  for (const auto& row : t.rows)
    if (std::get<std::string>(row[1]) == "algebra_literal_i_hbar") {
      literal_reported = true;
      EXPECT_EQ(std::get<std::string>(row[5]), "false");
      EXPECT_NEAR(num(row[2]), 0.0025, 1e-12);
    }
  EXPECT_TRUE(literal_reported);
}

TEST(Verify, TruncatedBasisFailsGuardWithMessage) {
  const auto a = cmd_verify(load_config(config_dir + "/truncated.toml"));
  EXPECT_EQ(a.exit_code, exit_verification);
  const auto& t = table(a, "checks");
  int guard_failures = 0;
  for (const auto& row : t.rows)
    if (std::get<std::string>(row[4]) == "false" &&
        std::get<std::string>(row[6]).find("truncation guard") != std::string::npos)
      ++guard_failures;
  EXPECT_GE(guard_failures, 1);
}

TEST(Sweep, SinglePointMatchesOtherCommands) {
  auto c = load_config(config_dir + "/default.toml");
  c.sweep_axes = {{"theta", {0.1}}};
  c.sweep_max_total = 1;
  const auto s = cmd_sweep(c);
  const auto& g = table(s, "grid");
  const auto spec = cmd_spectrum(c);
  const auto& lv = table(spec, "levels");
  int energies = 0;
  for (const auto& row : g.rows) {
    if (std::get<std::string>(row[col(g, "observable")]) != "energy") continue;
    const auto ng = std::get<long long>(row[col(g, "n_g")]);
    const auto nd = std::get<long long>(row[col(g, "n_d")]);
    for (const auto& l : lv.rows)
      if (std::get<long long>(l[0]) == ng && std::get<long long>(l[1]) == nd) {
        EXPECT_EQ(num(row[col(g, "value")]), num(l[col(lv, "energy")]));
        ++energies;
      }
  }
  EXPECT_EQ(energies, 3);
  const auto ph = cmd_phases(c);
  for (const auto& row : g.rows) {
    if (std::get<std::string>(row[col(g, "observable")]) == "geometric_g") {
      EXPECT_NEAR(num(row[col(g, "value")]), num(table(ph, "ledger").rows.back()[3]), 1e-12);
    }
  }
}

TEST(Sweep, SplittingLinearInTheta) {
  auto c = base(0.0, 0.0);
  c.sweep_axes = {{"theta", {0.0, 0.1, 0.2, 0.3}}};
  const auto g = table(cmd_sweep(c), "grid");
  std::vector<double> split;
  for (const auto& row : g.rows)
    if (std::get<std::string>(row[col(g, "observable")]) == "splitting") split.push_back(num(row[col(g, "value")]));
  ASSERT_EQ(split.size(), 4u);
  for (std::size_t i = 0; i < split.size(); ++i) EXPECT_NEAR(split[i], 0.5 * 0.1 * static_cast<double>(i), 1e-15);
}

TEST(Sweep, CommutativeLimitEnergies) {
  auto c = base();
  c.sweep_axes = {{"theta_both", {1e-2, 1e-4, 1e-6, 0.0}}};
  const auto g = table(cmd_sweep(c), "grid");
  double last_dev = 1.0;
  for (long long p = 0; p < 4; ++p) {
    double dev = 0.0;
    for (const auto& row : g.rows)
      if (std::get<long long>(row[0]) == p && std::get<std::string>(row[col(g, "observable")]) == "energy") {
        const double n = num(row[col(g, "n_g")]) + num(row[col(g, "n_d")]);
        dev = std::max(dev, std::abs(num(row[col(g, "value")]) - (n + 1.0)));
      }
    EXPECT_LT(dev, last_dev + 1e-300);
    last_dev = dev;
  }
  EXPECT_EQ(last_dev, 0.0);
}

TEST(Sweep, WorkerCountDoesNotChangeOutputAndErrorsAreRecorded) {
  auto c = load_config(config_dir + "/sweep.toml");
  c.sweep_axes.push_back({"omega_phase", {0.0, 4.0}});
  c.sweep_axes[1].values = {0.1, 1.5};  // amplitude 1.5 with phase 4 drives omega negative
  const auto one = to_csv(table(cmd_sweep(c, 1), "grid"));
  const auto many = cmd_sweep(c, 7);
  EXPECT_EQ(one, to_csv(table(many, "grid")));
  EXPECT_GT(many.summary["failed_points"].get<std::size_t>(), 0u);
  const auto& g = table(many, "grid");
  bool found = false;
  for (const auto& row : g.rows)
    if (!std::get<std::string>(row[col(g, "error")]).empty()) {
      found = true;
      EXPECT_NE(std::get<std::string>(row[col(g, "error")]).find("not positive"), std::string::npos);
    }
  EXPECT_TRUE(found);
}

TEST(Sweep, RejectsMissingAxes) { EXPECT_THROW(cmd_sweep(base()), config_error); }

TEST(Cli, ExitCodes) {
  const auto out = scratch("exit");
  EXPECT_EQ(run_cli("verify --config " + config_dir + "/default.toml --out " + out.string()), 0);
  EXPECT_EQ(run_cli("verify --config " + config_dir + "/truncated.toml --out " + out.string()), 2);
  EXPECT_EQ(run_cli("spectrum --config " + config_dir + "/truncated.toml --out " + out.string()), 3);
  EXPECT_EQ(run_cli("sweep --config " + config_dir + "/default.toml --out " + out.string()), 1);

  const auto bad = out / "negative.toml";
  std::ofstream(bad) << "[system]\nm = 1\nomega = 1\ntheta = -0.1\ntheta_bar = 0\nn_max = 4\n";
  EXPECT_EQ(run_cli("spectrum --config " + bad.string() + " --out " + out.string()), 1);
  EXPECT_EQ(run_cli("spectrum --config " + (out / "absent.toml").string()), 1);
  EXPECT_EQ(run_cli("spectrum --config " + config_dir + "/default.toml --format xml"), 1);
  EXPECT_EQ(run_cli("bogus --config " + config_dir + "/default.toml"), 1);
  fs::remove_all(out);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  const std::vector<std::pair<std::string, std::string>> runs{
      {"spectrum", "default"}, {"evolve", "sinusoidal"}, {"phases", "default"}, {"sweep", "sweep"}};
  for (const auto& [cmd, cfg] : runs) {
    const std::string conf = " --config " + config_dir + "/" + cfg + ".toml";
    ASSERT_EQ(run_cli(cmd + conf + " --workers 1 --out " + a.string()), 0) << cmd;
    ASSERT_EQ(run_cli(cmd + conf + " --workers 3 --out " + b.string()), 0) << cmd;
    ASSERT_EQ(run_cli(cmd + conf + " --format json --out " + a.string()), 0) << cmd;
    ASSERT_EQ(run_cli(cmd + conf + " --format json --out " + b.string()), 0) << cmd;
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename().string();
    if (name.find(".meta.json") != std::string::npos) continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 10);
  const auto meta = nlohmann::json::parse(slurp(a / "sweep.meta.json"));
  EXPECT_EQ(meta["schema_version"], schema_version);
  EXPECT_EQ(meta["format"], "json");
  fs::remove_all(a);
  fs::remove_all(b);
}
