#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ncosc/commands.hpp"

using namespace ncosc;

int main(int argc, char** argv) {
  CLI::App app{"Spectra, invariants and phases of the noncommutative 2D oscillator"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  std::string format;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectrum", "closed-form level table and truncated-basis crosscheck"},
      {"evolve", "propagate the configured state and record observables"},
      {"phases", "phase ledger: closed-form conventions against the propagated phase"},
      {"verify", "run the invariant and oracle checks; exit 2 on any failure"},
      {"sweep", "evaluate observables over the [sweep] parameter grid"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--format", format, "csv or json (verify defaults to json, others to csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", workers, "threads for sweep points")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const OutputFormat fmt = format.empty() ? (command == "verify" ? OutputFormat::json : OutputFormat::csv)
                           : format == "json" ? OutputFormat::json
                                              : OutputFormat::csv;

  RunConfig cfg;
  RunInfo info;
  info.config_path = config_path;
  info.workers = workers;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw config_error(config_path, "cannot open configuration file");
    std::ostringstream ss;
    ss << in.rdbuf();
    info.config_text = ss.str();
    cfg = parse_config(info.config_text, config_path);
  } catch (const std::exception& e) {
    std::cerr << "ncosc: config error: " << e.what() << "\n";
    return exit_config;
  }

  Artifact art;
  try {
    if (command == "spectrum") art = cmd_spectrum(cfg);
    else if (command == "evolve") art = cmd_evolve(cfg);
    else if (command == "phases") art = cmd_phases(cfg);
    else if (command == "verify") art = cmd_verify(cfg);
    else art = cmd_sweep(cfg, workers);
  } catch (const config_error& e) {
    std::cerr << "ncosc: config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "ncosc: " << command << " failed: " << e.what() << "\n";
    return exit_numerical;
  }

  for (const auto& w : art.warnings) std::cerr << "ncosc: warning: " << w << "\n";
  try {
    for (const auto& f : write_artifact(art, out_dir, fmt, info)) std::cout << (std::filesystem::path(out_dir) / f).string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "ncosc: " << e.what() << "\n";
    return exit_numerical;
  }
  if (command == "verify") {
    const auto& rows = art.tables.front().rows;
    for (const auto& r : rows) {
      const bool counted = std::get<std::string>(r[5]) == "true";
      const bool pass = std::get<std::string>(r[4]) == "true";
      std::cerr << (counted ? (pass ? "PASS " : "FAIL ") : "INFO ") << std::get<std::string>(r[0]) << "."
                << std::get<std::string>(r[1]) << "  measured=" << cell_text(r[2]) << " tol=" << cell_text(r[3]);
      const auto& d = std::get<std::string>(r[6]);
      if (!d.empty() && (!pass || !counted)) std::cerr << "  (" << d << ")";
      std::cerr << "\n";
    }
  }
  return art.exit_code;
}
