// Command-line front end.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fdgm/error.hpp"
#include "fdgm/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kOracle = 3, kCertification = 4 };

struct Options {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> horizon;
  std::optional<int> record_every;
};

void add_scenario_flags(CLI::App* cmd, Options& o) {
  auto* preset = cmd->add_option("--preset", o.preset, "preset name (see `scenarios`)");
  auto* config = cmd->add_option("--config", o.config, "scenario config file");
  preset->excludes(config);
  cmd->add_option("--seed", o.seed, "instance seed s; graph seed s+1");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--horizon", o.horizon, "number of iterations");
  cmd->add_option("--record-every", o.record_every, "metrics stride");
}

fdgm::ScenarioConfig resolve(const Options& o, bool certify) {
  if (o.preset.empty() && o.config.empty()) {
    throw fdgm::InvalidConfig("one of --preset or --config is required");
  }
  fdgm::ScenarioConfig c = o.preset.empty() ? fdgm::load_config(o.config) : fdgm::make_preset(o.preset);
  if (o.seed) fdgm::apply_seed(c, *o.seed);
  if (o.horizon) c.horizon = *o.horizon;
  if (o.record_every) c.record_every = *o.record_every;
  if (certify) c.certify = true;
  return c;
}

int execute(const Options& o, bool certify) {
  try {
    const fdgm::ScenarioConfig config = resolve(o, certify);
    std::optional<std::filesystem::path> out;
    if (!o.out.empty()) out = o.out;
    const auto outcome = fdgm::execute_scenario(config, out);
    for (const auto& a : outcome.algorithms) {
      std::cout << a.label << ": step=" << a.resolved_step;
      if (!a.records.empty()) {
        std::cout << " final primal_err=" << a.records.back().primal_error;
      }
      if (a.certification) {
        std::cout << " certification=" << (a.certification->passed() ? "PASS" : "FAIL");
      }
      std::cout << '\n';
      if (a.certification && !a.certification->passed()) {
        fdgm::write_report(std::cerr, *a.certification);
      }
    }
    if (config.certify && !outcome.certification_passed()) {
      std::cerr << "error: certification failed\n";
      return kCertification;
    }
    return kOk;
  } catch (const fdgm::OracleFailure& e) {
    std::cerr << "error: oracle failure: " << e.what() << '\n';
    return kOracle;
  } catch (const fdgm::CertificationUnavailable& e) {
    std::cerr << "error: certification unavailable: " << e.what() << '\n';
    return kCertification;
  } catch (const fdgm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Fenchel dual gradient simulator"};
  app.require_subcommand(1);

  Options run_opts;
  auto* run = app.add_subcommand("run", "run a scenario and write per-algorithm CSVs");
  add_scenario_flags(run, run_opts);

  Options verify_opts;
  auto* verify = app.add_subcommand("verify", "run a scenario with certification enabled");
  add_scenario_flags(verify, verify_opts);

  auto* list = app.add_subcommand("scenarios", "list presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  if (*list) {
    for (const auto& p : fdgm::list_presets()) std::cout << p.name << "  " << p.description << '\n';
    return kOk;
  }
  if (*run) return execute(run_opts, false);
  return execute(verify_opts, true);
}
