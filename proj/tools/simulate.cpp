// simulate: coherence simulations of a central electron spin in a nuclear
// spin bath. Subcommands: run, validate, oracle-check.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "nvsim/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int do_validate(const std::string& path) {
  nvsim::Json j;
  try {
    j = nvsim::Json::parse(nvsim::read_text(path));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  const auto diags = nvsim::validate_config_json(j);
  if (diags.empty()) {
    std::printf("ok: %s\n", path.c_str());
    return kExitOk;
  }
  for (const auto& d : diags) std::printf("%s\n", d.c_str());
  return kExitConfig;
}

int do_run(const std::string& path, const nvsim::RunOptions& opts,
           bool force_oracle) {
  try {
    nvsim::RunConfig cfg = nvsim::load_run_config(path);
    if (force_oracle && cfg.scenario != nvsim::Scenario::oracle_check) {
      std::fprintf(stderr,
                   "error: oracle-check requires a config with scenario "
                   "'oracle_check' (got '%s')\n",
                   nvsim::scenario_name(cfg.scenario).c_str());
      return kExitConfig;
    }
    const auto outcome = nvsim::run_scenario(cfg, opts);
    std::printf("wrote %zu artifacts to %s\n", outcome.artifacts.size(),
                outcome.out_dir.c_str());
    return kExitOk;
  } catch (const nvsim::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"central-spin coherence simulator"};
  app.require_subcommand(1);

  std::string config_path;
  nvsim::RunOptions opts;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "execute a configuration");
  run->add_option("config", config_path, "JSON configuration file")->required();
  run->add_option("--threads", opts.threads, "worker threads (default: all cores)");
  run->add_flag("--keep-going", opts.keep_going,
                "continue after per-point failures (flagged in outputs)");
  run->add_option("--out", out_dir, "output directory (overrides config)");

  auto* validate = app.add_subcommand("validate", "check a configuration file");
  validate->add_option("config", config_path, "JSON configuration file")->required();

  auto* oracle = app.add_subcommand(
      "oracle-check", "run the gCCE-vs-exact oracle comparison of a config");
  oracle->add_option("config", config_path, "JSON configuration file")->required();
  oracle->add_option("--threads", opts.threads, "worker threads");
  oracle->add_option("--out", out_dir, "output directory (overrides config)");

  CLI11_PARSE(app, argc, argv);

  if (!out_dir.empty()) opts.out_dir_override = out_dir;
  if (validate->parsed()) return do_validate(config_path);
  return do_run(config_path, opts, oracle->parsed());
}
