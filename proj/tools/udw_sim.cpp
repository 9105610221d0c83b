#include <CLI11.hpp>
#include <cstdio>

#include "udw/scenario.hpp"
#include "udw/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Second-quantized detector decay and quantum-reference-frame scenario runner"};
  app.set_version_flag("--version", udw::kVersion);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  int seed_override = -1;

  CLI::App* run = app.add_subcommand("run", "run a scenario config and write CSV + manifest");
  run->add_option("config", config_path, "config file path")->required();
  run->add_option("--output-dir", out_dir, "directory for CSV and manifest outputs");
  run->add_option("--threads", threads, "worker threads for row sweeps")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", seed_override, "override the config seed");

  CLI::App* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", config_path, "config file path")->required();

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  udw::ScenarioConfig cfg;
  try {
    cfg = udw::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return udw::kStatusConfigError;
  }
  if (seed_override >= 0) cfg.seed = static_cast<unsigned>(seed_override);

  if (val->parsed()) {
    auto issues = udw::validate(cfg);
    int status = udw::kStatusOk;
    for (const auto& is : issues) {
      bool err = is.severity == udw::Issue::Severity::Error;
      std::fprintf(err ? stderr : stdout, "%s: %s\n", err ? "error" : "warning",
                   is.message.c_str());
      if (err && status == udw::kStatusOk) status = is.status;
    }
    if (issues.empty()) std::printf("ok: %s\n", cfg.scenario.c_str());
    return status;
  }

  udw::RunResult res = udw::run_scenario(cfg, out_dir, threads);
  if (res.status != udw::kStatusOk) {
    std::fprintf(stderr, "error (%d): %s\n", res.status, res.message.c_str());
    return res.status;
  }
  for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
  return udw::kStatusOk;
}
