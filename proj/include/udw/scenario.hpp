#pragma once

#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "udw/fock.hpp"

namespace udw {

// Exit statuses of the scenario runner.
inline constexpr int kStatusOk = 0;
inline constexpr int kStatusConfigError = 2;
inline constexpr int kStatusPhysicsError = 3;
inline constexpr int kStatusNumericalError = 4;

struct Issue {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  int status = kStatusOk;  // status category an error maps to
  std::string message;
};

// Flat key-value configuration, one section per module. Every scenario has a
// complete set of defaults; a config file overrides individual keys.
struct ScenarioConfig {
  std::string scenario;

  // [physics]
  double m_D = 10.0;
  double Omega = 0.3;
  double lambda = 0.01;
  double p1 = 0.0;
  double p2 = 1.4;
  double t_max = 2.0;
  int n_t = 50;

  // [grid]
  int n_detector = 9;
  double spacing = 0.07;  // detector rapidity spacing
  int n_photon = 16;      // modes per branch
  double k_min = 0.15;
  double du = 0.05;  // photon log spacing
  bool photon_both_branches = true;

  // [qrf]
  double m_A = 2.0;
  double m_L = 3.0;
  int n_frame = 5;
  int frame_step = 2;  // lab spacing in units of the base spacing
  double tau_i = 0.0;
  double tau_f = 1.2;

  // [observable]
  cplx alpha1{1.0, 0.0}, alpha2{1.0, 0.0};
  cplx beta1{0.0, 0.0}, beta2{1.0, 0.0};

  // [rates]
  double dt = 1e-4;

  // [output]
  std::string prefix;

  unsigned seed = 1;
};

// Built-in defaults for a scenario name; throws on unknown names.
ScenarioConfig default_config(const std::string& scenario);

// Parse the key-value document, starting from the scenario's defaults.
// Unknown sections, keys, or malformed values throw std::invalid_argument.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

std::vector<Issue> validate(const ScenarioConfig& cfg);

struct RunResult {
  int status = kStatusOk;
  std::vector<std::string> files;
  nlohmann::json manifest;
  std::string message;
};

// Executes the scenario, writing <prefix>.csv and <prefix>.manifest.json
// under out_dir. Deterministic for a fixed config and seed.
RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, int threads = 1);

}  // namespace udw
