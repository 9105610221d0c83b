#include "udw/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "udw/coherence.hpp"
#include "udw/nonrel.hpp"
#include "udw/qrf.hpp"
#include "udw/rates.hpp"
#include "udw/version.hpp"

namespace udw {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kScenarios = {"decay-scan",      "coherence-compare",
                                             "qrf-roundtrip",   "superposed-time",
                                             "rate-transform",  "nonrel-limit"};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for " + key);
  }
  if (used != v.size()) throw std::invalid_argument("config: bad numeric value for " + key);
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  double x = parse_double(key, v);
  if (x != std::floor(x)) throw std::invalid_argument("config: integer expected for " + key);
  return static_cast<int>(x);
}

}  // namespace

ScenarioConfig default_config(const std::string& scenario) {
  if (std::find(kScenarios.begin(), kScenarios.end(), scenario) == kScenarios.end())
    throw std::invalid_argument("unknown scenario: " + scenario);
  ScenarioConfig c;
  c.scenario = scenario;
  c.prefix = scenario;
  if (scenario == "qrf-roundtrip" || scenario == "superposed-time" ||
      scenario == "rate-transform") {
    // Aligned frame transforms need one shared rapidity quantum.
    c.m_D = 1.0;
    c.Omega = 0.5;
    c.n_detector = 25;
    c.spacing = 0.05;
    c.du = 0.05;
    c.k_min = 0.1;
    c.n_photon = 14;
    c.p1 = 0.0;
    c.t_max = 1.2;
    c.n_t = 12;
  } else if (scenario == "nonrel-limit") {
    c.n_detector = 33;
    c.lambda = 0.05;
    c.k_min = 0.2;
    c.du = 0.15;
    c.n_photon = 8;
  }
  return c;
}

ScenarioConfig parse_config_text(const std::string& text) {
  // First pass: find the scenario name so defaults are in place.
  std::map<std::string, std::map<std::string, std::string>> kv;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config: empty key or value at line " + std::to_string(lineno));
    if (!kv[section].emplace(key, val).second)
      throw std::invalid_argument("config: duplicate key " + key);
  }

  auto top = kv.find("");
  if (top == kv.end() || !top->second.count("scenario"))
    throw std::invalid_argument("config: missing top-level 'scenario' key");
  ScenarioConfig c = default_config(top->second.at("scenario"));
  top->second.erase("scenario");

  auto take = [&](const std::string& sec, const std::string& key, auto setter) {
    auto s = kv.find(sec);
    if (s == kv.end()) return;
    auto it = s->second.find(key);
    if (it == s->second.end()) return;
    setter(it->second);
    s->second.erase(it);
  };
  auto dbl = [&](const std::string& sec, const std::string& key, double& field) {
    take(sec, key, [&](const std::string& v) { field = parse_double(key, v); });
  };
  auto intval = [&](const std::string& sec, const std::string& key, int& field) {
    take(sec, key, [&](const std::string& v) { field = parse_int(key, v); });
  };
  auto cplxval = [&](const std::string& sec, const std::string& re_key,
                     const std::string& im_key, cplx& field) {
    take(sec, re_key, [&](const std::string& v) { field.real(parse_double(re_key, v)); });
    take(sec, im_key, [&](const std::string& v) { field.imag(parse_double(im_key, v)); });
  };

  dbl("physics", "m_D", c.m_D);
  dbl("physics", "Omega", c.Omega);
  dbl("physics", "lambda", c.lambda);
  dbl("physics", "p1", c.p1);
  dbl("physics", "p2", c.p2);
  dbl("physics", "t_max", c.t_max);
  intval("physics", "n_t", c.n_t);

  intval("grid", "n_detector", c.n_detector);
  dbl("grid", "spacing", c.spacing);
  intval("grid", "n_photon", c.n_photon);
  dbl("grid", "k_min", c.k_min);
  dbl("grid", "du", c.du);
  take("grid", "photon_both_branches", [&](const std::string& v) {
    c.photon_both_branches = parse_int("photon_both_branches", v) != 0;
  });

  dbl("qrf", "m_A", c.m_A);
  dbl("qrf", "m_L", c.m_L);
  intval("qrf", "n_frame", c.n_frame);
  intval("qrf", "frame_step", c.frame_step);
  dbl("qrf", "tau_i", c.tau_i);
  dbl("qrf", "tau_f", c.tau_f);

  cplxval("observable", "alpha1_re", "alpha1_im", c.alpha1);
  cplxval("observable", "alpha2_re", "alpha2_im", c.alpha2);
  cplxval("observable", "beta1_re", "beta1_im", c.beta1);
  cplxval("observable", "beta2_re", "beta2_im", c.beta2);

  dbl("rates", "dt", c.dt);

  take("output", "prefix", [&](const std::string& v) { c.prefix = v; });
  take("output", "seed",
       [&](const std::string& v) { c.seed = static_cast<unsigned>(parse_int("seed", v)); });

  for (const auto& [sec, keys] : kv)
    for (const auto& [key, val] : keys)
      throw std::invalid_argument("config: unknown key '" + key + "' in section [" + sec + "]");
  return c;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

struct Built {
  GridBindings bindings;
  int psi1_mode = -1, psi2_mode = -1;
};

Built build_bindings(const ScenarioConfig& cfg, bool with_frames) {
  Built out;
  auto det = make_detector_grids(make_species(cfg.m_D, cfg.Omega), cfg.n_detector, cfg.spacing);
  out.bindings.detector[0] = det.level0;
  out.bindings.detector[1] = det.level1;
  out.bindings.photon = make_photon_grid(
      cfg.k_min, cfg.du, cfg.n_photon,
      cfg.photon_both_branches ? PhotonBranches::Both : PhotonBranches::Positive);
  if (with_frames) {
    out.bindings.lab = make_massive_grid(cfg.m_L, cfg.n_frame, cfg.frame_step * cfg.spacing, 0.0);
    out.bindings.ancilla =
        make_massive_grid(cfg.m_A, cfg.n_frame, cfg.frame_step * cfg.spacing, 0.0);
  }
  auto p1 = out.bindings.detector[1]->snap(cfg.p1);
  auto p2 = out.bindings.detector[1]->snap(cfg.p2);
  out.psi1_mode = p1 ? *p1 : -1;
  out.psi2_mode = p2 ? *p2 : -1;
  return out;
}

bool needs_frames(const std::string& scenario) {
  return scenario == "qrf-roundtrip" || scenario == "superposed-time" ||
         scenario == "rate-transform";
}

}  // namespace

std::vector<Issue> validate(const ScenarioConfig& cfg) {
  std::vector<Issue> issues;
  auto err = [&](int status, std::string msg) {
    issues.push_back(Issue{Issue::Severity::Error, status, std::move(msg)});
  };
  auto warn = [&](std::string msg) {
    issues.push_back(Issue{Issue::Severity::Warning, kStatusOk, std::move(msg)});
  };

  if (std::find(kScenarios.begin(), kScenarios.end(), cfg.scenario) == kScenarios.end()) {
    err(kStatusConfigError, "unknown scenario: " + cfg.scenario);
    return issues;
  }
  if (!(cfg.m_D > 0.0)) err(kStatusPhysicsError, "m_D must be > 0");
  if (cfg.Omega < 0.0) err(kStatusPhysicsError, "Omega must be >= 0");
  if (needs_frames(cfg.scenario)) {
    if (!(cfg.m_A > 0.0)) err(kStatusPhysicsError, "m_A must be > 0");
    if (!(cfg.m_L > 0.0)) err(kStatusPhysicsError, "m_L must be > 0");
    if (cfg.tau_f < cfg.tau_i) err(kStatusPhysicsError, "tau_f must be >= tau_i");
  }
  if (cfg.t_max < 0.0) err(kStatusPhysicsError, "t_max must be >= 0");
  if (cfg.n_t < 1) err(kStatusConfigError, "n_t must be >= 1");

  if (cfg.n_detector < 2) err(kStatusNumericalError, "grid: n_detector must be >= 2");
  if (!(cfg.spacing > 0.0)) err(kStatusNumericalError, "grid: spacing must be > 0");
  if (cfg.n_photon < 2) err(kStatusNumericalError, "grid: n_photon must be >= 2");
  if (!(cfg.k_min > 0.0)) err(kStatusNumericalError, "grid: k_min must be > 0");
  if (!(cfg.du > 0.0)) err(kStatusNumericalError, "grid: du must be > 0");
  if (!issues.empty()) return issues;

  Built built = build_bindings(cfg, needs_frames(cfg.scenario));
  if (cfg.scenario == "decay-scan" || cfg.scenario == "coherence-compare") {
    if (built.psi1_mode < 0) err(kStatusPhysicsError, "p1 falls outside the detector grid");
    if (built.psi2_mode < 0) err(kStatusPhysicsError, "p2 falls outside the detector grid");
    if (built.psi1_mode >= 0 && built.psi1_mode == built.psi2_mode)
      err(kStatusPhysicsError, "p1 and p2 snap to the same detector mode");
  }

  // Perturbative validity guard.
  if (built.psi1_mode >= 0 && cfg.t_max > 0.0 &&
      (cfg.scenario == "decay-scan" || cfg.scenario == "coherence-compare")) {
    ResonantHamiltonian h(built.bindings, cfg.lambda);
    double s_max = s_norm(h.emission(unit_excited_state(built.bindings, built.psi1_mode),
                                     cfg.t_max));
    if (cfg.lambda * cfg.lambda * s_max >= 0.1)
      warn("perturbative validity: lambda^2 s(t_max) = " +
           fmt17(cfg.lambda * cfg.lambda * s_max) + " >= 0.1");
  }

  if (needs_frames(cfg.scenario)) {
    QrfTransform q = QrfTransform::build(built.bindings, true);
    if (!q.aligned()) {
      std::string msg = "QRF transform misaligned; residuals per lab mode:";
      for (const auto& e : q.table())
        msg += " (" + fmt17(e.det_residual) + "," + fmt17(e.ph_residual) + ")";
      warn(msg);
    }
  }
  return issues;
}

namespace {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ScenarioOutput {
  Csv csv;
  json diagnostics;
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// Ordered parallel map over row indices; results land in input order, so the
// emitted bytes do not depend on the thread count.
template <class F>
std::vector<std::vector<std::string>> map_rows(int n, int threads, F&& f) {
  std::vector<std::vector<std::string>> rows(n);
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) rows[i] = f(i);
    return rows;
  }
  std::vector<std::future<void>> futs;
  std::atomic<int> next{0};
  int workers = std::min(threads, n);
  for (int w = 0; w < workers; ++w)
    futs.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) rows[i] = f(i);
    }));
  for (auto& fu : futs) fu.get();
  return rows;
}

ScenarioOutput run_decay_scan(const ScenarioConfig& cfg, int threads) {
  Built built = build_bindings(cfg, false);
  ResonantHamiltonian h(built.bindings, cfg.lambda);
  SectorState Psi1 = unit_excited_state(built.bindings, built.psi1_mode);
  SectorState Psi2 = unit_excited_state(built.bindings, built.psi2_mode);

  auto ts = linspace(0.0, cfg.t_max, cfg.n_t);
  std::vector<double> dropped(cfg.n_t, 0.0);
  ScenarioOutput out;
  out.csv.header = {"t", "s1", "s2"};
  out.csv.rows = map_rows(cfg.n_t, threads, [&](int i) {
    double d1 = 0.0, d2 = 0.0;
    double s1 = s_norm(h.emission(Psi1, ts[i], &d1));
    double s2 = s_norm(h.emission(Psi2, ts[i], &d2));
    dropped[i] = std::max(d1, d2);
    return std::vector<std::string>{fmt17(ts[i]), fmt17(s1), fmt17(s2)};
  });
  out.diagnostics["dropped_weight"] = *std::max_element(dropped.begin(), dropped.end());
  out.diagnostics["max_unitarity_defect"] = 0.0;
  out.diagnostics["table_dropped_fraction"] = h.table_dropped_fraction();
  return out;
}

ScenarioOutput run_coherence_compare(const ScenarioConfig& cfg, int threads) {
  Built built = build_bindings(cfg, false);
  ResonantHamiltonian h(built.bindings, cfg.lambda);
  SectorState Psi1 = unit_excited_state(built.bindings, built.psi1_mode);
  SectorState Psi2 = unit_excited_state(built.bindings, built.psi2_mode);

  auto ts = linspace(0.0, cfg.t_max, cfg.n_t);
  std::vector<double> dropped(cfg.n_t, 0.0), trunc_diff(cfg.n_t, 0.0);
  ScenarioOutput out;
  out.csv.header = {"t",     "s1",    "s2",    "re_dQ", "im_dQ", "re_a1", "im_a1",
                    "re_a2", "im_a2", "re_b1", "im_b1", "re_b2", "im_b2", "lambda"};
  out.csv.rows = map_rows(cfg.n_t, threads, [&](int i) {
    double d1 = 0.0, d2 = 0.0;
    SectorState psi1 = h.emission(Psi1, ts[i], &d1);
    SectorState psi2 = h.emission(Psi2, ts[i], &d2);
    dropped[i] = std::max(d1, d2);
    DensityOperator rc = build_rho_coherent(Psi1, Psi2, psi1, psi2, cfg.lambda);
    DensityOperator ric = build_rho_incoherent(Psi1, Psi2, psi1, psi2, cfg.lambda);
    DensityOperator dr = delta_rho(rc, ric);
    BinaryObservable Q = make_binary_observable({cfg.alpha1, cfg.alpha2}, {cfg.beta1, cfg.beta2},
                                                Psi1, Psi2, psi1, psi2, cfg.lambda);
    cplx dq = expectation_rank_one(dr, Q.q);
    trunc_diff[i] = std::abs(expectation_untruncated(Q, dr) - dq.real());
    return std::vector<std::string>{fmt17(ts[i]),
                                    fmt17(s_norm(psi1)),
                                    fmt17(s_norm(psi2)),
                                    fmt17(dq.real()),
                                    fmt17(dq.imag()),
                                    fmt17(Q.alpha[0].real()),
                                    fmt17(Q.alpha[0].imag()),
                                    fmt17(Q.alpha[1].real()),
                                    fmt17(Q.alpha[1].imag()),
                                    fmt17(Q.beta[0].real()),
                                    fmt17(Q.beta[0].imag()),
                                    fmt17(Q.beta[1].real()),
                                    fmt17(Q.beta[1].imag()),
                                    fmt17(cfg.lambda)};
  });
  out.diagnostics["dropped_weight"] = *std::max_element(dropped.begin(), dropped.end());
  out.diagnostics["max_unitarity_defect"] = 0.0;
  // The lambda^2 normalization-correction gap the truncated form discards.
  out.diagnostics["max_truncation_difference"] =
      *std::max_element(trunc_diff.begin(), trunc_diff.end());
  return out;
}

SectorState seeded_emission_sector_state(const GridBindings& b, std::mt19937& rng, int margin_det,
                                         int margin_ph) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SectorState s(b);
  for (int n = margin_det; n < b.detector[1]->size() - margin_det; ++n) {
    BasisConfig c;
    c.level = 1;
    c.det = static_cast<std::uint16_t>(n);
    s.add(c, cplx(u(rng), u(rng)));
  }
  int half = b.photon->branch_size();
  for (int n = margin_det; n < b.detector[0]->size() - margin_det; ++n)
    for (int j = 0; j < b.photon->size(); ++j) {
      int jb = j < half ? j : j - half;
      if (jb < margin_ph || jb >= half - margin_ph) continue;
      BasisConfig c;
      c.level = 0;
      c.det = static_cast<std::uint16_t>(n);
      c.has_photon = true;
      c.photon = static_cast<std::uint16_t>(j);
      s.add(c, cplx(u(rng), u(rng)));
    }
  s *= 1.0 / s.norm();
  return s;
}

std::pair<int, int> boost_margins(const QrfTransform& q) {
  int md = 0, mp = 0;
  for (const auto& e : q.table()) {
    md = std::max(md, std::abs(e.det_steps) + 1);
    mp = std::max(mp, std::abs(e.ph_steps) + 1);
  }
  return {md, mp};
}

ScenarioOutput run_qrf_roundtrip(const ScenarioConfig& cfg, int) {
  Built built = build_bindings(cfg, true);
  QrfTransform q = QrfTransform::build(built.bindings, true);
  ResonantHamiltonian h(built.bindings, cfg.lambda);
  auto [margin_det, margin_ph] = boost_margins(q);

  std::mt19937 rng(cfg.seed);
  double unit_defect = 0.0, roundtrip = 0.0, prob_inv = 0.0, max_dropped = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    SectorState base = seeded_emission_sector_state(built.bindings, rng, margin_det, margin_ph);
    std::vector<cplx> chi(built.bindings.lab->size());
    double n2 = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : chi) {
      v = cplx(u(rng), u(rng));
      n2 += std::norm(v);
    }
    for (auto& v : chi) v *= 1.0 / std::sqrt(n2);
    SectorState x = tensor_with_frame(base, chi, FrameKind::Lab);
    double dropped = 0.0;
    SectorState sx = apply_S(x, q, &dropped);
    max_dropped = std::max(max_dropped, dropped);
    unit_defect = std::max(unit_defect, std::abs(sx.norm() / x.norm() - 1.0));
    roundtrip = std::max(roundtrip, (apply_S_dagger(sx, q) - x).norm());

    LinOp pi = lin_ensemble({{cplx(1.0, 0.0), x, x}});
    DensityOperator rho;
    rho.members.push_back(DensityMember{1.0, GradedState::plain(sx), GradedState::plain(sx)});
    DensityOperator rho_A;
    rho_A.members.push_back(DensityMember{1.0, GradedState::plain(x), GradedState::plain(x)});
    double pA = probability(rho_A, pi);
    double pL = probability(rho, lin_conjugate_by_S(pi, q));
    prob_inv = std::max(prob_inv, std::abs(pA - pL));
  }

  int rest_lab = built.bindings.lab->size() / 2;
  HintCheckResult rest =
      transform_hint_check(q, h, cfg.t_max, nullptr, q.lab_to_ancilla(rest_lab));
  HintCheckResult boosted = transform_hint_check(q, h, 0.0, nullptr, q.lab_to_ancilla(0));
  HintCheckResult full = transform_hint_check(q, h, 0.0);

  SectorState probe = seeded_emission_sector_state(built.bindings, rng, margin_det, margin_ph);
  std::vector<cplx> chi(built.bindings.lab->size(), cplx{});
  chi[rest_lab] = std::sqrt(0.5);
  chi[rest_lab - 1] = std::sqrt(0.5);
  SectorState pc_probe = tensor_with_frame(probe, chi, FrameKind::Lab);
  double pc = picture_change_residual(q, pc_probe, 0.7 * cfg.tau_f);

  ScenarioOutput out;
  out.csv.header = {"name", "residual", "grid_n", "spacing"};
  auto row = [&](const std::string& name, double v) {
    out.csv.rows.push_back(
        {name, fmt17(v), std::to_string(cfg.n_detector), fmt17(cfg.spacing)});
  };
  row("unitarity_defect", unit_defect);
  row("roundtrip_error", roundtrip);
  row("probability_invariance", prob_inv);
  row("hint_check_rest_frame_element", rest.max_element);
  row("hint_check_boosted_element", boosted.max_element);
  row("hint_check_full_element", full.max_element);
  row("hint_check_wavepacket", full.wavepacket);
  row("picture_change", pc);

  out.diagnostics["dropped_weight"] = max_dropped;
  out.diagnostics["max_unitarity_defect"] = unit_defect;
  out.diagnostics["aligned"] = q.aligned();
  return out;
}

ScenarioOutput run_superposed_time(const ScenarioConfig& cfg, int threads) {
  Built built = build_bindings(cfg, true);
  QrfTransform q = QrfTransform::build(built.bindings, true);
  ResonantHamiltonian h(built.bindings, cfg.lambda);

  int center = built.psi1_mode >= 0 ? built.psi1_mode : built.bindings.detector[1]->size() / 2;
  SectorState det = unit_excited_state(built.bindings, center);
  int a1 = q.lab_to_ancilla(1);
  int a2 = q.lab_to_ancilla(0);
  double g1 = q.gamma_ancilla(a1), g2 = q.gamma_ancilla(a2);
  cplx c1(std::sqrt(0.6), 0.0), c2(0.0, std::sqrt(0.4));
  std::vector<cplx> chi(built.bindings.ancilla->size(), cplx{});
  chi[a1] = c1;
  chi[a2] = c2;
  SectorState x = tensor_with_frame(det, chi, FrameKind::Ancilla);

  auto taus = linspace(cfg.tau_i, cfg.tau_f, cfg.n_t);
  std::vector<double> dropped(cfg.n_t, 0.0);
  ScenarioOutput out;
  out.csv.header = {"tau", "gamma_1", "gamma_2", "branch_sum_residual", "eigenstate_residual",
                    "s_total"};
  out.csv.rows = map_rows(cfg.n_t, threads, [&](int i) {
    double d = 0.0;
    SectorState ev = superposed_time_evolve(x, q, h, cfg.tau_i, taus[i], &d);
    dropped[i] = d;
    // Two-branch oracle assembled from plain dilated evolutions.
    std::vector<cplx> e1(chi.size(), cplx{}), e2(chi.size(), cplx{});
    e1[a1] = c1;
    e2[a2] = c2;
    double dtau = taus[i] - cfg.tau_i;
    SectorState oracle =
        tensor_with_frame(h.emission(det, g1 * dtau), e1, FrameKind::Ancilla);
    oracle.axpy(1.0, tensor_with_frame(h.emission(det, g2 * dtau), e2, FrameKind::Ancilla));
    double branch_residual = (ev - oracle).norm();

    // Ancilla momentum eigenstate reduces to a fixed-time evolution.
    std::vector<cplx> ei(chi.size(), cplx{});
    ei[a1] = 1.0;
    SectorState xe = tensor_with_frame(det, ei, FrameKind::Ancilla);
    SectorState ev_e = superposed_time_evolve(xe, q, h, cfg.tau_i, taus[i]);
    SectorState plain = tensor_with_frame(h.emission(det, g1 * dtau), ei, FrameKind::Ancilla);
    double eig_residual = (ev_e - plain).norm();

    return std::vector<std::string>{fmt17(taus[i]),        fmt17(g1),
                                    fmt17(g2),             fmt17(branch_residual),
                                    fmt17(eig_residual),   fmt17(s_norm(ev))};
  });
  out.diagnostics["dropped_weight"] = *std::max_element(dropped.begin(), dropped.end());
  out.diagnostics["max_unitarity_defect"] = 0.0;
  return out;
}

ScenarioOutput run_rate_transform(const ScenarioConfig& cfg, int) {
  Built built = build_bindings(cfg, true);
  QrfTransform q = QrfTransform::build(built.bindings, true);
  ResonantHamiltonian h(built.bindings, cfg.lambda);
  auto [margin_det, margin_ph] = boost_margins(q);

  std::mt19937 rng(cfg.seed);
  SectorState base = seeded_emission_sector_state(built.bindings, rng, margin_det, margin_ph);
  int nf = built.bindings.lab->size();
  std::vector<cplx> chi(nf, cplx{});
  chi[1] = std::sqrt(0.6);
  chi[nf / 2] = std::sqrt(0.4);
  SectorState v = tensor_with_frame(base, chi, FrameKind::Lab);
  v *= 1.0 / v.norm();
  DensityOperator rho;
  rho.members.push_back(DensityMember{1.0, GradedState::plain(v), GradedState::plain(v)});

  std::vector<cplx> sigma1(nf, cplx{});
  sigma1[1] = std::sqrt(0.5);
  sigma1[nf / 2] = std::sqrt(0.5);
  PiObservable pi1 = build_pi1(q, photon_sector_projector(), sigma1);
  std::vector<cplx> sigma2(nf, cplx{});
  sigma2[1] = std::sqrt(0.5);
  sigma2[nf / 2] = std::sqrt(0.5);
  PiObservable pi2 = build_pi2(q, photon_sector_projector(), sigma2);

  ScenarioOutput out;
  out.csv.header = {"observable_name", "lhs", "rhs", "residual", "extra_commutator_term",
                    "dS_term"};
  for (auto& [name, pi] : std::vector<std::pair<std::string, LinOp>>{
           {"pi1", pi1.ancilla_frame}, {"pi2", pi2.ancilla_frame}}) {
    RateTransformResult r = rate_transform_residual(rho, pi, q, h, cfg.t_max, cfg.dt);
    out.csv.rows.push_back({name, fmt17(r.lhs), fmt17(r.rhs), fmt17(r.residual),
                            fmt17(r.extra_commutator), fmt17(r.ds_term)});
  }
  out.diagnostics["dropped_weight"] = 0.0;
  out.diagnostics["max_unitarity_defect"] = 0.0;
  out.diagnostics["aligned"] = q.aligned();
  return out;
}

ScenarioOutput run_nonrel_limit(const ScenarioConfig& cfg, int threads) {
  std::vector<double> ratios = {3.0, 10.0, 30.0, 100.0};
  double p_max = 1.0;
  ScenarioOutput out;
  out.csv.header = {"mass_ratio", "locality_defect", "hint_deviation"};
  out.csv.rows = map_rows(static_cast<int>(ratios.size()), threads, [&](int i) {
    double mass = ratios[i] * p_max;
    GridBindings b;
    double eta_max = std::asinh(p_max / mass);
    auto det = make_detector_grids(make_species(mass, 0.1 * mass), cfg.n_detector,
                                   2.0 * eta_max / (cfg.n_detector - 1));
    b.detector[0] = det.level0;
    b.detector[1] = det.level1;
    b.photon = make_photon_grid(cfg.k_min, cfg.du, cfg.n_photon,
                                cfg.photon_both_branches ? PhotonBranches::Both
                                                         : PhotonBranches::Positive);
    auto xs = conjugate_position_lattice(*b.detector[0], 9);
    double defect = position_locality_defect(b, 0, xs);
    double dev = compare_hint_forms(b, cfg.lambda);
    return std::vector<std::string>{fmt17(ratios[i]), fmt17(defect), fmt17(dev)};
  });
  out.diagnostics["dropped_weight"] = 0.0;
  out.diagnostics["max_unitarity_defect"] = 0.0;
  return out;
}

json config_echo(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["physics"] = {{"m_D", c.m_D}, {"Omega", c.Omega}, {"lambda", c.lambda}, {"p1", c.p1},
                  {"p2", c.p2},   {"t_max", c.t_max}, {"n_t", c.n_t}};
  j["grid"] = {{"n_detector", c.n_detector},
               {"spacing", c.spacing},
               {"n_photon", c.n_photon},
               {"k_min", c.k_min},
               {"du", c.du},
               {"photon_both_branches", c.photon_both_branches}};
  j["qrf"] = {{"m_A", c.m_A},           {"m_L", c.m_L},   {"n_frame", c.n_frame},
              {"frame_step", c.frame_step}, {"tau_i", c.tau_i}, {"tau_f", c.tau_f}};
  j["observable"] = {{"alpha1_re", c.alpha1.real()}, {"alpha1_im", c.alpha1.imag()},
                     {"alpha2_re", c.alpha2.real()}, {"alpha2_im", c.alpha2.imag()},
                     {"beta1_re", c.beta1.real()},   {"beta1_im", c.beta1.imag()},
                     {"beta2_re", c.beta2.real()},   {"beta2_im", c.beta2.imag()}};
  j["rates"] = {{"dt", c.dt}};
  j["output"] = {{"prefix", c.prefix}, {"seed", c.seed}};
  return j;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, int threads) {
  RunResult res;
  auto issues = validate(cfg);
  std::vector<std::string> warnings;
  for (const auto& is : issues) {
    if (is.severity == Issue::Severity::Error) {
      res.status = is.status == kStatusOk ? kStatusConfigError : is.status;
      res.message = is.message;
      return res;
    }
    warnings.push_back(is.message);
  }

  auto t0 = std::chrono::steady_clock::now();
  ScenarioOutput out;
  try {
    if (cfg.scenario == "decay-scan")
      out = run_decay_scan(cfg, threads);
    else if (cfg.scenario == "coherence-compare")
      out = run_coherence_compare(cfg, threads);
    else if (cfg.scenario == "qrf-roundtrip")
      out = run_qrf_roundtrip(cfg, threads);
    else if (cfg.scenario == "superposed-time")
      out = run_superposed_time(cfg, threads);
    else if (cfg.scenario == "rate-transform")
      out = run_rate_transform(cfg, threads);
    else if (cfg.scenario == "nonrel-limit")
      out = run_nonrel_limit(cfg, threads);
    else {
      res.status = kStatusConfigError;
      res.message = "unknown scenario: " + cfg.scenario;
      return res;
    }
  } catch (const std::exception& e) {
    res.status = kStatusNumericalError;
    res.message = e.what();
    return res;
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // NaN screening before anything is written.
  for (const auto& row : out.csv.rows)
    for (const auto& cell : row)
      if (cell == "nan" || cell == "-nan" || cell == "inf" || cell == "-inf") {
        res.status = kStatusNumericalError;
        res.message = "non-finite value in output";
        return res;
      }

  std::filesystem::create_directories(out_dir);
  std::string csv_path = out_dir + "/" + cfg.prefix + ".csv";
  {
    std::ofstream f(csv_path, std::ios::binary);
    for (std::size_t i = 0; i < out.csv.header.size(); ++i)
      f << (i ? "," : "") << out.csv.header[i];
    f << "\n";
    for (const auto& row : out.csv.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
      f << "\n";
    }
  }
  res.files.push_back(csv_path);

  json manifest;
  manifest["scenario"] = cfg.scenario;
  manifest["version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_echo(cfg);
  out.diagnostics["wall_time_s"] = wall;
  bool flagged = out.diagnostics.contains("dropped_weight") &&
                 out.diagnostics["dropped_weight"].get<double>() >= 1e-3;
  out.diagnostics["dropped_weight_flagged"] = flagged;
  manifest["diagnostics"] = out.diagnostics;
  manifest["warnings"] = warnings;
  manifest["outputs"] = {cfg.prefix + ".csv"};
  std::string man_path = out_dir + "/" + cfg.prefix + ".manifest.json";
  {
    std::ofstream f(man_path, std::ios::binary);
    f << manifest.dump(2) << "\n";
  }
  res.files.push_back(man_path);
  res.manifest = std::move(manifest);
  return res;
}

}  // namespace udw
