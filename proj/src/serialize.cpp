#include "udw/serialize.hpp"

#include <algorithm>

namespace udw {

json grid_to_json(const ModeGrid& g) {
  json j;
  if (g.kind() == GridKind::MassiveRapidity) {
    j["kind"] = "massive-rapidity";
    j["n"] = g.size();
    j["spacing"] = g.spacing();
    // Center of the rapidity lattice; reconstructible from the first mode.
    j["params"] = {{"mass", g.mass()},
                   {"center", g.param(0) + 0.5 * (g.size() - 1) * g.spacing()}};
  } else {
    j["kind"] = "massless-log";
    j["n"] = g.branch_size();
    j["spacing"] = g.spacing();
    const char* br = g.branches() == PhotonBranches::Both
                         ? "both"
                         : (g.branches() == PhotonBranches::Positive ? "positive" : "negative");
    j["params"] = {{"k_min", g.k_min()}, {"branches", br}};
  }
  return j;
}

GridPtr grid_from_json(const json& j) {
  std::string kind = j.at("kind");
  if (kind == "massive-rapidity") {
    return make_massive_grid(j.at("params").at("mass"), j.at("n"), j.at("spacing"),
                             j.at("params").at("center"));
  }
  if (kind == "massless-log") {
    std::string br = j.at("params").at("branches");
    PhotonBranches pb = br == "both" ? PhotonBranches::Both
                                     : (br == "positive" ? PhotonBranches::Positive
                                                         : PhotonBranches::Negative);
    return make_photon_grid(j.at("params").at("k_min"), j.at("spacing"), j.at("n"), pb);
  }
  throw std::invalid_argument("grid_from_json: unknown kind " + kind);
}

namespace {

const char* sector_name(const BasisConfig& c) {
  if (c.level == 1 && !c.has_photon) return "excited-vacuum";
  if (c.level == 0 && c.has_photon) return "ground-photon";
  if (c.level == 0 && !c.has_photon) return "ground-vacuum";
  return "excited-photon";
}

}  // namespace

json snapshot_to_json(const GridBindings& b, std::span<const SectorState> states) {
  json j;
  auto put = [&](const GridPtr& g) { j["grids"].push_back(g ? grid_to_json(*g) : json(nullptr)); };
  put(b.detector[0]);
  put(b.detector[1]);
  put(b.photon);
  put(b.ancilla);
  put(b.lab);

  j["states"] = json::array();
  for (const SectorState& s : states) {
    json entries = json::array();
    // Sorted keys so snapshots are byte-stable.
    std::vector<std::uint64_t> keys;
    keys.reserve(s.amp.size());
    for (const auto& [k, a] : s.amp) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::string sector = "empty";
    for (auto k : keys) {
      BasisConfig c = BasisConfig::from_key(k);
      sector = sector_name(c);
      cplx a = s.amp.at(k);
      entries.push_back(json::array(
          {json::array({c.level, c.det, c.has_photon ? int(c.photon) : -1,
                        static_cast<int>(c.fkind), c.fkind != FrameKind::None ? int(c.frame) : -1}),
           a.real(), a.imag()}));
    }
    j["states"].push_back({{"sector", sector}, {"t", s.time}, {"entries", entries}});
  }
  return j;
}

json qrf_to_json(const QrfTransform& q) {
  json j;
  j["m_A"] = q.m_ancilla();
  j["m_L"] = q.m_lab();
  j["aligned"] = q.aligned();
  j["interpolation"] = q.interpolation_enabled();
  j["table"] = json::array();
  for (const auto& e : q.table())
    j["table"].push_back({{"xi", e.xi},
                          {"det_steps", e.det_steps},
                          {"det_residual", e.det_residual},
                          {"ph_steps", e.ph_steps},
                          {"ph_residual", e.ph_residual}});
  return j;
}

Snapshot snapshot_from_json(const json& j) {
  Snapshot snap;
  const json& grids = j.at("grids");
  auto get = [&](int i) -> GridPtr {
    return grids.at(i).is_null() ? nullptr : grid_from_json(grids.at(i));
  };
  snap.bindings.detector[0] = get(0);
  snap.bindings.detector[1] = get(1);
  snap.bindings.photon = get(2);
  snap.bindings.ancilla = get(3);
  snap.bindings.lab = get(4);

  for (const json& js : j.at("states")) {
    SectorState s(snap.bindings, js.at("t"));
    for (const json& e : js.at("entries")) {
      const json& idx = e.at(0);
      BasisConfig c;
      c.level = idx.at(0).get<int>();
      c.det = idx.at(1).get<int>();
      int ph = idx.at(2).get<int>();
      c.has_photon = ph >= 0;
      c.photon = c.has_photon ? static_cast<std::uint16_t>(ph) : 0;
      c.fkind = static_cast<FrameKind>(idx.at(3).get<int>());
      int fr = idx.at(4).get<int>();
      c.frame = fr >= 0 ? static_cast<std::uint16_t>(fr) : 0;
      s.set(c, cplx(e.at(1).get<double>(), e.at(2).get<double>()));
    }
    snap.states.push_back(std::move(s));
  }
  return snap;
}

}  // namespace udw
