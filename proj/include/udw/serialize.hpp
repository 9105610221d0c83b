#pragma once

#include <json.hpp>

#include "udw/qrf.hpp"

namespace udw {

using json = nlohmann::json;

json grid_to_json(const ModeGrid& g);
GridPtr grid_from_json(const json& j);

// Transform descriptor: masses, alignment flag, and the per-lab-mode table
// (rapidity, integer steps, residuals). Grids travel in the snapshot.
json qrf_to_json(const QrfTransform& q);

// Snapshot schema:
//   {grids: [{kind, n, spacing, params}], states: [{sector, entries: [[indices...], re, im]}]}
// Grids appear in the fixed binding order detector0, detector1, photon,
// ancilla, lab (absent grids as null).
json snapshot_to_json(const GridBindings& b, std::span<const SectorState> states);
struct Snapshot {
  GridBindings bindings;
  std::vector<SectorState> states;
};
Snapshot snapshot_from_json(const json& j);

}  // namespace udw
