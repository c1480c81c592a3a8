//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

namespace brt {

struct VoxelGrid {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  double spacing_mm = 1.0;

  int voxel_count() const { return nx * ny * nz; }
  int index(int ix, int iy, int iz) const { return ix + nx * (iy + ny * iz); }
  void validate() const;
};

enum class StructureKind {
  ptv,
  oar_parallel,
  oar_serial,
  virtual_ptv,
  normal_tissue,
};

const char* to_string(StructureKind kind);
StructureKind structure_kind_from_string(const std::string& name);

// Everything except a PTV enters the product objective as a risk factor.
inline bool is_risk_kind(StructureKind kind) {
  return kind != StructureKind::ptv;
}

inline bool is_oar_kind(StructureKind kind) {
  return kind == StructureKind::oar_parallel ||
         kind == StructureKind::oar_serial;
}

struct Beam {
  double gantry_deg = 0.0;
  int beamlets_u = 1;  // lateral, in the gantry rotation plane
  int beamlets_v = 1;  // along the grid z axis
  double beamlet_width_mm = 5.0;

  int beamlet_count() const { return beamlets_u * beamlets_v; }
};

struct BeamLayout {
  std::vector<Beam> beams;

  int beamlet_count() const;
  int beam_offset(int beam) const;  // flat index of the beam's first beamlet
  void validate() const;
};

}  // namespace brt
