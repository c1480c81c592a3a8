//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/geometry.hpp"

#include "brt/errors.hpp"

namespace brt {

void VoxelGrid::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw config_error("voxel grid dimensions must all be at least 1");
  }
  if (!(spacing_mm > 0.0)) {
    throw config_error("voxel spacing must be positive");
  }
}

const char* to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::ptv:
      return "ptv";
    case StructureKind::oar_parallel:
      return "oar_parallel";
    case StructureKind::oar_serial:
      return "oar_serial";
    case StructureKind::virtual_ptv:
      return "virtual_ptv";
    case StructureKind::normal_tissue:
      return "normal_tissue";
  }
  return "unknown";
}

StructureKind structure_kind_from_string(const std::string& name) {
  if (name == "ptv") return StructureKind::ptv;
  if (name == "oar_parallel") return StructureKind::oar_parallel;
  if (name == "oar_serial") return StructureKind::oar_serial;
  if (name == "virtual_ptv") return StructureKind::virtual_ptv;
  if (name == "normal_tissue") return StructureKind::normal_tissue;
  throw config_error("unknown structure kind '" + name + "'");
}

int BeamLayout::beamlet_count() const {
  int total = 0;
  for (const Beam& beam : beams) total += beam.beamlet_count();
  return total;
}

int BeamLayout::beam_offset(int beam) const {
  int offset = 0;
  for (int b = 0; b < beam; ++b) offset += beams[b].beamlet_count();
  return offset;
}

void BeamLayout::validate() const {
  if (beams.empty()) {
    throw config_error("beam layout must contain at least one beam");
  }
  for (const Beam& beam : beams) {
    if (beam.beamlets_u < 1 || beam.beamlets_v < 1) {
      throw config_error("beamlet grids must be nonempty");
    }
    if (!(beam.beamlet_width_mm > 0.0)) {
      throw config_error("beamlet width must be positive");
    }
  }
}

}  // namespace brt
