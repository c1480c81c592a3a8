//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/case.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "brt/errors.hpp"

namespace brt {

namespace {

void check_tunable(const std::string& id, const char* field, bool tunable,
                   double value, const ScalarRange& range) {
  if (!tunable) return;
  if (!(range.lo <= range.hi)) {
    throw config_error(id + "." + field + ": empty search range");
  }
  if (!range.contains(value)) {
    throw config_error(id + "." + field + " = " + std::to_string(value) +
                       " outside its search range [" +
                       std::to_string(range.lo) + ", " +
                       std::to_string(range.hi) + "]");
  }
}

std::string virtual_id(const std::string& parent_id) {
  return parent_id + "_virtual";
}

void link_virtual(Structure& v, const Structure& parent) {
  v.voxels = parent.voxels;
  v.params.eud0 = parent.params.eud0 + 1.0;
  v.params.a = -parent.params.a;
  v.params.n = parent.params.n;
  v.params.eud0_tunable = false;
  v.params.a_tunable = false;
  v.params.n_tunable = false;
}

}  // namespace

int CaseDefinition::structure_index(const std::string& id) const {
  for (std::size_t i = 0; i < structures.size(); ++i) {
    if (structures[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

void CaseDefinition::validate() const {
  grid.validate();
  beams.validate();
  const int voxel_count = grid.voxel_count();

  std::vector<int> ptv_owner(static_cast<std::size_t>(voxel_count), -1);
  std::vector<bool> in_ptv_or_oar(static_cast<std::size_t>(voxel_count),
                                  false);

  for (std::size_t i = 0; i < structures.size(); ++i) {
    const Structure& s = structures[i];
    if (s.id.empty()) throw config_error("structure with empty id");
    if (s.voxels.empty()) {
      throw config_error("structure '" + s.id + "' has an empty voxel set");
    }
    if (!std::is_sorted(s.voxels.begin(), s.voxels.end()) ||
        std::adjacent_find(s.voxels.begin(), s.voxels.end()) !=
            s.voxels.end()) {
      throw config_error("structure '" + s.id +
                         "' voxels must be sorted and unique");
    }
    if (s.voxels.front() < 0 || s.voxels.back() >= voxel_count) {
      throw config_error("structure '" + s.id +
                         "' references voxels outside the grid");
    }
    for (std::size_t j = i + 1; j < structures.size(); ++j) {
      if (structures[j].id == s.id) {
        throw config_error("duplicate structure id '" + s.id + "'");
      }
    }

    const StructureParams& p = s.params;
    if (!(p.eud0 > 0.0)) {
      throw config_error("structure '" + s.id + "': eud0 must be positive");
    }
    if (p.a == 0.0) {
      throw config_error("structure '" + s.id + "': exponent a must be nonzero");
    }
    if (!(p.n >= 1.0)) {
      throw config_error("structure '" + s.id + "': importance n must be >= 1");
    }
    if (s.kind == StructureKind::ptv && p.a >= 0.0) {
      throw config_error("structure '" + s.id + "': PTV exponent a must be negative");
    }
    if (is_risk_kind(s.kind) && p.a <= 0.0) {
      throw config_error("structure '" + s.id + "': risk exponent a must be positive");
    }
    check_tunable(s.id, "eud0", p.eud0_tunable, p.eud0, p.eud0_range);
    check_tunable(s.id, "a", p.a_tunable, p.a, p.a_range);
    check_tunable(s.id, "n", p.n_tunable, p.n, p.n_range);

    const DoseBounds& b = s.bounds;
    if (b.min && b.mean_low && !(*b.min <= *b.mean_low)) {
      throw config_error("structure '" + s.id + "': min bound above mean_low");
    }
    if (b.mean_low && b.mean_high && !(*b.mean_low <= *b.mean_high)) {
      throw config_error("structure '" + s.id + "': mean bounds cross");
    }
    if (b.mean_high && b.max && !(*b.mean_high <= *b.max)) {
      throw config_error("structure '" + s.id + "': mean_high above max bound");
    }
    if (b.min && b.max && !(*b.min <= *b.max)) {
      throw config_error("structure '" + s.id + "': min bound above max bound");
    }

    if (s.kind == StructureKind::virtual_ptv) {
      if (s.parent < 0 || s.parent >= static_cast<int>(structures.size()) ||
          structures[s.parent].kind != StructureKind::ptv) {
        throw config_error("virtual PTV '" + s.id +
                           "' does not reference a PTV parent");
      }
    }

    if (s.kind == StructureKind::ptv) {
      for (int v : s.voxels) {
        if (ptv_owner[v] >= 0) {
          throw config_error("PTV '" + s.id + "' overlaps PTV '" +
                             structures[ptv_owner[v]].id + "'");
        }
        ptv_owner[v] = static_cast<int>(i);
      }
    }
    if (s.kind == StructureKind::ptv || is_oar_kind(s.kind)) {
      for (int v : s.voxels) in_ptv_or_oar[v] = true;
    }
  }

  for (const Structure& s : structures) {
    if (s.kind != StructureKind::normal_tissue) continue;
    for (int v : s.voxels) {
      if (in_ptv_or_oar[v]) {
        throw config_error("normal tissue '" + s.id +
                           "' overlaps a PTV or OAR");
      }
    }
  }

  for (const PriorityObjective& p : priorities) {
    if (p.structures.empty()) {
      throw config_error("priority objective '" + p.name +
                         "' lists no structures");
    }
    for (int idx : p.structures) {
      if (idx < 0 || idx >= static_cast<int>(structures.size())) {
        throw config_error("priority objective '" + p.name +
                           "' references an unknown structure");
      }
      if (structures[idx].kind == StructureKind::virtual_ptv) {
        throw config_error("priority objective '" + p.name +
                           "' may not reference a virtual PTV");
      }
    }
  }

  if (optimizer_defaults.steps < 1) {
    throw config_error("optimizer defaults: steps must be >= 1");
  }
  if (!(optimizer_defaults.x_max > 0.0)) {
    throw config_error("optimizer defaults: x_max must be positive");
  }
}

CaseDefinition derive_virtual_ptvs(CaseDefinition kase) {
  const std::size_t original_count = kase.structures.size();
  for (std::size_t t = 0; t < original_count; ++t) {
    if (kase.structures[t].kind != StructureKind::ptv) continue;

    int existing = -1;
    for (std::size_t i = 0; i < kase.structures.size(); ++i) {
      if (kase.structures[i].kind == StructureKind::virtual_ptv &&
          kase.structures[i].parent == static_cast<int>(t)) {
        existing = static_cast<int>(i);
        break;
      }
    }
    if (existing >= 0) {
      link_virtual(kase.structures[existing], kase.structures[t]);
      continue;
    }

    Structure v;
    v.id = virtual_id(kase.structures[t].id);
    v.kind = StructureKind::virtual_ptv;
    v.parent = static_cast<int>(t);
    link_virtual(v, kase.structures[t]);
    kase.structures.push_back(std::move(v));
  }
  return kase;
}

void refresh_virtual_ptvs(CaseDefinition& kase) {
  for (Structure& s : kase.structures) {
    if (s.kind != StructureKind::virtual_ptv) continue;
    link_virtual(s, kase.structures[s.parent]);
  }
}

bool virtual_ptvs_derived(const CaseDefinition& kase) {
  for (std::size_t t = 0; t < kase.structures.size(); ++t) {
    if (kase.structures[t].kind != StructureKind::ptv) continue;
    bool found = false;
    for (const Structure& s : kase.structures) {
      if (s.kind == StructureKind::virtual_ptv &&
          s.parent == static_cast<int>(t)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::uint64_t case_fingerprint(const CaseDefinition& kase) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](std::uint64_t v) {
    hash ^= v;
    hash *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(kase.grid.nx));
  mix(static_cast<std::uint64_t>(kase.grid.ny));
  mix(static_cast<std::uint64_t>(kase.grid.nz));
  mix(static_cast<std::uint64_t>(kase.beams.beamlet_count()));
  for (const Structure& s : kase.structures) {
    for (char c : s.id) mix(static_cast<std::uint64_t>(c));
    mix(static_cast<std::uint64_t>(s.kind));
    mix(static_cast<std::uint64_t>(s.voxels.size()));
  }
  return hash;
}

}  // namespace brt
