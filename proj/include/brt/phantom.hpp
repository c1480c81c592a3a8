//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brt/case.hpp"
#include "brt/sparse.hpp"

namespace brt {

// Axis-aligned shape in voxel coordinates; a voxel belongs to the shape when
// its center does.
struct ShapeSpec {
  enum class Type { box, ellipsoid };

  Type type = Type::ellipsoid;
  std::array<double, 3> center{0, 0, 0};
  std::array<double, 3> half_size{1, 1, 1};  // radii for ellipsoids

  bool contains(double x, double y, double z) const;
  bool inside_grid(const VoxelGrid& grid) const;
};

struct PhantomStructureSpec {
  std::string id;
  StructureKind kind = StructureKind::oar_parallel;
  ShapeSpec shape;
  StructureParams params;
  DoseBounds bounds;
};

struct PhantomPrioritySpec {
  std::string name;
  std::vector<std::string> structures;
  PriorityMetric metric = PriorityMetric::mean_dose;
  PriorityGrouping grouping = PriorityGrouping::mean_of_union;
};

struct PhantomSpec {
  VoxelGrid grid{40, 40, 1, 2.5};
  std::vector<PhantomStructureSpec> structures;
  std::vector<PhantomPrioritySpec> priorities;

  int beam_count = 5;
  int beamlets_u = 9;
  int beamlets_v = 1;
  double beamlet_width_mm = 8.0;
  double start_angle_deg = 0.0;

  double attenuation_per_voxel = 0.04;  // mu, per voxel of depth
  double lateral_sigma_mm = 4.0;        // pencil profile width
  double cutoff = 1e-4;                 // weights below this are not stored
  double angle_jitter_deg = 1.0;        // seeded gantry perturbation
  std::uint64_t seed = 1;

  bool auto_normal_tissue = true;  // fill the remaining grid

  // Desk-scale optimizer defaults; x_max unset means "twice the uniform
  // fluence that deposits the highest prescription in its PTV".
  int gd_steps = 500;
  double gd_step_scale = 0.5;
  std::optional<double> x_max;
};

struct Phantom {
  CaseDefinition kase;
  DepositionMatrix matrix;
};

// exp(-mu * depth) * exp(-lateral^2 / (2 sigma^2)); depth in voxel units,
// lateral distance and sigma in mm.
double pencil_beam_weight(double depth_voxels, double lateral_mm,
                          double mu_per_voxel, double sigma_mm);

// Deterministic for a fixed seed. Rejects structures extending outside the
// grid, empty masks, zero beams, and PTV voxels no beamlet reaches.
Phantom generate_phantom(const PhantomSpec& spec);

// 40x40x1 grid: one central PTV, two flanking parallel glands forming one
// priority objective, one serial cord strip, five equiangular beams.
PhantomSpec default_desk_spec();

}  // namespace brt
