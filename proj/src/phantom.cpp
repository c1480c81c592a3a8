//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "brt/errors.hpp"
#include "brt/evaluation.hpp"
#include "brt/rng.hpp"

namespace brt {

namespace {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

// First intersection of the ray origin + t * dir with the box [0,ext], or
// nullopt when the ray misses.
std::optional<double> ray_box_entry(const Vec3& origin, const Vec3& dir,
                                    const Vec3& extent) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double e[3] = {extent.x, extent.y, extent.z};
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(d[axis]) < 1e-12) {
      if (o[axis] < 0.0 || o[axis] > e[axis]) return std::nullopt;
      continue;
    }
    double t0 = (0.0 - o[axis]) / d[axis];
    double t1 = (e[axis] - o[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far) return std::nullopt;
  return t_near;
}

std::vector<int> rasterize(const ShapeSpec& shape, const VoxelGrid& grid) {
  std::vector<int> voxels;
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        if (shape.contains(ix + 0.5, iy + 0.5, iz + 0.5)) {
          voxels.push_back(grid.index(ix, iy, iz));
        }
      }
    }
  }
  return voxels;
}

}  // namespace

bool ShapeSpec::contains(double x, double y, double z) const {
  const double dx = x - center[0];
  const double dy = y - center[1];
  const double dz = z - center[2];
  if (type == Type::box) {
    return std::abs(dx) <= half_size[0] && std::abs(dy) <= half_size[1] &&
           std::abs(dz) <= half_size[2];
  }
  const double rx = dx / half_size[0];
  const double ry = dy / half_size[1];
  const double rz = dz / half_size[2];
  return rx * rx + ry * ry + rz * rz <= 1.0;
}

bool ShapeSpec::inside_grid(const VoxelGrid& grid) const {
  return center[0] - half_size[0] >= 0.0 &&
         center[0] + half_size[0] <= grid.nx &&
         center[1] - half_size[1] >= 0.0 &&
         center[1] + half_size[1] <= grid.ny &&
         center[2] - half_size[2] >= 0.0 &&
         center[2] + half_size[2] <= grid.nz;
}

double pencil_beam_weight(double depth_voxels, double lateral_mm,
                          double mu_per_voxel, double sigma_mm) {
  const double depth_term = std::exp(-mu_per_voxel * depth_voxels);
  double lateral_term = 0.0;
  if (sigma_mm > 0.0) {
    lateral_term = std::exp(-(lateral_mm * lateral_mm) /
                            (2.0 * sigma_mm * sigma_mm));
  } else {
    lateral_term = std::abs(lateral_mm) <= 1e-12 ? 1.0 : 0.0;
  }
  return depth_term * lateral_term;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.grid.validate();
  if (spec.beam_count < 1) {
    throw config_error("phantom: beam count must be at least 1");
  }
  if (spec.beamlets_u < 1 || spec.beamlets_v < 1) {
    throw config_error("phantom: beamlet grid must be nonempty");
  }
  if (!(spec.attenuation_per_voxel >= 0.0)) {
    throw config_error("phantom: attenuation must be nonnegative");
  }
  if (!(spec.lateral_sigma_mm >= 0.0)) {
    throw config_error("phantom: lateral sigma must be nonnegative");
  }
  if (!(spec.cutoff > 0.0)) {
    throw config_error("phantom: sparse cutoff must be positive");
  }

  CaseDefinition kase;
  kase.grid = spec.grid;
  const int voxel_count = spec.grid.voxel_count();

  // Structures: reject shapes leaving the grid, rasterize, then optionally
  // fill the rest of the grid as normal tissue.
  std::vector<bool> occupied(static_cast<std::size_t>(voxel_count), false);
  double max_prescribed = 0.0;
  for (const PhantomStructureSpec& ss : spec.structures) {
    if (ss.kind == StructureKind::virtual_ptv) {
      throw config_error("phantom: virtual PTVs are derived, not specified");
    }
    if (!ss.shape.inside_grid(spec.grid)) {
      throw config_error("phantom: structure '" + ss.id +
                         "' extends outside the grid");
    }
    Structure s;
    s.id = ss.id;
    s.kind = ss.kind;
    s.voxels = rasterize(ss.shape, spec.grid);
    if (s.voxels.empty()) {
      throw config_error("phantom: structure '" + ss.id +
                         "' contains no voxel centers");
    }
    s.params = ss.params;
    s.bounds = ss.bounds;
    if (s.kind == StructureKind::ptv) {
      max_prescribed = std::max(max_prescribed, s.params.eud0);
    }
    for (int v : s.voxels) occupied[v] = true;
    kase.structures.push_back(std::move(s));
  }

  if (spec.auto_normal_tissue) {
    Structure tissue;
    tissue.id = "normal_tissue";
    tissue.kind = StructureKind::normal_tissue;
    for (int v = 0; v < voxel_count; ++v) {
      if (!occupied[v]) tissue.voxels.push_back(v);
    }
    if (!tissue.voxels.empty()) {
      // Literature head-and-neck parameters scale with the prescription
      // (74.25 Gy against a 60 Gy prescription).
      const double reference =
          max_prescribed > 0.0 ? max_prescribed : 60.0;
      tissue.params.eud0 = 1.2375 * reference;
      tissue.params.a = 40.0;
      tissue.params.n = 5.0;
      tissue.bounds.max = tissue.params.eud0;
      kase.structures.push_back(std::move(tissue));
    }
  }

  for (const PhantomPrioritySpec& ps : spec.priorities) {
    PriorityObjective priority;
    priority.name = ps.name;
    priority.metric = ps.metric;
    priority.grouping = ps.grouping;
    for (const std::string& id : ps.structures) {
      const int idx = kase.structure_index(id);
      if (idx < 0) {
        throw config_error("phantom: priority '" + ps.name +
                           "' references unknown structure '" + id + "'");
      }
      priority.structures.push_back(idx);
    }
    kase.priorities.push_back(std::move(priority));
  }

  // Beams: equiangular gantry positions with a seeded jitter so the seed is
  // observable in the matrix.
  Rng rng(spec.seed);
  for (int b = 0; b < spec.beam_count; ++b) {
    Beam beam;
    beam.gantry_deg = spec.start_angle_deg +
                      360.0 * static_cast<double>(b) /
                          static_cast<double>(spec.beam_count) +
                      rng.uniform(-spec.angle_jitter_deg,
                                  spec.angle_jitter_deg);
    beam.beamlets_u = spec.beamlets_u;
    beam.beamlets_v = spec.beamlets_v;
    beam.beamlet_width_mm = spec.beamlet_width_mm;
    kase.beams.beams.push_back(beam);
  }

  const double h = spec.grid.spacing_mm;
  const Vec3 extent{spec.grid.nx * h, spec.grid.ny * h, spec.grid.nz * h};
  const Vec3 center = 0.5 * extent;
  const double far_away = 4.0 * (extent.x + extent.y + extent.z);

  std::vector<Triplet> entries;
  int beamlet_flat = 0;
  for (const Beam& beam : kase.beams.beams) {
    const double theta = beam.gantry_deg * std::numbers::pi / 180.0;
    const Vec3 dir{std::cos(theta), std::sin(theta), 0.0};
    const Vec3 lateral{-std::sin(theta), std::cos(theta), 0.0};

    for (int v = 0; v < beam.beamlets_v; ++v) {
      const double off_v = (static_cast<double>(v) -
                            0.5 * (beam.beamlets_v - 1)) *
                           beam.beamlet_width_mm;
      for (int u = 0; u < beam.beamlets_u; ++u, ++beamlet_flat) {
        const double off_u = (static_cast<double>(u) -
                              0.5 * (beam.beamlets_u - 1)) *
                             beam.beamlet_width_mm;
        const Vec3 axis_point =
            center + off_u * lateral + Vec3{0.0, 0.0, off_v};
        const Vec3 origin = axis_point - far_away * dir;
        const auto t_entry = ray_box_entry(origin, dir, extent);
        if (!t_entry) continue;  // beamlet misses the grid entirely
        const Vec3 entry = origin + *t_entry * dir;

        for (int iz = 0; iz < spec.grid.nz; ++iz) {
          for (int iy = 0; iy < spec.grid.ny; ++iy) {
            for (int ix = 0; ix < spec.grid.nx; ++ix) {
              const Vec3 voxel_center{(ix + 0.5) * h, (iy + 0.5) * h,
                                      (iz + 0.5) * h};
              const Vec3 rel = voxel_center - axis_point;
              const double along = dot(rel, dir);
              const Vec3 radial = rel - along * dir;
              const double lateral_mm = std::sqrt(dot(radial, radial));
              const double depth_mm =
                  std::max(0.0, dot(voxel_center - entry, dir));
              const double weight =
                  pencil_beam_weight(depth_mm / h, lateral_mm,
                                     spec.attenuation_per_voxel,
                                     spec.lateral_sigma_mm);
              if (weight >= spec.cutoff) {
                entries.push_back(
                    {spec.grid.index(ix, iy, iz), beamlet_flat, weight});
              }
            }
          }
        }
      }
    }
  }

  Phantom phantom;
  phantom.matrix =
      DepositionMatrix(voxel_count, kase.beams.beamlet_count(),
                       std::move(entries));

  for (const Structure& s : kase.structures) {
    if (s.kind != StructureKind::ptv) continue;
    for (int v : s.voxels) {
      if (phantom.matrix.row_empty(v)) {
        throw config_error("phantom: PTV '" + s.id + "' voxel " +
                           std::to_string(v) +
                           " is not reachable by any beamlet");
      }
    }
  }

  // Desk-scale optimizer defaults: the cap defaults to twice the uniform
  // fluence that deposits the highest prescription in its PTV.
  kase.optimizer_defaults.steps = spec.gd_steps;
  kase.optimizer_defaults.step_size = 0.0;
  kase.optimizer_defaults.step_scale = spec.gd_step_scale;
  kase.optimizer_defaults.smoothing = true;
  if (spec.x_max) {
    kase.optimizer_defaults.x_max = *spec.x_max;
  } else {
    double mean_row_sum = 0.0;
    int counted = 0;
    // Row sums over PTV voxels via one pass over the triplets.
    std::vector<double> row_sum(static_cast<std::size_t>(voxel_count), 0.0);
    for (const Triplet& t : phantom.matrix.to_triplets()) {
      row_sum[t.row] += t.value;
    }
    for (const Structure& s : kase.structures) {
      if (s.kind != StructureKind::ptv) continue;
      for (int v : s.voxels) {
        mean_row_sum += row_sum[v];
        ++counted;
      }
    }
    if (counted > 0 && mean_row_sum > 0.0 && max_prescribed > 0.0) {
      mean_row_sum /= static_cast<double>(counted);
      kase.optimizer_defaults.x_max = 2.0 * max_prescribed / mean_row_sum;
    } else {
      kase.optimizer_defaults.x_max = 0.3;
    }
  }

  phantom.kase = std::move(kase);
  phantom.kase.validate();
  return phantom;
}

PhantomSpec default_desk_spec() {
  PhantomSpec spec;
  spec.grid = {40, 40, 1, 2.5};
  spec.seed = 1;
  // Nine beams whose 45 mm corridors cover the target plus margin; organs
  // seated outside the corridor overlap stay spareable.
  spec.beam_count = 9;
  spec.beamlets_u = 9;
  spec.beamlets_v = 1;
  spec.beamlet_width_mm = 5.0;
  spec.lateral_sigma_mm = 2.0;
  spec.attenuation_per_voxel = 0.04;
  spec.gd_steps = 2000;

  PhantomStructureSpec ptv;
  ptv.id = "ptv";
  ptv.kind = StructureKind::ptv;
  ptv.shape = {ShapeSpec::Type::ellipsoid, {20.0, 20.0, 0.5}, {6.0, 6.0, 0.5}};
  ptv.params.eud0 = 60.0;
  ptv.params.a = -50.0;
  ptv.params.n = 50.0;
  ptv.params.a_tunable = true;
  ptv.params.a_range = {-100.0, -1.0};
  ptv.params.n_tunable = true;
  ptv.params.n_range = {1.0, 100.0};
  ptv.bounds = derive_ptv_bounds(60.0);
  spec.structures.push_back(ptv);

  // gEUD parameters follow the head-and-neck literature values; the mean
  // bound is calibrated to what this geometry can meet with default
  // parameters (the beam corridors still cross the glands).
  auto gland = [](const std::string& id, double cx) {
    PhantomStructureSpec s;
    s.id = id;
    s.kind = StructureKind::oar_parallel;
    s.shape = {ShapeSpec::Type::ellipsoid, {cx, 20.0, 0.5}, {2.5, 2.5, 0.5}};
    s.params.eud0 = 26.0;
    s.params.a = 1.0;
    s.params.n = 5.0;
    s.params.eud0_tunable = true;
    s.params.eud0_range = {0.5, 26.0};
    s.params.a_tunable = true;
    s.params.a_range = {1.0, 100.0};
    s.params.n_tunable = true;
    s.params.n_range = {1.0, 100.0};
    s.bounds.mean_high = 36.0;
    return s;
  };
  spec.structures.push_back(gland("gland_left", 6.5));
  spec.structures.push_back(gland("gland_right", 33.5));

  PhantomStructureSpec cord;
  cord.id = "cord";
  cord.kind = StructureKind::oar_serial;
  cord.shape = {ShapeSpec::Type::box, {20.0, 35.0, 0.5}, {10.0, 1.5, 0.5}};
  cord.params.eud0 = 50.0;
  cord.params.a = 10.0;
  cord.params.n = 5.0;
  cord.bounds.max = 50.0;
  spec.structures.push_back(cord);

  PhantomPrioritySpec glands;
  glands.name = "glands";
  glands.structures = {"gland_left", "gland_right"};
  glands.metric = PriorityMetric::mean_dose;
  glands.grouping = PriorityGrouping::mean_of_union;
  spec.priorities.push_back(glands);

  return spec;
}

}  // namespace brt
