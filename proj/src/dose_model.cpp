//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "brt/dose_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "brt/errors.hpp"

namespace brt {

namespace {

// log(1 + e^z), stable for large |z|.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 1 / (1 + e^(-z)), stable for large |z|.
double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct StructureGeud {
  double log_geud = 0.0;
  double geud = 0.0;
};

// Power mean over precomputed clamped log doses, max-shifted.
StructureGeud geud_from_logs(std::span<const double> log_dose,
                             std::span<const int> voxels, double a) {
  double shift = -std::numeric_limits<double>::infinity();
  for (int v : voxels) shift = std::max(shift, a * log_dose[v]);
  double acc = 0.0;
  for (int v : voxels) acc += std::exp(a * log_dose[v] - shift);
  const double log_power_mean =
      shift + std::log(acc / static_cast<double>(voxels.size()));
  StructureGeud out;
  out.log_geud = log_power_mean / a;
  out.geud = std::exp(out.log_geud);
  return out;
}

// d log(factor) / d gEUD and the log factor itself for one structure.
struct FactorDerivative {
  double log_factor = 0.0;
  double dlogf_deud = 0.0;
};

FactorDerivative factor_derivative(const Structure& s,
                                   const StructureGeud& g) {
  const double log_eud0 = std::log(s.params.eud0);
  const double n = s.params.n;
  FactorDerivative out;
  if (s.kind == StructureKind::ptv) {
    // coverage factor 1 / (1 + (EUD0 / gEUD)^n)
    const double q = n * (log_eud0 - g.log_geud);
    out.log_factor = -softplus(q);
    out.dlogf_deud = (n / g.geud) * logistic(q);
  } else {
    // risk factor 1 / (1 + (gEUD / EUD0)^n)
    const double q = n * (g.log_geud - log_eud0);
    out.log_factor = -softplus(q);
    out.dlogf_deud = -(n / g.geud) * logistic(q);
  }
  return out;
}

std::vector<double> clamped_log_dose(std::span<const double> dose) {
  std::vector<double> logs(dose.size());
  for (std::size_t j = 0; j < dose.size(); ++j) {
    logs[j] = std::log(std::max(dose[j], kDoseFloorGy));
  }
  return logs;
}

}  // namespace

GeudValue geud(std::span<const double> structure_doses, double a) {
  if (structure_doses.empty()) {
    throw config_error("geud: structure has no voxels");
  }
  if (a == 0.0) {
    throw config_error("geud: exponent a must be nonzero");
  }
  double shift = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(structure_doses.size());
  for (std::size_t j = 0; j < structure_doses.size(); ++j) {
    logs[j] = std::log(std::max(structure_doses[j], kDoseFloorGy));
    shift = std::max(shift, a * logs[j]);
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(a * l - shift);
  const double log_power_mean =
      shift + std::log(acc / static_cast<double>(structure_doses.size()));
  GeudValue out;
  out.log_value = log_power_mean / a;
  out.value = std::exp(out.log_value);
  return out;
}

ObjectiveValue objective_logf(const CaseDefinition& kase,
                              std::span<const double> dose) {
  const std::vector<double> logs = clamped_log_dose(dose);
  ObjectiveValue out;
  out.structure_log_factors.reserve(kase.structures.size());
  for (const Structure& s : kase.structures) {
    if (s.voxels.empty()) throw config_error("geud: structure has no voxels");
    if (s.params.a == 0.0) {
      throw config_error("geud: exponent a must be nonzero");
    }
    const StructureGeud g = geud_from_logs(logs, s.voxels, s.params.a);
    const FactorDerivative f = factor_derivative(s, g);
    out.structure_log_factors.push_back(f.log_factor);
    out.log_f += f.log_factor;
  }
  out.f = std::exp(out.log_f);
  return out;
}

ObjectiveValue objective_logf_fluence(const CaseDefinition& kase,
                                      const DepositionMatrix& matrix,
                                      std::span<const double> fluence) {
  return objective_logf(kase, dose(matrix, fluence));
}

double grad_logf(const CaseDefinition& kase, const DepositionMatrix& matrix,
                 std::span<const double> fluence, std::span<double> grad_out) {
  if (static_cast<int>(fluence.size()) != matrix.cols()) {
    throw config_error("fluence length " + std::to_string(fluence.size()) +
                       " does not match deposition matrix columns " +
                       std::to_string(matrix.cols()));
  }
  if (static_cast<int>(grad_out.size()) != matrix.cols()) {
    throw config_error("gradient buffer size mismatch");
  }

  std::vector<double> d(static_cast<std::size_t>(matrix.rows()));
  matrix.apply(fluence, d);
  const std::vector<double> logs = clamped_log_dose(d);

  // Accumulate per-voxel weights structure by structure in case order, then
  // push through the transpose; both passes have fixed summation order.
  std::vector<double> voxel_weight(d.size(), 0.0);
  double log_f = 0.0;
  for (const Structure& s : kase.structures) {
    if (s.voxels.empty()) throw config_error("geud: structure has no voxels");
    const double a = s.params.a;
    if (a == 0.0) throw config_error("geud: exponent a must be nonzero");

    const StructureGeud g = geud_from_logs(logs, s.voxels, a);
    const FactorDerivative f = factor_derivative(s, g);
    log_f += f.log_factor;
    if (!std::isfinite(f.dlogf_deud)) {
      throw numeric_error("non-finite gradient factor for structure '" +
                          s.id + "'");
    }
    // dgEUD/dd_j = (d_j / gEUD)^(a-1) / N; bounded because gEUD lies within
    // a factor N^(1/|a|) of the extreme dose.
    const double scale =
        f.dlogf_deud / static_cast<double>(s.voxels.size());
    for (int v : s.voxels) {
      voxel_weight[v] += scale * std::exp((a - 1.0) * (logs[v] - g.log_geud));
      if (!std::isfinite(voxel_weight[v])) {
        throw numeric_error("non-finite dose weight in structure '" + s.id +
                            "'");
      }
    }
  }

  matrix.apply_transpose(voxel_weight, grad_out);
  for (int b = 0; b < matrix.cols(); ++b) {
    if (!std::isfinite(grad_out[b])) {
      throw numeric_error("non-finite gradient component for beamlet " +
                          std::to_string(b));
    }
  }
  return log_f;
}

}  // namespace brt
