//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "brt/errors.hpp"
#include "brt/io.hpp"

namespace brt::io {

using nlohmann::json;

namespace {

json range_to_json(const ScalarRange& range) {
  return json::array({range.lo, range.hi});
}

ScalarRange range_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw config_error("parameter range must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json params_to_json(const StructureParams& p) {
  json j;
  j["eud0"] = p.eud0;
  j["a"] = p.a;
  j["n"] = p.n;
  json tunable = json::array();
  if (p.eud0_tunable) {
    tunable.push_back("eud0");
    j["eud0_range"] = range_to_json(p.eud0_range);
  }
  if (p.a_tunable) {
    tunable.push_back("a");
    j["a_range"] = range_to_json(p.a_range);
  }
  if (p.n_tunable) {
    tunable.push_back("n");
    j["n_range"] = range_to_json(p.n_range);
  }
  j["tunable"] = tunable;
  return j;
}

StructureParams params_from_json(const json& j) {
  StructureParams p;
  p.eud0 = j.at("eud0").get<double>();
  p.a = j.at("a").get<double>();
  p.n = j.at("n").get<double>();
  if (j.contains("tunable")) {
    for (const auto& field : j.at("tunable")) {
      const std::string name = field.get<std::string>();
      if (name == "eud0") {
        p.eud0_tunable = true;
        p.eud0_range = range_from_json(j.at("eud0_range"));
      } else if (name == "a") {
        p.a_tunable = true;
        p.a_range = range_from_json(j.at("a_range"));
      } else if (name == "n") {
        p.n_tunable = true;
        p.n_range = range_from_json(j.at("n_range"));
      } else {
        throw config_error("unknown tunable field '" + name + "'");
      }
    }
  }
  return p;
}

json bounds_to_json(const DoseBounds& b) {
  json j = json::object();
  if (b.min) j["min"] = *b.min;
  if (b.mean_low) j["mean_low"] = *b.mean_low;
  if (b.mean_high) j["mean_high"] = *b.mean_high;
  if (b.max) j["max"] = *b.max;
  if (b.d98_min) j["d98_min"] = *b.d98_min;
  if (b.d2_max) j["d2_max"] = *b.d2_max;
  return j;
}

DoseBounds bounds_from_json(const json& j) {
  DoseBounds b;
  if (j.contains("min")) b.min = j.at("min").get<double>();
  if (j.contains("mean_low")) b.mean_low = j.at("mean_low").get<double>();
  if (j.contains("mean_high")) b.mean_high = j.at("mean_high").get<double>();
  if (j.contains("max")) b.max = j.at("max").get<double>();
  if (j.contains("d98_min")) b.d98_min = j.at("d98_min").get<double>();
  if (j.contains("d2_max")) b.d2_max = j.at("d2_max").get<double>();
  return b;
}

PriorityMetric metric_from_string(const std::string& s) {
  if (s == "mean") return PriorityMetric::mean_dose;
  if (s == "max") return PriorityMetric::max_dose;
  throw config_error("unknown priority metric '" + s + "'");
}

const char* metric_to_string(PriorityMetric m) {
  return m == PriorityMetric::mean_dose ? "mean" : "max";
}

PriorityGrouping grouping_from_string(const std::string& s) {
  if (s == "mean_of_union") return PriorityGrouping::mean_of_union;
  if (s == "sum_of_means") return PriorityGrouping::sum_of_means;
  throw config_error("unknown priority grouping '" + s + "'");
}

const char* grouping_to_string(PriorityGrouping g) {
  return g == PriorityGrouping::mean_of_union ? "mean_of_union"
                                              : "sum_of_means";
}

json parse_document(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw config_error(std::string("malformed JSON in ") + what);
  }
  return j;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw missing_artifact_error("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

CaseDefinition case_from_json(const std::string& text) {
  const json j = parse_document(text, "case definition");
  CaseDefinition kase;
  const json& grid = j.at("grid");
  kase.grid.nx = grid.at("nx").get<int>();
  kase.grid.ny = grid.at("ny").get<int>();
  kase.grid.nz = grid.at("nz").get<int>();
  kase.grid.spacing_mm = grid.at("spacing_mm").get<double>();

  for (const json& bj : j.at("beams")) {
    Beam beam;
    beam.gantry_deg = bj.at("gantry_deg").get<double>();
    beam.beamlets_u = bj.at("beamlets_u").get<int>();
    beam.beamlets_v = bj.at("beamlets_v").get<int>();
    beam.beamlet_width_mm = bj.at("beamlet_width_mm").get<double>();
    kase.beams.beams.push_back(beam);
  }

  for (const json& sj : j.at("structures")) {
    Structure s;
    s.id = sj.at("id").get<std::string>();
    s.kind = structure_kind_from_string(sj.at("kind").get<std::string>());
    s.voxels = sj.at("voxels").get<std::vector<int>>();
    s.params = params_from_json(sj.at("params"));
    if (sj.contains("bounds")) s.bounds = bounds_from_json(sj.at("bounds"));
    if (sj.contains("parent")) s.parent = sj.at("parent").get<int>();
    kase.structures.push_back(std::move(s));
  }

  if (j.contains("priorities")) {
    for (const json& pj : j.at("priorities")) {
      PriorityObjective p;
      p.name = pj.at("name").get<std::string>();
      for (const json& sid : pj.at("structures")) {
        const int idx = kase.structure_index(sid.get<std::string>());
        if (idx < 0) {
          throw config_error("priority '" + p.name +
                             "' references unknown structure '" +
                             sid.get<std::string>() + "'");
        }
        p.structures.push_back(idx);
      }
      p.metric = metric_from_string(pj.at("metric").get<std::string>());
      if (pj.contains("grouping")) {
        p.grouping =
            grouping_from_string(pj.at("grouping").get<std::string>());
      }
      kase.priorities.push_back(std::move(p));
    }
  }

  if (j.contains("optimizer_defaults")) {
    const json& oj = j.at("optimizer_defaults");
    kase.optimizer_defaults.steps = oj.at("steps").get<int>();
    kase.optimizer_defaults.step_size = oj.at("step_size").get<double>();
    kase.optimizer_defaults.step_scale = oj.at("step_scale").get<double>();
    kase.optimizer_defaults.x_max = oj.at("x_max").get<double>();
    kase.optimizer_defaults.smoothing = oj.at("smoothing").get<bool>();
  }

  kase.validate();
  return kase;
}

std::string case_to_json(const CaseDefinition& kase) {
  json j;
  j["grid"] = {{"nx", kase.grid.nx},
               {"ny", kase.grid.ny},
               {"nz", kase.grid.nz},
               {"spacing_mm", kase.grid.spacing_mm}};
  json beams = json::array();
  for (const Beam& beam : kase.beams.beams) {
    beams.push_back({{"gantry_deg", beam.gantry_deg},
                     {"beamlets_u", beam.beamlets_u},
                     {"beamlets_v", beam.beamlets_v},
                     {"beamlet_width_mm", beam.beamlet_width_mm}});
  }
  j["beams"] = std::move(beams);

  json structures = json::array();
  for (const Structure& s : kase.structures) {
    json sj;
    sj["id"] = s.id;
    sj["kind"] = to_string(s.kind);
    sj["voxels"] = s.voxels;
    sj["params"] = params_to_json(s.params);
    const json bounds = bounds_to_json(s.bounds);
    if (!bounds.empty()) sj["bounds"] = bounds;
    if (s.parent >= 0) sj["parent"] = s.parent;
    structures.push_back(std::move(sj));
  }
  j["structures"] = std::move(structures);

  json priorities = json::array();
  for (const PriorityObjective& p : kase.priorities) {
    json pj;
    pj["name"] = p.name;
    json ids = json::array();
    for (int idx : p.structures) ids.push_back(kase.structures[idx].id);
    pj["structures"] = std::move(ids);
    pj["metric"] = metric_to_string(p.metric);
    pj["grouping"] = grouping_to_string(p.grouping);
    priorities.push_back(std::move(pj));
  }
  j["priorities"] = std::move(priorities);

  j["optimizer_defaults"] = {
      {"steps", kase.optimizer_defaults.steps},
      {"step_size", kase.optimizer_defaults.step_size},
      {"step_scale", kase.optimizer_defaults.step_scale},
      {"x_max", kase.optimizer_defaults.x_max},
      {"smoothing", kase.optimizer_defaults.smoothing}};
  return j.dump(2) + "\n";
}

PhantomSpec read_phantom_spec(const std::filesystem::path& path) {
  const json j = parse_document(read_text_file(path), "phantom spec");
  PhantomSpec spec;
  const json& grid = j.at("grid");
  spec.grid.nx = grid.at("nx").get<int>();
  spec.grid.ny = grid.at("ny").get<int>();
  spec.grid.nz = grid.at("nz").get<int>();
  spec.grid.spacing_mm = grid.at("spacing_mm").get<double>();

  spec.structures.clear();
  for (const json& sj : j.at("structures")) {
    PhantomStructureSpec s;
    s.id = sj.at("id").get<std::string>();
    s.kind = structure_kind_from_string(sj.at("kind").get<std::string>());
    const json& shape = sj.at("shape");
    const std::string type = shape.at("type").get<std::string>();
    if (type == "box") {
      s.shape.type = ShapeSpec::Type::box;
    } else if (type == "ellipsoid") {
      s.shape.type = ShapeSpec::Type::ellipsoid;
    } else {
      throw config_error("unknown shape type '" + type + "'");
    }
    for (int d = 0; d < 3; ++d) {
      s.shape.center[d] = shape.at("center")[d].get<double>();
      s.shape.half_size[d] = shape.at("half_size")[d].get<double>();
    }
    s.params = params_from_json(sj.at("params"));
    if (sj.contains("bounds")) s.bounds = bounds_from_json(sj.at("bounds"));
    spec.structures.push_back(std::move(s));
  }

  if (j.contains("priorities")) {
    for (const json& pj : j.at("priorities")) {
      PhantomPrioritySpec p;
      p.name = pj.at("name").get<std::string>();
      p.structures = pj.at("structures").get<std::vector<std::string>>();
      p.metric = metric_from_string(pj.at("metric").get<std::string>());
      if (pj.contains("grouping")) {
        p.grouping =
            grouping_from_string(pj.at("grouping").get<std::string>());
      }
      spec.priorities.push_back(std::move(p));
    }
  }

  const json& beams = j.at("beams");
  spec.beam_count = beams.at("count").get<int>();
  spec.beamlets_u = beams.at("beamlets_u").get<int>();
  spec.beamlets_v = beams.at("beamlets_v").get<int>();
  spec.beamlet_width_mm = beams.at("beamlet_width_mm").get<double>();
  if (beams.contains("start_angle_deg")) {
    spec.start_angle_deg = beams.at("start_angle_deg").get<double>();
  }

  const json& model = j.at("model");
  spec.attenuation_per_voxel = model.at("attenuation_per_voxel").get<double>();
  spec.lateral_sigma_mm = model.at("lateral_sigma_mm").get<double>();
  if (model.contains("cutoff")) spec.cutoff = model.at("cutoff").get<double>();
  if (model.contains("angle_jitter_deg")) {
    spec.angle_jitter_deg = model.at("angle_jitter_deg").get<double>();
  }

  spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("auto_normal_tissue")) {
    spec.auto_normal_tissue = j.at("auto_normal_tissue").get<bool>();
  }
  if (j.contains("optimizer")) {
    const json& oj = j.at("optimizer");
    if (oj.contains("steps")) spec.gd_steps = oj.at("steps").get<int>();
    if (oj.contains("step_scale")) {
      spec.gd_step_scale = oj.at("step_scale").get<double>();
    }
    if (oj.contains("x_max")) spec.x_max = oj.at("x_max").get<double>();
  }
  return spec;
}

std::string phantom_spec_to_json(const PhantomSpec& spec) {
  json j;
  j["grid"] = {{"nx", spec.grid.nx},
               {"ny", spec.grid.ny},
               {"nz", spec.grid.nz},
               {"spacing_mm", spec.grid.spacing_mm}};
  json structures = json::array();
  for (const PhantomStructureSpec& s : spec.structures) {
    json sj;
    sj["id"] = s.id;
    sj["kind"] = to_string(s.kind);
    sj["shape"] = {
        {"type", s.shape.type == ShapeSpec::Type::box ? "box" : "ellipsoid"},
        {"center", s.shape.center},
        {"half_size", s.shape.half_size}};
    sj["params"] = params_to_json(s.params);
    const json bounds = bounds_to_json(s.bounds);
    if (!bounds.empty()) sj["bounds"] = bounds;
    structures.push_back(std::move(sj));
  }
  j["structures"] = std::move(structures);

  json priorities = json::array();
  for (const PhantomPrioritySpec& p : spec.priorities) {
    priorities.push_back({{"name", p.name},
                          {"structures", p.structures},
                          {"metric", metric_to_string(p.metric)},
                          {"grouping", grouping_to_string(p.grouping)}});
  }
  j["priorities"] = std::move(priorities);

  j["beams"] = {{"count", spec.beam_count},
                {"beamlets_u", spec.beamlets_u},
                {"beamlets_v", spec.beamlets_v},
                {"beamlet_width_mm", spec.beamlet_width_mm},
                {"start_angle_deg", spec.start_angle_deg}};
  j["model"] = {{"attenuation_per_voxel", spec.attenuation_per_voxel},
                {"lateral_sigma_mm", spec.lateral_sigma_mm},
                {"cutoff", spec.cutoff},
                {"angle_jitter_deg", spec.angle_jitter_deg}};
  j["seed"] = spec.seed;
  j["auto_normal_tissue"] = spec.auto_normal_tissue;
  json optimizer;
  optimizer["steps"] = spec.gd_steps;
  optimizer["step_scale"] = spec.gd_step_scale;
  if (spec.x_max) optimizer["x_max"] = *spec.x_max;
  j["optimizer"] = std::move(optimizer);
  return j.dump(2) + "\n";
}

CaseDefinition apply_phi_json(const CaseDefinition& kase,
                              const std::string& phi_text) {
  const json j = parse_document(phi_text, "parameter assignment");
  CaseDefinition updated = kase;
  if (!j.contains("structures") || !j.at("structures").is_object()) {
    throw config_error(
        "parameter assignment must contain a 'structures' object");
  }
  for (const auto& [id, fields] : j.at("structures").items()) {
    const int idx = updated.structure_index(id);
    if (idx < 0) {
      throw config_error("parameter assignment references unknown structure '" +
                         id + "'");
    }
    Structure& s = updated.structures[idx];
    if (s.kind == StructureKind::virtual_ptv) {
      throw config_error("virtual PTV '" + id +
                         "' parameters are derived and cannot be assigned");
    }
    for (const auto& [field, value] : fields.items()) {
      const double v = value.get<double>();
      StructureParams& p = s.params;
      auto check = [&](bool tunable, const ScalarRange& range) {
        if (!tunable) {
          throw config_error(id + "." + field + " is not tunable");
        }
        if (!range.contains(v)) {
          throw config_error(id + "." + field + " = " + std::to_string(v) +
                             " outside its search range [" +
                             std::to_string(range.lo) + ", " +
                             std::to_string(range.hi) + "]");
        }
      };
      if (field == "eud0") {
        check(p.eud0_tunable, p.eud0_range);
        p.eud0 = v;
      } else if (field == "a") {
        check(p.a_tunable, p.a_range);
        p.a = v;
      } else if (field == "n") {
        check(p.n_tunable, p.n_range);
        p.n = v;
      } else {
        throw config_error("unknown parameter field '" + id + "." + field +
                           "'");
      }
    }
  }
  refresh_virtual_ptvs(updated);
  updated.validate();
  return updated;
}

void write_manifest(const std::filesystem::path& dir,
                    const RunManifest& manifest, const std::string& filename) {
  json j;
  j["stage"] = manifest.stage;
  j["config"] = parse_document(manifest.config_json, "manifest config");
  j["config_hash"] = fnv1a(manifest.config_json);
  j["seed"] = manifest.seed;
  j["versions"] = {{"bilevelrt", kVersion}};
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["timings_ms"] = {{"total", manifest.total_ms}};
  std::ofstream out(dir / filename);
  if (!out) {
    throw config_error("cannot write manifest in '" + dir.string() + "'");
  }
  out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::filesystem::path& dir,
                          const std::string& filename) {
  const json j =
      parse_document(read_text_file(dir / filename), "run manifest");
  RunManifest manifest;
  manifest.stage = j.at("stage").get<std::string>();
  manifest.config_json = j.at("config").dump();
  manifest.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("inputs")) {
    manifest.inputs =
        j.at("inputs").get<std::map<std::string, std::string>>();
  }
  if (j.contains("outputs")) {
    manifest.outputs = j.at("outputs").get<std::vector<std::string>>();
  }
  return manifest;
}

}  // namespace brt::io
