//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "brt/errors.hpp"
#include "brt/io.hpp"

namespace brt::io {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw config_error("cannot write '" + path.string() + "'");
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw missing_artifact_error("expected file '" + path.string() +
                                 "' is missing");
  }
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw config_error("cannot parse number '" + text + "' in " + context);
  }
}

int parse_int(const std::string& text, const std::string& context) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw config_error("cannot parse integer '" + text + "' in " + context);
  }
  return value;
}

std::string optional_bound(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_deposition_csv(const std::filesystem::path& path,
                          const DepositionMatrix& matrix) {
  std::ofstream out = open_output(path);
  const std::vector<Triplet> triplets = matrix.to_triplets();
  out << matrix.rows() << "," << matrix.cols() << "," << triplets.size()
      << "\n";
  for (const Triplet& t : triplets) {
    out << t.row << "," << t.col << "," << format_double(t.value) << "\n";
  }
}

DepositionMatrix read_deposition_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw config_error("deposition file '" + path.string() + "' is empty");
  }
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() != 3) {
    throw config_error("deposition header must be rows,cols,nnz");
  }
  const int rows = parse_int(header[0], "deposition header");
  const int cols = parse_int(header[1], "deposition header");
  const int nnz = parse_int(header[2], "deposition header");

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw config_error("deposition triplet lines must be row,col,value");
    }
    triplets.push_back({parse_int(fields[0], "deposition triplet"),
                        parse_int(fields[1], "deposition triplet"),
                        parse_double(fields[2], "deposition triplet")});
  }
  if (static_cast<int>(triplets.size()) != nnz) {
    throw config_error("deposition file declares " + std::to_string(nnz) +
                       " entries but contains " +
                       std::to_string(triplets.size()));
  }
  return DepositionMatrix(rows, cols, std::move(triplets));
}

void write_fluence_csv(const std::filesystem::path& path,
                       const BeamLayout& beams,
                       std::span<const double> fluence) {
  std::ofstream out = open_output(path);
  out << "beam,row,col,value\n";
  int flat = 0;
  for (std::size_t b = 0; b < beams.beams.size(); ++b) {
    const Beam& beam = beams.beams[b];
    for (int row = 0; row < beam.beamlets_v; ++row) {
      for (int col = 0; col < beam.beamlets_u; ++col, ++flat) {
        out << b << "," << row << "," << col << ","
            << format_double(fluence[flat]) << "\n";
      }
    }
  }
}

std::vector<double> read_fluence_csv(const std::filesystem::path& path,
                                     const BeamLayout& beams) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "beam,row,col,value") {
    throw config_error("fluence file '" + path.string() +
                       "' must start with beam,row,col,value");
  }
  std::vector<double> fluence(
      static_cast<std::size_t>(beams.beamlet_count()), 0.0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw config_error("fluence lines must be beam,row,col,value");
    }
    const int beam = parse_int(fields[0], "fluence");
    const int row = parse_int(fields[1], "fluence");
    const int col = parse_int(fields[2], "fluence");
    if (beam < 0 || beam >= static_cast<int>(beams.beams.size())) {
      throw config_error("fluence references beam " + std::to_string(beam));
    }
    const Beam& geometry = beams.beams[beam];
    if (row < 0 || row >= geometry.beamlets_v || col < 0 ||
        col >= geometry.beamlets_u) {
      throw config_error("fluence beamlet (" + std::to_string(row) + "," +
                         std::to_string(col) + ") outside beam " +
                         std::to_string(beam));
    }
    fluence[beams.beam_offset(beam) + row * geometry.beamlets_u + col] =
        parse_double(fields[3], "fluence");
  }
  return fluence;
}

void write_evaluation_csv(const std::filesystem::path& path,
                          const PlanEvaluation& evaluation) {
  std::ofstream out = open_output(path);
  out << "structure,kind,bound_min,bound_mean_low,bound_mean_high,bound_max,"
         "d_min,d_mean,d_max,d98_bound,d98,d2_bound,d2\n";
  for (const StructureEvaluation& row : evaluation.structures) {
    out << row.id << "," << to_string(row.kind) << ","
        << optional_bound(row.bounds.min) << ","
        << optional_bound(row.bounds.mean_low) << ","
        << optional_bound(row.bounds.mean_high) << ","
        << optional_bound(row.bounds.max) << ","
        << format_double(row.stats.d_min) << ","
        << format_double(row.stats.d_mean) << ","
        << format_double(row.stats.d_max) << ","
        << optional_bound(row.bounds.d98_min) << ","
        << (row.d98 ? format_double(*row.d98) : std::string()) << ","
        << optional_bound(row.bounds.d2_max) << ","
        << (row.d2 ? format_double(*row.d2) : std::string()) << "\n";
  }
  out << "# objectives";
  for (double v : evaluation.objectives) out << "," << format_double(v);
  out << "\n";
}

void write_dvh_csv(const std::filesystem::path& path,
                   const CaseDefinition& kase, std::span<const double> dose) {
  std::ofstream out = open_output(path);
  out << "structure,dose_gy,volume_fraction\n";
  for (const Structure& s : kase.structures) {
    if (s.kind == StructureKind::virtual_ptv) continue;
    if (s.voxels.empty()) continue;
    const Dvh curve = dvh(dose, s.voxels);
    for (std::size_t i = 0; i < curve.curve_dose.size(); ++i) {
      out << s.id << "," << format_double(curve.curve_dose[i]) << ","
          << format_double(curve.curve_fraction[i]) << "\n";
    }
  }
}

void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<ComparisonRow>& rows,
                          const std::vector<std::string>& plan_names) {
  std::ofstream out = open_output(path);
  out << "roi,metric,bound";
  for (const std::string& name : plan_names) {
    out << "," << name << "," << name << "_exceeds";
  }
  out << "\n";
  for (const ComparisonRow& row : rows) {
    out << row.roi << "," << row.metric << "," << format_double(row.bound);
    for (std::size_t p = 0; p < row.actual.size(); ++p) {
      out << "," << format_double(row.actual[p]) << ","
          << (row.exceeds[p] ? 1 : 0);
    }
    out << "\n";
  }
}

void write_archive_csv(const std::filesystem::path& path,
                       const ParetoArchive& archive, int objective_count,
                       int genotype_length) {
  std::ofstream out = open_output(path);
  out << "plan";
  for (int g = 0; g < genotype_length; ++g) out << ",gene_" << g;
  for (int d = 0; d < objective_count; ++d) out << ",f" << d;
  out << ",log_f\n";
  const std::vector<ArchiveEntry>& entries = archive.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << i;
    for (double g : entries[i].genotype) out << "," << format_double(g);
    for (double f : entries[i].objectives) out << "," << format_double(f);
    out << "," << format_double(entries[i].log_f) << "\n";
  }
}

}  // namespace brt::io
