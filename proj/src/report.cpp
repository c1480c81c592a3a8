//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "brt/errors.hpp"
#include "brt/evaluation.hpp"
#include "brt/io.hpp"

namespace brt::io {

namespace {

// Fixed two-decimal coordinates keep the charts byte-stable.
std::string svg_num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};

const char* structure_color(std::size_t index) {
  return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

// Blue -> cyan -> yellow -> red dose ramp.
std::string dose_color(double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  struct Stop {
    double at;
    int r, g, b;
  };
  static const Stop stops[] = {{0.00, 20, 20, 90},
                               {0.35, 30, 120, 200},
                               {0.60, 70, 200, 180},
                               {0.80, 240, 220, 70},
                               {1.00, 210, 40, 30}};
  const Stop* lo = &stops[0];
  const Stop* hi = &stops[0];
  for (const Stop& s : stops) {
    if (s.at <= fraction) lo = &s;
    if (s.at >= fraction) {
      hi = &s;
      break;
    }
  }
  double t = hi->at > lo->at ? (fraction - lo->at) / (hi->at - lo->at) : 0.0;
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x",
                static_cast<int>(std::lround(lo->r + t * (hi->r - lo->r))),
                static_cast<int>(std::lround(lo->g + t * (hi->g - lo->g))),
                static_cast<int>(std::lround(lo->b + t * (hi->b - lo->b))));
  return buffer;
}

double chart_dose_ceiling(const CaseDefinition& kase,
                          std::span<const double> dose) {
  double prescribed = 0.0;
  for (const Structure& s : kase.structures) {
    if (s.kind == StructureKind::ptv) {
      prescribed = std::max(prescribed, s.params.eud0);
    }
  }
  if (prescribed > 0.0) return 1.1 * prescribed;
  double peak = 0.0;
  for (double d : dose) peak = std::max(peak, d);
  return peak > 0.0 ? 1.1 * peak : 1.0;
}

}  // namespace

void write_dvh_svg(const std::filesystem::path& path,
                   const CaseDefinition& kase, std::span<const double> dose) {
  const double width = 640.0;
  const double height = 420.0;
  const double left = 60.0, right = 190.0, top = 30.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double dose_ceiling = chart_dose_ceiling(kase, dose);

  auto to_x = [&](double d) { return left + plot_w * d / dose_ceiling; };
  auto to_y = [&](double fraction) {
    return top + plot_h * (1.0 - fraction);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Axes and grid.
  for (int tick = 0; tick <= 5; ++tick) {
    const double frac = tick / 5.0;
    const double x = left + plot_w * frac;
    const double y = top + plot_h * frac;
    svg << "<line x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(top)
        << "\" x2=\"" << svg_num(x) << "\" y2=\"" << svg_num(top + plot_h)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << svg_num(left) << "\" y1=\"" << svg_num(y)
        << "\" x2=\"" << svg_num(left + plot_w) << "\" y2=\"" << svg_num(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << svg_num(x) << "\" y=\""
        << svg_num(top + plot_h + 18) << "\" font-size=\"11\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\">"
        << svg_num(dose_ceiling * frac) << "</text>\n";
    svg << "<text x=\"" << svg_num(left - 8) << "\" y=\""
        << svg_num(to_y(frac) + 4) << "\" font-size=\"11\" "
        << "text-anchor=\"end\" font-family=\"sans-serif\">"
        << svg_num(100.0 * frac) << "</text>\n";
  }
  svg << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top)
      << "\" width=\"" << svg_num(plot_w) << "\" height=\"" << svg_num(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << svg_num(left + plot_w / 2) << "\" y=\""
      << svg_num(height - 12)
      << "\" font-size=\"12\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\">dose [Gy]</text>\n";
  svg << "<text x=\"16\" y=\"" << svg_num(top + plot_h / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 "
      << svg_num(top + plot_h / 2) << ")\">volume [%]</text>\n";

  // One curve per structure with voxels; empty structures are skipped.
  std::size_t color_index = 0;
  double legend_y = top + 10.0;
  for (const Structure& s : kase.structures) {
    if (s.kind == StructureKind::virtual_ptv) continue;
    if (s.voxels.empty()) continue;
    const Dvh curve = dvh(dose, s.voxels);
    const char* color = structure_color(color_index++);
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.curve_dose.size(); ++i) {
      const double clipped = std::min(curve.curve_dose[i], dose_ceiling);
      svg << svg_num(to_x(clipped)) << "," << svg_num(to_y(curve.curve_fraction[i]));
      if (i + 1 < curve.curve_dose.size()) svg << " ";
    }
    svg << "\"/>\n";
    svg << "<line x1=\"" << svg_num(left + plot_w + 12) << "\" y1=\""
        << svg_num(legend_y) << "\" x2=\"" << svg_num(left + plot_w + 34)
        << "\" y2=\"" << svg_num(legend_y) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << svg_num(left + plot_w + 40) << "\" y=\""
        << svg_num(legend_y + 4)
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.id
        << "</text>\n";
    legend_y += 18.0;
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw config_error("cannot write '" + path.string() + "'");
  out << svg.str();
}

void write_slice_svg(const std::filesystem::path& path,
                     const CaseDefinition& kase, std::span<const double> dose,
                     int z_index) {
  if (z_index < 0 || z_index >= kase.grid.nz) {
    throw config_error("slice index z = " + std::to_string(z_index) +
                       " outside the grid (nz = " +
                       std::to_string(kase.grid.nz) + ")");
  }
  const int nx = kase.grid.nx;
  const int ny = kase.grid.ny;
  const double cell = 12.0;
  const double margin = 24.0;
  const double width = nx * cell + 2 * margin;
  const double height = ny * cell + 2 * margin + 20.0;
  const double dose_ceiling = chart_dose_ceiling(kase, dose);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  auto cell_x = [&](int ix) { return margin + ix * cell; };
  // y axis points up: row 0 is drawn at the bottom.
  auto cell_y = [&](int iy) { return margin + (ny - 1 - iy) * cell; };

  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double d = dose[kase.grid.index(ix, iy, z_index)];
      svg << "<rect x=\"" << svg_num(cell_x(ix)) << "\" y=\""
          << svg_num(cell_y(iy)) << "\" width=\"" << svg_num(cell)
          << "\" height=\"" << svg_num(cell) << "\" fill=\""
          << dose_color(d / dose_ceiling) << "\"/>\n";
    }
  }

  // Structure contours: cell edges where mask membership changes.
  std::size_t color_index = 0;
  for (const Structure& s : kase.structures) {
    if (s.kind == StructureKind::virtual_ptv) continue;
    if (s.voxels.empty()) continue;
    std::vector<bool> mask(static_cast<std::size_t>(nx) * ny, false);
    bool any = false;
    for (int v : s.voxels) {
      const int iz = v / (nx * ny);
      if (iz != z_index) continue;
      mask[v - iz * nx * ny] = true;
      any = true;
    }
    const char* color = structure_color(color_index++);
    if (!any) continue;
    auto inside = [&](int ix, int iy) {
      return ix >= 0 && ix < nx && iy >= 0 && iy < ny && mask[iy * nx + ix];
    };
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        if (!inside(ix, iy)) continue;
        const double x0 = cell_x(ix), y0 = cell_y(iy);
        auto edge = [&](double x1, double y1, double x2, double y2) {
          svg << "<line x1=\"" << svg_num(x1) << "\" y1=\"" << svg_num(y1)
              << "\" x2=\"" << svg_num(x2) << "\" y2=\"" << svg_num(y2)
              << "\" stroke=\"" << color << "\" stroke-width=\"1.6\"/>\n";
        };
        if (!inside(ix - 1, iy)) edge(x0, y0, x0, y0 + cell);
        if (!inside(ix + 1, iy)) edge(x0 + cell, y0, x0 + cell, y0 + cell);
        if (!inside(ix, iy + 1)) edge(x0, y0, x0 + cell, y0);
        if (!inside(ix, iy - 1)) edge(x0, y0 + cell, x0 + cell, y0 + cell);
      }
    }
  }

  svg << "<text x=\"" << svg_num(margin) << "\" y=\""
      << svg_num(height - 8)
      << "\" font-size=\"11\" font-family=\"sans-serif\">axial slice z="
      << z_index << ", color scale 0.." << svg_num(dose_ceiling)
      << " Gy</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw config_error("cannot write '" + path.string() + "'");
  out << svg.str();
}

}  // namespace brt::io
