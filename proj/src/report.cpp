#include "semilinear/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "semilinear/errors.hpp"

#ifndef SEMILINEAR_VERSION
#define SEMILINEAR_VERSION "0.0.0"
#endif

namespace semilinear {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const Chart& chart) {
  constexpr double width = 640, height = 420;
  constexpr double left = 70, right = 160, top = 40, bottom = 55;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin <= 0) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin <= 0) {
    const double pad = std::max(0.5, std::abs(ymin) * 0.1);
    ymin -= pad, ymax += pad;
  }
  const auto sx = [&](double x) { return left + pw * (x - xmin) / (xmax - xmin); };
  const auto sy = [&](double y) { return top + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
                    "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(chart.title) + "</text>\n";
  svg += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" + fmt("%.1f", pw) +
         "\" height=\"" + fmt("%.1f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    svg += "<line x1=\"" + fmt("%.1f", sx(xv)) + "\" y1=\"" + fmt("%.1f", top + ph) + "\" x2=\"" +
           fmt("%.1f", sx(xv)) + "\" y2=\"" + fmt("%.1f", top + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", sx(xv)) + "\" y=\"" + fmt("%.1f", top + ph + 18) +
           "\" text-anchor=\"middle\">" + fmt("%.3g", xv) + "</text>\n";
    svg += "<line x1=\"" + fmt("%.1f", left - 5) + "\" y1=\"" + fmt("%.1f", sy(yv)) + "\" x2=\"" +
           fmt("%.1f", left) + "\" y2=\"" + fmt("%.1f", sy(yv)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", left - 8) + "\" y=\"" + fmt("%.1f", sy(yv) + 4) +
           "\" text-anchor=\"end\">" + fmt("%.3g", yv) + "</text>\n";
  }
  svg += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", height - 12) +
         "\" text-anchor=\"middle\">" + escape(chart.x_label) + "</text>\n";
  svg += "<text transform=\"translate(18," + fmt("%.1f", top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(chart.y_label) + "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += fmt("%.2f", sx(s.x[i])) + "," + fmt("%.2f", sy(s.y[i])) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    svg += "<line x1=\"" + fmt("%.1f", left + pw + 12) + "\" y1=\"" + fmt("%.1f", ly) + "\" x2=\"" +
           fmt("%.1f", left + pw + 32) + "\" y2=\"" + fmt("%.1f", ly) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", left + pw + 36) + "\" y=\"" + fmt("%.1f", ly + 4) + "\">" +
           escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void ArtifactWriter::text(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) throw Error("cannot write " + (dir_ / name).string());
  out << content;
  files_.push_back(name);
}

void ArtifactWriter::json(const std::string& name, const nlohmann::json& value) {
  text(name, value.dump(2) + "\n");
}

std::string library_version() { return SEMILINEAR_VERSION; }

nlohmann::json make_manifest(const std::string& command, const RunConfig& config, const nlohmann::json& results,
                             const std::vector<std::string>& outputs, double wall_seconds) {
  return {{"command", command},
          {"config", config.to_json()},
          {"config_text", config.serialize()},
          {"config_hash", config.hash()},
          {"library_version", library_version()},
          {"outputs", outputs},
          {"results", results},
          {"timing", {{"wall_seconds", wall_seconds}}}};
}

}  // namespace semilinear
