#pragma once

// Output artifacts: JSON and CSV files, minimal SVG line charts and the run
// manifest. Every numeric field is printed with round-trip precision so that
// equal inputs give byte-identical files.

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "semilinear/run_config.hpp"

namespace semilinear {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Polyline chart with axes, five ticks per axis and a legend. Non-finite
/// points are skipped; an empty chart still renders its frame.
std::string render_svg(const Chart& chart);

/// Collects the files written by one command, relative to the output directory.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  void text(const std::string& name, const std::string& content);
  void json(const std::string& name, const nlohmann::json& value);
  void svg(const std::string& name, const Chart& chart) { text(name, render_svg(chart)); }
  /// Registers a file written by other code.
  void record(const std::string& name) { files_.push_back(name); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::string library_version();

/// {command, config, config_hash, library_version, outputs, results, timing}.
/// Only `timing` varies between identical runs.
nlohmann::json make_manifest(const std::string& command, const RunConfig& config, const nlohmann::json& results,
                             const std::vector<std::string>& outputs, double wall_seconds);

}  // namespace semilinear
