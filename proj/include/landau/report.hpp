#pragma once

// Static SVG plots and the report command.

#include <filesystem>
#include <string>
#include <vector>

#include "landau/experiment.hpp"

namespace landau {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Deterministic SVG text; points that cannot be shown on a log axis are
/// dropped.
std::string render_svg(const Plot& plot);

/// Plots every input table (files, or directories scanned for supported
/// tables) into out_dir and writes summary.json with the fitted slopes.
/// Throws ConfigError when nothing is given and SchemaError on malformed or
/// empty tables.
int cmd_report(const std::vector<std::filesystem::path>& inputs,
               const RunContext& ctx);

}  // namespace landau
