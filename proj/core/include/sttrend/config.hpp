#pragma once

// Run configuration: an INI file with [data], [prepare], [mesh], [priors],
// [inference], [bands], [run] and [simulate] sections. Relative paths are
// resolved against the directory of the file.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sttrend/data.hpp"
#include "sttrend/inference.hpp"
#include "sttrend/model.hpp"

namespace sttrend {

struct Config {
  std::string path;   ///< file the config came from, empty for in-memory text
  std::string text;   ///< raw contents
  std::uint64_t hash = 0;

  // [data]
  std::string daily;
  std::string anomalies;
  std::string constants;

  // [prepare]
  Season season = Season::JJA;
  double completeness = 0.8;
  int upscale = 1;

  // [mesh]; unset values are derived from the locations
  std::optional<double> extension;
  std::optional<double> max_edge_inner;
  std::optional<double> max_edge_outer;
  double cutoff = 0.0;
  double min_angle = 21.0;
  int max_vertices = 200000;

  // [priors]
  std::optional<double> range0;

  // [inference]
  ModeOptions mode;
  GridOptions grid;

  // [bands]
  std::vector<double> alphas{0.05, 0.01};
  int samples = 50000;
  double band_tol = 0.002;
  double level = 0.0;

  // [run]
  std::uint64_t seed = 1;
  std::string out = "run";

  // [simulate]
  NaturalParams truth{0.09, 0.4, 0.05, 5.0, 1.0, 15.0};
  int nx = 10;
  int ny = 10;
  double x0 = 0.0;
  double y0 = 0.0;
  double spacing = 1.0;
  int first_year = 1950;
  int last_year = 2014;
  SimulationOptions simulation;
};

/// Throws InputMissing if the file cannot be read and ConfigInvalid for bad
/// content, unknown sections or unknown keys.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& base_dir = ".");

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace sttrend
