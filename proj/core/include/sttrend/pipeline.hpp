#pragma once

// Command implementations behind the sttrend CLI. Every command reads a
// Config, writes its outputs under Config::out and adds an entry to
// manifest.json there.
//
//   prepare   daily CSV -> anomalies.csv, constants.csv
//   simulate  synthetic anomalies.csv, constants.csv, truth.csv, truth.json
//   fit       anomalies -> mesh.txt, fit.json, hyper_posteriors.json, vertices.csv
//   bands     fit -> cells_alpha_<a>.csv, avoid_alpha_<a>.csv,
//             cells_alpha_<a>.geojson, bands.json
//   report    fit.json, bands.json -> report.txt

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sttrend/config.hpp"
#include "sttrend/error.hpp"
#include "sttrend/mesh.hpp"

namespace sttrend {

/// Process exit status: 2 for configuration errors, 3 for input errors,
/// 4 for numerical failures.
int exit_code(ErrorCode code) noexcept;

/// Command-line values that take precedence over the config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::vector<double>> alphas;
};

void apply_overrides(Config& config, const RunOverrides& overrides);

/// "0.05, 0.01" -> {0.05, 0.01}. Throws ConfigInvalid.
std::vector<double> parse_alpha_list(const std::string& text);

/// Quarter of the largest distance between two locations.
double default_range0(std::span<const Point> locations);
/// Median distance from a location to its nearest neighbour.
double median_spacing(std::span<const Point> locations);
/// Config values where given; otherwise extension 1.5 · range0, inner edge
/// 1.5 · median spacing and outer edge twice the inner one.
MeshOptions mesh_options(const Config& config, std::span<const Point> locations);

/// Shortest "%g" rendering of α used in file names, e.g. 0.05 -> "0.05".
std::string alpha_tag(double alpha);

void run_prepare(const Config& config);
void run_simulate(const Config& config);
void run_fit(const Config& config);
void run_bands(const Config& config);
/// Also writes the summary to `out`.
void run_report(const Config& config, std::ostream& out);

/// Machine-readable record of a failed command, one JSON object.
std::string error_record(const std::string& command, ErrorCode code, const std::string& message);
std::string error_record(const std::string& command, const std::string& error, int exit_code,
                         const std::string& message);

}  // namespace sttrend
