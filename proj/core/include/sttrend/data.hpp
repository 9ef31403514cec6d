#pragma once

// Daily station/grid series to standardized seasonal anomalies, block
// upscaling, trend back-transformation and synthetic data.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sttrend/mesh.hpp"
#include "sttrend/model.hpp"

namespace sttrend {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;
  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Parses YYYY-MM-DD. Throws InvalidInput.
Date parse_date(const std::string& text);

struct DailySeries {
  Point location;
  std::vector<Date> dates;
  std::vector<double> values;  ///< NaN marks a missing day
};

struct DailyGrid {
  std::vector<DailySeries> cells;
};

enum class Season { DJF, MAM, JJA, SON };

Season parse_season(const std::string& name);
/// Days in the season for `year` (DJF counts December of the previous year).
int season_length(Season season, int year);

/// One value per cell and year.
struct SeasonalPanel {
  std::vector<Point> locations;
  std::vector<int> years;
  Eigen::MatrixXd values;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed;
};

/// Arithmetic mean of the season's days per cell-year. A year with fewer than
/// `completeness` of its days present is masked. DJF of year Y spans December
/// Y−1 to February Y. Throws EmptySeason if no cell has any season day.
SeasonalPanel seasonal_means(const DailyGrid& daily, Season season = Season::JJA,
                             double completeness = 0.8);

struct CellConstants {
  double mean = 0.0;
  double sd = 1.0;
};

struct AnomalyPanel {
  SeasonalPanel panel;
  std::vector<CellConstants> constants;
  /// Locations removed by standardize() for lack of variation.
  std::vector<Point> dropped;

  /// Panel for the model with the time covariate in decades from the
  /// midpoint of the year range.
  ObservationPanel observations() const;
};

/// Decades from the midpoint of [first, last].
std::vector<double> decade_covariate(const std::vector<int>& years);

/// Per-cell z-scores using the sample sd. Cells with fewer than two observed
/// years or zero variance are dropped and listed; throws ZeroVariance if none
/// remain.
AnomalyPanel standardize(const SeasonalPanel& panel);

/// Block means of a regular grid of anomalies, `factor` × `factor` cells per
/// block. A block-year is masked if every fine value is masked. Constants of a
/// block are the means of the fine constants.
AnomalyPanel upscale(const AnomalyPanel& anomalies, int factor);

/// Standardized trend per decade to data units per decade.
double rescale_trend(double standardized, const CellConstants& constants);
Eigen::VectorXd rescale_trend(const Eigen::VectorXd& standardized, const std::vector<CellConstants>& constants);

struct SimulationOptions {
  bool noise = true;
  bool residual = true;
  double beta0_sd = 10.0;
};

struct SimulationResult {
  ObservationPanel panel;
  double beta0 = 0.0;
  Eigen::VectorXd beta_vertices;   ///< β̃ at mesh vertices
  Eigen::VectorXd trend_vertices;  ///< β₀ + β̃
  Eigen::VectorXd trend_locations; ///< β₀ + β(s_i)
  Eigen::MatrixXd tau_vertices;    ///< G × m
};

/// Draws from the generative model at `theta` on `mesh`.
SimulationResult simulate(const HyperParams& theta, const Mesh& mesh, const std::vector<Point>& locations,
                          const std::vector<double>& times, std::uint64_t seed,
                          const SimulationOptions& options = {});

// CSV formats. Readers throw InputMissing for unreadable files and
// InvalidInput for malformed content.

/// lon,lat,date,value; an empty, NA or NaN value marks a missing day.
DailyGrid read_daily_csv(const std::string& path);
void write_daily_csv(const std::string& path, const DailyGrid& daily);

/// lon,lat,year,anomaly for observed entries only.
SeasonalPanel read_anomaly_csv(const std::string& path);
void write_anomaly_csv(const std::string& path, const SeasonalPanel& panel);

/// lon,lat,mean,sd, matched to `locations` by coordinates. Throws
/// MissingConstants if a location has no row.
std::vector<CellConstants> read_constants_csv(const std::string& path, const std::vector<Point>& locations);
void write_constants_csv(const std::string& path, const std::vector<Point>& locations,
                         const std::vector<CellConstants>& constants);

/// %.17g formatting.
std::string format_double(double v);

}  // namespace sttrend
