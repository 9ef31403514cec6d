#include "sttrend/data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "sttrend/error.hpp"
#include "sttrend/inference.hpp"
#include "sttrend/spde.hpp"

namespace sttrend {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Season containing `month`, and the season year it counts towards.
bool in_season(Season s, const Date& d, int& season_year) {
  season_year = d.year;
  switch (s) {
    case Season::DJF:
      if (d.month == 12) {
        season_year = d.year + 1;
        return true;
      }
      return d.month <= 2;
    case Season::MAM: return d.month >= 3 && d.month <= 5;
    case Season::JJA: return d.month >= 6 && d.month <= 8;
    case Season::SON: return d.month >= 9 && d.month <= 11;
  }
  return false;
}

// Coordinates are matched after rounding to 1e-7 degrees.
std::pair<long long, long long> coord_key(const Point& p) {
  return {std::llround(p.x * 1e7), std::llround(p.y * 1e7)};
}

double parse_number(const std::string& text, const std::string& what, const std::string& path, int line) {
  const std::string t = boost::algorithm::trim_copy(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw Error(ErrorCode::InvalidInput,
                path + ":" + std::to_string(line) + ": cannot parse " + what + " '" + t + "'");
  return v;
}

bool is_missing(const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
  return t.empty() || t == "na" || t == "nan";
}

// Minimal reader for comma-separated files with a header line.
class CsvReader {
 public:
  CsvReader(const std::string& path, const std::vector<std::string>& required) : path_(path), in_(path) {
    if (!in_) throw Error(ErrorCode::InputMissing, "cannot open " + path);
    std::string header;
    if (!std::getline(in_, header)) throw Error(ErrorCode::InvalidInput, path + ": empty file");
    const auto names = split(header);
    for (const auto& r : required) {
      const auto it = std::find(names.begin(), names.end(), r);
      if (it == names.end()) throw Error(ErrorCode::InvalidInput, path + ": missing column '" + r + "'");
      index_.push_back(static_cast<int>(it - names.begin()));
    }
    width_ = static_cast<int>(names.size());
  }

  // Fields of the next non-blank line in `required` order.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      boost::algorithm::trim(line);
      if (line.empty()) continue;
      const auto all = split(line);
      if (static_cast<int>(all.size()) != width_)
        throw Error(ErrorCode::InvalidInput, path_ + ":" + std::to_string(line_) + ": expected " +
                                                 std::to_string(width_) + " fields");
      fields.clear();
      for (int i : index_) fields.push_back(all[i]);
      return true;
    }
    return false;
  }

  int line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    boost::algorithm::split(out, line, boost::is_any_of(","));
    for (auto& s : out) boost::algorithm::trim(s);
    return out;
  }
  std::string path_;
  std::ifstream in_;
  std::vector<int> index_;
  int width_ = 0;
  int line_ = 1;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InputMissing, "cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Date parse_date(const std::string& text) {
  Date d;
  const std::string t = boost::algorithm::trim_copy(text);
  if (std::sscanf(t.c_str(), "%d-%d-%d", &d.year, &d.month, &d.day) != 3 || d.month < 1 || d.month > 12 ||
      d.day < 1 || d.day > 31 ||
      !std::chrono::year_month_day(std::chrono::year(d.year), std::chrono::month(d.month), std::chrono::day(d.day)).ok())
    throw Error(ErrorCode::InvalidInput, "invalid date '" + t + "'");
  return d;
}

Season parse_season(const std::string& name) {
  const std::string n = boost::algorithm::to_upper_copy(name);
  if (n == "DJF") return Season::DJF;
  if (n == "MAM") return Season::MAM;
  if (n == "JJA") return Season::JJA;
  if (n == "SON") return Season::SON;
  throw Error(ErrorCode::ConfigInvalid, "unknown season '" + name + "'");
}

int season_length(Season season, int year) {
  switch (season) {
    case Season::DJF: return 31 + 31 + (is_leap(year) ? 29 : 28);
    case Season::MAM: return 31 + 30 + 31;
    case Season::JJA: return 30 + 31 + 31;
    case Season::SON: return 30 + 31 + 30;
  }
  return 0;
}

SeasonalPanel seasonal_means(const DailyGrid& daily, Season season, double completeness) {
  std::vector<std::map<int, std::pair<double, int>>> sums(daily.cells.size());
  int first = std::numeric_limits<int>::max();
  int last = std::numeric_limits<int>::min();
  for (std::size_t c = 0; c < daily.cells.size(); ++c) {
    const auto& cell = daily.cells[c];
    if (cell.dates.size() != cell.values.size())
      throw Error(ErrorCode::InvalidInput, "daily series dates and values differ in length");
    for (std::size_t k = 0; k < cell.dates.size(); ++k) {
      int sy = 0;
      if (!in_season(season, cell.dates[k], sy)) continue;
      first = std::min(first, sy);
      last = std::max(last, sy);
      auto& acc = sums[c][sy];
      if (std::isfinite(cell.values[k])) {
        acc.first += cell.values[k];
        acc.second += 1;
      }
    }
  }
  if (first > last) throw Error(ErrorCode::EmptySeason, "no days fall in the requested season");

  SeasonalPanel out;
  for (const auto& cell : daily.cells) out.locations.push_back(cell.location);
  for (int y = first; y <= last; ++y) out.years.push_back(y);
  const int n = static_cast<int>(daily.cells.size());
  const int m = static_cast<int>(out.years.size());
  out.values = Eigen::MatrixXd::Constant(n, m, kNaN);
  out.observed.setConstant(n, m, false);
  for (int c = 0; c < n; ++c)
    for (const auto& [year, acc] : sums[c]) {
      if (acc.second < completeness * season_length(season, year) || acc.second == 0) continue;
      const int j = year - first;
      out.values(c, j) = acc.first / acc.second;
      out.observed(c, j) = true;
    }
  if (!out.observed.any()) throw Error(ErrorCode::EmptySeason, "no season has enough observed days");
  return out;
}

std::vector<double> decade_covariate(const std::vector<int>& years) {
  std::vector<double> t;
  if (years.empty()) return t;
  const double mid = 0.5 * (years.front() + years.back());
  for (int y : years) t.push_back((y - mid) / 10.0);
  return t;
}

ObservationPanel AnomalyPanel::observations() const {
  ObservationPanel p;
  p.locations = panel.locations;
  p.times = decade_covariate(panel.years);
  p.values = panel.values;
  p.observed = panel.observed;
  for (Eigen::Index i = 0; i < p.values.rows(); ++i)
    for (Eigen::Index j = 0; j < p.values.cols(); ++j)
      if (!p.observed(i, j)) p.values(i, j) = 0.0;
  return p;
}

AnomalyPanel standardize(const SeasonalPanel& panel) {
  const int n = static_cast<int>(panel.locations.size());
  const int m = static_cast<int>(panel.years.size());
  std::vector<int> keep;
  std::vector<CellConstants> constants;
  AnomalyPanel out;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < m; ++j)
      if (panel.observed(i, j)) {
        sum += panel.values(i, j);
        ++count;
      }
    if (count < 2) {
      out.dropped.push_back(panel.locations[i]);
      continue;
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (int j = 0; j < m; ++j)
      if (panel.observed(i, j)) ss += (panel.values(i, j) - mean) * (panel.values(i, j) - mean);
    const double sd = std::sqrt(ss / (count - 1));
    if (!(sd > 0.0)) {
      out.dropped.push_back(panel.locations[i]);
      continue;
    }
    keep.push_back(i);
    constants.push_back({mean, sd});
  }
  if (keep.empty()) throw Error(ErrorCode::ZeroVariance, "no cell has a varying series");

  const int k = static_cast<int>(keep.size());
  out.panel.years = panel.years;
  out.panel.values = Eigen::MatrixXd::Constant(k, m, kNaN);
  out.panel.observed.setConstant(k, m, false);
  for (int r = 0; r < k; ++r) {
    const int i = keep[r];
    out.panel.locations.push_back(panel.locations[i]);
    for (int j = 0; j < m; ++j)
      if (panel.observed(i, j)) {
        out.panel.values(r, j) = (panel.values(i, j) - constants[r].mean) / constants[r].sd;
        out.panel.observed(r, j) = true;
      }
  }
  out.constants = std::move(constants);
  return out;
}

AnomalyPanel upscale(const AnomalyPanel& anomalies, int factor) {
  if (factor < 2) throw Error(ErrorCode::InvalidParameters, "upscale factor must be >= 2");
  const auto& fine = anomalies.panel;
  const int n = static_cast<int>(fine.locations.size());
  const int m = static_cast<int>(fine.years.size());
  if (n == 0) throw Error(ErrorCode::InvalidInput, "nothing to upscale");
  if (static_cast<int>(anomalies.constants.size()) != n)
    throw Error(ErrorCode::MissingConstants, "constants do not match the panel");

  auto spacing = [&](auto coord) {
    std::vector<double> v;
    for (const auto& p : fine.locations) v.push_back(coord(p));
    std::sort(v.begin(), v.end());
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] - v[i - 1] > 1e-9) step = std::min(step, v[i] - v[i - 1]);
    return std::pair{v.front(), std::isfinite(step) ? step : 1.0};
  };
  const auto [x0, dx] = spacing([](const Point& p) { return p.x; });
  const auto [y0, dy] = spacing([](const Point& p) { return p.y; });

  // Block (row, column) → member cells, ordered by row then column.
  std::map<std::pair<long, long>, std::vector<int>> blocks;
  for (int i = 0; i < n; ++i) {
    const long cx = std::lround((fine.locations[i].x - x0) / dx);
    const long cy = std::lround((fine.locations[i].y - y0) / dy);
    blocks[{cy / factor, cx / factor}].push_back(i);
  }

  AnomalyPanel out;
  out.panel.years = fine.years;
  const int k = static_cast<int>(blocks.size());
  out.panel.values = Eigen::MatrixXd::Constant(k, m, kNaN);
  out.panel.observed.setConstant(k, m, false);
  int r = 0;
  for (const auto& [key, members] : blocks) {
    const double half = 0.5 * (factor - 1);
    out.panel.locations.push_back(
        {x0 + (key.second * factor + half) * dx, y0 + (key.first * factor + half) * dy});
    CellConstants c{0.0, 0.0};
    for (int i : members) {
      c.mean += anomalies.constants[i].mean / members.size();
      c.sd += anomalies.constants[i].sd / members.size();
    }
    out.constants.push_back(c);
    for (int j = 0; j < m; ++j) {
      double sum = 0.0;
      int count = 0;
      for (int i : members)
        if (fine.observed(i, j)) {
          sum += fine.values(i, j);
          ++count;
        }
      if (count > 0) {
        out.panel.values(r, j) = sum / count;
        out.panel.observed(r, j) = true;
      }
    }
    ++r;
  }
  return out;
}

double rescale_trend(double standardized, const CellConstants& constants) {
  if (!std::isfinite(constants.sd) || !(constants.sd > 0.0))
    throw Error(ErrorCode::MissingConstants, "standardization sd must be positive");
  return standardized * constants.sd;
}

Eigen::VectorXd rescale_trend(const Eigen::VectorXd& standardized, const std::vector<CellConstants>& constants) {
  if (static_cast<Eigen::Index>(constants.size()) != standardized.size())
    throw Error(ErrorCode::MissingConstants, "one set of constants per cell is required");
  Eigen::VectorXd out(standardized.size());
  for (Eigen::Index i = 0; i < standardized.size(); ++i) out[i] = rescale_trend(standardized[i], constants[i]);
  return out;
}

SimulationResult simulate(const HyperParams& theta, const Mesh& mesh, const std::vector<Point>& locations,
                          const std::vector<double>& times, std::uint64_t seed,
                          const SimulationOptions& options) {
  if (!theta.finite()) throw Error(ErrorCode::InvalidParameters, "non-finite hyperparameters");
  const FemMatrices fem = fem_matrices(mesh);
  const Projector proj = basis_projector(mesh, locations);
  const int g = mesh.vertex_count();
  const int m = static_cast<int>(times.size());
  const int n = static_cast<int>(locations.size());

  SimulationResult r;
  std::mt19937_64 rng0(derive_seed(seed, 0));
  r.beta0 = options.beta0_sd * std::normal_distribution<double>()(rng0);

  const CholeskyFactor fb =
      factorize(spde_precision(theta.kappa_beta(), theta.tau_beta(), fem.mass, fem.stiffness));
  r.beta_vertices = fb.sample(derive_seed(seed, 1));
  r.trend_vertices = r.beta_vertices.array() + r.beta0;
  r.trend_locations = proj.matrix * r.trend_vertices;

  r.tau_vertices = Eigen::MatrixXd::Zero(g, m);
  if (options.residual) {
    const CholeskyFactor fx =
        factorize(spde_precision(theta.kappa_xi(), theta.tau_xi(), fem.mass, fem.stiffness));
    const Eigen::MatrixXd xi = fx.sample(m, derive_seed(seed, 2));
    const double phi = theta.phi();
    r.tau_vertices.col(0) = xi.col(0) / std::sqrt(1.0 - phi * phi);
    for (int t = 1; t < m; ++t) r.tau_vertices.col(t) = phi * r.tau_vertices.col(t - 1) + xi.col(t);
  }

  Eigen::MatrixXd y(n, m);
  const Eigen::MatrixXd tau_loc = proj.matrix * r.tau_vertices;
  std::mt19937_64 rng3(derive_seed(seed, 3));
  std::normal_distribution<double> normal;
  const double noise_sd = 1.0 / std::sqrt(theta.noise_precision());
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t) {
      y(i, t) = times[t] * r.trend_locations[i] + tau_loc(i, t);
      if (options.noise) y(i, t) += noise_sd * normal(rng3);
    }
  r.panel = ObservationPanel::complete(locations, times, std::move(y));
  return r;
}

// ---------------------------------------------------------------------------
// CSV

DailyGrid read_daily_csv(const std::string& path) {
  CsvReader reader(path, {"lon", "lat", "date", "value"});
  DailyGrid grid;
  std::map<std::pair<long long, long long>, int> index;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const Point p{parse_number(f[0], "lon", path, reader.line()), parse_number(f[1], "lat", path, reader.line())};
    const auto key = coord_key(p);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, static_cast<int>(grid.cells.size())).first;
      grid.cells.push_back(DailySeries{p, {}, {}});
    }
    auto& cell = grid.cells[it->second];
    cell.dates.push_back(parse_date(f[2]));
    cell.values.push_back(is_missing(f[3]) ? kNaN : parse_number(f[3], "value", path, reader.line()));
  }
  if (grid.cells.empty()) throw Error(ErrorCode::InvalidInput, path + ": no data rows");
  return grid;
}

void write_daily_csv(const std::string& path, const DailyGrid& daily) {
  auto out = open_output(path);
  out << "lon,lat,date,value\n";
  char date[16];
  for (const auto& cell : daily.cells)
    for (std::size_t k = 0; k < cell.dates.size(); ++k) {
      const auto& d = cell.dates[k];
      std::snprintf(date, sizeof date, "%04d-%02d-%02d", d.year, d.month, d.day);
      out << format_double(cell.location.x) << ',' << format_double(cell.location.y) << ',' << date << ','
          << (std::isfinite(cell.values[k]) ? format_double(cell.values[k]) : "NA") << '\n';
    }
}

SeasonalPanel read_anomaly_csv(const std::string& path) {
  CsvReader reader(path, {"lon", "lat", "year", "anomaly"});
  struct Row {
    int cell;
    int year;
    double value;
  };
  std::vector<Row> rows;
  std::vector<Point> locations;
  std::map<std::pair<long long, long long>, int> index;
  int first = std::numeric_limits<int>::max();
  int last = std::numeric_limits<int>::min();
  std::vector<std::string> f;
  while (reader.next(f)) {
    const Point p{parse_number(f[0], "lon", path, reader.line()), parse_number(f[1], "lat", path, reader.line())};
    auto [it, inserted] = index.emplace(coord_key(p), static_cast<int>(locations.size()));
    if (inserted) locations.push_back(p);
    const double year = parse_number(f[2], "year", path, reader.line());
    if (year != std::floor(year)) throw Error(ErrorCode::InvalidInput, path + ": non-integer year");
    if (is_missing(f[3])) continue;
    const int y = static_cast<int>(year);
    rows.push_back({it->second, y, parse_number(f[3], "anomaly", path, reader.line())});
    first = std::min(first, y);
    last = std::max(last, y);
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidInput, path + ": no observed anomalies");

  SeasonalPanel out;
  out.locations = std::move(locations);
  for (int y = first; y <= last; ++y) out.years.push_back(y);
  const int n = static_cast<int>(out.locations.size());
  const int m = static_cast<int>(out.years.size());
  out.values = Eigen::MatrixXd::Constant(n, m, kNaN);
  out.observed.setConstant(n, m, false);
  for (const auto& r : rows) {
    if (out.observed(r.cell, r.year - first))
      throw Error(ErrorCode::InvalidInput, path + ": duplicate cell-year " + std::to_string(r.year));
    out.values(r.cell, r.year - first) = r.value;
    out.observed(r.cell, r.year - first) = true;
  }
  return out;
}

void write_anomaly_csv(const std::string& path, const SeasonalPanel& panel) {
  auto out = open_output(path);
  out << "lon,lat,year,anomaly\n";
  for (std::size_t i = 0; i < panel.locations.size(); ++i)
    for (std::size_t j = 0; j < panel.years.size(); ++j) {
      if (!panel.observed(i, j)) continue;
      out << format_double(panel.locations[i].x) << ',' << format_double(panel.locations[i].y) << ','
          << panel.years[j] << ',' << format_double(panel.values(i, j)) << '\n';
    }
}

std::vector<CellConstants> read_constants_csv(const std::string& path, const std::vector<Point>& locations) {
  CsvReader reader(path, {"lon", "lat", "mean", "sd"});
  std::map<std::pair<long long, long long>, CellConstants> table;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const Point p{parse_number(f[0], "lon", path, reader.line()), parse_number(f[1], "lat", path, reader.line())};
    table[coord_key(p)] = {parse_number(f[2], "mean", path, reader.line()),
                           parse_number(f[3], "sd", path, reader.line())};
  }
  std::vector<CellConstants> out;
  for (const auto& p : locations) {
    const auto it = table.find(coord_key(p));
    if (it == table.end())
      throw Error(ErrorCode::MissingConstants,
                  path + ": no constants for cell (" + format_double(p.x) + ", " + format_double(p.y) + ")");
    out.push_back(it->second);
  }
  return out;
}

void write_constants_csv(const std::string& path, const std::vector<Point>& locations,
                         const std::vector<CellConstants>& constants) {
  auto out = open_output(path);
  out << "lon,lat,mean,sd\n";
  for (std::size_t i = 0; i < locations.size(); ++i)
    out << format_double(locations[i].x) << ',' << format_double(locations[i].y) << ','
        << format_double(constants[i].mean) << ',' << format_double(constants[i].sd) << '\n';
}

}  // namespace sttrend
