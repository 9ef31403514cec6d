#include "sttrend/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/version.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "sttrend/data.hpp"
#include "sttrend/excursions.hpp"
#include "sttrend/inference.hpp"
#include "sttrend/model.hpp"

#ifndef STTREND_VERSION
#define STTREND_VERSION "unknown"
#endif

namespace sttrend {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// nlohmann prints the shortest round-trip form; outputs here use %.17g like
// the CSV files.
void emit(std::string& out, const Json& j, int depth) {
  const std::string pad(2 * depth, ' ');
  const std::string inner(2 * (depth + 1), ' ');
  auto primitive = [](const Json& v) { return !v.is_object() && !v.is_array(); };
  if (j.is_number_float()) {
    const double v = j.get<double>();
    out += std::isfinite(v) ? format_double(v) : "null";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    const bool flat = std::all_of(j.begin(), j.end(), primitive);
    out += '[';
    bool first = true;
    for (const auto& v : j) {
      if (!first) out += flat ? ", " : ",";
      first = false;
      if (!flat) out += '\n' + inner;
      emit(out, v, depth + 1);
    }
    if (!flat) out += '\n' + pad;
    out += ']';
  } else if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ',';
      first = false;
      out += '\n' + inner + Json(it.key()).dump() + ": ";
      emit(out, it.value(), depth + 1);
    }
    out += '\n' + pad + '}';
  } else {
    out += j.dump();
  }
}

std::string to_text(const Json& j) {
  std::string s;
  emit(s, j, 0);
  s += '\n';
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InputMissing, "cannot write " + path.string());
  out << text;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InputMissing, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
  }
}

fs::path out_dir(const Config& c) {
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InputMissing, "cannot create output directory " + dir.string());
  return dir;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void record_run(const Config& c, const std::string& command, Json details) {
  const fs::path path = out_dir(c) / "manifest.json";
  Json m;
  if (fs::exists(path)) {
    try {
      m = read_json(path);
    } catch (const Error&) {
      m = Json::object();
    }
  }
  m["tool"] = "sttrend";
  m["version"] = STTREND_VERSION;
  m["libraries"] = Json{{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"cholmod", cholesky_backend_version()},
                        {"boost", BOOST_LIB_VERSION},
                        {"compiler", __VERSION__}};
  Json entry{{"config_path", c.path}, {"config_hash", hex(c.hash)}, {"seed", c.seed}, {"alphas", c.alphas}};
  for (auto& [k, v] : details.items()) entry[k] = v;
  entry["config"] = c.text;
  m["commands"][command] = entry;
  write_text(path, to_text(m));
}

fs::path input_or_default(const std::string& configured, const Config& c, const char* name) {
  return configured.empty() ? fs::path(c.out) / name : fs::path(configured);
}

AnomalyPanel load_anomalies(const Config& c) {
  AnomalyPanel a;
  a.panel = read_anomaly_csv(input_or_default(c.anomalies, c, "anomalies.csv").string());
  a.constants = read_constants_csv(input_or_default(c.constants, c, "constants.csv").string(), a.panel.locations);
  return a;
}

HyperParams prior_means(const Priors& p) {
  Eigen::VectorXd v(HyperParams::size);
  for (int i = 0; i < HyperParams::size; ++i) v[i] = p.mean[i];
  return HyperParams::from_vector(v);
}

Json natural_json(const NaturalParams& p) {
  return Json{{"noise_variance", p.noise_variance}, {"phi", p.phi},           {"sigma2_beta", p.sigma2_beta},
              {"range_beta", p.range_beta},         {"sigma2_xi", p.sigma2_xi}, {"range_xi", p.range_xi}};
}

// Everything a fitted run needs to rebuild its model.
struct FittedRun {
  AnomalyPanel anomalies;
  Mesh mesh;
  double range0 = 1.0;
  ThetaGrid grid;
};

LatentModel build_model(const FittedRun& run) {
  const auto& locs = run.anomalies.panel.locations;
  ObservationPanel panel = run.anomalies.observations();
  panel.validate();
  return LatentModel(std::move(panel), SpatialDesign::from_mesh(run.mesh, locs),
                     Priors::weakly_informative(run.range0));
}

FittedRun load_fit(const Config& c) {
  FittedRun run;
  run.anomalies = load_anomalies(c);
  const fs::path dir(c.out);
  run.mesh = load_mesh((dir / "mesh.txt").string());
  const Json fit = read_json(dir / "fit.json");
  try {
    run.range0 = fit.at("range0").get<double>();
    const Json& g = fit.at("grid");
    for (const auto& p : g.at("points")) {
      Eigen::VectorXd v(HyperParams::size);
      if (p.size() != static_cast<std::size_t>(HyperParams::size))
        throw Error(ErrorCode::InvalidInput, "fit.json: grid point has the wrong length");
      for (int i = 0; i < HyperParams::size; ++i) v[i] = p[i].get<double>();
      run.grid.points.push_back(HyperParams::from_vector(v));
    }
    run.grid.log_posteriors = g.at("log_posterior").get<std::vector<double>>();
    run.grid.log_weights = g.at("log_weight").get<std::vector<double>>();
    run.grid.design_log_weights = g.at("design_log_weight").get<std::vector<double>>();
    run.grid.mode_index = g.at("mode_index").get<int>();
    if (fit.at("cells").get<std::size_t>() != run.anomalies.panel.locations.size())
      throw Error(ErrorCode::InvalidInput, "fit.json was produced from different anomalies");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, (dir / "fit.json").string() + ": " + e.what());
  }
  if (run.grid.points.empty() || run.grid.log_weights.size() != run.grid.points.size())
    throw Error(ErrorCode::InvalidInput, "fit.json: inconsistent grid");
  return run;
}

// Half widths of the cells of a regular grid of centres.
std::pair<double, double> cell_half_widths(std::span<const Point> locations) {
  auto step = [&](auto coord) {
    std::vector<double> v;
    for (const auto& p : locations) v.push_back(coord(p));
    std::sort(v.begin(), v.end());
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] - v[i - 1] > 1e-9) s = std::min(s, v[i] - v[i - 1]);
    return s;
  };
  double dx = step([](const Point& p) { return p.x; });
  double dy = step([](const Point& p) { return p.y; });
  if (!std::isfinite(dx)) dx = std::isfinite(dy) ? dy : median_spacing(locations);
  if (!std::isfinite(dy)) dy = dx;
  return {0.5 * dx, 0.5 * dy};
}

std::string flag(bool b) { return b ? "1" : "0"; }

}  // namespace

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigInvalid:
      return 2;
    case ErrorCode::InputMissing:
    case ErrorCode::InvalidInput:
    case ErrorCode::EmptySeason:
    case ErrorCode::ZeroVariance:
    case ErrorCode::MissingConstants:
    case ErrorCode::CollinearInput:
    case ErrorCode::PointOutsideMesh:
      return 3;
    default:
      return 4;
  }
}

void apply_overrides(Config& config, const RunOverrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.out) config.out = *overrides.out;
  if (overrides.alphas) config.alphas = *overrides.alphas;
}

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(", "), boost::token_compress_on);
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    std::istringstream in(p);
    double v = 0.0;
    in >> v;
    if (in.fail() || !in.eof() || !(v > 0.0 && v < 1.0))
      throw Error(ErrorCode::ConfigInvalid, "alpha '" + p + "' is not in (0, 1)");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigInvalid, "empty alpha list");
  return out;
}

double default_range0(std::span<const Point> locations) {
  double d = 0.0;
  for (std::size_t i = 0; i < locations.size(); ++i)
    for (std::size_t j = i + 1; j < locations.size(); ++j)
      d = std::max(d, std::hypot(locations[i].x - locations[j].x, locations[i].y - locations[j].y));
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidInput, "locations do not span a region");
  return 0.25 * d;
}

double median_spacing(std::span<const Point> locations) {
  if (locations.size() < 2) throw Error(ErrorCode::InvalidInput, "need at least two locations");
  std::vector<double> nearest;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < locations.size(); ++j) {
      if (i == j) continue;
      const double d = std::hypot(locations[i].x - locations[j].x, locations[i].y - locations[j].y);
      if (d > 0.0) best = std::min(best, d);
    }
    if (std::isfinite(best)) nearest.push_back(best);
  }
  if (nearest.empty()) throw Error(ErrorCode::InvalidInput, "locations coincide");
  const auto mid = nearest.begin() + nearest.size() / 2;
  std::nth_element(nearest.begin(), mid, nearest.end());
  return *mid;
}

MeshOptions mesh_options(const Config& config, std::span<const Point> locations) {
  const double range0 = config.range0.value_or(default_range0(locations));
  MeshOptions o;
  o.extension = config.extension.value_or(1.5 * range0);
  o.max_edge_inner = config.max_edge_inner.value_or(1.5 * median_spacing(locations));
  o.max_edge_outer = config.max_edge_outer.value_or(2.0 * o.max_edge_inner);
  o.cutoff = config.cutoff;
  o.min_angle_deg = config.min_angle;
  o.max_vertices = config.max_vertices;
  return o;
}

std::string alpha_tag(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

void run_prepare(const Config& c) {
  if (c.daily.empty()) throw Error(ErrorCode::ConfigInvalid, "[data] daily is not set");
  const DailyGrid daily = read_daily_csv(c.daily);
  AnomalyPanel a = standardize(seasonal_means(daily, c.season, c.completeness));
  for (const auto& p : a.dropped)
    std::cerr << "warning: dropped cell (" << format_double(p.x) << ", " << format_double(p.y)
              << ") without variation\n";
  if (c.upscale > 1) a = upscale(a, c.upscale);

  const fs::path dir = out_dir(c);
  write_anomaly_csv((dir / "anomalies.csv").string(), a.panel);
  write_constants_csv((dir / "constants.csv").string(), a.panel.locations, a.constants);
  record_run(c, "prepare",
             Json{{"inputs", {c.daily}},
                  {"cells", a.panel.locations.size()},
                  {"years", {a.panel.years.front(), a.panel.years.back()}},
                  {"dropped_cells", a.dropped.size()},
                  {"outputs", {"anomalies.csv", "constants.csv"}}});
}

void run_simulate(const Config& c) {
  std::vector<Point> locs;
  for (int j = 0; j < c.ny; ++j)
    for (int i = 0; i < c.nx; ++i) locs.push_back({c.x0 + i * c.spacing, c.y0 + j * c.spacing});
  std::vector<int> years;
  for (int y = c.first_year; y <= c.last_year; ++y) years.push_back(y);

  const Mesh mesh = build_mesh(locs, mesh_options(c, locs));
  const SimulationResult sim =
      simulate(to_internal(c.truth), mesh, locs, decade_covariate(years), c.seed, c.simulation);

  SeasonalPanel panel;
  panel.locations = locs;
  panel.years = years;
  panel.values = sim.panel.values;
  panel.observed = sim.panel.observed;
  const fs::path dir = out_dir(c);
  write_anomaly_csv((dir / "anomalies.csv").string(), panel);
  write_constants_csv((dir / "constants.csv").string(), locs, std::vector<CellConstants>(locs.size()));
  {
    std::ofstream out(dir / "truth.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::InputMissing, "cannot write " + (dir / "truth.csv").string());
    out << "lon,lat,trend\n";
    for (std::size_t i = 0; i < locs.size(); ++i)
      out << format_double(locs[i].x) << ',' << format_double(locs[i].y) << ','
          << format_double(sim.trend_locations[static_cast<Eigen::Index>(i)]) << '\n';
  }
  write_text(dir / "truth.json", to_text(Json{{"theta", natural_json(c.truth)}, {"beta0", sim.beta0}}));
  record_run(c, "simulate",
             Json{{"cells", locs.size()},
                  {"years", {years.front(), years.back()}},
                  {"mesh_vertices", mesh.vertex_count()},
                  {"outputs", {"anomalies.csv", "constants.csv", "truth.csv", "truth.json"}}});
}

void run_fit(const Config& c) {
  FittedRun run;
  run.anomalies = load_anomalies(c);
  const auto& locs = run.anomalies.panel.locations;
  run.range0 = c.range0.value_or(default_range0(locs));
  run.mesh = build_mesh(locs, mesh_options(c, locs));
  LatentModel model = build_model(run);

  const ModeResult mode = find_mode(model, prior_means(model.priors()), c.mode);
  if (!mode.converged) std::cerr << "warning: mode search stopped before converging\n";
  run.grid = explore_grid(model, mode.theta, c.grid);

  const fs::path dir = out_dir(c);
  save_mesh((dir / "mesh.txt").string(), run.mesh);

  Json points = Json::array();
  for (const auto& p : run.grid.points) {
    const Eigen::VectorXd v = p.to_vector();
    points.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  const Eigen::VectorXd mode_v = mode.theta.to_vector();
  Json fit{{"cells", locs.size()},
           {"years", {run.anomalies.panel.years.front(), run.anomalies.panel.years.back()}},
           {"observations", model.observation_count()},
           {"mesh_vertices", run.mesh.vertex_count()},
           {"range0", run.range0},
           {"evaluation", model.spectral() ? "spectral" : "sparse"},
           {"mode",
            {{"theta", std::vector<double>(mode_v.data(), mode_v.data() + mode_v.size())},
             {"natural", natural_json(to_natural(mode.theta))},
             {"log_posterior", mode.log_post},
             {"converged", mode.converged},
             {"evaluations", mode.evaluations}}},
           {"grid",
            {{"names", HyperParams::names()},
             {"points", points},
             {"log_posterior", run.grid.log_posteriors},
             {"log_weight", run.grid.log_weights},
             {"design_log_weight", run.grid.design_log_weights},
             {"mode_index", run.grid.mode_index}}}};
  write_text(dir / "fit.json", to_text(fit));

  Json hyper = Json::array();
  for (const auto& h : hyper_posteriors(run.grid))
    hyper.push_back(
        Json{{"name", h.name}, {"mean", h.mean}, {"sd", h.sd}, {"q05", h.q05}, {"q50", h.q50}, {"q95", h.q95}});
  write_text(dir / "hyper_posteriors.json", to_text(Json{{"parameters", hyper}}));

  const FieldMarginals vm = FieldMarginals::from(trend_posterior(model, run.grid, {}, false));
  {
    std::ofstream out(dir / "vertices.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::InputMissing, "cannot write " + (dir / "vertices.csv").string());
    out << "x,y,post_mean,post_sd\n";
    for (int v = 0; v < run.mesh.vertex_count(); ++v)
      out << format_double(run.mesh.vertices()[v].x) << ',' << format_double(run.mesh.vertices()[v].y) << ','
          << format_double(vm.mean(v)) << ',' << format_double(vm.sd(v)) << '\n';
  }
  record_run(c, "fit",
             Json{{"cells", locs.size()},
                  {"grid_points", run.grid.size()},
                  {"outputs", {"mesh.txt", "fit.json", "hyper_posteriors.json", "vertices.csv"}}});
}

void run_bands(const Config& c) {
  const FittedRun run = load_fit(c);
  LatentModel model = build_model(run);
  const auto& locs = run.anomalies.panel.locations;
  const auto& constants = run.anomalies.constants;
  const int n = static_cast<int>(locs.size());
  const Projector& projector = model.design().projector;

  const std::vector<int> support = projector.support();
  const TrendPosterior cells = project_trend(trend_posterior(model, run.grid, support, true), projector.matrix);
  const FieldMarginals marginals = FieldMarginals::from(cells);
  const Eigen::MatrixXd samples = sample_beta(cells, c.samples, c.seed);
  const BandResult interval95 = pointwise_band(marginals, 0.05, c.level);

  const fs::path dir = out_dir(c);
  const auto [hx, hy] = cell_half_widths(locs);
  std::vector<std::string> outputs;
  Json per_alpha = Json::array();
  for (double alpha : c.alphas) {
    const BandResult pw = pointwise_band(marginals, alpha, c.level);
    const BandResult sim = simultaneous_band(samples, marginals, alpha, c.level, {c.band_tol, 1000});
    const BandResult bf = bonferroni_band(marginals, alpha, n, c.level);
    const std::string tag = alpha_tag(alpha);

    std::ostringstream csv, avoid;
    csv << "lon,lat,post_mean,post_sd,q025,q975,pointwise_reject,simultaneous_avoid,bonferroni_reject\n";
    avoid << "lon,lat,post_mean,lower,upper\n";
    Json features = Json::array();
    for (int i = 0; i < n; ++i) {
      const CellConstants& k = constants[i];
      const double mean = rescale_trend(marginals.mean(i), k);
      const double sd = rescale_trend(marginals.sd(i), k);
      const double q025 = rescale_trend(interval95.lower[i], k);
      const double q975 = rescale_trend(interval95.upper[i], k);
      csv << format_double(locs[i].x) << ',' << format_double(locs[i].y) << ',' << format_double(mean) << ','
          << format_double(sd) << ',' << format_double(q025) << ',' << format_double(q975) << ','
          << flag(pw.avoid[i]) << ',' << flag(sim.avoid[i]) << ',' << flag(bf.avoid[i]) << '\n';
      if (sim.avoid[i])
        avoid << format_double(locs[i].x) << ',' << format_double(locs[i].y) << ',' << format_double(mean) << ','
              << format_double(rescale_trend(sim.lower[i], k)) << ','
              << format_double(rescale_trend(sim.upper[i], k)) << '\n';
      const double x = locs[i].x, y = locs[i].y;
      const Json ring = Json::array(
          {{x - hx, y - hy}, {x + hx, y - hy}, {x + hx, y + hy}, {x - hx, y + hy}, {x - hx, y - hy}});
      features.push_back(Json{
          {"type", "Feature"},
          {"geometry", {{"type", "Polygon"}, {"coordinates", Json::array({ring})}}},
          {"properties",
           {{"lon", x},
            {"lat", y},
            {"post_mean", mean},
            {"post_sd", sd},
            {"q025", q025},
            {"q975", q975},
            {"pointwise_reject", pw.avoid[i] ? 1 : 0},
            {"simultaneous_avoid", sim.avoid[i] ? 1 : 0},
            {"bonferroni_reject", bf.avoid[i] ? 1 : 0}}}});
    }
    write_text(dir / ("cells_alpha_" + tag + ".csv"), csv.str());
    write_text(dir / ("avoid_alpha_" + tag + ".csv"), avoid.str());
    write_text(dir / ("cells_alpha_" + tag + ".geojson"),
               to_text(Json{{"type", "FeatureCollection"}, {"features", features}}));
    for (const char* stem : {"cells_alpha_", "avoid_alpha_"}) outputs.push_back(stem + tag + ".csv");
    outputs.push_back("cells_alpha_" + tag + ".geojson");

    auto count = [](const BandResult& b) { return std::count(b.avoid.begin(), b.avoid.end(), true); };
    per_alpha.push_back(Json{{"alpha", alpha},
                             {"pointwise", {{"band_rho", pw.band_rho}, {"cells", count(pw)}}},
                             {"simultaneous",
                              {{"band_rho", sim.band_rho},
                               {"coverage", sim.coverage},
                               {"coverage_se", sim.coverage_se},
                               {"cells", count(sim)}}},
                             {"bonferroni", {{"band_rho", bf.band_rho}, {"cells", count(bf)}}}});
  }
  write_text(dir / "bands.json", to_text(Json{{"cells", n},
                                              {"samples", c.samples},
                                              {"seed", c.seed},
                                              {"level", c.level},
                                              {"mixture_components", cells.components.size()},
                                              {"alphas", per_alpha}}));
  outputs.push_back("bands.json");
  record_run(c, "bands", Json{{"samples", c.samples}, {"outputs", outputs}});
}

void run_report(const Config& c, std::ostream& os) {
  const fs::path dir(c.out);
  const Json fit = read_json(dir / "fit.json");
  const Json hyper = read_json(dir / "hyper_posteriors.json");
  std::ostringstream r;
  char line[256];
  try {
    r << "cells " << fit.at("cells").get<int>() << ", years " << fit.at("years")[0].get<int>() << "-"
      << fit.at("years")[1].get<int>() << ", mesh vertices " << fit.at("mesh_vertices").get<int>() << ", "
      << fit.at("grid").at("points").size() << " grid points (" << fit.at("evaluation").get<std::string>()
      << " evaluation)\n\n";
    std::snprintf(line, sizeof line, "%-16s %12s %12s %12s %12s %12s\n", "parameter", "mean", "sd", "q05", "q50",
                  "q95");
    r << line;
    for (const auto& h : hyper.at("parameters")) {
      std::snprintf(line, sizeof line, "%-16s %12.5g %12.5g %12.5g %12.5g %12.5g\n",
                    h.at("name").get<std::string>().c_str(), h.at("mean").get<double>(), h.at("sd").get<double>(),
                    h.at("q05").get<double>(), h.at("q50").get<double>(), h.at("q95").get<double>());
      r << line;
    }
    if (fs::exists(dir / "bands.json")) {
      const Json bands = read_json(dir / "bands.json");
      r << "\ncells excluding " << bands.at("level").get<double>() << " (" << bands.at("samples").get<int>()
        << " joint samples)\n";
      std::snprintf(line, sizeof line, "%-8s %10s %14s %12s %14s\n", "alpha", "pointwise", "simultaneous",
                    "bonferroni", "sim band_rho");
      r << line;
      for (const auto& a : bands.at("alphas")) {
        std::snprintf(line, sizeof line, "%-8g %10d %14d %12d %14.5g\n", a.at("alpha").get<double>(),
                      a.at("pointwise").at("cells").get<int>(), a.at("simultaneous").at("cells").get<int>(),
                      a.at("bonferroni").at("cells").get<int>(),
                      a.at("simultaneous").at("band_rho").get<double>());
        r << line;
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput, dir.string() + ": unexpected run record layout: " + e.what());
  }
  write_text(dir / "report.txt", r.str());
  os << r.str();
}

std::string error_record(const std::string& command, const std::string& error, int exit_code,
                         const std::string& message) {
  return Json{{"command", command}, {"error", error}, {"exit_code", exit_code}, {"message", message}}.dump();
}

std::string error_record(const std::string& command, ErrorCode code, const std::string& message) {
  return error_record(command, std::string(to_string(code)), exit_code(code), message);
}

}  // namespace sttrend
