#include "sttrend/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sttrend/error.hpp"

namespace sttrend {

namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"data", {"daily", "anomalies", "constants"}},
      {"prepare", {"season", "completeness", "upscale"}},
      {"mesh", {"extension", "max_edge_inner", "max_edge_outer", "cutoff", "min_angle", "max_vertices"}},
      {"priors", {"range0"}},
      {"inference",
       {"tol", "initial_step", "max_evaluations", "polish_min_step", "hessian_step", "radius_factor", "prune"}},
      {"bands", {"alpha", "samples", "tol", "level"}},
      {"run", {"seed", "out"}},
      {"simulate",
       {"noise_variance", "phi", "sigma2_beta", "range_beta", "sigma2_xi", "range_xi", "nx", "ny", "x0", "y0",
        "spacing", "first_year", "last_year", "noise", "residual", "beta0_sd"}},
  };
  return keys;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string base) : tree_(tree), base_(std::move(base)) {}

  std::optional<std::string> raw(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return boost::algorithm::trim_copy(*v);
  }

  template <class T>
  void get(const std::string& key, T& target) const {
    if (auto v = raw(key)) target = convert<T>(key, *v);
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& target) const {
    if (auto v = raw(key)) target = convert<T>(key, *v);
  }

  void path(const std::string& key, std::string& target) const {
    if (auto v = raw(key)) {
      if (v->empty()) invalid(key + " is empty");
      const fs::path p(*v);
      target = p.is_absolute() ? p.string() : (fs::path(base_) / p).lexically_normal().string();
    }
  }

 private:
  template <class T>
  static T convert(const std::string& key, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      const std::string l = boost::algorithm::to_lower_copy(v);
      if (l == "true" || l == "1" || l == "yes") return true;
      if (l == "false" || l == "0" || l == "no") return false;
      invalid(key + ": expected a boolean, got '" + v + "'");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else {
      std::istringstream in(v);
      T out{};
      in >> out;
      if (in.fail() || !in.eof()) invalid(key + ": cannot parse '" + v + "'");
      return out;
    }
  }

  const pt::ptree& tree_;
  std::string base_;
};

void require(bool ok, const std::string& what) {
  if (!ok) invalid(what);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Config parse_config(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid(std::string("malformed config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || !body.data().empty()) invalid("unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key)) invalid("unknown key '" + key + "' in [" + section + "]");
  }

  Config c;
  c.text = text;
  c.hash = fnv1a(text);
  const Reader r(tree, base_dir);

  r.path("data.daily", c.daily);
  r.path("data.anomalies", c.anomalies);
  r.path("data.constants", c.constants);

  std::string season;
  r.get("prepare.season", season);
  if (!season.empty()) c.season = parse_season(season);
  r.get("prepare.completeness", c.completeness);
  r.get("prepare.upscale", c.upscale);
  require(c.completeness > 0.0 && c.completeness <= 1.0, "prepare.completeness must be in (0, 1]");
  require(c.upscale >= 1, "prepare.upscale must be >= 1");

  r.get("mesh.extension", c.extension);
  r.get("mesh.max_edge_inner", c.max_edge_inner);
  r.get("mesh.max_edge_outer", c.max_edge_outer);
  r.get("mesh.cutoff", c.cutoff);
  r.get("mesh.min_angle", c.min_angle);
  r.get("mesh.max_vertices", c.max_vertices);
  for (const auto& v : {c.extension, c.max_edge_inner, c.max_edge_outer})
    require(!v || *v > 0.0, "mesh lengths must be positive");
  require(c.cutoff >= 0.0, "mesh.cutoff must be >= 0");

  r.get("priors.range0", c.range0);
  require(!c.range0 || *c.range0 > 0.0, "priors.range0 must be positive");

  r.get("inference.tol", c.mode.tol);
  r.get("inference.initial_step", c.mode.initial_step);
  r.get("inference.max_evaluations", c.mode.max_evaluations);
  r.get("inference.polish_min_step", c.mode.polish_min_step);
  r.get("inference.hessian_step", c.grid.hessian_step);
  r.get("inference.radius_factor", c.grid.radius_factor);
  r.get("inference.prune", c.grid.prune);
  require(c.mode.tol > 0.0, "inference.tol must be positive");
  require(c.grid.hessian_step >= 0.0, "inference.hessian_step must be >= 0");
  require(c.grid.radius_factor > 1.0, "inference.radius_factor must exceed 1");

  if (auto a = r.raw("bands.alpha")) {
    c.alphas.clear();
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *a, boost::is_any_of(", "), boost::token_compress_on);
    for (const auto& p : parts) {
      if (p.empty()) continue;
      std::istringstream in(p);
      double v = 0;
      in >> v;
      require(!in.fail() && in.eof() && v > 0.0 && v < 1.0, "bands.alpha entries must be in (0, 1)");
      c.alphas.push_back(v);
    }
    require(!c.alphas.empty(), "bands.alpha is empty");
  }
  r.get("bands.samples", c.samples);
  r.get("bands.tol", c.band_tol);
  r.get("bands.level", c.level);
  require(c.samples >= 1, "bands.samples must be positive");
  require(c.band_tol > 0.0, "bands.tol must be positive");

  r.get("run.seed", c.seed);
  if (auto out = r.raw("run.out")) {
    c.out = *out;
    r.path("run.out", c.out);
  }

  r.get("simulate.noise_variance", c.truth.noise_variance);
  r.get("simulate.phi", c.truth.phi);
  r.get("simulate.sigma2_beta", c.truth.sigma2_beta);
  r.get("simulate.range_beta", c.truth.range_beta);
  r.get("simulate.sigma2_xi", c.truth.sigma2_xi);
  r.get("simulate.range_xi", c.truth.range_xi);
  r.get("simulate.nx", c.nx);
  r.get("simulate.ny", c.ny);
  r.get("simulate.x0", c.x0);
  r.get("simulate.y0", c.y0);
  r.get("simulate.spacing", c.spacing);
  r.get("simulate.first_year", c.first_year);
  r.get("simulate.last_year", c.last_year);
  r.get("simulate.noise", c.simulation.noise);
  r.get("simulate.residual", c.simulation.residual);
  r.get("simulate.beta0_sd", c.simulation.beta0_sd);
  require(c.nx >= 1 && c.ny >= 1 && c.nx * c.ny >= 3, "simulate grid needs at least 3 cells");
  require(c.spacing > 0.0, "simulate.spacing must be positive");
  require(c.last_year > c.first_year, "simulate years must span at least two years");
  require(std::abs(c.truth.phi) < 1.0, "simulate.phi must be in (-1, 1)");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InputMissing, "cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const fs::path p(path);
  Config c = parse_config(buf.str(), p.has_parent_path() ? p.parent_path().string() : ".");
  c.path = path;
  return c;
}

}  // namespace sttrend
