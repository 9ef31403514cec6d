#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <optional>

#include "sttrend/config.hpp"
#include "sttrend/error.hpp"

using namespace sttrend;
namespace fs = std::filesystem;

namespace {

std::optional<ErrorCode> code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("defaults") {
  const Config c = parse_config("");
  CHECK(c.season == Season::JJA);
  CHECK(c.completeness == 0.8);
  CHECK(c.alphas == std::vector<double>{0.05, 0.01});
  CHECK(c.samples == 50000);
  CHECK(c.seed == 1);
  CHECK_FALSE(c.range0.has_value());
  CHECK(c.truth.phi == 0.4);
  CHECK(c.truth.range_xi == 15.0);
}

TEST_CASE("values and relative paths") {
  const Config c = parse_config(
      "[data]\nanomalies = in/a.csv\nconstants = /abs/c.csv\n"
      "[prepare]\nseason = DJF\nupscale = 2\n"
      "[mesh]\nextension = 4.5\n"
      "[bands]\nalpha = 0.1, 0.05\nsamples = 2000\n"
      "[run]\nseed = 42\nout = results\n"
      "[simulate]\nphi = -0.2\nnoise = false\n",
      "/base/dir");
  CHECK(c.anomalies == "/base/dir/in/a.csv");
  CHECK(c.constants == "/abs/c.csv");
  CHECK(c.season == Season::DJF);
  CHECK(c.upscale == 2);
  CHECK(c.extension.value() == 4.5);
  CHECK_FALSE(c.max_edge_inner.has_value());
  CHECK(c.alphas == std::vector<double>{0.1, 0.05});
  CHECK(c.samples == 2000);
  CHECK(c.seed == 42);
  CHECK(c.out == "/base/dir/results");
  CHECK(c.truth.phi == -0.2);
  CHECK_FALSE(c.simulation.noise);
  CHECK(c.hash == fnv1a(c.text));
}

TEST_CASE("invalid configs") {
  CHECK(code_of("[nope]\nx = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[run]\nsede = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[run]\nseed = many\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[bands]\nalpha = 1.5\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[bands]\nalpha = 0.05 x\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[prepare]\ncompleteness = 0\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[prepare]\nseason = winter\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[mesh]\nextension = -1\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[simulate]\nphi = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[simulate]\nnoise = maybe\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("stray = 1\n") == ErrorCode::ConfigInvalid);
  CHECK(code_of("[run\n") == ErrorCode::ConfigInvalid);
}

TEST_CASE("loading from disk") {
  const fs::path dir = fs::temp_directory_path() / "sttrend_config";
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "[data]\nanomalies = a.csv\n";
  const Config c = load_config((dir / "run.ini").string());
  CHECK(c.anomalies == (dir / "a.csv").string());
  CHECK(c.path == (dir / "run.ini").string());
  try {
    load_config((dir / "none.ini").string());
    FAIL("missing config accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InputMissing);
    CHECK(std::string(e.what()).find("none.ini") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("hash is FNV-1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}
