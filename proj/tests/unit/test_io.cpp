#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "vp1d/errors.hpp"
#include "vp1d/io.hpp"

using namespace vp1d;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vp1d_io_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> problems_of(const nlohmann::json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("real formatting round-trips") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-2.5e-300) == "-2.5e-300");
  CHECK(format_real(1.0 / 3.0) == "0.33333333333333331");
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-17, 0.0}) CHECK(std::stod(format_real(x)) == x);
}

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("default config and echo") {
  const auto config = parse_config(nlohmann::json::object());
  CHECK(config.grid.x_count == 401);
  CHECK(config.perturbation_amplitude == 0.05);
  const auto echo = config_to_json(config);
  CHECK(echo.begin().key() == "W");
  CHECK(echo.size() == 22);
  // the echo parses back to the same parameters
  const auto again = parse_config(nlohmann::json::parse(echo.dump()));
  CHECK(config_to_json(again) == echo);
}

TEST_CASE("config overrides") {
  const auto config = parse_config(nlohmann::json{
      {"Nx", 101}, {"Nv", 33}, {"Nt", 11}, {"A_g", 0.1}, {"tail", "zero"}, {"resolutions", {{51, 17, 6}, {101, 33, 11}}}});
  CHECK(config.grid.x_count == 101);
  CHECK(config.tail == TailMode::Zero);
  REQUIRE(config.resolutions.size() == 2);
  CHECK(config.resolutions[1].nv == 33);
  const auto grid = make_grid(config, config.resolutions[0]);
  CHECK(grid.nx() == 51);
  CHECK(grid.t().end() == config.grid.time_horizon);
  CHECK(make_solver_options(config).tail == TailMode::Zero);
}

TEST_CASE("config errors are aggregated") {
  const auto problems = problems_of(nlohmann::json{{"Nx", 100}, {"Vmax", 0.5}, {"bogus", 1}, {"tol", "small"}});
  CHECK(problems.size() == 4);
  CHECK(problems_of(nlohmann::json{{"extend_delta", 0.013}}).size() == 1);
  CHECK(problems_of(nlohmann::json{{"resolutions", {{3, 3}}}}).size() == 1);
  CHECK(problems_of(nlohmann::json{{"tail", "linear"}}).size() == 1);
  CHECK(problems_of(nlohmann::json{{"write_solution", 1}}).size() == 1);
  CHECK(problems_of(nlohmann::json{{"Nt", -3}}).size() == 1);
  CHECK_THROWS_AS(parse_config(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("artifact directory and manifest") {
  const auto dir = scratch("manifest");
  {
    ArtifactDir out(dir);
    out.write("a/b.txt", "abc");
    out.write_json("c.json", ojson{{"k", 1}});
    out.write_manifest("manifest.json", ojson{{"parameters", ojson{{"x", 2}}}});
    REQUIRE(out.entries().size() == 2);
    CHECK(out.entries()[0].sha256 == sha256_hex("abc"));
    CHECK(out.entries()[0].bytes == 3);
  }
  const auto manifest = read_manifest(dir);
  CHECK(manifest.parameters["x"] == 2);
  REQUIRE(manifest.files.size() == 2);
  CHECK(manifest.files[0].path == "a/b.txt");
  fs::remove(dir / "a/b.txt");
  CHECK_THROWS_AS(read_manifest(dir), MissingArtifact);
  CHECK_THROWS_AS(read_manifest(dir / "missing"), MissingArtifact);
  fs::remove_all(dir);
  CHECK_THROWS_AS(ArtifactDir("/proc/vp1d_forbidden").write("x", "y"), IoFailure);
}

TEST_CASE("solution files round-trip exactly") {
  const auto& run = testing::small_run();
  const auto& sol = run.solution;
  const auto data = testing::small_data(sol.grid);
  const auto dir = scratch("solution");
  ArtifactDir out(dir);
  write_solution_artifacts(out, sol, data, {run.trace}, true);

  const auto loaded = load_solution(dir, sol.grid, data, TailMode::PowerLaw);
  CHECK(loaded.f == sol.f);
  for (std::size_t m = 0; m < sol.grid.nt(); ++m) CHECK(loaded.density[m].rho == sol.density[m].rho);
  const auto table = read_field_csv(dir / field_file(sol.grid.nt() - 1));
  CHECK(table.x.size() == sol.grid.nx());
  CHECK(table.rho == sol.density.back().rho);
  CHECK(table.E == sol.field_at(sol.grid.nt() - 1).E);
  CHECK(solution_file(7) == "solution/f_0007.csv");
  CHECK(field_file(12) == "fields/field_0012.csv");

  const auto trace = trace_json(run.trace);
  CHECK(trace["iterations"] == run.trace.iterations);
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_solution(dir, sol.grid, data, TailMode::PowerLaw), MissingArtifact);
  CHECK_THROWS_AS(read_field_csv(dir / "fields/field_0000.csv"), MissingArtifact);
}

TEST_CASE("malformed field file") {
  const auto dir = scratch("malformed");
  fs::create_directories(dir);
  std::ofstream(dir / "f.csv") << "x,rho,E\n1,2\n";
  CHECK_THROWS_AS(read_field_csv(dir / "f.csv"), InvalidProfile);
  fs::remove_all(dir);
}

}
