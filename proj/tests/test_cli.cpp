#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli.hpp"

using nlohmann::json;
using std::numbers::pi;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = minpart::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("minpart_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

}  // namespace

TEST_CASE("bounds") {
  auto r = run({"bounds", "--k", "3"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["bS_lower"].get<double>() == doctest::Approx(0.33567).epsilon(2e-5));
  CHECK(j["bk_even"].is_null());

  r = run({"bounds", "--k", "4"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["bk_even"].get<double>() == 0.5);

  r = run({"bounds", "--k", "1"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("squarewell") {
  auto r = run({"squarewell", "--h", "4"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["rho1"].get<double>() == doctest::Approx(0.786).epsilon(1e-3));
  CHECK(j["xi1"].get<double>() == doctest::Approx(4.94).epsilon(1e-3));

  r = run({"squarewell", "--h", "2"});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["mu1_fd"].get<double>() >= j["xi1"].get<double>() - 1e-3);
  CHECK(j["xi1"].get<double>() >= j["mu1_lower_closed"].get<double>());

  CHECK(run({"squarewell", "--h", "0"}).code == 2);
}

TEST_CASE("spectrum") {
  auto r = run({"spectrum", "--a", "1", "--b", "1", "--count", "3"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  REQUIRE(j["analytic"].size() == 3);
  CHECK(j["analytic"][1]["value"].get<double>() == doctest::Approx(4 * pi * pi));
  CHECK(j["analytic"][1]["multiplicity"] == 4);
  CHECK(run({"spectrum", "--b", "-1"}).code == 2);
}

TEST_CASE("config file precedence and validation") {
  const auto dir = scratch_dir("config");
  const auto cfg = write_file(dir / "c.json", R"({"k": 4})");
  auto r = run({"bounds", "--config", cfg});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["k"] == 4);
  // Flags win over the file.
  r = run({"bounds", "--config", cfg, "--k", "5"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["k"] == 5);

  const auto unknown = write_file(dir / "u.json", R"({"k": 4, "colour": "red"})");
  r = run({"bounds", "--config", unknown});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);

  const auto wrong_type = write_file(dir / "t.json", R"({"k": "three"})");
  CHECK(run({"bounds", "--config", wrong_type}).code == 2);
  CHECK(run({"bounds", "--config", (dir / "missing.json").string()}).code == 2);
  const auto not_object = write_file(dir / "a.json", "[1, 2]");
  CHECK(run({"bounds", "--config", not_object}).code == 2);

  const auto sweep_cfg = write_file(dir / "s.json", R"({"b_min": 0.5, "steps": 1, "starts": 0, "p_schedule": [1, 2]})");
  r = run({"sweep", "--config", sweep_cfg, "--resolution", "64"});
  REQUIRE(r.code == 0);
  CHECK(split_lines(r.out).size() == 2);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"bounds", "--k", "x"}).code == 2);
  auto r = run({"sweep", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("multistart_energy") != std::string::npos);
}

TEST_CASE("sweep rows") {
  auto r = run({"sweep", "--k", "3", "--b-min", "0.3", "--b-max", "0.5", "--steps", "3", "--starts", "0",
                "--resolution", "64"});
  REQUIRE(r.code == 0);
  const auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "b,strip_energy,hex_lambda1,multistart_energy,error");
  CHECK(lines[1] == "0.3,88.8264396098,,,");  // below b_H(3): no hexagon
  CHECK(lines[2].rfind("0.4,88.8264396098,", 0) == 0);
  CHECK(lines[3].rfind("0.5,", 0) == 0);
  // The hexagon beats strips only well above the transition; at b = 0.5 it is worse.
  const double hex = std::stod(lines[3].substr(lines[3].find(',', 4) + 1));
  CHECK(hex > 9 * pi * pi);

  CHECK(run({"sweep", "--k", "2"}).code == 2);
  CHECK(run({"sweep", "--b-min", "0.5", "--b-max", "1.2"}).code == 2);
}

TEST_CASE("sweep is deterministic and independent of jobs") {
  const std::vector<std::string> base = {"sweep", "--k", "3", "--b-min", "0.9", "--b-max", "1.0", "--steps", "2",
                                         "--starts", "2", "--resolution", "32", "--p-schedule", "1,4",
                                         "--C-start", "10000"};
  auto a = run(base);
  auto with_jobs = base;
  with_jobs.insert(with_jobs.end(), {"--jobs", "2"});
  auto b = run(with_jobs);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto lines = split_lines(a.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].rfind("0.9,", 0) == 0);
  CHECK(lines[2].rfind("1,", 0) == 0);
}

TEST_CASE("tiling and paircompat") {
  const auto dir = scratch_dir("tiling");
  auto r = run({"tiling", "--kind", "hexagons", "--k", "3", "--b", "0.8", "--resolution", "64", "--labels",
                (dir / "hex.pgm").string()});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["cells"].size() == 3);
  CHECK(j["check"]["max_vertex_degree"] == 3);
  CHECK(j["cell_lambda1"].size() == 3);
  CHECK(std::filesystem::exists(dir / "hex.pgm"));

  CHECK(run({"tiling", "--kind", "hexagons", "--b", "0.3"}).code == 2);
  CHECK(run({"tiling", "--kind", "triangles"}).code == 2);

  r = run({"paircompat", "--kind", "strips", "--k", "2", "--b", "0.5", "--resolution", "64"});
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["max_gap"].get<double>() < 0.01);
  CHECK(j["verdict"] == "pair compatible");

  CHECK(run({"paircompat", "--resolution", "10"}).code == 2);
}

TEST_CASE("optimize writes its artifacts") {
  const auto dir = scratch_dir("optimize");
  auto r = run({"optimize", "--k", "2", "--b", "0.5", "--resolution", "32", "--starts", "1", "--p-schedule",
                "1,4", "--output-dir", dir.string()});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["k"] == 2);
  CHECK(j["lambdas"].size() == 2);
  CHECK(j["bipartite"] == true);
  CHECK(j["exact_energy"].get<double>() >= j["relaxed_energy"].get<double>());
  for (const char* f : {"labels.pgm", "labels.csv", "report.json", "trace.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::ifstream trace(dir / "trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == "C,p,iteration,energy,step,degenerate");

  CHECK(run({"optimize", "--k", "1"}).code == 2);
  CHECK(run({"optimize", "--starts", "0"}).code == 2);
}
