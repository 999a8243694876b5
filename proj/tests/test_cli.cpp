#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "persuade/io.hpp"

namespace fs = std::filesystem;
using persuade::read_text_file;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "persuade");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = persuade::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "persuade_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string write(const std::string& name, const std::string& text) {
  const auto p = dir() / name;
  persuade::write_text_file_atomic(p, text);
  return p.string();
}

std::string canon_file() {
  return write("canon.json", R"({"lambda0": 1, "lambda1": 1, "r": 1,
    "cuts": [0, 0.2, 0.4, 0.6, 0.8, 1], "levels": [0, 0.5, 0.8, 0.95, 1.0]})");
}
std::string jump_file() {
  return write("jump.json", R"({"lambda0": 1, "lambda1": 1, "r": 1, "cuts": [0, 0.7, 1], "levels": [0, 1]})");
}
std::string flat_file() {
  return write("flat.json", R"({"lambda0": 1, "lambda1": 1, "r": 1, "cuts": [0, 1], "levels": [0.3]})");
}

std::vector<std::vector<std::string>> csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string out_path(const std::string& name) { return (dir() / name).string(); }

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == persuade::cli::kUsage);
  CHECK(run({"frobnicate"}).code == persuade::cli::kUsage);
  CHECK(run({"validate"}).code == persuade::cli::kUsage);
  CHECK(run({"validate", "--config", canon_file(), "--bogus"}).code == persuade::cli::kUsage);
  CHECK(run({"--help"}).code == persuade::cli::kOk);
}

TEST_CASE("validate") {
  const auto ok = run({"validate", "--config", canon_file()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("p*=0.5\n") != std::string::npos);
  CHECK(ok.out.find("mu=0.5\n") != std::string::npos);
  CHECK(ok.out.find("m=2\n") != std::string::npos);
  CHECK(ok.out.find("m'=3\n") != std::string::npos);

  const auto bad = run({"validate", "--config",
                        write("bad.json", R"({"lambda0":1,"lambda1":1,"r":1,"cuts":[0,0.3,0.6,1],"levels":[0,0.1,1]})")});
  CHECK(bad.code == persuade::cli::kValidation);
  CHECK(bad.err.find("EnvelopeViolation") != std::string::npos);
  CHECK(bad.err.find("0.3") != std::string::npos);

  const auto extra = run({"validate", "--config",
                          write("extra.json", R"({"lambda0":1,"lambda1":1,"r":1,"cuts":[0,1],"levels":[1],"note":"x"})")});
  CHECK(extra.code == persuade::cli::kValidation);

  CHECK(run({"validate", "--config", out_path("missing.json")}).code == persuade::cli::kIo);
}

TEST_CASE("solve writes JSON, CSV and manifest deterministically") {
  const auto out = out_path("canon_solution.json");
  const auto first = run({"solve", "--config", canon_file(), "--out", out, "--samples", "1001"});
  REQUIRE(first.code == 0);
  CHECK(first.out.find("violations=0") != std::string::npos);
  const auto json1 = read_text_file(out);
  const auto csv1 = read_text_file(out_path("canon_solution.csv"));
  const auto manifest1 = nlohmann::json::parse(read_text_file(out_path("canon_solution.manifest.json")));

  bool found = false;
  for (const auto& row : csv(out_path("canon_solution.csv"))) {
    if (row[0] == "0.5") {
      CHECK(std::stod(row[3]) == doctest::Approx(0.875).epsilon(1e-14));
      found = true;
    }
  }
  CHECK(found);

  REQUIRE(run({"solve", "--config", canon_file(), "--out", out, "--samples", "1001"}).code == 0);
  CHECK(read_text_file(out) == json1);
  CHECK(read_text_file(out_path("canon_solution.csv")) == csv1);
  const auto manifest2 = nlohmann::json::parse(read_text_file(out_path("canon_solution.manifest.json")));
  CHECK(manifest1["config_sha256"] == manifest2["config_sha256"]);
  CHECK(manifest1["config_sha256"].get<std::string>().size() == 64);
  CHECK(manifest1["command"] == "solve");
  CHECK(manifest1["parameters"]["samples"] == "1001");
  CHECK(manifest1.contains("started_at"));
  CHECK(manifest1.contains("tool_version"));
}

TEST_CASE("solve on the single jump and flat instances") {
  const auto out = out_path("jump_solution.json");
  REQUIRE(run({"solve", "--config", jump_file(), "--out", out}).code == 0);
  CHECK(nlohmann::json::parse(read_text_file(out))["cutoffs"].empty());

  const auto fout = out_path("flat_solution.json");
  REQUIRE(run({"solve", "--config", flat_file(), "--out", fout, "--samples", "21"}).code == 0);
  const auto rows = csv(out_path("flat_solution.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "0.3");
}

TEST_CASE("oracle") {
  const auto out = out_path("canon_oracle.csv");
  const auto r = run({"oracle", "--config", canon_file(), "--delta", "1e-3", "--grid-gap", "2.5e-4", "--tol", "1e-6", "--out", out});
  REQUIRE(r.code == 0);
  const auto rows = csv(out);
  CHECK(rows[0] == std::vector<std::string>{"belief", "value", "u", "cav_u", "solver_value", "abs_error"});
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, std::stod(rows[i][5]));
  CHECK(worst <= 0.01);
  CHECK(fs::exists(out_path("canon_oracle.manifest.json")));

  const auto flat = out_path("flat_oracle.csv");
  REQUIRE(run({"oracle", "--config", flat_file(), "--delta", "0.01", "--grid-gap", "0.01", "--out", flat}).code == 0);
  const auto frows = csv(flat);
  for (std::size_t i = 1; i < frows.size(); ++i) CHECK(std::stod(frows[i][5]) <= 1e-15);

  CHECK(run({"oracle", "--config", canon_file(), "--delta", "1e-3", "--grid-gap", "0.01", "--max-iter", "3",
             "--out", out_path("short.csv")}).code == persuade::cli::kOracle);
}

TEST_CASE("simulate") {
  const auto out = out_path("sim.json");
  const auto trace = out_path("trace.csv");
  const auto r = run({"simulate", "--config", canon_file(), "--policy", "sigma_star", "--delta", "0.01",
                      "--paths", "200", "--horizon", "500", "--seed", "7", "--p0", "0.5", "--out", out,
                      "--trace", trace, "--trace-paths", "2"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(read_text_file(out));
  CHECK(doc["n_paths"] == 200);
  CHECK(doc["config"]["seed"] == 7);
  CHECK(csv(trace).size() == 1 + 2 * 500);
  CHECK(fs::exists(out_path("sim.calibration.csv")));
  CHECK(fs::exists(out_path("sim.manifest.json")));

  // byte-identical on rerun
  const auto first = read_text_file(out);
  REQUIRE(run({"simulate", "--config", canon_file(), "--policy", "sigma_star", "--delta", "0.01",
               "--paths", "200", "--horizon", "500", "--seed", "7", "--p0", "0.5", "--out", out,
               "--trace", trace, "--trace-paths", "2"}).code == 0);
  CHECK(read_text_file(out) == first);

  for (const char* name : {"myopic", "slide_only", "full_disclosure"}) {
    CHECK(run({"simulate", "--config", canon_file(), "--policy", name, "--paths", "20", "--horizon", "100",
               "--out", out_path("sim2.json")}).code == 0);
  }

  // policy from a solution file
  REQUIRE(run({"solve", "--config", canon_file(), "--out", out_path("pol.json")}).code == 0);
  CHECK(run({"simulate", "--config", canon_file(), "--policy", out_path("pol.json"), "--paths", "20",
             "--horizon", "100", "--out", out_path("sim3.json")}).code == 0);
  CHECK(run({"simulate", "--config", canon_file(), "--policy", out_path("nope.json"), "--paths", "20",
             "--out", out_path("sim4.json")}).code == persuade::cli::kIo);
  CHECK(run({"simulate", "--config", canon_file(), "--paths", "20", "--horizon", "10", "--max-tail", "1e-6",
             "--out", out_path("sim5.json")}).code == persuade::cli::kSim);
}

TEST_CASE("sweep") {
  const auto out = out_path("sweep.csv");
  REQUIRE(run({"sweep", "--config", canon_file(), "--deltas", "0.1,0.03", "--grid-gap", "1e-3", "--out", out}).code == 0);
  const auto rows = csv(out);
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[2][1]) <= 1.1 * std::stod(rows[1][1]));
  CHECK(std::stod(rows[2][2]) <= 1.1 * std::stod(rows[1][2]));

  REQUIRE(run({"sweep", "--config", canon_file(), "--deltas", "0.05", "--grid-gap", "1e-3", "--out", out}).code == 0);
  CHECK(csv(out).size() == 2);

  REQUIRE(run({"sweep", "--config", flat_file(), "--deltas", "0.1,0.01", "--grid-gap", "1e-2", "--out", out}).code == 0);
  for (const auto& row : csv(out)) {
    if (row[0] == "delta") continue;
    CHECK(std::stod(row[1]) <= 1e-15);
    CHECK(std::stod(row[2]) <= 1e-15);
  }
}

TEST_CASE("compare") {
  const auto out = out_path("compare.csv");
  REQUIRE(run({"compare", "--config", canon_file(), "--policy", "sigma_star,slide_only", "--points", "0.3",
               "--delta", "0.01", "--paths", "500", "--horizon", "1500", "--grid-gap", "2e-3", "--out", out}).code == 0);
  const auto rows = csv(out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "sigma_star");
  CHECK(rows[1][6] == "0");
}

TEST_CASE("installed binary returns the same exit codes") {
  const std::string exe = PERSUADE_CLI_EXE;
  auto code = [&](const std::string& args) {
    const int status = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(code("validate --config " + canon_file()) == 0);
  CHECK(code("validate --config " + out_path("missing.json")) == 3);
  CHECK(code("") == 1);
}
