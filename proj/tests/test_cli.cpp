#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "format.hpp"
#include "json.hpp"

using namespace expander;
using namespace expander::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("expander_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

const std::vector<std::string> kSolve322 = {"solve", "--n", "3", "--p", "2", "--k", "2",
                                            "--epsilon", "0.05", "--radius", "0.5"};

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5e-300");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(format_number(0.2386392846090411)) == 0.2386392846090411);
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("0.01,0.02, 0.05") == std::vector<double>{0.01, 0.02, 0.05});
  CHECK(parse_number_list("").empty());
  CHECK_THROWS_AS(parse_number_list("0.1,,0.2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_number_list("0.1x"), std::invalid_argument);
}

TEST_CASE("params") {
  const Run text = run({"params", "--n", "3", "--p", "2", "--k", "2"});
  CHECK(text.code == 0);
  CHECK(text.out.find("lambda                    2\n") != std::string::npos);
  CHECK(text.out.find("phi0                      1.118") != std::string::npos);
  CHECK(text.out.find("kind                      sink") != std::string::npos);

  const Run json = run({"params", "--n", "15", "--p", "8", "--k", "2", "--json"});
  REQUIRE(json.code == 0);
  const auto doc = nlohmann::json::parse(json.out);
  CHECK(doc["kind"] == "sink");
  CHECK(doc["family"] == "octonion");
  CHECK(doc["origin_eigenvalues"][0] == 1.0);

  const Run spiral = run({"params", "--n", "3", "--p", "2", "--k", "4", "--json"});
  CHECK(spiral.code == 0);
  CHECK(nlohmann::json::parse(spiral.out)["kind"] == "spiral_sink");

  const Run bad = run({"params", "--n", "4", "--p", "2", "--k", "2"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("inadmissible") != std::string::npos);
  CHECK(run({"params", "--n", "3", "--p", "2", "--k", "3"}).code == 2);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"solve", "--n", "3", "--p", "2", "--k", "2", "--radius", "0.5"}).code == 1);
  CHECK(run({"solve", "--n", "3", "--p", "2", "--k", "2", "--epsilon", "0.05", "--radius",
             "0.5", "--format", "xml"})
            .code == 1);
  CHECK(run({"solve", "--n", "3", "--p", "2", "--k", "2", "--epsilon", "0.05", "--radius", "0"})
            .code == 1);
  CHECK(run({"verify", "--n", "3"}).code == 1);
  CHECK(run({"verify", "--n", "3", "--p", "2", "--k", "2", "--max-n", "9"}).code == 1);
  CHECK(run({"verify", "--n", "3", "--p", "2", "--k", "2", "--samples", "10"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("solve CSV fixture") {
  const Run csv = run(kSolve322);
  REQUIRE(csv.code == 0);
  const auto lines = split_lines(csv.out);
  REQUIRE(lines.size() > 100);
  CHECK(lines.front() == "r,f,f_r,phi,psi,t");
  CHECK(csv.out.find('\r') == std::string::npos);

  std::size_t data = 1;
  while (data < lines.size() && lines[data][0] != '#') {
    const std::string& line = lines[data];
    int commas = 0;
    for (char c : line) commas += c == ',';
    REQUIRE(commas == 5);
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      std::size_t used = 0;
      std::stod(field, &used);
      CHECK(used == field.size());
    }
    ++data;
  }
  std::vector<std::string> trailer(lines.begin() + data, lines.end());
  auto has_key = [&](const std::string& key) {
    for (const auto& l : trailer) {
      if (l.rfind("# " + key + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const char* key : {"phi_inf", "max_residual", "k_hat", "envelope_ok"}) {
    CHECK_MESSAGE(has_key(key), key);
  }
  CHECK(std::find(trailer.begin(), trailer.end(), "# envelope_ok=true") != trailer.end());
  CHECK(std::find(trailer.begin(), trailer.end(), "# phi_inf=0.2386392846090411") !=
        trailer.end());
}

TEST_CASE("output does not depend on the global locale") {
  const std::string reference = run(kSolve322).out;
  const std::locale previous =
      std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  const std::string comma = run(kSolve322).out;
  std::vector<std::string> json_args = kSolve322;
  json_args.insert(json_args.end(), {"--format", "json"});
  const std::string json = run(json_args).out;
  std::locale::global(previous);
  CHECK(comma == reference);
  CHECK(!validate_profile_json(nlohmann::json::parse(json)).has_value());
}

TEST_CASE("solve JSON validates and round-trips") {
  std::vector<std::string> args = kSolve322;
  args.insert(args.end(), {"--format", "json"});
  const Run res = run(args);
  REQUIRE(res.code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  const auto problem = validate_profile_json(doc);
  CHECK_MESSAGE(!problem.has_value(), problem.value_or(""));

  const auto again = nlohmann::json::parse(doc.dump());
  CHECK(again == doc);
  CHECK(doc["diagnostics"]["phi_inf"].get<double>() == 0.2386392846090411);
  CHECK(doc["columns"].size() == 6);

  // Same numbers as the CSV table.
  const auto lines = split_lines(run(kSolve322).out);
  std::istringstream first_row(lines[1]);
  std::string r_text;
  std::getline(first_row, r_text, ',');
  CHECK(std::stod(r_text) == doc["rows"][0][0].get<double>());

  auto broken = doc;
  broken["diagnostics"].erase("k_hat");
  CHECK(validate_profile_json(broken).has_value());
  broken = doc;
  broken["rows"][3] = {1.0, 2.0};
  CHECK(validate_profile_json(broken).has_value());
  broken = doc;
  broken["schema"] = "something-else";
  CHECK(validate_profile_json(broken).has_value());
}

TEST_CASE("solver failures exit 3, unsupported types exit 2") {
  const Run failed = run({"solve", "--n", "3", "--p", "2", "--k", "2", "--epsilon", "0.05",
                          "--radius", "100"});
  CHECK(failed.code == 3);
  CHECK(failed.err.find("error: BracketFailure") == 0);
  const Run spiral = run({"solve", "--n", "3", "--p", "2", "--k", "4", "--epsilon", "0.05",
                          "--radius", "0.5"});
  CHECK(spiral.code == 2);
  CHECK(spiral.err.find("UnsupportedCase") != std::string::npos);
  CHECK(run({"verify", "--n", "3", "--p", "2", "--k", "4"}).code == 2);
}

TEST_CASE("verify") {
  const Run res = run({"verify", "--n", "3", "--p", "2", "--k", "2"});
  CHECK(res.code == 0);
  CHECK(res.out.find("result      pass") != std::string::npos);
  CHECK(res.out.find("radius=0.25") != std::string::npos);
}

TEST_CASE("sweep keeps input order and ignores --jobs") {
  const std::vector<std::string> base = {"sweep", "--n", "3", "--p", "2", "--k", "2",
                                         "--eps-list", "0.05,0.01,0.02", "--radius-list",
                                         "0.5,0.4"};
  std::vector<std::string> one = base, four = base;
  one.insert(one.end(), {"--jobs", "1"});
  four.insert(four.end(), {"--jobs", "4"});
  const Run a = run(one);
  const Run b = run(four);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto lines = split_lines(a.out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "eps,R,phi_inf,k_hat,residual,status");
  CHECK(lines[1].rfind("0.05,0.5,", 0) == 0);
  CHECK(lines[2].rfind("0.05,0.4,", 0) == 0);
  CHECK(lines[3].rfind("0.01,0.5,", 0) == 0);
  CHECK(lines[6].rfind("0.02,0.4,", 0) == 0);

  const auto doc = nlohmann::json::parse(
      run({"sweep", "--n", "3", "--p", "2", "--k", "2", "--eps-list", "0.05", "--radius-list",
           "0.5", "--format", "json"})
          .out);
  CHECK(doc["rows"].size() == 1);
  CHECK(doc["rows"][0]["status"] == "ok");
  CHECK(doc["rows"][0]["phi_inf"] == 0.2386392846090411);

  CHECK(run({"sweep", "--n", "3", "--p", "2", "--k", "2", "--eps-list", "", "--radius-list",
             "0.5"})
            .code == 1);
  CHECK(run({"sweep", "--n", "3", "--p", "2", "--k", "2", "--eps-list", "0.1,a",
             "--radius-list", "0.5"})
            .code == 1);
}

TEST_CASE("sweep reports failed rows") {
  const Run res = run({"sweep", "--n", "3", "--p", "2", "--k", "2", "--eps-list", "0.05",
                       "--radius-list", "0.5,100", "--jobs", "2"});
  CHECK(res.code == 3);
  const auto lines = split_lines(res.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].find(",ok") != std::string::npos);
  CHECK(lines[2] == "0.05,100,,,,BracketFailure");
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.command = "sweep";
  m.n = 5;
  m.p = 4;
  m.k = 2;
  m.eps = {0.01, 0.02};
  m.radius = {0.3};
  m.format = "json";
  m.output = "out.json";
  m.solver.t_max = 25.0;
  m.solver.forward.rel = 3e-12;
  m.seed_second = 99;
  m.timestamp = "2026-01-01T00:00:00Z";
  const RunManifest back = manifest_from_json(nlohmann::json::parse(manifest_json(m).dump()));
  CHECK(back.command == m.command);
  CHECK(back.k == 2);
  CHECK(back.eps == m.eps);
  CHECK(back.radius == m.radius);
  CHECK(back.format == "json");
  CHECK(back.solver.t_max == 25.0);
  CHECK(back.solver.forward.rel == 3e-12);
  CHECK(back.seed_second == 99);
  CHECK(manifest_json(back).dump() == manifest_json(m).dump());

  auto broken = nlohmann::json::parse(manifest_json(m).dump());
  broken["tolerances"].erase("M");
  CHECK_THROWS_AS(manifest_from_json(broken), std::invalid_argument);
}

TEST_CASE("replaying a manifest reproduces the output byte for byte") {
  const fs::path dir = scratch_dir();
  for (const char* format : {"csv", "json"}) {
    const fs::path first = dir / (std::string("profile.") + format);
    const fs::path second = dir / (std::string("replayed.") + format);
    std::vector<std::string> args = kSolve322;
    args.insert(args.end(), {"--format", format, "--out", first.string()});
    REQUIRE(run(args).code == 0);
    const fs::path manifest = manifest_path_for(first.string());
    REQUIRE(fs::exists(manifest));
    const auto doc = nlohmann::json::parse(slurp(manifest));
    CHECK(doc["command"] == "solve");
    CHECK(doc["epsilon"][0] == 0.05);
    CHECK(doc.contains("timestamp"));

    REQUIRE(run({"replay", "--manifest", manifest.string(), "--out", second.string()}).code == 0);
    CHECK(slurp(first) == slurp(second));
    CHECK(fs::exists(manifest_path_for(second.string())));
  }

  const fs::path sweep_out = dir / "sweep.csv";
  REQUIRE(run({"sweep", "--n", "5", "--p", "4", "--k", "2", "--eps-list", "0.01,0.02",
               "--radius-list", "0.3", "--jobs", "2", "--out", sweep_out.string()})
              .code == 0);
  const fs::path replayed = dir / "sweep_replayed.csv";
  REQUIRE(run({"replay", "--manifest", manifest_path_for(sweep_out.string()), "--out",
               replayed.string(), "--jobs", "1"})
              .code == 0);
  CHECK(slurp(sweep_out) == slurp(replayed));

  const fs::path junk = dir / "junk.json";
  std::ofstream(junk) << "{\"schema\": 1}";
  CHECK(run({"replay", "--manifest", junk.string()}).code == 1);
  CHECK(run({"replay", "--manifest", (dir / "missing.json").string()}).code == 1);
  fs::remove_all(dir);
}
