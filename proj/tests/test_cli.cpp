#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gaf/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result gaflab(std::vector<std::string> args) {
  args.insert(args.begin(), "gaflab");
  std::ostringstream out, err;
  const int code = gaf::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "gaflab_cli_test";
  fs::create_directories(d);
  return d;
}

std::string prefix(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("kernel prints the closed form and the truncated value") {
  const Result r = gaflab({"kernel", "--model", "fock", "--p", "7", "--z", "1.3,-0.4", "--out", prefix("kernel")});
  CHECK(r.code == 0);
  CHECK(r.out.find("closed_form=7 ") != std::string::npos);
  const json rep = json::parse(slurp(prefix("kernel") + ".report.json"));
  CHECK(rep["provenance"]["version"].is_string());
  CHECK(rep["table"][0]["closed_form"].get<double>() == 7.0);
  CHECK(std::abs(rep["table"][0]["truncated"].get<double>() - 7.0) < 1e-10);
  const std::string csv = slurp(prefix("kernel") + ".table.csv");
  CHECK(csv.rfind("re,im,closed_form,truncated,order,abs_difference\n1.3,-0.40000000000000002,7,", 0) == 0);
}

TEST_CASE("configuration errors exit with 2") {
  Result r = gaflab({"kernel", "--p", "7"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("gaflab: error: config.missing_field: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = gaflab({"kernel", "--z", "1,0", "--frobnicate", "3"});
  CHECK(r.code == 2);
  CHECK(r.err.find("config.unknown_key") != std::string::npos);

  const std::string cfg = prefix("bad.json");
  std::ofstream(cfg) << R"({"trials": 10, "colour": "red"})";
  r = gaflab({"linstat", "--config", cfg});
  CHECK(r.code == 2);
  CHECK(r.err.find("config.unknown_key") != std::string::npos);

  std::ofstream(cfg) << R"({"command": "hole", "trials": 10})";
  CHECK(gaflab({"linstat", "--config", cfg}).code == 2);
  std::ofstream(cfg) << R"({"trials": "ten"})";
  CHECK(gaflab({"linstat", "--config", cfg}).code == 2);
  CHECK(gaflab({"kernel", "--z", "1;0"}).code == 2);
  CHECK(gaflab({"hole", "--trials", "-3"}).code == 2);
  CHECK(gaflab({"hole", "--hole-mode", "sideways"}).code == 2);
  CHECK(gaflab({}).code == 2);
  CHECK(gaflab({"warp"}).code == 2);
}

TEST_CASE("I/O failures exit with 4") {
  CHECK(gaflab({"calibrate", "--out", "/nonexistent-dir/x"}).code == 4);
  const Result r = gaflab({"hole", "--config", prefix("missing.json")});
  CHECK(r.code == 4);
  CHECK(r.err.find("io.read_failed") != std::string::npos);
}

TEST_CASE("numeric failures exit with 3 after writing the report") {
  const std::string out = prefix("unresolved");
  fs::remove(out + ".report.json");
  const Result r = gaflab({"hole", "--p-list", "1,25", "--trials", "100", "--out", out});
  CHECK(r.code == 3);
  CHECK(r.err.find("numeric.unresolved") != std::string::npos);
  CHECK(fs::exists(out + ".report.json"));
}

TEST_CASE("dump-config round trip reproduces the report bit for bit") {
  const Result d = gaflab({"linstat", "--trials", "60", "--p-list", "1,2", "--seed", "17", "--dump-config"});
  REQUIRE(d.code == 0);
  const json dumped = json::parse(d.out);
  CHECK(dumped["command"] == "linstat");
  CHECK(dumped["trials"] == 60);
  const std::string cfg = prefix("dumped.json");
  std::ofstream(cfg) << d.out;

  REQUIRE(gaflab({"linstat", "--trials", "60", "--p-list", "1,2", "--seed", "17", "--out", prefix("direct")}).code == 0);
  REQUIRE(gaflab({"linstat", "--config", cfg, "--out", prefix("replay")}).code == 0);
  CHECK(slurp(prefix("direct") + ".report.json") == slurp(prefix("replay") + ".report.json"));
  CHECK(slurp(prefix("direct") + ".table.csv") == slurp(prefix("replay") + ".table.csv"));
}

TEST_CASE("THREADS changes wall-clock only") {
  std::vector<std::string> reports;
  for (const char* t : {"1", "4", "8"}) {
    ::setenv("THREADS", t, 1);
    const std::string out = prefix(std::string("threads") + t);
    REQUIRE(gaflab({"hole", "--p-list", "1,4", "--trials", "1500", "--out", out}).code == 0);
    reports.push_back(slurp(out + ".report.json") + slurp(out + ".table.csv"));
  }
  ::unsetenv("THREADS");
  CHECK(reports[0] == reports[1]);
  CHECK(reports[0] == reports[2]);
  // the flag beats the environment and is equally invisible in the output
  ::setenv("THREADS", "2", 1);
  REQUIRE(gaflab({"hole", "--p-list", "1,4", "--trials", "1500", "--threads", "3", "--out", prefix("flag")}).code == 0);
  ::unsetenv("THREADS");
  CHECK(slurp(prefix("flag") + ".report.json") + slurp(prefix("flag") + ".table.csv") == reports[0]);
}

TEST_CASE("calibrate prints one PASS line per constant") {
  const Result r = gaflab({"calibrate", "--out", prefix("calibrate"), "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS gaussian_b1_origin value=-2") != std::string::npos);
  CHECK(slurp(prefix("calibrate") + ".table.csv").rfind("name,value,expected,tolerance,pass\n", 0) == 0);
}

TEST_CASE("every subcommand runs") {
  const std::vector<std::vector<std::string>> runs{
      {"density", "--model", "disc", "--z", "0.3,0.2"},
      {"sample", "--p", "2", "--count", "2"},
      {"zeros", "--p", "2", "--radius", "1.5", "--count", "3"},
      {"zeros", "--mode", "count", "--radius", "1.5", "--trials", "300"},
      {"toeplitz", "--symbol", "r2_gaussian", "--order", "8"},
      {"wiener", "--draws", "2000", "--order", "12"},
      {"semiclassical", "--p-list", "20,40,80"},
      {"linstat", "--p-list", "1", "--trials", "20"},
      {"tails", "--p-list", "1,2", "--trials", "20"},
      {"densitymap", "--trials", "50", "--sampler", "wiener", "--symbol", R"({"name":"gaussian","a":2})"},
  };
  for (auto args : runs) {
    args.push_back("--out");
    args.push_back(prefix("run"));
    const Result r = gaflab(args);
    INFO(args[0] << ": " << r.err);
    CHECK(r.code == 0);
    const json rep = json::parse(slurp(prefix("run") + ".report.json"));
    CHECK(rep["provenance"]["config"]["command"] == args[0]);
  }
}

TEST_CASE("published schema matches the resolved configs") {
  const json schema = json::parse(slurp(fs::path(GAF_SOURCE_DIR) / "schema" / "config.schema.json"));
  int seen = 0;
  for (const auto& branch : schema["anyOf"]) {
    const std::string cmd = branch["title"];
    std::vector<std::string> args{cmd, "--dump-config"};
    if (cmd == "kernel" || cmd == "density") args.insert(args.end(), {"--z", "0,0"});
    const Result r = gaflab(args);
    REQUIRE(r.code == 0);
    const json d = json::parse(r.out);
    INFO(cmd);
    CHECK(d.size() == branch["properties"].size());
    for (const auto& [k, v] : branch["properties"].items()) {
      CHECK(d.contains(k));
      if (v.contains("default")) CHECK(d[k] == v["default"]);
    }
    ++seen;
  }
  CHECK(seen == 12);
}
