#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cisim/config.hpp"
#include "cisim/emit.hpp"
#include "cisim/errors.hpp"

using namespace cisim;

namespace {

const char* kMinimal =
    "mode = ber_sweep\n"
    "K = 4\n"
    "Nt = 4\n"
    "order = 16\n"
    "trials = 100\n"
    "snr_db = 10\n"
    "schemes = ZF\n";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("cisim_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

BerResult sample_ber_result() {
  BerResult r;
  r.K = 2;
  r.Nt = 2;
  r.order = 16;
  BerCell zf;
  zf.scheme = Scheme::ZF;
  zf.snr_db = 10.0;
  zf.bit_errors = 5;
  zf.bits = 100;
  zf.slots = 25;
  BerCell ci;
  ci.scheme = Scheme::CI_Iterative;
  ci.snr_db = 10.0;
  ci.bit_errors = 2;
  ci.bits = 100;
  ci.slots = 25;
  ci.iter_sum = 30;
  ci.has_iterations = true;
  r.cells = {zf, ci};
  return r;
}

ExperimentSpec sample_spec() {
  ExperimentSpec spec = parse_config(kMinimal);
  spec.sim.schemes = {Scheme::ZF, Scheme::CI_Iterative};
  return spec;
}

}

TEST_CASE("minimal configs parse with the documented defaults") {
  ExperimentSpec spec = parse_config(kMinimal);
  CHECK(spec.mode == RunMode::ber_sweep);
  CHECK(spec.sim.k_list == std::vector<int>{4});
  CHECK(spec.sim.nt_list == std::vector<int>{4});
  CHECK(spec.sim.order == 16);
  CHECK(spec.sim.trials == 100);
  CHECK(spec.sim.snr_db == std::vector<double>{10.0});
  CHECK(spec.sim.schemes == std::vector<Scheme>{Scheme::ZF});

  CHECK(spec.sim.p0 == 1.0);
  CHECK(spec.sim.seed == 1);
  CHECK(spec.sim.channel_reuse == 1);
  CHECK(spec.sim.iter_max == 100);
  CHECK(spec.sim.threads == 0);
  CHECK(spec.out == "results.csv");
  CHECK(spec.format == OutFormat::csv);
  CHECK_NOTHROW(validate(spec));
}

TEST_CASE("comments, blanks, and lists parse") {
  ExperimentSpec spec = parse_config(
      "# experiment\n"
      "mode = feasibility\n"
      "\n"
      "K = 7, 8, 9   # swept sizes\n"
      "Nt = 6\n"
      "order = 64\n"
      "trials = 50\n"
      "seed = 9\n"
      "snr_db = 10, 20.5, 30\n"
      "schemes = ZF, RZF, CI-Iterative, CI-CF, CI-Oracle\n"
      "format = json\n");
  CHECK(spec.mode == RunMode::feasibility);
  CHECK(spec.sim.k_list == std::vector<int>{7, 8, 9});
  CHECK(spec.sim.order == 64);
  CHECK(spec.sim.seed == 9);
  CHECK(spec.sim.snr_db == std::vector<double>{10.0, 20.5, 30.0});
  CHECK(spec.sim.schemes.size() == 5);
  CHECK(spec.format == OutFormat::json);
  CHECK(spec.out == "results.json");
  CHECK_NOTHROW(validate(spec));
}

TEST_CASE("serialization round-trips exactly") {
  ExperimentSpec spec = sample_spec();
  spec.sim.snr_db = {10.0, 12.5};
  spec.sim.p0 = 2.0;
  spec.out = "sweep.csv";
  std::string text = serialize_config(spec);
  ExperimentSpec back = parse_config(text);
  CHECK(serialize_config(back) == text);

  back.format = OutFormat::json;
  CHECK(serialize_config(back) != text);
}

TEST_CASE("missing required keys name the key") {
  auto requires_key = [](const std::string& text, const std::string& key) {
    try {
      parse_config(text);
      FAIL(("expected a config error for " + key));
    } catch (const ConfigError& e) {
      CHECK(e.key == key);
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  requires_key("K = 4\norder = 16\ntrials = 10\n", "Nt");
  requires_key("Nt = 4\norder = 16\ntrials = 10\n", "K");
  requires_key("K = 4\nNt = 4\ntrials = 10\n", "order");
  requires_key("K = 4\nNt = 4\norder = 16\n", "trials");
}

TEST_CASE("malformed entries carry the key and line number") {
  try {
    parse_config("K = 4\nbogus = 1\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key == "bogus");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("K = four\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("K 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("K =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("trials = -5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("snr_db = 1,,2\nK = 1\nNt = 1\norder = 16\ntrials = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("mode = turbo\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schemes = MRT\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("format = yaml\n"), ConfigError);
}

TEST_CASE("mode-specific validation enforces shapes and regimes") {
  ExperimentSpec spec = parse_config(kMinimal);

  ExperimentSpec bad = spec;
  bad.sim.k_list = {2, 3};
  bad.sim.nt_list = {2, 3};
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = spec;
  bad.sim.snr_db.clear();
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = spec;
  bad.sim.schemes.clear();
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = spec;
  bad.sim.k_list = {5};
  bad.sim.nt_list = {4};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad.sim.schemes = {Scheme::CI_Iterative};
  CHECK_NOTHROW(validate(bad));

  bad = spec;
  bad.sim.order = 8;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = spec;
  bad.sim.threads = -1;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = spec;
  bad.mode = RunMode::feasibility;
  bad.sim.k_list = {4, 5, 6};
  bad.sim.nt_list = {6, 6};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad.sim.nt_list = {6};
  CHECK_NOTHROW(validate(bad));

  bad = spec;
  bad.mode = RunMode::verify;
  bad.sim.k_list = {2, 3};
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("names round-trip through their parsers") {
  for (RunMode m : {RunMode::ber_sweep, RunMode::feasibility, RunMode::iterations,
                    RunMode::verify}) {
    CHECK(parse_mode(mode_label(m)) == m);
  }
  for (Scheme s : {Scheme::ZF, Scheme::RZF, Scheme::CI_Iterative, Scheme::CI_CF,
                   Scheme::CI_Oracle}) {
    CHECK(parse_scheme(scheme_label(s)) == s);
  }
  CHECK(parse_format(format_label(OutFormat::csv)) == OutFormat::csv);
  CHECK(parse_format(format_label(OutFormat::json)) == OutFormat::json);
}

TEST_CASE("CSV output is pinned, sorted, and self-describing") {
  TempDir tmp;
  ExperimentSpec spec = sample_spec();
  BerResult r = sample_ber_result();
  auto path = tmp.path / "out.csv";
  write_csv(r, spec, path.string());

  auto lines = lines_of(read_file(path));
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == "scheme,snr_db,ber,stderr,trials,mean_iterations,feasibility");
  CHECK(lines[1].rfind("CI-Iterative,10,0.02,", 0) == 0);
  CHECK(lines[2].rfind("ZF,10,0.05,", 0) == 0);
  CHECK(lines[1].find(",25,1.2,") != std::string::npos);
  CHECK(lines[2].substr(lines[2].size() - 5) == ",25,,");

  bool saw_version = false, saw_config = false;
  for (const auto& line : lines) {
    if (line.rfind("# version: ", 0) == 0) saw_version = true;
    if (line.rfind("# config: mode = ber_sweep", 0) == 0) saw_config = true;
  }
  CHECK(saw_version);
  CHECK(saw_config);
}

TEST_CASE("feasibility rows embed the sizes in the scheme label") {
  TempDir tmp;
  ExperimentSpec spec = sample_spec();
  spec.mode = RunMode::feasibility;

  FeasibilityResult r;
  r.order = 16;
  FeasibilityPoint p;
  p.K = 7;
  p.Nt = 6;
  p.slots = 2000;
  p.feasible = 1650;
  p.iter_sum = 3000;
  p.iter_sq_sum = 9000;
  r.points = {p};

  auto path = tmp.path / "feas.csv";
  write_csv(r, spec, path.string());
  auto lines = lines_of(read_file(path));
  REQUIRE(lines.size() >= 2);
  CHECK(lines[1] == "CI-Iterative[K=07,Nt=06],,,,2000,1.5,0.825");
}

TEST_CASE("JSON mirrors carry the config, seed, and typed nulls") {
  TempDir tmp;
  ExperimentSpec spec = sample_spec();
  spec.sim.seed = 99;
  auto path = tmp.path / "out.json";
  write_json(sample_ber_result(), spec, path.string());

  nlohmann::json j = nlohmann::json::parse(read_file(path));
  CHECK(j["seed"] == 99);
  CHECK(j["config"]["mode"] == "ber_sweep");
  CHECK(j["config"]["K"][0] == 4);
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][0]["scheme"] == "CI-Iterative");
  CHECK(j["rows"][0]["ber"].get<double>() == doctest::Approx(0.02));
  CHECK(j["rows"][0]["mean_iterations"].get<double>() == doctest::Approx(1.2));
  CHECK(j["rows"][0]["feasibility"].is_null());
  CHECK(j["rows"][1]["scheme"] == "ZF");
  CHECK(j["rows"][1]["mean_iterations"].is_null());
}

TEST_CASE("emitting CSV also writes a JSON mirror") {
  TempDir tmp;
  ExperimentSpec spec = sample_spec();
  spec.out = (tmp.path / "res.csv").string();
  auto written = emit_results(sample_ber_result(), spec);
  REQUIRE(written.size() == 2);
  CHECK(written[0] == spec.out);
  CHECK(written[1] == (tmp.path / "res.json").string());
  CHECK(std::filesystem::exists(written[0]));
  CHECK(std::filesystem::exists(written[1]));

  spec.format = OutFormat::json;
  spec.out = (tmp.path / "only.json").string();
  written = emit_results(sample_ber_result(), spec);
  REQUIRE(written.size() == 1);
  CHECK(std::filesystem::exists(spec.out));
}

TEST_CASE("unwritable outputs raise config errors") {
  ExperimentSpec spec = sample_spec();
  CHECK_THROWS_AS(write_csv(sample_ber_result(), spec, "/nonexistent-dir/x.csv"), ConfigError);
}
