#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <unistd.h>
#include <string>

#include <doctest.h>

#include "dcsim/io.hpp"

using namespace dcsim;

namespace {

json minimal_config() {
  return json{{"schema_version", 1},
              {"crystal",
               {{"etas", json::array({json::array({0.1, 0.0})})},
                {"selected_index", 0}}}};
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    char name[] = "/tmp/dcsim-test-XXXXXX";
    const int fd = mkstemp(name);
    REQUIRE(fd >= 0);
    close(fd);
    path = name;
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("minimal config parses") {
  const RunConfig cfg = parse_config(minimal_config());
  CHECK(cfg.crystal.etas.size() == 1);
  CHECK(cfg.crystal.etas[0] == Complex(0.1, 0.0));
  CHECK(cfg.crystal.selected_index == 0);
  CHECK(!cfg.experiment);
  CHECK(!cfg.timeline);
  CHECK(cfg.output.format == OutputFormat::Json);
}

TEST_CASE("full config parses with all sections") {
  json root = minimal_config();
  root["crystal"]["etas"] = json::array(
      {json::array({0.1, 0.0}), json::array({0.0, 0.2}), json::array({-0.05, 0.0})});
  root["experiment"] = {{"n0", 1e6}, {"sigma", 0.5}, {"phi", 0.25}};
  root["timeline"] = {{"tau_pcoh", 1e-13},
                      {"n_refr", 1.9},
                      {"d_max", 1.5e-2},
                      {"duration", 100.0},
                      {"seed", 42}};
  root["scan"] = {{"delta_min", 0.0}, {"delta_max", 6.28}, {"steps", 32}};
  root["output"] = {{"format", "csv"}, {"path", "out.csv"}};

  const RunConfig cfg = parse_config(root);
  CHECK(cfg.crystal.etas.size() == 3);
  REQUIRE(cfg.experiment);
  CHECK(cfg.experiment->n0 == 1e6);
  CHECK(cfg.experiment->sigma == 0.5);
  REQUIRE(cfg.timeline);
  CHECK(cfg.timeline->seed == 42);
  REQUIRE(cfg.scan);
  CHECK(cfg.scan->steps == 32);
  CHECK(cfg.output.format == OutputFormat::Csv);
  CHECK(cfg.output.path == "out.csv");
}

TEST_CASE("schema violations report the field path") {
  SUBCASE("selected_index out of range") {
    json root = minimal_config();
    root["crystal"]["selected_index"] = 5;
    try {
      parse_config(root);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field == "crystal.selected_index");
    }
  }
  SUBCASE("wrong schema version") {
    json root = minimal_config();
    root["schema_version"] = 2;
    CHECK_THROWS_AS(parse_config(root), ConfigError);
  }
  SUBCASE("empty mode list") {
    json root = minimal_config();
    root["crystal"]["etas"] = json::array();
    CHECK_THROWS_AS(parse_config(root), ConfigError);
  }
  SUBCASE("malformed complex entry") {
    json root = minimal_config();
    root["crystal"]["etas"] = json::array({json::array({0.1})});
    CHECK_THROWS_AS(parse_config(root), ConfigError);
  }
  SUBCASE("non-positive n0") {
    json root = minimal_config();
    root["experiment"] = {{"n0", 0.0}, {"sigma", 0.0}, {"phi", 0.0}};
    CHECK_THROWS_AS(parse_config(root), ConfigError);
  }
  SUBCASE("bad output format") {
    json root = minimal_config();
    root["output"] = {{"format", "yaml"}};
    CHECK_THROWS_AS(parse_config(root), ConfigError);
  }
}

TEST_CASE("sigma_parts decomposition") {
  json root = minimal_config();
  root["experiment"] = {
      {"n0", 1.0},
      {"phi", 0.0},
      {"sigma_parts", {{"l_s", 1.0}, {"k_j0", 2.0}, {"l_i", 3.0}, {"k_k0", 4.0}}}};
  const RunConfig cfg = parse_config(root);
  REQUIRE(cfg.experiment);
  CHECK(cfg.experiment->sigma == doctest::Approx(14.0).epsilon(1e-15));

  root["experiment"]["sigma"] = 14.0;
  CHECK_NOTHROW(parse_config(root));
  root["experiment"]["sigma"] = 13.9;
  CHECK_THROWS_AS(parse_config(root), ConfigError);
}

TEST_CASE("load_config file handling") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
  {
    TempFile bad("{ not json");
    CHECK_THROWS_AS(load_config(bad.path), ConfigError);
  }
  {
    TempFile good(minimal_config().dump());
    const RunConfig cfg = load_config(good.path);
    CHECK(cfg.crystal.etas.size() == 1);
  }
}

TEST_CASE("emitted JSON results round-trip") {
  const DcCoefficients c = dc_coefficients(
      build_coupling_table({0.1, Complex(0.0, 0.2), -0.05}, 0));
  ExperimentConfig ecfg{c, 1e6, 0.5, 0.25, std::nullopt};
  const ExperimentBResult r = run_experiment_b(ecfg);

  const json dumped = to_json(r);
  const json reparsed = json::parse(dumped.dump());
  CHECK(reparsed.at("rate_selected").get<double>() == r.rate_selected);
  CHECK(reparsed.at("prob_c").get<double>() == r.prob_c);
  CHECK(reparsed.at("output_state").at("uv_amp")[0].get<double>() ==
        r.output_state.uv_amp.real());
  CHECK(reparsed.at("balance_residual").get<double>() <= 1e-12 * 1e6);
}

TEST_CASE("CSV output is bit-stable with LF endings and dot decimals") {
  const DcCoefficients c = dc_coefficients(
      build_coupling_table({0.1, Complex(0.0, 0.2), -0.05}, 0));
  const auto pts = phase_scan(c, 1e6, {0.0, 1.5707963267948966, 3.141592653589793});
  const std::string csv1 = scan_to_csv(pts);
  const std::string csv2 = scan_to_csv(pts);
  CHECK(csv1 == csv2);
  CHECK(csv1.substr(0, 28) == "delta,rate_selected,rate_c\n0");
  CHECK(csv1.find('\r') == std::string::npos);
  CHECK(csv1.find(',') != std::string::npos);

  TimescaleParams p;
  p.q_e = 1e3;
  p.tau_pcoh = 1e-13;
  p.n_refr = 1.0;
  p.d_max = 1e-10 * kSpeedOfLight;
  const TimelineRun run = simulate_timeline(p, 0.5, 3);
  const std::string ev1 = events_to_csv(run.events);
  const std::string ev2 = events_to_csv(simulate_timeline(p, 0.5, 3).events);
  CHECK(ev1 == ev2);
  CHECK(ev1.rfind("t_start,duration,origin\n", 0) == 0);
  CHECK(ev1.find("FROM_XPRIME") != std::string::npos);
  CHECK(ev1.find("BORN_IN_X") != std::string::npos);
}
