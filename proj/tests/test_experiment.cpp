#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hqc/experiment.hpp"

using namespace hqc;
using json = nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hqc_test_experiment_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("quantity parsing") {
  CHECK(parse_quantity("omega", "50 fs") == doctest::Approx(0.02));
  CHECK(parse_quantity("omega", "50 inverse-fs") == doctest::Approx(0.02));
  CHECK(parse_quantity("omega", "0.02 rad/fs") == 0.02);
  CHECK(parse_quantity("omega", "5 meV") == doctest::Approx(7.5964e-3).epsilon(1e-4));
  CHECK(parse_quantity("omega", json{{"value", 0.02}, {"unit", "1/fs"}}) == 0.02);
  CHECK(parse_quantity("t_ad", "0.8 ns") == doctest::Approx(8e5));
  CHECK(parse_quantity("t_ad", "7.5 ps") == doctest::Approx(7500.0));
  CHECK(parse_quantity("t_ad", 7500) == 7500.0);
  CHECK(parse_quantity("dt", "0.5 fs") == 0.5);
  CHECK(parse_quantity("delta", "5 meV") == 5.0);
  CHECK(parse_quantity("delta", 5) == 5.0);
  CHECK(parse_quantity("phase_target", "pi/4") == doctest::Approx(pi / 4));
  CHECK(parse_quantity("phase_target", "0.5 pi") == doctest::Approx(pi / 2));
  CHECK(parse_quantity("phase_target", "2*pi/3") == doctest::Approx(2 * pi / 3));
  CHECK(parse_quantity("phase_target", 1.25) == 1.25);
}

TEST_CASE("quantity errors name the field") {
  CHECK_THROWS_WITH_AS(parse_quantity("t_ad", "3 parsecs"), doctest::Contains("config.t_ad"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_quantity("omega", "0.02"), doctest::Contains("missing unit"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("omega", 0.02), ConfigError);
  CHECK_THROWS_AS(parse_quantity("t_ad", "-1 ps"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("delta", "5 eV"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("phase_target", "tau/2"), ConfigError);
  CHECK_THROWS_AS(parse_quantity("omega", json{{"value", 1}, {"unit", "Hz"}}), ConfigError);
}

TEST_CASE("gate-1 config") {
  const auto c = parse_config(
      R"({"gate": "gate1", "phase_target": "pi/4", "omega": "50 fs", "t_ad": "7.5 ps"})");
  CHECK(c.gate == Experiment::Gate1);
  CHECK(*c.phase_target == doctest::Approx(pi / 4));
  CHECK(c.omega == doctest::Approx(0.02));
  CHECK(c.t_ad == doctest::Approx(7500.0));
  CHECK(c.initial_state_label == "Eplus");
  CHECK(c.loop.n_samples == 10000);
  CHECK(!c.dt);
  CHECK(c.output_dir == "hqc_output");
}

TEST_CASE("config errors carry the key path") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "gate1", "phase_target": 1, "omega": "50 fs",
                                       "t_ad": 7500, "colour": 1})"),
                       "config.colour: unknown key", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "gate1", "phase_target": 1, "omega": "50 fs",
                                       "t_ad": 7500, "loop": {"thetamax": 1}})"),
                       "config.loop.thetamax: unknown key", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "gate1", "omega": "50 fs", "t_ad": 7500})"),
                       doctest::Contains("config.phase_target"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "twoqubit", "omega": "0.0015 rad/fs", "t_ad": "0.8 ns"})"),
                       doctest::Contains("config.delta"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "gate3"})"), doctest::Contains("config.gate"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "gate1", "phase_target": 1, "omega": "50 fs",
                                       "t_ad": 7500, "initial_state": "GG"})"),
                       doctest::Contains("config.initial_state"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "gate1", "phase_target": 1, "omega": "50 fs",
                                       "t_ad": 7500, "loop": {"phi_sweep": 1}})"),
                       doctest::Contains("config.loop.phi_sweep"), ConfigError);
}

TEST_CASE("explicit initial amplitudes") {
  const auto c = parse_config(R"({"gate": "gate1", "phase_target": 1, "omega": "50 fs", "t_ad": 7500,
                                 "initial_state": [[0,0],[0.6,0],[0,0.8],[0,0]]})");
  CHECK(c.initial_state_label.empty());
  CHECK(c.initial_state(single::Eplus) == cplx(0.0, 0.8));
  CHECK_THROWS_AS(parse_config(R"({"gate": "gate1", "phase_target": 1, "omega": "50 fs", "t_ad": 7500,
                                  "initial_state": [[1,0],[1,0],[0,0],[0,0]]})"),
                  ConfigError);
}

TEST_CASE("manifest lists every resolved field") {
  const auto c = parse_config(
      R"({"gate": "gate2", "phase_target": "pi/2", "omega": "0.02 rad/fs", "t_ad": "7.5 ps"})");
  const auto r = resolve(c, build_schedule(c));
  const auto j = to_json(r);
  CHECK(j["gate"] == "gate2");
  CHECK(j["dt_fs"] == 0.75);
  CHECK(j["trace_stride"] == 5);
  CHECK(j["loop"]["theta_max"].get<real>() == doctest::Approx(pi / 2));
  CHECK(j["loop"]["ramp"] == "smoothstep");
  CHECK(j["loop"]["n_samples"] == 10000);
  CHECK(j["loop"]["orientation"] == "negative");
  CHECK(j["initial_state"]["label"] == "Eplus");
  CHECK(j["delta_meV"].is_null());
  CHECK(j["output_dir"] == "hqc_output");
}

TEST_CASE("two-qubit config uses the canonical loop") {
  const auto c = parse_config(
      R"({"gate": "twoqubit", "omega": "0.0015193 rad/fs", "delta": "5 meV", "t_ad": "0.8 ns"})");
  const auto s = build_schedule(c);
  REQUIRE(s.loop());
  CHECK(s.loop()->theta_max == doctest::Approx(pi / 4));
  CHECK(s.loop()->phi_sweep == doctest::Approx(2 * pi));
  CHECK(c.initial_state_label == "EplusEplus");

  const auto short_run = parse_config(
      R"({"gate": "twoqubit", "omega": "0.0015193 rad/fs", "delta": "5 meV", "t_ad": "10 ps"})");
  CHECK_THROWS_WITH_AS(build_schedule(short_run), doctest::Contains("violates T_ad"), PreconditionError);
}

TEST_CASE("holonomy reports") {
  SUBCASE("gate-1 map") {
    const auto c = parse_config(R"({"gate": "holonomy", "map": "gate1", "phase_target": "pi/4"})");
    const auto j = holonomy_report(c);
    CHECK(j["map"] == "gate1");
    CHECK(j["phase"].get<real>() == doctest::Approx(pi / 4).epsilon(1e-3));
    CHECK(j["solid_angle_numeric"].get<real>() == doctest::Approx(pi / 2).epsilon(1e-9));
    CHECK(j["distance_to_predicted"].get<real>() < 1e-3);
  }
  SUBCASE("gate-2 map") {
    const auto c = parse_config(R"({"gate": "holonomy", "map": "gate2", "phase_target": "pi/2"})");
    const auto j = holonomy_report(c);
    CHECK(j["phase"].get<real>() == doctest::Approx(pi / 2).epsilon(1e-3));
    CHECK(j["solid_angle_numeric"].get<real>() == doctest::Approx(-pi / 2).epsilon(1e-9));
  }
  SUBCASE("two-qubit map") {
    const auto c = parse_config(R"({"gate": "holonomy", "map": "twoqubit"})");
    const auto j = holonomy_report(c);
    CHECK(j["return_fidelity"].get<real>() == doctest::Approx(0.98991).epsilon(1e-4));
    CHECK(j["holonomy"]["dimension"] == 3);
  }
  SUBCASE("explicit loop") {
    const auto c = parse_config(
        R"({"gate": "holonomy", "map": "gate1", "loop": {"theta_max": "pi/2", "phi_sweep": "pi/2"}})");
    const auto j = holonomy_report(c);
    CHECK(j["phase"].get<real>() == doctest::Approx(pi / 4).epsilon(1e-3));
  }
  CHECK_THROWS_AS(parse_config(R"({"gate": "holonomy", "map": "gate1"})"), ConfigError);
}

TEST_CASE("scan configs") {
  const auto c = parse_config(R"({"gate": "scan", "phase_target": "pi/2", "omega": "50 fs",
                                 "scan": {"gate": "gate2", "parameter": "t_ad",
                                          "values": ["7.5 ps", "15 ps"]}})");
  REQUIRE(c.scan);
  CHECK(c.scan->base == Experiment::Gate2);
  CHECK(c.scan->values == std::vector<real>{7500.0, 15000.0});
  CHECK_THROWS_WITH_AS(parse_config(R"({"gate": "scan", "scan": {"parameter": "t_ad", "values": [1]}})"),
                       doctest::Contains("config.scan.gate"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"gate": "scan", "phase_target": 1, "omega": "50 fs",
                       "scan": {"gate": "gate1", "parameter": "colour", "values": [1]}})"),
      doctest::Contains("config.scan.parameter"), ConfigError);
}

TEST_CASE("run writes deterministic outputs") {
  const auto text = [](const std::string& dir) {
    return R"({"gate": "gate1", "phase_target": "pi/4", "omega": "50 fs", "t_ad": "7.5 ps",
               "loop": {"n_samples": 2000}, "output_dir": ")" + dir + R"("})";
  };
  const auto a = scratch_dir("a"), b = scratch_dir("b");
  std::ostringstream err;
  REQUIRE(run(parse_config(text(a.string())), err) == 0);
  REQUIRE(run(parse_config(text(b.string())), err) == 0);
  for (const char* f : {"trace.csv", "schedule.csv", "report.json"}) {
    CHECK(std::filesystem::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto report = json::parse(slurp(a / "report.json"));
  CHECK(report["report"]["fidelity"].get<real>() >= 0.999);
  CHECK(report["report"]["final_phase"].get<real>() == doctest::Approx(pi / 4).epsilon(1e-3));
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["command"] == "run");
  CHECK(manifest["config"]["dt_fs"] == 0.75);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("run reports precondition failures with exit code 2") {
  const auto dir = scratch_dir("fail");
  const auto c = parse_config(R"({"gate": "twoqubit", "omega": "0.0015193 rad/fs", "delta": "5 meV",
                                 "t_ad": "10 ps", "output_dir": ")" + dir.string() + R"("})");
  std::ostringstream err;
  CHECK(run(c, err) == 2);
  CHECK(err.str().find("violates T_ad") != std::string::npos);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
  CHECK(exit_code_for(ConfigError("x")) == 2);
}
