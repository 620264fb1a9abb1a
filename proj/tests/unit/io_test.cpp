#include "jmgt/io/run_store.hpp"

#include <gtest/gtest.h>

using namespace jmgt;

namespace {

const char* base_yaml = R"(schema_version: 1
geometry:
  kind: interval
  sizes: 1.0
  resolution: 20
params:
  tau: 1.0
  c: 1.0
time:
  T: 1.0
  dt: 0.01
)";

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("jmgt-unit-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Scenario, DefaultsFilled) {
  const ScenarioConfig sc = parse_scenario(base_yaml);
  EXPECT_EQ(sc.geometry.gamma0, "endpoint0");
  EXPECT_EQ(sc.params.alpha, "critical");
  EXPECT_DOUBLE_EQ(sc.time.theta, 0.5);
  EXPECT_EQ(sc.outputs.stride, 1);
  const auto m = make_model(sc);
  EXPECT_EQ(m->n(), 21);
  EXPECT_TRUE(m->ops.critical());
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of(std::string(base_yaml) + "  bogus: 1\n").find("line 12"), std::string::npos);
  const std::string neg = std::string(base_yaml).replace(std::string(base_yaml).find("  c: 1.0"), 8, "  c: -1.0");
  const std::string e = error_of(neg);
  EXPECT_NE(e.find("line 8"), std::string::npos) << e;
  EXPECT_NE(e.find("params.c"), std::string::npos) << e;
}

TEST(Scenario, RejectsInvalidValues) {
  EXPECT_NE(error_of("schema_version: 2\ngeometry:\n  kind: interval\n"), "");
  EXPECT_NE(error_of(std::string(base_yaml) + "  scheme: rk4\n"), "");
  EXPECT_NE(error_of(std::string(base_yaml) + "  theta: 0.7\n"), "");
  EXPECT_NE(error_of("schema_version: 1\ngeometry:\n  kind: interval\nparams:\n  kappa0: 0\n").find("kappa0"),
            std::string::npos);
  EXPECT_NE(error_of("schema_version: 1\ngeometry:\n  kind: sphere\n"), "");
  EXPECT_NE(error_of("schema_version: 1\ngeometry:\n  kind: interval\nparams:\n  forcing: cosine\n"), "");
  EXPECT_NE(error_of("schema_version: 1\ngeometry: [1, 2\n").find("line"), std::string::npos);
}

TEST(Scenario, HashIgnoresKeyOrderAndNumberSpelling) {
  const std::string a = "schema_version: 1\ngeometry:\n  kind: interval\n  resolution: 20\ntime:\n  T: 1\n  dt: 0.01\n";
  const std::string b = "time:\n  dt: 1.0e-2\n  T: 1.0\ngeometry:\n  resolution: 20\n  kind: interval\nschema_version: 1\n";
  EXPECT_EQ(scenario_hash(parse_scenario(a)), scenario_hash(parse_scenario(b)));
  const std::string c = "schema_version: 1\ngeometry:\n  kind: interval\n  resolution: 21\ntime:\n  T: 1\n  dt: 0.01\n";
  EXPECT_NE(scenario_hash(parse_scenario(a)), scenario_hash(parse_scenario(c)));
  EXPECT_EQ(scenario_hash(parse_scenario(a)).size(), 64u);
}

TEST(Scenario, ForcingAndAlphaSpellings) {
  const ScenarioConfig sc =
      parse_scenario(std::string(base_yaml).replace(std::string(base_yaml).find("  c: 1.0"), 8,
                                                    "  c: 1.0\n  alpha: critical+0.25\n  forcing: sine:2,3"));
  const auto m = make_model(sc);
  EXPECT_NEAR(m->ops.gamma[0], 0.25, 1e-14);
  EXPECT_TRUE(m->params.forcing.has_value());
}

TEST(RunStore, DirectoriesAreAppendOnly) {
  const fs::path out = temp_dir("dirs");
  const fs::path a = create_run_dir(out, std::string(64, 'a'));
  const fs::path b = create_run_dir(out, std::string(64, 'a'));
  EXPECT_NE(a, b);
  EXPECT_EQ(b.filename().string(), "run-aaaaaaaaaaaaaaaa-2");
  write_text(a / "x.txt", "1");
  EXPECT_THROW(write_text(a / "x.txt", "2"), Error);
  fs::remove_all(out);
}

TEST(RunStore, StatesRoundTrip) {
  const fs::path out = temp_dir("states");
  ScenarioConfig cfg = parse_scenario(base_yaml);
  cfg.outputs.store_states = true;
  cfg.outputs.stride = 10;
  const Trajectory tr = integrate(build_scenario(cfg));
  write_states(out / "states.bin", tr);
  const StoredStates back = read_states(out / "states.bin");
  ASSERT_EQ(back.states.size(), tr.states.size());
  EXPECT_EQ(back.header["nodes"], 21);
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    EXPECT_EQ(back.states[k].t, tr.states[k].t);
    EXPECT_EQ((back.states[k].stacked() - tr.states[k].stacked()).norm(), 0.0);
  }
  fs::remove_all(out);
}

TEST(RunStore, FieldJsonRoundTrip) {
  const Mesh m = build_rect_mesh(1.0, 1.0, 6, 6);
  const BoundaryPartition p = partition_boundary(m, "left,bottom");
  const MultiplierField h = synthesize_multiplier_field(m, p, 2, 0.5);
  const FieldReport v = verify_field(h, m, p);
  const MultiplierField back = field_from_json(Json::parse(to_json(h, v).dump()));
  for (const Point& x : {Point(0.1, 0.2), Point(0.9, 0.4), Point(0.5, 0.5)})
    EXPECT_NEAR((back.value(x) - h.value(x)).norm(), 0.0, 1e-14);
  EXPECT_TRUE(verify_field(back, m, p).pass);
}
