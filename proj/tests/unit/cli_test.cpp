#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / ("jmgt-cli-" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(JMGT_CLI_PATH) + " --out " + (work_dir() / "runs").string() + " " + args +
                          " > " + (work_dir() / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_line_of_stdout() {
  std::istringstream in(read_file(work_dir() / "stdout.txt"));
  std::string line, first;
  std::getline(in, first);
  return first;
}

fs::path write_scenario(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

const char* good = R"(schema_version: 1
geometry:
  kind: interval
  resolution: 30
initial_data:
  shape: bump
  h_size: 1.0
time:
  T: 2.0
  dt: 0.01
outputs:
  stride: 5
  store_states: true
)";

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path ok = write_scenario("good.yaml", good);
  EXPECT_EQ(run("check " + ok.string()), 0);
  EXPECT_EQ(run("check " + write_scenario("bad.yaml", "schema_version: 1\ngeometry:\n  kind: cube\n").string()), 2);
  EXPECT_EQ(run("check " + (work_dir() / "missing.yaml").string()), 2);
  EXPECT_EQ(run("simulate"), 2);
  EXPECT_EQ(run("experiment conservation " + ok.string()), 2);
  const fs::path lr = write_scenario("lr.yaml",
                                     "schema_version: 1\ngeometry:\n  kind: rectangle\n  resolution: [6, 6]\n"
                                     "  gamma0: \"left,right\"\n");
  EXPECT_EQ(run("field --degree 2 " + lr.string()), 4);
}

TEST(Cli, SimulateIsDeterministic) {
  const fs::path sc = write_scenario("det.yaml", good);
  ASSERT_EQ(run("simulate " + sc.string()), 0);
  const fs::path a = last_line_of_stdout();
  ASSERT_EQ(run("simulate " + sc.string()), 0);
  const fs::path b = last_line_of_stdout();
  ASSERT_NE(a, b);
  for (const char* f : {"energies.csv", "states.bin", "scenario.json", "scenario.yaml"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  auto sa = nlohmann::json::parse(read_file(a / "summary.json"));
  auto sb = nlohmann::json::parse(read_file(b / "summary.json"));
  sa.erase("timestamp");
  sb.erase("timestamp");
  EXPECT_EQ(sa.dump(), sb.dump());
  EXPECT_TRUE(sa.contains("fits") && sa.contains("residuals") && sa.contains("flags"));

  // T = 2, dt = 0.01, stride 5: 40 samples after the initial one, plus the header
  const std::string csv = read_file(a / "energies.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 42);
}

TEST(Cli, CoercivityMessage) {
  const fs::path sc =
      write_scenario("k0.yaml", "schema_version: 1\ngeometry:\n  kind: interval\nparams:\n  kappa0: 0.0\n");
  EXPECT_EQ(run("simulate " + sc.string()), 2);
  EXPECT_NE(read_file(work_dir() / "stdout.txt").find("coercivity"), std::string::npos);
}

TEST(Cli, ConservationOnDampedScenarioNamesKappa1) {
  EXPECT_EQ(run("experiment conservation " + write_scenario("damped.yaml", good).string()), 2);
  EXPECT_NE(read_file(work_dir() / "stdout.txt").find("kappa1"), std::string::npos);
}

TEST(Cli, SpectrumOperatorsAgreeAndDenseIsGuarded) {
  const fs::path sc = write_scenario("spec_uz.yaml", good);
  ASSERT_EQ(run("spectrum --operator u " + sc.string()), 0);
  const auto u = nlohmann::json::parse(read_file(fs::path(last_line_of_stdout()) / "summary.json"));
  ASSERT_EQ(run("spectrum --operator z " + sc.string()), 0);
  const auto z = nlohmann::json::parse(read_file(fs::path(last_line_of_stdout()) / "summary.json"));
  EXPECT_NEAR(u["abscissa"].get<double>(), z["abscissa"].get<double>(), 1e-8);
  const fs::path big = write_scenario("big.yaml", "schema_version: 1\ngeometry:\n  kind: interval\n  resolution: 1200\n");
  EXPECT_EQ(run("spectrum --dense " + big.string()), 2);
}

TEST(Cli, TwoLevelReportKeys) {
  const fs::path sc = write_scenario("two_level.yaml", R"(schema_version: 1
geometry:
  kind: interval
  resolution: 30
initial_data:
  shape: rightmost_mode
time:
  T: 10.0
  dt: 1.0e-3
outputs:
  stride: 10
)");
  ASSERT_EQ(run("experiment two_level " + sc.string()), 0);
  const fs::path dir = last_line_of_stdout();
  const auto r = nlohmann::json::parse(read_file(dir / "experiment.json"));
  EXPECT_TRUE(r["metrics"].contains("omega_E"));
  EXPECT_TRUE(r["metrics"].contains("omega_calE"));
  EXPECT_EQ(r["verdict"], "pass");
  EXPECT_EQ(read_file(dir / "E.dat").substr(0, 6), "# t E\n");
}

TEST(Cli, FieldVerifyOnly) {
  const fs::path sc = write_scenario("lb.yaml",
                                     "schema_version: 1\ngeometry:\n  kind: rectangle\n  resolution: [6, 6]\n"
                                     "  gamma0: \"left,bottom\"\n");
  ASSERT_EQ(run("field --degree 2 --delta 0.5 " + sc.string()), 0);
  const fs::path field = fs::path(last_line_of_stdout()) / "field.json";
  ASSERT_TRUE(fs::exists(field));
  EXPECT_EQ(run("field --verify-only " + field.string() + " " + sc.string()), 0);
  EXPECT_NE(read_file(work_dir() / "stdout.txt").find("verified yes"), std::string::npos);
}

TEST(Cli, SpectrumWritesCsv) {
  const fs::path sc = write_scenario("spec.yaml", good);
  ASSERT_EQ(run("spectrum --dense " + sc.string()), 0);
  const std::string csv = read_file(fs::path(last_line_of_stdout()) / "spectrum.csv");
  EXPECT_EQ(csv.substr(0, 15), "re,im,residual\n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 94);
}
