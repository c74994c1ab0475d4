#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "issgf/errors.h"
#include "issgf/scenario.h"
#include "issgf/verify.h"

namespace issgf {
namespace {

const char* kScenario = R"({
  "version": 1,
  "seed": 11,
  "problem": {"target": [[1.0, 0.5], [0.0, 2.0]], "k": 3},
  "init": {"kind": "seeded-random", "scale": 0.5},
  "disturbance": {"kind": "seeded-random", "budget": 0.1, "norm": "frobenius-joint"},
  "integrator": {"method": "rk4-fixed", "dt": 0.01, "t_end": 1.0, "record_stride": 10},
  "outputs": [{"format": "csv", "path": "out.csv"}]
})";

TEST(ScenarioTest, ParseSerializeRoundTrip) {
  const Scenario s = ParseScenario(kScenario);
  EXPECT_EQ(s.seed, 11u);
  EXPECT_EQ(s.problem.k, 3);
  EXPECT_EQ(s.init.kind, InitKind::kSeededRandom);
  EXPECT_EQ(s.disturbance.kind, DisturbanceKind::kSeededRandom);
  ASSERT_EQ(s.outputs.size(), 1u);
  const Json j = ScenarioToJson(s);
  EXPECT_EQ(ScenarioToJson(ParseScenario(j.dump())), j);
}

TEST(ScenarioTest, DefaultsAndDerivedSeeds) {
  const Scenario s = ParseScenario(
      R"({"version": 1, "problem": {"target": [[1.0]], "k": 1}})", 5);
  EXPECT_EQ(s.seed, 5u);
  EXPECT_EQ(s.init.kind, InitKind::kSeededRandom);
  EXPECT_NE(s.disturbance.seed, 0u);
  const Scenario again = ParseScenario(
      R"({"version": 1, "problem": {"target": [[1.0]], "k": 1}})", 5);
  EXPECT_EQ(again.disturbance.seed, s.disturbance.seed);
}

void ExpectConfigError(const std::string& text, const std::string& field) {
  try {
    ParseScenario(text);
    FAIL() << "accepted: " << text;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), field) << e.what();
  }
}

TEST(ScenarioTest, FieldTaggedErrors) {
  ExpectConfigError(R"({"version": 2, "problem": {"target": [[1]], "k": 1}})", "version");
  ExpectConfigError(R"({"version": 1, "problem": {"target": [[1]], "k": 1}, "extra": 0})",
                    "extra");
  ExpectConfigError(R"({"version": 1, "problem": {"target": [[1]], "k": "x"}})",
                    "problem.k");
  ExpectConfigError(
      R"({"version": 1, "problem": {"target": [[1]], "k": 1}, "init": {"kind": "magic"}})",
      "init.kind");
  ExpectConfigError(R"({"version": 1})", "problem");
  ExpectConfigError(
      R"({"version": 1, "problem": {"target": [[1]], "k": 1},
          "outputs": [{"format": "xml", "path": "a"}]})",
      "outputs[0].format");
}

TEST(ScenarioTest, SyntaxErrorNamesLine) {
  try {
    ParseScenario("{\n  \"version\": 1,\n  oops\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ScenarioTest, ResolveAndSimulateDeterministically) {
  const Scenario s = ParseScenario(kScenario);
  const ProblemSpec spec = ResolveProblem(s);
  const ParamState a = ResolveInit(s, spec);
  const ParamState b = ResolveInit(s, spec);
  EXPECT_EQ(a.P, b.P);
  EXPECT_LE(a.P.cwiseAbs().maxCoeff(), 0.5);
  const Trajectory t1 = Simulate(spec, a, s.disturbance, s.integrator);
  const Trajectory t2 = Simulate(spec, b, s.disturbance, s.integrator);
  EXPECT_EQ(t1.states.back().P, t2.states.back().P);
  const SimulationSummary sum = Summarize(t1);
  EXPECT_DOUBLE_EQ(sum.final_time, 1.0);
  EXPECT_EQ(sum.dissipation_violations, 0);
  EXPECT_EQ(SummaryToJson(sum).at("recorded_steps"), t1.size());
}

TEST(ScenarioTest, SpuriousInitAndDataset) {
  const auto dir = std::filesystem::temp_directory_path() / "issgf_scenario_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "data.csv");
    csv << "x1,x2,y1,y2\n1,0,2,0\n0,1,0,1\n1,1,2,1\n";
  }
  const std::string text = R"({
    "version": 1,
    "problem": {"dataset_csv": "data.csv", "n": 2, "m": 2, "k": 2},
    "init": {"kind": "spurious", "keep": [0]}
  })";
  {
    std::ofstream f(dir / "s.json");
    f << text;
  }
  const Scenario s = LoadScenarioFile((dir / "s.json").string());
  const ProblemSpec spec = ResolveProblem(s, dir.string());
  EXPECT_NEAR(spec.target()(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(spec.target()(1, 1), 1.0, 1e-12);
  const ParamState z = ResolveInit(s, spec);
  EXPECT_NEAR(Loss(spec, z), 0.5, 1e-12);
  EXPECT_THROW(ResolveProblem(s, (dir / "missing").string()), IoError);
  EXPECT_THROW(LoadScenarioFile((dir / "nope.json").string()), ConfigError);
  EXPECT_EQ(ResolvePath("/a", "/b/c"), "/b/c");
  EXPECT_EQ(ResolvePath("/a", "c"), "/a/c");
  std::filesystem::remove_all(dir);
}

TEST(VerifyTest, EverySuitePassesAndIsDeterministic) {
  for (const auto& suite : VerifySuiteNames()) {
    VerifyOptions opts;
    opts.seed = 21;
    opts.count = 8;
    opts.t_end = 3.0;
    const VerifyReport r = RunVerifySuite(suite, opts);
    EXPECT_TRUE(r.passed) << suite << ": " << r.failed_instances.dump();
    EXPECT_EQ(r.instances, 8);
    opts.threads = 2;
    const VerifyReport again = RunVerifySuite(suite, opts);
    EXPECT_EQ(VerifyReportToJson(again, {}).dump(), VerifyReportToJson(r, {}).dump())
        << suite;
  }
  EXPECT_THROW(RunVerifySuite("nope", {}), InvalidArgument);
  VerifyOptions bad;
  bad.count = 0;
  EXPECT_THROW(RunVerifySuite("dissipation", bad), InvalidArgument);
}

}  // namespace
}  // namespace issgf
