#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ifbs/instance_io.hpp"
#include "ifbs/trace_io.hpp"
#include "ifbs_cli/commands.hpp"
#include "ifbs_cli/config.hpp"
#include "ifbs_cli/schedule_spec.hpp"

namespace ifbs::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ifbs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"generate", "--m", "3"}).code, kExitUsage);
  const auto r = invoke({"generate", "--m", "30", "--n", "2000", "--sparsity", "3000", "--seed", "1", "--out",
                         (dir_ / "x.bin").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("sparsity"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "x.bin"));
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, GenerateWritesInstanceAndDigest) {
  const auto path = (dir_ / "inst.bin").string();
  const auto r = invoke({"generate", "--m", "20", "--n", "50", "--sparsity", "0", "--std", "0.1", "--rho", "1",
                         "--seed", "7", "--out", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto digest = json::parse(r.out);
  EXPECT_EQ(digest["m"], 20);
  EXPECT_EQ(digest["n"], 50);
  EXPECT_GT(digest["lipschitz"].get<double>(), 0.0);
  const auto inst = load_instance(path);
  EXPECT_EQ(inst.b(), Vector::Zero(20));
}

TEST_F(CliTest, GenerateImportsCsv) {
  write("A.csv", "1,0\n0,2\n");
  write("b.csv", "1\n1\n");
  const auto r = invoke({"generate", "--a-csv", (dir_ / "A.csv").string(), "--b-csv", (dir_ / "b.csv").string(),
                         "--rho", "0.5", "--out", (dir_ / "inst.bin").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(load_instance(dir_ / "inst.bin").a()(1, 1), 2.0);
}

TEST_F(CliTest, RunRejectsEmptyAlgorithmList) {
  const auto cfg = write("exp.cfg", "m = 10\nn = 20\nsparsity = 2\nseed = 1\n");
  const auto r = invoke({"run", "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("[algorithm]"), std::string::npos);
}

const char* kSmallExperiment = R"(m = 30
n = 120
sparsity = 5
std = 0.1
rho = 0.05
seed = 11
output = out

[algorithm]
name = ista
schedule = ista
max_iter = 3000

[algorithm]
name = fista
schedule = fista-bt
max_iter = 3000

[algorithm]
name = heavy
schedule = constant(alpha=0.3)
max_iter = 3000
)";

TEST_F(CliTest, RunIsDeterministic) {
  const auto cfg = write("exp.cfg", kSmallExperiment);
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--output", (dir_ / "a").string()}).code, kExitOk);
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--output", (dir_ / "b").string()}).code, kExitOk);
  for (const char* f : {"ista.csv", "fista.csv", "heavy.csv", "fista.json", "fista.snap", "comparison.json",
                        "reference.json", "instance.bin"}) {
    const auto a = slurp(dir_ / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(CliTest, ComparisonIsRecomputableFromTraces) {
  const auto cfg = write("exp.cfg", kSmallExperiment);
  ASSERT_EQ(invoke({"run", "--config", cfg.string()}).code, kExitOk);
  const auto cmp = load(dir_ / "out" / "comparison.json");
  const auto thresholds = cmp["thresholds"].get<std::vector<double>>();
  ASSERT_EQ(thresholds.size(), 5u);
  for (const auto& entry : cmp["algorithms"]) {
    std::ifstream csv(dir_ / "out" / (entry["name"].get<std::string>() + ".csv"));
    const auto rows = read_trace_csv(csv);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::optional<std::int64_t> k;
      for (const auto& r : rows) {
        if (r.gap <= thresholds[t]) {
          k = r.k;
          break;
        }
      }
      const auto& got = entry["first_k_below"][t];
      if (k) {
        EXPECT_EQ(got.get<std::int64_t>(), *k);
      } else {
        EXPECT_TRUE(got.is_null());
      }
    }
  }
}

TEST_F(CliTest, RunRecordsAbortsAndContinues) {
  // A step of 3/L diverges; the batch still runs the second algorithm.
  const auto cfg = write("exp.cfg", R"(m = 20
n = 40
sparsity = 3
seed = 2
rho = 0.01
output = out
[algorithm]
name = wild
schedule = constant(alpha=0.9)
step = 3/L
max_iter = 100000
[algorithm]
name = tame
schedule = ista
max_iter = 50
)");
  const auto r = invoke({"run", "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitNumerical);
  const auto cmp = load(dir_ / "out" / "comparison.json");
  EXPECT_EQ(cmp["algorithms"][0]["status"], "aborted");
  EXPECT_EQ(cmp["algorithms"][1]["status"], "ok");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "tame.csv"));
}

class AnalyzeTest : public CliTest {
 protected:
  void run_identity(const std::string& schedule, std::int64_t stride = 1) {
    Vector b(3);
    b << 2, 0.4, 1;
    save_instance(dir_ / "id.bin", L1LSInstance(Matrix::Identity(3, 3), b, 1.0));
    const auto cfg = write("exp.cfg", "instance = id.bin\noutput = out\nstride = " + std::to_string(stride) +
                                          "\n[algorithm]\nname = alg\nmax_iter = 60\nschedule = " + schedule + "\n");
    ASSERT_EQ(invoke({"run", "--config", cfg.string()}).code, kExitOk);
  }
};

TEST_F(AnalyzeTest, IstaOnIdentityDesign) {
  run_identity("ista");
  const auto r = invoke({"analyze", "--run-dir", (dir_ / "out").string(), "--rate-only"});
  // A one-step solve leaves too few gap values for a rate fit.
  EXPECT_EQ(r.code, kExitNumerical);
  const auto full = invoke({"analyze", "--run-dir", (dir_ / "out").string()});
  const auto rep = load(dir_ / "out" / "alg.analysis.json");
  ASSERT_TRUE(rep["manifold"]["K_support"].is_number()) << full.err;
  EXPECT_LE(rep["manifold"]["K_support"].get<int>(), 2);
  EXPECT_EQ(rep["manifold"]["D"], json::array({1}));
}

TEST_F(AnalyzeTest, FistaHasNoBounds) {
  const auto cfg = write("exp.cfg", std::string(kSmallExperiment));
  ASSERT_EQ(invoke({"run", "--config", cfg.string()}).code, kExitOk);
  const auto r = invoke({"analyze", "--run-dir", (dir_ / "out").string(), "--algorithm", "fista"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rep = load(dir_ / "out" / "fista.analysis.json");
  EXPECT_TRUE(rep["manifold"]["bound_K_E"].is_null());
  EXPECT_TRUE(rep["manifold"]["bound_K_D"].is_null());
  EXPECT_NE(rep["manifold"]["note"].get<std::string>().find("alpha_k -> 1"), std::string::npos);
}

TEST_F(AnalyzeTest, ConstantMomentumBoundsContainMeasurements) {
  const auto cfg = write("exp.cfg", std::string(kSmallExperiment));
  ASSERT_EQ(invoke({"run", "--config", cfg.string()}).code, kExitOk);
  const auto r = invoke({"analyze", "--run-dir", (dir_ / "out").string(), "--algorithm", "heavy"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto m = load(dir_ / "out" / "heavy.analysis.json")["manifold"];
  ASSERT_TRUE(m["K_sign"].is_number() && m["K_support"].is_number());
  ASSERT_TRUE(m["bound_K_E"].is_number() && m["bound_K_D"].is_number());
  EXPECT_LE(m["K_sign"].get<double>(), m["bound_K_E"].get<double>());
  EXPECT_LE(m["K_support"].get<double>(), m["bound_K_D"].get<double>());
}

TEST_F(AnalyzeTest, StridedSnapshotsNameTheRequirement) {
  run_identity("fista-bt", 5);
  const auto r = invoke({"analyze", "--run-dir", (dir_ / "out").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("stride 1"), std::string::npos);
}

TEST_F(CliTest, ValidateSchedule) {
  auto r = invoke({"validate-schedule", "--schedule", "capped(fista-bt, cap=0.99)", "--lipschitz", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(json::parse(r.out)["convergence_ok"].get<bool>());
  r = invoke({"validate-schedule", "--schedule", "constant(alpha=1)", "--lipschitz", "2"});
  EXPECT_FALSE(json::parse(r.out)["convergence_ok"].get<bool>());
  r = invoke({"validate-schedule", "--schedule", "constant(alpha=0.2)", "--step", "0.5/L, 0.25/L@10", "--lipschitz", "1"});
  EXPECT_FALSE(json::parse(r.out)["convergence_ok"].get<bool>());
  EXPECT_EQ(invoke({"validate-schedule", "--schedule", "fista-bt"}).code, kExitUsage);
  EXPECT_EQ(invoke({"validate-schedule", "--schedule", "nope", "--lipschitz", "1"}).code, kExitUsage);
}

TEST(Config, ParsesGlobalsAndBlocks) {
  std::istringstream in(R"(# experiment
m = 30   # rows
n = 600
sparsity = 4
seed = 9
gap_tol = 1e-11
[algorithm]
name = a
algo = sipm
schedule = constant(alpha=0.2)
step = 0.9/L
max_iter = 77
target_gap = 1e-9
step_tol = 1e-14
restart_test = objective
[algorithm]
schedule = fista-bt
)");
  const auto cfg = parse_config(in, "/base");
  EXPECT_EQ(cfg.generate.m, 30);
  EXPECT_EQ(cfg.generate.seed, 9u);
  EXPECT_EQ(cfg.gap_tol, 1e-11);
  EXPECT_EQ(cfg.output, fs::path("/base/ifbs-out"));
  EXPECT_EQ(cfg.effective_stride(600), 10);
  EXPECT_EQ(cfg.effective_stride(500), 1);
  ASSERT_EQ(cfg.algorithms.size(), 2u);
  EXPECT_EQ(cfg.algorithms[0].algorithm, Algorithm::SIPM);
  EXPECT_EQ(cfg.algorithms[0].max_iter, 77);
  EXPECT_EQ(cfg.algorithms[0].target_gap, 1e-9);
  EXPECT_EQ(cfg.algorithms[0].restart_test, RestartTest::ObjectiveIncrease);
  EXPECT_EQ(cfg.algorithms[1].name, "alg2");
}

TEST(Config, Rejections) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, ".");
  };
  const std::string alg = "\n[algorithm]\nschedule = ista\n";
  EXPECT_THROW(parse("seed = 1\nbogus = 2" + alg), UsageError);
  EXPECT_THROW(parse("seed = 1\nseed = 2" + alg), UsageError);
  EXPECT_THROW(parse("m = 3" + alg), UsageError);
  EXPECT_THROW(parse("seed = 1\ninstance = x.bin" + alg), UsageError);
  EXPECT_THROW(parse("seed = 1\nm = ten" + alg), UsageError);
  EXPECT_THROW(parse("seed = 1\n[solver]\n"), UsageError);
  EXPECT_THROW(parse("seed = 1\n[algorithm]\nname = a/b\n"), UsageError);
  EXPECT_THROW(parse("seed = 1\n[algorithm]\nname = a\n[algorithm]\nname = a\n"), UsageError);
  try {
    parse("seed = 1\n\nfoo\n");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ScheduleSpec, Grammar) {
  const auto step = StepRule::constant(0.5);
  const ScheduleContext ctx{2.0, nullptr, 0.5};
  EXPECT_EQ(parse_schedule("ista", step, ctx).describe(), "constant(alpha=0)");
  EXPECT_EQ(parse_schedule(" capped( fista-bt , cap=0.9 )", step, ctx).describe(), "capped(fista-bt, cap=0.9)");
  EXPECT_EQ(parse_schedule("restart(chambolle-dossal(a=4))", step, ctx).describe(),
            "restart(chambolle-dossal(a=4))");
  EXPECT_EQ(parse_schedule("chambolle-dossal", step, ctx).cd_parameter(), 3.0);
  // l_E = 0.5, lambda = 0.5: (1 - 0.5) / (1 + 0.5).
  EXPECT_NEAR(parse_schedule("optimal", step, ctx).constant_alpha(), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(parse_schedule("adopt(fista-bt)", step, ctx), UsageError);
  EXPECT_THROW(parse_schedule("capped(fista-bt)", step, ctx), UsageError);
  EXPECT_THROW(parse_schedule("constant(beta=1)", step, ctx), UsageError);
  EXPECT_THROW(parse_schedule("constant(alpha=2)", step, ctx), UsageError);
  EXPECT_THROW(parse_schedule("fista-bt extra", step, ctx), UsageError);
  EXPECT_THROW(parse_schedule("optimal", step, ScheduleContext{}), UsageError);
}

TEST(ScheduleSpec, StepRules) {
  EXPECT_EQ(parse_step("1/L", 4.0).at(1), 0.25);
  EXPECT_EQ(parse_step("0.01", 4.0).at(7), 0.01);
  const auto r = parse_step("0.5/L, 1/L@100", 2.0);
  EXPECT_EQ(r.at(99), 0.25);
  EXPECT_EQ(r.at(100), 0.5);
  EXPECT_THROW(parse_step("", 1.0), UsageError);
  EXPECT_THROW(parse_step("x/L", 1.0), UsageError);
  EXPECT_THROW(parse_step("1/L, 2/L", 1.0), UsageError);
  EXPECT_THROW(parse_step("1/L, 2/L@0", 1.0), UsageError);
}

}  // namespace
}  // namespace ifbs::cli
