#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mrf/artifacts.hpp"
#include "mrf/bundle.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string err;
};

class Cli : public testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("mrf_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string p(const std::string& name) { return (dir_ / name).string(); }

  static RunResult run(const std::string& args) {
    const std::string err_file = p("stderr.txt");
    const std::string cmd = std::string(MRF_CLI_PATH) + " " + args + " > " + p("stdout.txt") + " 2> " + err_file;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
  }

  static std::string out() {
    std::ifstream in(p("stdout.txt"));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static inline fs::path dir_;
};

nlohmann::json error_line(const std::string& err) {
  const auto nl = err.find('\n');
  return nlohmann::json::parse(err.substr(0, nl));
}

}  // namespace

TEST_F(Cli, PipelineStages) {
  const std::string seq = " --frames 40 ";
  ASSERT_EQ(run("simulate-dict --t1 200:100:2000 --t2 20:20:300" + seq + "--out " + p("dict.mrfb")).code, 0);
  ASSERT_EQ(run("learn-subspace --dict " + p("dict.mrfb") + " --rank 4 --out " + p("basis.mrfb")).code, 0);
  EXPECT_NE(out().find("energy_fraction"), std::string::npos);
  ASSERT_EQ(run("make-phantom --size 24 24 --preset head --out " + p("gt.mrfb")).code, 0);
  ASSERT_EQ(run("acquire --gt " + p("gt.mrfb") + seq + "--accel 4 --coils 2 --seed 3 --out " + p("k.mrfb")).code, 0);
  for (const std::string mode : {"bpi", "lr", "lrtv"}) {
    const std::string lambda = mode == "lrtv" ? " --lambda 0.001" : "";
    const auto r = run("reconstruct --mode " + mode + lambda + " --iters 5 --in " + p("k.mrfb") + " --basis " +
                       p("basis.mrfb") + " --out " + p("x_" + mode + ".mrfb") + " --trace " + p("trace.csv"));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  ASSERT_EQ(run("match --dict " + p("dict.mrfb") + " --basis " + p("basis.mrfb") + " --in " + p("x_lrtv.mrfb") +
                " --out " + p("maps_match.mrfb") + " --pgm " + p("match"))
                .code,
            0);
  EXPECT_TRUE(fs::exists(p("match_t1.pgm")));
  ASSERT_EQ(run("train-net --dict " + p("dict.mrfb") + " --basis " + p("basis.mrfb") +
                " --augment 2 --epochs 1 --hidden1 16 --hidden2 16 --report " + p("train.csv") + " --out " + p("net.mrfb"))
                .code,
            0);
  ASSERT_EQ(run("infer --net " + p("net.mrfb") + " --in " + p("x_lr.mrfb") + " --out " + p("maps_net.mrfb")).code, 0);
  ASSERT_EQ(run("score --est " + p("maps_match.mrfb") + " --gt " + p("gt.mrfb") + " --label lrtv --out " + p("m.csv")).code, 0);

  const auto maps = mrf::maps_from_bundle(mrf::read_bundle(p("maps_match.mrfb")));
  EXPECT_EQ(maps.shape.height, 24u);
  const auto x = mrf::read_bundle(p("x_lr.mrfb"));
  EXPECT_EQ(x.at("x_subspace").shape(), (std::vector<std::int64_t>{4, 24, 24}));
  std::ifstream csv(p("m.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "method,parameter,metric,value");
  std::string row;
  std::getline(csv, row);
  EXPECT_EQ(row.rfind("lrtv,T1,RMSE,", 0), 0u);
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("reconstruct --mode xyz --in a --basis b --out c").code, 1);
  EXPECT_EQ(run("reconstruct --mode lr --lambda 0.1 --in a --basis b --out c").code, 1);
  const auto r = run("learn-subspace --dict");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r.err)["exit_code"], 1);
}

TEST_F(Cli, MissingInputExitsWithTwo) {
  const auto r = run("learn-subspace --dict " + p("nope.mrfb") + " --rank 3 --out " + p("b.mrfb"));
  EXPECT_EQ(r.code, 2);
  const auto j = error_line(r.err);
  EXPECT_EQ(j["exit_code"], 2);
  EXPECT_TRUE(j.contains("error"));
  EXPECT_NE(j["message"].get<std::string>().find("nope.mrfb"), std::string::npos);
}

TEST_F(Cli, CorruptBundleExitsWithTwo) {
  std::ofstream(p("junk.mrfb")) << "not a bundle at all";
  EXPECT_EQ(run("learn-subspace --dict " + p("junk.mrfb") + " --rank 3 --out " + p("b.mrfb")).code, 2);
}

TEST_F(Cli, BadConfigExitsWithOne) {
  std::ofstream(p("bad.json")) << R"({"solver": {"lamda": 1}})";
  const auto r = run("run-experiment --config " + p("bad.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(error_line(r.err)["message"].get<std::string>().find("/solver/lamda"), std::string::npos);
}

TEST_F(Cli, PrintSchema) {
  ASSERT_EQ(run("print-schema").code, 0);
  const auto shipped = nlohmann::json::parse(std::ifstream(std::string(MRF_SOURCE_DIR) + "/schemas/experiment.schema.json"));
  EXPECT_EQ(nlohmann::json::parse(out()), shipped);
}
