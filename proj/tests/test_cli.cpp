#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MGS_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string model(const std::string& name) { return std::string(MGS_MODELS_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "mgs-cli-XXXXXX").string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }

 private:
  fs::path path_;
};

}  // namespace

TEST(Cli, CheckPassesOnTwoHump) {
  const auto r = run("check --model " + model("two_hump.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["assumptions"]["all_pass"].get<bool>());
  EXPECT_EQ(j["structure"]["n"], 2);
}

TEST(Cli, CheckSkipsA5InTwoDimensions) {
  const auto r = run("check --N 2 --model " + model("two_hump.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  bool seen = false;
  for (const auto& e : j["assumptions"]["entries"])
    if (e["assumption"] == "A5") {
      seen = true;
      EXPECT_TRUE(e["skipped"].get<bool>());
    }
  EXPECT_TRUE(seen);
}

TEST(Cli, ParseErrorExitsOne) {
  TempDir d;
  const auto bad = d.write("bad.json", R"({"type":"polynomial","coefficients":[]})");
  EXPECT_EQ(run("check --model " + bad.string()).code, 1);
  EXPECT_EQ(run("solve --lambda -1 --model " + model("two_hump.json")).code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST(Cli, FailingAssumptionExitsTwo) {
  TempDir d;
  const auto m = d.write(
      "low.json",
      R"({"type":"piecewise_linear","knots":[[0,0],[0.5,-1],[1,0],[2,100],[3,0],[3.5,-200],[4,0],[4.5,150],[5,0],[5.5,-1],[7,-1]],"search_max":8})");
  EXPECT_EQ(run("check --model " + m.string()).code, 2);
  EXPECT_EQ(run("solve --model " + m.string()).code, 2);
}

TEST(Cli, ClassifyWritesReportAndTrajectory) {
  TempDir d;
  const auto r = run("classify --zeta 1.5 --model " + model("two_hump.json") + " --out " + d.path().string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["classification"]["verdict"], "Plus");
  EXPECT_TRUE(fs::exists(d.path() / "classify.json"));
  const auto csv = slurp(d.path() / "trajectory.csv");
  EXPECT_EQ(csv.rfind("r,u,uprime,q,E\n", 0), 0u);
}

TEST(Cli, SweepRowCount) {
  const auto r = run("sweep --hump 1 --grid 40 --model " + model("two_hump.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 41);
  EXPECT_EQ(r.out.rfind("zeta,verdict,radius,u_end,slope_end,ambiguous\n", 0), 0u);
  EXPECT_EQ(run("sweep --hump 3 --model " + model("two_hump.json")).code, 1);
}

TEST(Cli, SolveReportsPartialResultAndIsReproducible) {
  TempDir a, b;
  const std::string args = "solve --lambda 1 --model " + model("two_hump.json") + " --out ";
  const auto ra = run(args + a.path().string());
  const auto rb = run(args + b.path().string());
  EXPECT_EQ(ra.code, 3);
  EXPECT_EQ(rb.code, 3);
  const auto j = nlohmann::json::parse(ra.out);
  ASSERT_EQ(j["ground_states"].size(), 1u);
  EXPECT_EQ(j["ground_states"][0]["k"], 1);
  ASSERT_EQ(j["failures"].size(), 1u);
  EXPECT_EQ(j["failures"][0]["k"], 2);
  EXPECT_TRUE(fs::exists(a.path() / "profile_k1.csv"));
  for (const char* f : {"solve.json", "profile_k1.csv"}) EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
}

TEST(Cli, CubicSolveSucceeds) {
  const auto r = run("solve --lambda 10 --model " + model("cubic.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["ground_states"].size(), 1u);
  EXPECT_GT(j["ground_states"][0]["zeta_star"].get<double>(), 1.4142135623730951);
}

TEST(Cli, ThresholdBothEndsFailIsPrecondition) {
  EXPECT_EQ(run("threshold --hump 2 --lambda-lo 0.5 --lambda-hi 2 --steps 1 --mesh 128 --model " +
                model("two_hump.json"))
                .code,
            1);
}
