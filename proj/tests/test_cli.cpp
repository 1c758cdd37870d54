#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

const std::filesystem::path kTmp = std::filesystem::temp_directory_path();

int run(const std::string& args) {
  const std::string cmd = std::string(CURSOR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kSmall = "--n1 8 --n2 9 --c 10 --k 3 --r 4 --record_timing false";

}  // namespace

TEST(Cli, MatchSucceeds) {
  const auto out = kTmp / "cursor_cli_match.csv";
  EXPECT_EQ(run("--seed 3 --out " + out.string() + " match " + kSmall), 0);
  const auto text = slurp(out);
  EXPECT_EQ(text.rfind("trial,method,", 0), 0U);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  std::filesystem::remove(out);
}

TEST(Cli, SeededOutputByteIdentical) {
  const auto a = kTmp / "cursor_cli_a.json", b = kTmp / "cursor_cli_b.json";
  const std::string args = " --format json match " + kSmall + " --trials 2";
  ASSERT_EQ(run("--seed 5 --out " + a.string() + args), 0);
  ASSERT_EQ(run("--seed 5 --out " + b.string() + args), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Cli, GenBenchAndSweep) {
  const auto bundle = kTmp / "cursor_cli_bundle.json";
  EXPECT_EQ(run("--out " + bundle.string() + " gen --n1 6 --n2 7"), 0);
  EXPECT_TRUE(std::filesystem::exists(bundle));
  const auto cfg = kTmp / "cursor_cli_cfg.json";
  std::ofstream(cfg) << R"({"problem": "bundle", "bundle_path": ")" << bundle.string()
                     << R"(", "c": 8, "k": 3, "r": 4, "trials": 1})";
  EXPECT_EQ(run("bench --config " + cfg.string()), 0);
  EXPECT_EQ(run("sweep " + kSmall + " --trials 1 --axis k --values 1,2"), 0);
  std::filesystem::remove(bundle);
  std::filesystem::remove(cfg);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("match --bogus 1"), 2);
  EXPECT_EQ(run("match --alpha 2"), 2);
  EXPECT_EQ(run("match --k zero"), 2);
  EXPECT_EQ(run("bench"), 2);
  EXPECT_EQ(run("sweep --axis nope --values 1"), 2);
  const auto cfg = kTmp / "cursor_cli_unknown.json";
  std::ofstream(cfg) << R"({"n1": 10, "unknown_key": 1})";
  EXPECT_EQ(run("bench --config " + cfg.string()), 2);
  std::filesystem::remove(cfg);
}

TEST(Cli, ResourceErrorExitsThree) {
  EXPECT_EQ(run("match --n1 60 --n2 60 --pipeline baseline_prl --budget 1000"), 3);
}

TEST(Cli, IoErrorsExitFour) {
  EXPECT_EQ(run("--out /nonexistent/dir/out.csv match " + kSmall), 4);
  EXPECT_EQ(run("bench --config /nonexistent/cfg.json"), 4);
  EXPECT_EQ(run("match --problem bundle --bundle_path /nonexistent/b.json"), 4);
}
