#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"

using s2r::testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(S2R_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), p)) out += buf.data();
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

nlohmann::json error_line(const std::string& out) {
  auto pos = out.find("error: ");
  if (pos == std::string::npos) return {};
  auto end = out.find('\n', pos);
  return nlohmann::json::parse(out.substr(pos + 7, end - pos - 7));
}

}  // namespace

TEST(Cli, MissingConfigGivesErrorLine) {
  auto r = run("train-s2r /nonexistent/config.json");
  EXPECT_NE(r.code, 0);
  auto j = error_line(r.out);
  EXPECT_EQ(j["code"], "config");
  EXPECT_TRUE(j.contains("message"));
}

TEST(Cli, BadHexIsRejected) {
  TempDir dir("cli");
  auto r = run("embed --image " + (dir / "x.png").string() + " --message-hex zz --checkpoint " +
               (dir / "c").string() + " --out " + (dir / "o.png").string());
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(error_line(r.out).is_null());
}

TEST(Cli, SimulateAndHistCompare) {
  TempDir dir("cli");
  ASSERT_EQ(run("synth-data --out " + (dir / "a").string() + " --count 3 --resolution 16").code, 0);
  auto r = run("simulate --input " + (dir / "a").string() + " --output " + (dir / "b").string() +
               " --pipeline oracle --resolution 16");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "b" / "params.csv"));
  r = run("hist-compare --a " + (dir / "a").string() + " --b " + (dir / "b").string() +
          " --csv " + (dir / "h.csv").string() + " --resolution 16");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "h.csv"));
  r = run("plot --csv " + (dir / "h.csv").string() + " --out " + (dir / "h.png").string() +
          " --columns freq_a,freq_b");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "h.png"));
}

TEST(Cli, UnknownPresetFails) {
  TempDir dir("cli");
  auto r = run("simulate --input " + dir.path().string() + " --output " + (dir / "o").string() +
               " --pipeline nope");
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(error_line(r.out).is_null());
}
