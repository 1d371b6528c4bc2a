#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "saffn/checkpoint.hpp"
#include "saffn/cli.hpp"
#include "saffn/data.hpp"
#include "test_util.hpp"

namespace saffn {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string echo_block(const std::string& out) {
  const auto a = out.find("# saffn ");
  const auto b = out.find("# end config\n");
  if (a == std::string::npos || b == std::string::npos) return {};
  return out.substr(a, b + 13 - a);
}

std::vector<std::string> tiny_net() {
  return {"--width", "4", "--enc-blocks", "1,1", "--mid-blocks", "1", "--dec-blocks", "1,1"};
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  auto r = cli({"macs", "--bogus-flag", "3"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("bogus-flag"), std::string::npos) << r.err;
  r = cli({"macs", "--width", "abc"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("width"), std::string::npos) << r.err;
  r = cli({"denoise", "--ckpt", "/nonexistent/ck.bin", "--in", "/nonexistent/a.pgm", "--out", "b.pgm"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("ckpt"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"macs", "--kinds", "5"}).code, kExitUsage);
}

TEST(Cli, HelpSucceeds) {
  for (const char* sub : {"synth", "train", "denoise", "eval", "gradcheck", "macs", "ablate"}) {
    auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    EXPECT_NE(r.out.find("--config"), std::string::npos) << sub;
  }
}

TEST(Cli, UnknownConfigKeyIsRejected) {
  testing::TempDir dir("cli");
  std::ofstream(dir.file("bad.cfg")) << "width = 8\nbogus = 1\n";
  auto r = cli({"macs", "--config", dir.file("bad.cfg")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("bogus"), std::string::npos) << r.err;
}

TEST(Cli, MacsDefaultConfig) {
  auto r = cli({"macs", "--size", "256"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("total"), std::string::npos);
  EXPECT_NE(r.out.find("enc3.7"), std::string::npos);
  EXPECT_NE(r.out.find("middle.11"), std::string::npos);
}

TEST(Cli, EchoedConfigRoundTrips) {
  testing::TempDir dir("cli");
  auto args = tiny_net();
  args.insert(args.begin(), "macs");
  for (const char* a : {"--size", "48", "--freq", "complex", "--kinds", "8", "--smb", "false"}) args.push_back(a);
  auto first = cli(args);
  ASSERT_EQ(first.code, kExitOk) << first.err;
  std::ofstream(dir.file("echo.cfg")) << echo_block(first.out);
  auto second = cli({"macs", "--config", dir.file("echo.cfg")});
  ASSERT_EQ(second.code, kExitOk) << second.err;
  EXPECT_EQ(first.out, second.out);
  // Flags override the file.
  auto third = cli({"macs", "--config", dir.file("echo.cfg"), "--size", "32"});
  EXPECT_NE(third.out.find("size = 32"), std::string::npos);
}

TEST(Cli, SynthTrainDenoiseEval) {
  testing::TempDir dir("cli");
  const auto data = dir.file("data");
  auto r = cli({"synth", "--count", "3", "--size", "16", "--seed", "5", "--out-dir", data});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto manifest = read_manifest(data + "/manifest.tsv");
  ASSERT_EQ(manifest.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(data + "/img_0002.pgm"));

  // A fresh checkpoint is the identity model.
  auto targs = tiny_net();
  targs.insert(targs.begin(), "train");
  for (const auto& a : {std::string("--iters"), std::string("0"), std::string("--ckpt"), dir.file("fresh.bin")})
    targs.push_back(a);
  r = cli(targs);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = cli({"denoise", "--ckpt", dir.file("fresh.bin"), "--in", data + "/img_0001.pgm", "--out", dir.file("out.pgm"),
           "--dump-features", dir.file("feat")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(dir.file("out.pgm")), slurp(data + "/img_0001.pgm"));
  EXPECT_TRUE(std::filesystem::exists(dir.file("feat/residual_c000.pgm")));

  r = cli({"eval", "--ckpt", dir.file("fresh.bin"), "--data", data + "/manifest.tsv", "--sigma", "0", "--kv",
           dir.file("report.kv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(slurp(dir.file("report.kv")).find("mean_psnr = 100"), std::string::npos);
}

TEST(Cli, TrainingIsDeterministic) {
  testing::TempDir dir("cli");
  const auto data = dir.file("data");
  ASSERT_EQ(cli({"synth", "--count", "2", "--size", "16", "--out-dir", data}).code, kExitOk);
  auto run = [&](const std::string& tag) {
    auto a = tiny_net();
    a.insert(a.begin(), "train");
    for (const auto& s : {std::string("--data"), data + "/manifest.tsv", std::string("--iters"), std::string("4"),
                          std::string("--batch"), std::string("2"), std::string("--crop"), std::string("8"),
                          std::string("--seed"), std::string("3"), std::string("--ckpt"), dir.file(tag + ".bin")})
      a.push_back(s);
    auto r = cli(a);
    EXPECT_EQ(r.code, kExitOk) << r.err;
    std::istringstream log(slurp(dir.file(tag + ".bin.log")));
    std::string line, stripped;
    while (std::getline(log, line)) stripped += line.substr(0, line.rfind('\t')) + "\n";
    return stripped;
  };
  const auto a = run("a"), b = run("b");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(slurp(dir.file("a.bin")), slurp(dir.file("b.bin")));
}

TEST(Cli, ResumeRejectsConfigMismatch) {
  testing::TempDir dir("cli");
  auto a = tiny_net();
  a.insert(a.begin(), "train");
  a.push_back("--iters");
  a.push_back("0");
  a.push_back("--ckpt");
  a.push_back(dir.file("c.bin"));
  ASSERT_EQ(cli(a).code, kExitOk);
  auto r = cli({"train", "--width", "8", "--enc-blocks", "1,1", "--mid-blocks", "1", "--dec-blocks", "1,1",
                "--iters", "0", "--resume", dir.file("c.bin"), "--ckpt", dir.file("d.bin")});
  EXPECT_EQ(r.code, kExitUsage) << r.err;
}

TEST(Cli, GradcheckSubset) {
  auto r = cli({"gradcheck", "--case", "simple_gate", "--case", "sffb", "--precision", "both"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(cli({"gradcheck", "--case", "no-such-op"}).code, kExitUsage);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  testing::TempDir dir("cli");
  std::ofstream(dir.file("junk.bin")) << "not a checkpoint";
  std::ofstream(dir.file("a.pgm")) << "P5\n1 1\n255\n" << char(7);
  auto r = cli({"denoise", "--ckpt", dir.file("junk.bin"), "--in", dir.file("a.pgm"), "--out", dir.file("b.pgm")});
  EXPECT_EQ(r.code, kExitRuntime) << r.err;
}

}  // namespace
}  // namespace saffn
