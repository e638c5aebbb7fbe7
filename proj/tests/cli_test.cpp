// Copyright 2026 The KKT-Net Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "kktnet/cli.hpp"

namespace kktnet::cli {
namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kktnet");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path Dir() {
  const fs::path dir = fs::temp_directory_path() / "kktnet_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(CliTest, GenWritesRequestedCount) {
  const auto path = (Dir() / "gen.jsonl").string();
  const Invocation r = Invoke({"gen", "--count", "100", "--seed", "7", "--out", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string text = Slurp(path);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 100);
  EXPECT_NE(r.err.find("acceptance"), std::string::npos);
}

TEST(CliTest, ContradictoryWeightsAreValidationErrors) {
  const auto data = (Dir() / "v.jsonl").string();
  fs::remove(Dir() / "m.json");
  ASSERT_EQ(Invoke({"gen", "--count", "4", "--seed", "1", "--out", data}).code, kExitOk);
  const Invocation r = Invoke({"train", "--data", data, "--loss", "kkt", "--beta", "1", "--seed", "0",
                        "--model-out", (Dir() / "m.json").string(), "--curve-out",
                        (Dir() / "c.csv").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_FALSE(fs::exists(Dir() / "m.json"));
}

TEST(CliTest, SolvePrintsExactPoint) {
  const Invocation r = Invoke({"solve", "--a", "1,0,0,1", "--b", "1,1", "--c", "-1,-1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "{\"status\":\"optimal\",\"x\":[1,1],\"lambda\":[1,1]}\n");
  const Invocation unbounded = Invoke({"solve", "--a", "1,0,0,1", "--b", "1,1", "--c", "1,1"});
  EXPECT_NE(unbounded.out.find("\"status\":\"unbounded\""), std::string::npos);
  EXPECT_EQ(Invoke({"solve", "--a", "1,0,0", "--b", "1,1", "--c", "1,1"}).code,
            kExitValidation);
}

TEST(CliTest, HelpAndBadFlags) {
  for (const char* sub : {"gen", "train", "eval", "solve", "gradcheck"}) {
    const Invocation r = Invoke({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({"gen", "--bogus"}).code, kExitValidation);
  EXPECT_EQ(Invoke({"train", "--loss", "mse"}).code, kExitValidation);
  EXPECT_EQ(Invoke({}).code, kExitValidation);
}

TEST(CliTest, MissingInputIsRuntimeError) {
  const Invocation r = Invoke({"eval", "--model", (Dir() / "absent.json").string(), "--data",
                        (Dir() / "absent.jsonl").string(), "--out-dir", Dir().string()});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(CliTest, PipelineIsIdempotent) {
  const fs::path d = Dir() / "pipe";
  fs::remove_all(d);
  fs::create_directories(d);
  const auto pipeline = [&](const std::string& tag) {
    const auto data = (d / (tag + ".jsonl")).string();
    const auto model = (d / (tag + "_model.json")).string();
    const auto curve = (d / (tag + "_curve.csv")).string();
    const auto out = (d / (tag + "_eval")).string();
    EXPECT_EQ(Invoke({"gen", "--count", "20", "--seed", "3", "--out", data}).code, kExitOk);
    EXPECT_EQ(Invoke({"train", "--data", data, "--loss", "combined", "--epochs", "3", "--batch",
                      "8", "--hidden", "8", "--seed", "1", "--model-out", model, "--curve-out",
                      curve})
                  .code,
              kExitOk);
    EXPECT_EQ(Invoke({"eval", "--model", model, "--data", data, "--out-dir", out, "--svg",
                      "--curve", curve})
                  .code,
              kExitOk);
  };
  pipeline("a");
  pipeline("b");
  for (const char* suffix : {".jsonl", "_model.json", "_curve.csv", "_eval/rmse.csv",
                             "_eval/cdf_x1.csv", "_eval/cdf_lambda2.svg", "_eval/loss_curve.svg"}) {
    EXPECT_EQ(Slurp(d / ("a" + std::string(suffix))), Slurp(d / ("b" + std::string(suffix))))
        << suffix;
    EXPECT_FALSE(Slurp(d / ("a" + std::string(suffix))).empty()) << suffix;
  }
}

TEST(CliTest, GradcheckReportsPerMode) {
  const Invocation r = Invoke({"gradcheck", "--seed", "0", "--draws", "3"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  for (const char* mode : {"\"kkt\"", "\"data\"", "\"combined\""}) {
    EXPECT_NE(r.out.find(mode), std::string::npos);
  }
}

}  // namespace
}  // namespace kktnet::cli
