// Copyright 2026 The MPQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpq/config.h"
#include "mpq/harness.h"

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace mpq {
namespace {

Json BaseConfig() {
  return Json::parse(R"({
    "env": {"name": "pendulum"},
    "agent": "mpq",
    "mppi": {"horizon": 8, "samples": 24, "sigma": 4.0, "lambda": 0.15,
             "alpha": 0.5, "gamma": 0.9},
    "learner": {"episodes": 3},
    "seed": 7
  })");
}

std::string ErrorOf(const Json& j) {
  try {
    ParseConfig(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, MissingLambdaIsNamed) {
  Json j = BaseConfig();
  j["mppi"].erase("lambda");
  EXPECT_EQ(ErrorOf(j), "mppi.lambda is required");
}

TEST(ConfigTest, RequiredFields) {
  Json j = BaseConfig();
  j.erase("seed");
  EXPECT_EQ(ErrorOf(j), "config.seed is required");
  j = BaseConfig();
  j.erase("learner");
  EXPECT_EQ(ErrorOf(j), "learner is required for this agent");
  j = BaseConfig();
  j["learner"].erase("episodes");
  EXPECT_EQ(ErrorOf(j), "learner.episodes is required");
  j = BaseConfig();
  j["agent"] = "mppi";
  j.erase("learner");
  EXPECT_EQ(ErrorOf(j), "eval.episodes is required");
  j["eval"] = {{"episodes", 4}};
  EXPECT_EQ(ErrorOf(j), "");
}

TEST(ConfigTest, UnknownKeysAreRejected) {
  Json j = BaseConfig();
  j["mppi"]["temprature"] = 1.0;
  EXPECT_EQ(ErrorOf(j), "mppi.temprature: unknown key");
  j = BaseConfig();
  j["env"]["true_params"] = {{"inertia", 1.0}};
  EXPECT_EQ(ErrorOf(j), "env.true_params.inertia: unknown key");
}

TEST(ConfigTest, InvalidValues) {
  Json j = BaseConfig();
  j["mppi"]["sigma"] = 0.0;
  EXPECT_NE(ErrorOf(j).find("positive definite"), std::string::npos);
  j = BaseConfig();
  j["mppi"]["horizon"] = "eight";
  EXPECT_EQ(ErrorOf(j), "mppi.horizon: wrong type");
  j = BaseConfig();
  j["env"]["name"] = "acrobot";
  EXPECT_NE(ErrorOf(j).find("unknown environment"), std::string::npos);
  j = BaseConfig();
  j["env"]["distribution"] = {{"mass", {1.5, 0.9}}};
  EXPECT_NE(ErrorOf(j).find("low > high"), std::string::npos);
}

TEST(ConfigTest, DefaultsAndOverrides) {
  Json j = BaseConfig();
  j["env"]["true_params"] = {{"mass", 1.2}};
  j["env"]["constants"] = {{"max_speed", 6.0}};
  ExperimentConfig c = ParseConfig(j);
  EXPECT_EQ(c.mppi.iterations, 1);
  EXPECT_EQ(c.mppi.covariance, Vector::Constant(1, 4.0));
  EXPECT_EQ(c.env.true_params[0], 1.2);
  EXPECT_EQ(c.env.true_params[1], 1.0);
  EXPECT_EQ(c.env.constant("max_speed"), 6.0);
  EXPECT_EQ(c.learner.update_period, 5);
  EXPECT_EQ(c.learner.batch_size, 64);
  EXPECT_EQ(c.eval.planner, PlannerModel::kBiased);
  EXPECT_EQ(c.eval.seed, 7u + 1000003u);
}

TEST(ConfigTest, SigmaPerDimension) {
  Json j = BaseConfig();
  j["env"]["name"] = "catch";
  j["mppi"]["sigma"] = {1.0, 2.0};
  EXPECT_EQ(ParseConfig(j).mppi.covariance, (Vector(2) << 1.0, 2.0).finished());
  j["mppi"]["sigma"] = {1.0};
  EXPECT_NE(ErrorOf(j), "");
}

TEST(ConfigTest, SoftQEchoesHorizonOne) {
  Json j = BaseConfig();
  j["agent"] = "softq";
  ExperimentConfig c = ParseConfig(j);
  EXPECT_EQ(c.mppi.horizon, 1);
  EXPECT_EQ(ConfigToJson(c)["mppi"]["horizon"], 1);
}

TEST(ConfigTest, EchoRoundTrip) {
  for (const char* env : {"pendulum", "catch"}) {
    Json j = BaseConfig();
    j["env"]["name"] = env;
    const Json echo = ConfigToJson(ParseConfig(j));
    const Json again = ConfigToJson(ParseConfig(echo));
    EXPECT_EQ(echo, again) << env;
    // textual form survives as well
    EXPECT_EQ(ConfigToJson(ParseConfig(Json::parse(echo.dump()))).dump(),
              echo.dump());
  }
}

TEST(ConfigTest, FilesMayContainComments) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "mpq_config_test.json").string();
  {
    std::ofstream out(path);
    out << "// header comment\n"
        << "{\n  \"env\": {\"name\": \"pendulum\"},  /* inline */\n"
        << "  \"agent\": \"mppi\",\n"
        << "  \"mppi\": {\"horizon\": 4, \"samples\": 8, \"sigma\": 4.0,\n"
        << "           \"lambda\": 0.15, \"alpha\": 0.5, \"gamma\": 0.9},\n"
        << "  \"eval\": {\"episodes\": 2},\n  \"seed\": 1\n}\n";
  }
  ExperimentConfig c = LoadConfig(path);
  EXPECT_EQ(c.agent, AgentKind::kMppi);
  EXPECT_EQ(c.eval.episodes, 2);
  std::filesystem::remove(path);
  EXPECT_THROW(LoadConfig(path), ConfigError);
}

// every shipped config is valid; suite files are checked cell by cell
TEST(ConfigTest, ShippedConfigsParse) {
  int count = 0;
  for (const auto& entry :
       std::filesystem::directory_iterator(MPQ_SOURCE_DIR "/configs")) {
    const Json j = ReadJsonFile(entry.path().string());
    if (j.contains("cells")) {
      for (const SuiteCell& cell : ParseSuiteCells(j)) {
        EXPECT_NO_THROW(ParseConfig(cell.config)) << entry.path() << " " << cell.name;
      }
    } else {
      EXPECT_NO_THROW(ParseConfig(j)) << entry.path();
    }
    ++count;
  }
  EXPECT_GE(count, 8);
}

}  // namespace
}  // namespace mpq
