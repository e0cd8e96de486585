/*
 * Copyright 2026 The dcp Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dcp/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace dcp {
namespace {

const std::string kFixtures = std::string(DCP_SOURCE_DIR) + "/fixtures";

std::string path_of_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.path();
  }
  ADD_FAILURE() << "accepted: " << text;
  return "";
}

const char* kMinimal = R"({"passengers": [{"name": "a"}]})";

TEST(ScenarioTest, MinimalDefaults) {
  const Scenario s = parse_scenario(kMinimal);
  EXPECT_EQ(s.d, 128u);
  EXPECT_EQ(s.q, 127);
  EXPECT_EQ(s.group, GroupProfile::kTest);
  EXPECT_EQ(s.face_threshold(), 8064);
  ASSERT_EQ(s.passengers.size(), 1u);
  EXPECT_TRUE(s.passengers[0].has_device);
  EXPECT_EQ(s.passengers[0].transport.name, "ble");
  EXPECT_FALSE(s.command);
}

TEST(ScenarioTest, AllFixturesLoadAndRoundTrip) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kFixtures)) {
    if (entry.path().extension() != ".json") continue;
    const Scenario s = load_scenario(entry.path().string());
    const Scenario again = scenario_from_json(to_json(s));
    EXPECT_EQ(to_json(again), to_json(s)) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 6);
}

TEST(ScenarioTest, ErrorsNameTheField) {
  EXPECT_EQ(path_of_error(R"({"passengers": []})"), "passengers");
  EXPECT_EQ(path_of_error(R"({})"), "passengers");
  EXPECT_EQ(path_of_error(R"({"passengers": [{"sigma": -1}]})"), "passengers[0].sigma");
  EXPECT_EQ(path_of_error(R"({"passengers": [{"sigma": "x"}]})"), "passengers[0].sigma");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}, {"colour": 1}]})"), "passengers[1].colour");
  EXPECT_EQ(path_of_error(R"({"passengers": [{"transport": "zigbee"}]})"), "passengers[0].transport");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "thresholds": {"face_cos": 1.5}})"), "thresholds.face_cos");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "Q": 1000})"), "Q");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "captures": [{"time": 1, "passengers": [3]}]})"),
            "captures[0].passengers[0]");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "command": {"transcript": "pay toll", "speaker": 2}})"),
            "command.speaker");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "command": {"speaker": 0}})"), "command.transcript");
  EXPECT_EQ(path_of_error(R"({"passengers": [{"voice_twin_of": 0}]})"), "passengers[0].voice_twin_of");
  EXPECT_EQ(path_of_error(R"({"passengers": [{"face": [1, 2]}]})"), "passengers[0].face");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "group": "fast"})"), "group");
  EXPECT_EQ(path_of_error(R"({"passengers": [{}], "seeed": 1})"), "seeed");
}

TEST(ScenarioTest, SyntaxErrorsCarryPosition) {
  try {
    parse_scenario("{\n  \"passengers\": [\n    {\"name\": }\n]}");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ScenarioTest, FileErrorsNameTheFile) {
  try {
    load_scenario("/nonexistent/ride.json");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/ride.json"), std::string::npos);
  }
}

TEST(ScenarioTest, RandomScenariosAreValid) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const Scenario s = random_scenario(rng);
    EXPECT_NO_THROW(validate(s));
    EXPECT_EQ(to_json(scenario_from_json(to_json(s))), to_json(s));
  }
}

}  // namespace
}  // namespace dcp
