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

#include "dcp/simulator.hpp"

#include <gtest/gtest.h>

namespace dcp {
namespace {

const std::string kFixtures = std::string(DCP_SOURCE_DIR) + "/fixtures/";

RideResult run_fixture(const std::string& name, RunOptions opt = {}) {
  return run_scenario(load_scenario(kFixtures + name + ".json"), opt);
}

TEST(SimulatorTest, DriveThroughPaysTheSpeaker) {
  const auto r = run_fixture("drive_through").report;
  ASSERT_TRUE(r.decision);
  EXPECT_EQ(r.decision->outcome, DecisionOutcome::kUniquePayer);
  EXPECT_EQ(r.decision->payer, 1u);
  EXPECT_TRUE(r.correct());
  EXPECT_TRUE(r.oracle_agrees());
  EXPECT_EQ(r.candidates, (std::vector<std::size_t>{0, 1, 2}));
  ASSERT_TRUE(r.receipt);
  EXPECT_NE(r.receipt->find("fast_food:120@Burger Barn"), std::string::npos);
  ASSERT_TRUE(r.command);
  EXPECT_EQ(r.command->slot, 120u);
  EXPECT_EQ(r.enrollments.size(), 3u);
  EXPECT_EQ(r.privacy_violations, 0u);
  EXPECT_GT(r.expansion_factor, 1.0);
}

TEST(SimulatorTest, FixtureOutcomes) {
  struct Case {
    const char* name;
    DecisionOutcome outcome;
    std::optional<std::size_t> payer;
  };
  for (const Case& c : {Case{"toll", DecisionOutcome::kUniquePayer, 0},
                        Case{"parking", DecisionOutcome::kUniquePayer, 1},
                        Case{"fuel_secure", DecisionOutcome::kUniquePayer, 0},
                        Case{"twins", DecisionOutcome::kMultipleMatches, std::nullopt},
                        Case{"no_device", DecisionOutcome::kNoMatch, std::nullopt}}) {
    const auto r = run_fixture(c.name).report;
    ASSERT_TRUE(r.decision) << c.name;
    EXPECT_EQ(r.decision->outcome, c.outcome) << c.name;
    EXPECT_EQ(r.decision->payer, c.payer) << c.name;
    EXPECT_TRUE(r.correct()) << c.name;
    EXPECT_TRUE(r.oracle_agrees()) << c.name;
    EXPECT_EQ(r.privacy_violations, 0u) << c.name;
  }
}

TEST(SimulatorTest, TwinsRaiseRecourse) {
  const auto r = run_fixture("twins").report;
  EXPECT_EQ(r.decision->matched, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.messages.at("RecourseNotice").count, 2u);
  EXPECT_FALSE(r.receipt);
}

TEST(SimulatorTest, SecureEnrollmentOverBle) {
  const auto r = run_fixture("fuel_secure").report;
  ASSERT_EQ(r.enrollments.size(), 1u);
  EXPECT_EQ(r.enrollments[0].bytes, 16439u);
  EXPECT_NEAR(r.enrollments[0].transfer_seconds, 10.0, 2.0);
}

TEST(SimulatorTest, DeterministicForASeed) {
  const auto a = run_fixture("drive_through");
  const auto b = run_fixture("drive_through");
  EXPECT_EQ(a.artifacts.trace, b.artifacts.trace);
  EXPECT_EQ(to_json(a.report).dump(), to_json(b.report).dump());
  const auto c = run_fixture("drive_through", RunOptions{.seed = 8});
  EXPECT_NE(a.artifacts.trace, c.artifacts.trace);
  EXPECT_EQ(c.report.seed, 8u);
}

TEST(SimulatorTest, GoldenTrace) {
  EXPECT_EQ(sha256_hex(run_fixture("drive_through").artifacts.trace),
            "edd0557cc4aeb57b01d98643ea244eecab5264451575f24d428c8c9a0fcd6438");
}

TEST(SimulatorTest, WallTimingsOnlyWhenAsked) {
  EXPECT_FALSE(to_json(run_fixture("toll").report).contains("wall_ms"));
  EXPECT_TRUE(to_json(run_fixture("toll", RunOptions{.seed = std::nullopt, .timings = true}).report).contains("wall_ms"));
}

TEST(SimulatorTest, MissingTriggerMeansNoPayment) {
  Scenario s = load_scenario(kFixtures + "toll.json");
  s.command->transcript = "pay for toll";
  const auto r = run_scenario(s).report;
  EXPECT_FALSE(r.triggered);
  EXPECT_FALSE(r.decision);
  EXPECT_EQ(r.messages.count("PaymentRequest"), 0u);
}

TEST(SimulatorTest, CommandErrorsAreReported) {
  Scenario s = load_scenario(kFixtures + "toll.json");
  s.command->transcript = "hey dashcam pay for groceries";
  const auto r = run_scenario(s).report;
  EXPECT_FALSE(r.decision);
  EXPECT_NE(r.command_error.find("unknown-use-case"), std::string::npos) << r.command_error;
}

TEST(SimulatorTest, UnenrolledSpeakerIsNotCharged) {
  Scenario s = load_scenario(kFixtures + "toll.json");
  s.passengers[0].enrolled = false;
  const auto r = run_scenario(s).report;
  ASSERT_TRUE(r.decision);
  EXPECT_EQ(r.decision->outcome, DecisionOutcome::kNoMatch);
  EXPECT_TRUE(r.correct());
}

TEST(SimulatorTest, AbsentFaceWithoutRefreshLeavesCandidates) {
  Scenario s = load_scenario(kFixtures + "toll.json");
  s.refresh_prescreen_on_pay = false;
  s.captures = {CaptureSpec{20.0, {1}}};
  const auto r = run_scenario(s).report;
  ASSERT_TRUE(r.decision);
  EXPECT_EQ(r.candidates, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.decision->outcome, DecisionOutcome::kNoMatch);
  EXPECT_TRUE(r.correct());
  EXPECT_TRUE(r.oracle_agrees());
}

TEST(SimulatorTest, LossyLinkTerminates) {
  const auto r = run_fixture("lossy").report;
  EXPECT_TRUE(r.oracle_agrees());
  EXPECT_EQ(r.privacy_violations, 0u);
}

TEST(SimulatorTest, RandomScenariosMatchTheOracle) {
  Rng rng(404);
  int decided = 0;
  for (int i = 0; i < 200; ++i) {
    const Scenario s = random_scenario(rng);
    const auto r = run_scenario(s).report;
    ASSERT_TRUE(r.oracle_agrees()) << to_json(s).dump();
    EXPECT_TRUE(r.correct()) << to_json(s).dump();
    EXPECT_EQ(r.privacy_violations, 0u);
    decided += r.decision ? 1 : 0;
  }
  EXPECT_GT(decided, 100);
}

TEST(BatchTest, SeparableCaseIsPerfect) {
  const auto b = run_batch(load_scenario(kFixtures + "drive_through.json"), 20, 99);
  ASSERT_EQ(b.rows.size(), 1u);
  const auto& row = b.rows[0];
  EXPECT_EQ(row.trials, 20u);
  EXPECT_EQ(row.face_genuine.rate(), 1.0);
  EXPECT_EQ(row.face_impostor.rate(), 0.0);
  EXPECT_EQ(row.voice_genuine.rate(), 1.0);
  EXPECT_EQ(row.voice_impostor.rate(), 0.0);
  EXPECT_EQ(row.correct, 20u);
  EXPECT_EQ(row.oracle_agree, 20u);
  EXPECT_GT(row.face_impostor.trials, 0u);
}

TEST(BatchTest, SweepAndCsv) {
  const auto b = run_batch(load_scenario(kFixtures + "toll.json"), 3, 1, {0.05, 0.4, 1.2});
  ASSERT_EQ(b.rows.size(), 3u);
  const std::string csv = to_csv(b);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "sigma,trials,face_tpir,face_fpir,voice_tpir,voice_fpir,oracle_face_tpir,oracle_face_fpir,"
            "oracle_voice_tpir,oracle_voice_fpir,face_genuine,face_impostor,voice_genuine,voice_impostor,"
            "decisions,correct,oracle_agree,privacy_violations");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  for (const auto& row : b.rows) {
    EXPECT_EQ(row.oracle_agree, row.trials);
    EXPECT_EQ(row.face_genuine.hits, row.oracle_face_genuine.hits);
    EXPECT_EQ(row.voice_impostor.hits, row.oracle_voice_impostor.hits);
  }
  // Heavy noise costs genuine matches.
  EXPECT_LT(*b.rows[2].face_genuine.rate(), *b.rows[0].face_genuine.rate());
}

TEST(BatchTest, RejectsZeroTrials) {
  EXPECT_THROW(run_batch(load_scenario(kFixtures + "toll.json"), 0, 1), std::invalid_argument);
}

}  // namespace
}  // namespace dcp
