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

// Command-line front end: run scenarios, batches and benchmarks, parse
// commands, and generate inputs.
//
// Exit codes: 0 success, 1 bad input or runtime error, 2 usage error,
// 3 command not understood (parse), 4 a ride violated an invariant (oracle
// disagreement or secret bytes reaching the dashcam).

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dcp/dcp.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnparsed = 3;
constexpr int kExitInvariant = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string format = "text";

  bool json() const { return format == "json"; }

  // Flag first, then DCP_SEED, then the caller's default.
  std::optional<std::uint64_t> resolved_seed() const {
    if (seed) return seed;
    if (const char* env = std::getenv("DCP_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used, 0);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw UsageError(std::string("DCP_SEED is not an unsigned integer: '") + env + "'");
    }
    return std::nullopt;
  }
};

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
}

int cmd_run(const Globals& g, const std::string& path, bool timings, const std::string& trace_out) {
  const dcp::Scenario s = dcp::load_scenario(path);
  const auto result = dcp::run_scenario(s, dcp::RunOptions{g.resolved_seed(), timings});
  const auto& r = result.report;
  const std::string digest = dcp::sha256_hex(result.artifacts.trace);
  if (!trace_out.empty()) {
    write_file(trace_out, std::string(result.artifacts.trace.begin(), result.artifacts.trace.end()));
  }
  if (g.json()) {
    auto j = dcp::to_json(r);
    j["trace_sha256"] = digest;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << dcp::to_text(r) << "trace      sha256 " << digest << "\n";
  }
  return (r.oracle_agrees() && r.privacy_violations == 0) ? 0 : kExitInvariant;
}

int cmd_batch(const Globals& g, const std::string& path, std::size_t trials, const std::vector<double>& sweep,
              const std::string& out) {
  const dcp::Scenario s = dcp::load_scenario(path);
  const auto b = dcp::run_batch(s, trials, g.resolved_seed().value_or(s.seed), sweep);
  const std::string text = g.json() ? dcp::to_json(b).dump(2) + "\n" : dcp::to_csv(b);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  for (const auto& row : b.rows) {
    if (row.oracle_agree != row.trials || row.privacy_violations != 0) return kExitInvariant;
  }
  return 0;
}

int cmd_parse(const Globals& g, const std::vector<std::string>& words, const std::string& corpus,
              const std::string& dictionary) {
  const dcp::Dictionary dict = dictionary.empty() ? dcp::Dictionary::builtin() : dcp::Dictionary::load_file(dictionary);
  if (!corpus.empty()) {
    std::ifstream in(corpus);
    if (!in) throw std::runtime_error("cannot open corpus '" + corpus + "'");
    const auto r = dcp::evaluate_corpus(dcp::load_corpus(in), dict);
    if (g.json()) {
      std::cout << nlohmann::json{{"lines", r.lines},
                                  {"parsed", r.parsed},
                                  {"annotated", r.annotated},
                                  {"correct", r.correct},
                                  {"accuracy", r.accuracy()}}
                       .dump(2)
                << "\n";
    } else {
      std::cout << "lines " << r.lines << ", parsed " << r.parsed << ", annotated " << r.annotated << ", correct "
                << r.correct << ", accuracy " << r.accuracy() << "\n";
    }
    return 0;
  }
  if (words.empty()) throw UsageError("parse needs a transcript or --corpus");
  std::string transcript;
  for (const auto& w : words) transcript += (transcript.empty() ? "" : " ") + w;
  const auto trigger = dcp::detect_trigger(transcript, dict);
  const auto o = dcp::try_parse_command(transcript, dict);
  if (g.json()) {
    nlohmann::json j{{"transcript", transcript},
                     {"corrected", dcp::correct_transcript(transcript, dict)},
                     {"triggered", trigger.triggered}};
    if (o.command) {
      j["command"] = dcp::to_json(*o.command);
    } else {
      j["error"] = {{"kind", dcp::to_string(o.error->kind())},
                    {"position", o.error->position()},
                    {"message", o.error->what()}};
    }
    std::cout << j.dump(2) << "\n";
  } else if (o.command) {
    std::cout << dcp::annotation_of(o) << (trigger.triggered ? "" : " (no trigger phrase)") << "\n";
  } else {
    std::cout << "error: " << dcp::to_string(o.error->kind()) << " at token " << o.error->position() << ": "
              << o.error->what() << "\n";
  }
  return o.command ? 0 : kExitUnparsed;
}

int cmd_bench(const Globals& g, const std::string& profile, std::size_t d, std::int32_t q, double cos,
              std::size_t pairs) {
  if (dcp::score_bound(d, q) > dcp::kMaxScenarioBound) throw UsageError("d * Q^2 exceeds 2^24");
  dcp::Rng rng(g.resolved_seed().value_or(1));
  return dcp::with_group(dcp::group_profile_from_string(profile), [&]<class G>() {
    const auto b = dcp::bench_comparison<G>(d, q, cos, rng);
    std::optional<dcp::PairsBench> p;
    if (pairs > 0) p = dcp::bench_pairs<G>(pairs, d, q, cos, rng);
    if (g.json()) {
      auto j = dcp::to_json(b);
      if (p) j["pairs"] = {{"count", p->pairs}, {"seconds", p->seconds}, {"correct", p->correct}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << dcp::to_text(b);
      if (p) std::cout << p->pairs << " pairs in " << p->seconds << " s, " << p->correct << " correct\n";
    }
    return (p && p->correct != p->pairs) ? kExitInvariant : 0;
  });
}

nlohmann::json template_scenario() {
  return nlohmann::json::parse(R"({
  "name": "my_ride",
  "seed": 1,
  "group": "test",
  "d": 128,
  "Q": 127,
  "thresholds": {"face_cos": 0.5, "voice_cos": 0.5},
  "max_inter_cosine": 0.2,
  "challenge_timeout": 5.0,
  "prescreen_on_enroll": true,
  "refresh_prescreen_on_pay": true,
  "merchant": "Burger Barn",
  "passengers": [
    {"name": "driver", "has_device": true, "enrolled": true, "sigma": 0.05, "transport": "ble"},
    {"name": "passenger", "has_device": true, "enrolled": true, "sigma": 0.05, "transport": "wifi",
     "connect_time": 1.0}
  ],
  "captures": [{"time": 30.0, "passengers": [0, 1]}],
  "command": {"time": 60.0, "transcript": "Hey DashCam, pay for order number 120.", "speaker": 0}
})");
}

int cmd_gen(const Globals& g, const std::string& kind, std::size_t passengers, const std::string& group,
            std::size_t lines, int max_edits) {
  dcp::Rng rng(g.resolved_seed().value_or(1));
  if (kind == "template") {
    std::cout << template_scenario().dump(2) << "\n";
  } else if (kind == "random") {
    if (passengers < 1 || passengers > 16) throw UsageError("--passengers must be in [1, 16]");
    const auto s = dcp::random_scenario(rng, passengers, dcp::group_profile_from_string(group));
    std::cout << dcp::to_json(s).dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < lines; ++i) {
      const auto sentence = dcp::generate_sentence(rng);
      const std::string text =
          max_edits > 0 ? dcp::corrupt_sentence(sentence, max_edits, rng) : sentence.command.transcript;
      std::cout << text << "\t" << dcp::annotation_of(dcp::ParseOutcome{sentence.command, std::nullopt}) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dashcam payer identification: simulator and tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Root seed (overrides DCP_SEED and the scenario seed)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string scenario_path, trace_out, out_path;
  bool timings = false;
  auto* run = app.add_subcommand("run", "Simulate one ride");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_flag("--timings", timings, "Include wall-clock timings");
  run->add_option("--trace-out", trace_out, "Write the raw message trace to a file");

  std::size_t trials = 0;
  std::vector<double> sweep;
  auto* batch = app.add_subcommand("batch", "Run many seeded rides and report rates as CSV");
  batch->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  batch->add_option("--trials", trials, "Rides per row")->required()->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  batch->add_option("--sweep", sweep, "Noise sigmas, one row each")->delimiter(',')->check(CLI::NonNegativeNumber);
  batch->add_option("--out", out_path, "Write to a file instead of stdout");

  std::vector<std::string> words;
  std::string corpus, dictionary;
  auto* parse = app.add_subcommand("parse", "Parse a spoken payment command");
  parse->add_option("transcript", words, "Transcript words");
  parse->add_option("--corpus", corpus, "Evaluate a tab-separated corpus file");
  parse->add_option("--dictionary", dictionary, "Correction dictionary, one word per line");

  std::string profile = "secure";
  std::size_t d = 128, pairs = 0;
  std::int32_t q = 127;
  double cos = 0.5;
  auto* bench = app.add_subcommand("bench", "Time key generation and one full comparison");
  bench->add_option("--profile", profile, "Group profile")->check(CLI::IsMember({"test", "secure"}));
  bench->add_option("--d", d, "Embedding dimension")->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  bench->add_option("--q", q, "Quantisation scale")->check(CLI::Range(1, 32767));
  bench->add_option("--threshold", cos, "Cosine threshold")->check(CLI::Range(-0.999, 0.999));
  bench->add_option("--pairs", pairs, "Also time this many bulk comparisons");

  std::string kind, group = "test";
  std::size_t passengers = 5, lines = 100;
  int max_edits = 0;
  auto* gen = app.add_subcommand("gen", "Generate a scenario or a command corpus");
  gen->add_option("kind", kind, "template, random or corpus")
      ->required()
      ->check(CLI::IsMember({"template", "random", "corpus"}));
  gen->add_option("--passengers", passengers, "Maximum passengers for random scenarios");
  gen->add_option("--group", group, "Group profile for random scenarios")->check(CLI::IsMember({"test", "secure"}));
  gen->add_option("--lines", lines, "Corpus lines");
  gen->add_option("--edits", max_edits, "Corrupt one word per line with up to this many edits")
      ->check(CLI::Range(0, 5));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(g, scenario_path, timings, trace_out);
    if (*batch) return cmd_batch(g, scenario_path, trials, sweep, out_path);
    if (*parse) return cmd_parse(g, words, corpus, dictionary);
    if (*bench) return cmd_bench(g, profile, d, q, cos, pairs);
    if (*gen) return cmd_gen(g, kind, passengers, group, lines, max_edits);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
