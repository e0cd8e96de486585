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

// Ride scenarios: JSON loading, validation and generation.
//
// {
//   "name": "drive_through", "seed": 7, "group": "test", "d": 128, "Q": 127,
//   "thresholds": {"face_cos": 0.5, "voice_cos": 0.5},
//   "max_inter_cosine": 0.2,
//   "passengers": [{"name": "driver", "has_device": true, "enrolled": true,
//                   "sigma": 0.05, "transport": "ble"}, ...],
//   "captures": [{"time": 30.0, "passengers": [0, 1, 2]}],
//   "command": {"time": 60.0, "transcript": "...", "speaker": 0},
//   "merchant": "Burger Barn"
// }
//
// Optional passenger fields: "connect_time", "voice_twin_of" (index of a
// passenger whose voice this one shares), "face"/"voice" (explicit mean
// embeddings). "transport" is "ble", "wifi" or an object with "name",
// "bandwidth", "latency" and "drop_probability".

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcp/command.hpp"
#include "dcp/command_corpus.hpp"
#include "dcp/embedding.hpp"
#include "dcp/group.hpp"
#include "dcp/rng.hpp"
#include "dcp/transport.hpp"

namespace dcp {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, std::string detail, const std::string& file = "")
      : std::runtime_error((file.empty() ? "" : file + ": ") + (path.empty() ? "" : path + ": ") + detail),
        path_(std::move(path)),
        detail_(std::move(detail)) {}

  // Field path such as "passengers[2].sigma"; empty for file-level errors.
  const std::string& path() const noexcept { return path_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string path_;
  std::string detail_;
};

struct PassengerSpec {
  std::string name;
  bool has_device = true;
  bool enrolled = true;
  double sigma = 0.05;
  TransportProfile transport = TransportProfile::ble();
  double connect_time = 0.0;
  std::optional<std::size_t> voice_twin_of;
  std::optional<std::vector<double>> face;
  std::optional<std::vector<double>> voice;

  bool participates() const { return has_device && enrolled; }
};

struct CaptureSpec {
  double time = 0.0;
  std::vector<std::size_t> passengers;
};

struct CommandSpec {
  double time = 0.0;
  std::string transcript;
  std::size_t speaker = 0;
};

// Largest score bound accepted; keeps discrete-log tables small.
inline constexpr std::int64_t kMaxScenarioBound = std::int64_t{1} << 24;

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  GroupProfile group = GroupProfile::kTest;
  std::uint32_t d = 128;
  std::int32_t q = 127;
  double face_cos = 0.5;
  double voice_cos = 0.5;
  double max_inter_cosine = 0.2;
  double challenge_timeout = 5.0;
  bool prescreen_on_enroll = true;
  bool refresh_prescreen_on_pay = true;
  std::string merchant = "merchant";
  std::vector<PassengerSpec> passengers;
  std::vector<CaptureSpec> captures;
  std::optional<CommandSpec> command;

  std::int64_t face_threshold() const { return cosine_to_threshold(face_cos, q); }
  std::int64_t voice_threshold() const { return cosine_to_threshold(voice_cos, q); }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

template <class T>
T get_field(const nlohmann::json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ScenarioError(path.empty() ? key : path + "." + key, "wrong type");
  }
}

template <class T>
T require_field(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ScenarioError(path.empty() ? key : path + "." + key, "missing required field");
  return get_field<T>(j, key, path, T{});
}

inline TransportProfile transport_from_json(const nlohmann::json& j, const std::string& path) {
  try {
    if (j.is_string()) return TransportProfile::by_name(j.get<std::string>());
    check_keys(j, path, {"name", "bandwidth", "latency", "drop_probability"});
    TransportProfile p = TransportProfile::by_name(get_field<std::string>(j, "name", path, "ble"));
    p.bandwidth = get_field<double>(j, "bandwidth", path, p.bandwidth);
    p.latency = get_field<double>(j, "latency", path, p.latency);
    p.drop_probability = get_field<double>(j, "drop_probability", path, p.drop_probability);
    p.validate();
    return p;
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path, e.what());
  }
}

inline nlohmann::json transport_to_json(const TransportProfile& p) {
  const TransportProfile def = TransportProfile::by_name(p.name);
  if (p.bandwidth == def.bandwidth && p.latency == def.latency && p.drop_probability == def.drop_probability) {
    return p.name;
  }
  return {{"name", p.name}, {"bandwidth", p.bandwidth}, {"latency", p.latency}, {"drop_probability", p.drop_probability}};
}

}  // namespace detail

inline void validate(const Scenario& s) {
  if (s.d < 2) throw ScenarioError("d", "must be at least 2");
  if (s.q < 1 || s.q > 32767) throw ScenarioError("Q", "must be in [1, 32767]");
  if (score_bound(s.d, s.q) > kMaxScenarioBound) throw ScenarioError("Q", "d * Q^2 exceeds 2^24");
  if (!(s.face_cos > -1.0 && s.face_cos < 1.0)) throw ScenarioError("thresholds.face_cos", "must be in (-1, 1)");
  if (!(s.voice_cos > -1.0 && s.voice_cos < 1.0)) throw ScenarioError("thresholds.voice_cos", "must be in (-1, 1)");
  if (!(s.max_inter_cosine > -1.0 && s.max_inter_cosine <= 1.0)) {
    throw ScenarioError("max_inter_cosine", "must be in (-1, 1]");
  }
  if (!(s.challenge_timeout > 0.0)) throw ScenarioError("challenge_timeout", "must be positive");
  if (s.passengers.empty()) throw ScenarioError("passengers", "must not be empty");
  if (s.passengers.size() > 16) throw ScenarioError("passengers", "at most 16 passengers");
  for (std::size_t i = 0; i < s.passengers.size(); ++i) {
    const auto& p = s.passengers[i];
    const std::string path = "passengers[" + std::to_string(i) + "]";
    if (!(p.sigma >= 0.0 && p.sigma < 100.0)) throw ScenarioError(path + ".sigma", "must be in [0, 100)");
    if (!(p.connect_time >= 0.0)) throw ScenarioError(path + ".connect_time", "must be non-negative");
    if (p.voice_twin_of && (*p.voice_twin_of >= s.passengers.size() || *p.voice_twin_of == i)) {
      throw ScenarioError(path + ".voice_twin_of", "must name another passenger");
    }
    if (p.voice_twin_of && s.passengers[*p.voice_twin_of].voice_twin_of) {
      throw ScenarioError(path + ".voice_twin_of", "twin chains are not supported");
    }
    if (p.face && p.face->size() != s.d) {
      throw ScenarioError(path + ".face", "expected " + std::to_string(s.d) + " values");
    }
    if (p.voice && p.voice->size() != s.d) {
      throw ScenarioError(path + ".voice", "expected " + std::to_string(s.d) + " values");
    }
    try {
      p.transport.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path + ".transport", e.what());
    }
  }
  for (std::size_t c = 0; c < s.captures.size(); ++c) {
    const std::string path = "captures[" + std::to_string(c) + "]";
    if (!(s.captures[c].time >= 0.0)) throw ScenarioError(path + ".time", "must be non-negative");
    for (std::size_t k = 0; k < s.captures[c].passengers.size(); ++k) {
      if (s.captures[c].passengers[k] >= s.passengers.size()) {
        throw ScenarioError(path + ".passengers[" + std::to_string(k) + "]", "passenger index out of range");
      }
    }
  }
  if (s.command) {
    if (s.command->speaker >= s.passengers.size()) throw ScenarioError("command.speaker", "speaker index out of range");
    if (!(s.command->time >= 0.0)) throw ScenarioError("command.time", "must be non-negative");
  }
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::get_field;
  using detail::require_field;
  detail::check_keys(j, "",
                     {"name", "seed", "group", "d", "Q", "thresholds", "max_inter_cosine", "challenge_timeout",
                      "prescreen_on_enroll", "refresh_prescreen_on_pay", "merchant", "passengers", "captures",
                      "command"});
  Scenario s;
  s.name = get_field<std::string>(j, "name", "", s.name);
  s.seed = get_field<std::uint64_t>(j, "seed", "", s.seed);
  try {
    s.group = group_profile_from_string(get_field<std::string>(j, "group", "", "test"));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("group", e.what());
  }
  s.d = get_field<std::uint32_t>(j, "d", "", s.d);
  s.q = get_field<std::int32_t>(j, "Q", "", s.q);
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    detail::check_keys(t, "thresholds", {"face_cos", "voice_cos"});
    s.face_cos = get_field<double>(t, "face_cos", "thresholds", s.face_cos);
    s.voice_cos = get_field<double>(t, "voice_cos", "thresholds", s.voice_cos);
  }
  s.max_inter_cosine = get_field<double>(j, "max_inter_cosine", "", s.max_inter_cosine);
  s.challenge_timeout = get_field<double>(j, "challenge_timeout", "", s.challenge_timeout);
  s.prescreen_on_enroll = get_field<bool>(j, "prescreen_on_enroll", "", s.prescreen_on_enroll);
  s.refresh_prescreen_on_pay = get_field<bool>(j, "refresh_prescreen_on_pay", "", s.refresh_prescreen_on_pay);
  s.merchant = get_field<std::string>(j, "merchant", "", s.merchant);

  if (!j.contains("passengers") || !j.at("passengers").is_array()) {
    throw ScenarioError("passengers", "missing or not an array");
  }
  const auto& ps = j.at("passengers");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string path = "passengers[" + std::to_string(i) + "]";
    const auto& pj = ps[i];
    detail::check_keys(pj, path, {"name", "has_device", "enrolled", "sigma", "transport", "connect_time",
                                  "voice_twin_of", "face", "voice"});
    PassengerSpec p;
    p.name = get_field<std::string>(pj, "name", path, "passenger-" + std::to_string(i));
    p.has_device = get_field<bool>(pj, "has_device", path, true);
    p.enrolled = get_field<bool>(pj, "enrolled", path, true);
    p.sigma = get_field<double>(pj, "sigma", path, p.sigma);
    if (pj.contains("transport")) p.transport = detail::transport_from_json(pj.at("transport"), path + ".transport");
    p.connect_time = get_field<double>(pj, "connect_time", path, 0.0);
    if (pj.contains("voice_twin_of") && !pj.at("voice_twin_of").is_null()) {
      p.voice_twin_of = get_field<std::size_t>(pj, "voice_twin_of", path, 0);
    }
    if (pj.contains("face")) p.face = get_field<std::vector<double>>(pj, "face", path, {});
    if (pj.contains("voice")) p.voice = get_field<std::vector<double>>(pj, "voice", path, {});
    s.passengers.push_back(std::move(p));
  }

  if (j.contains("captures")) {
    if (!j.at("captures").is_array()) throw ScenarioError("captures", "expected an array");
    const auto& cs = j.at("captures");
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const std::string path = "captures[" + std::to_string(c) + "]";
      detail::check_keys(cs[c], path, {"time", "passengers"});
      s.captures.push_back({require_field<double>(cs[c], "time", path),
                            require_field<std::vector<std::size_t>>(cs[c], "passengers", path)});
    }
  }
  if (j.contains("command") && !j.at("command").is_null()) {
    const auto& cj = j.at("command");
    detail::check_keys(cj, "command", {"time", "transcript", "speaker"});
    s.command = CommandSpec{get_field<double>(cj, "time", "command", 60.0),
                            require_field<std::string>(cj, "transcript", "command"),
                            require_field<std::size_t>(cj, "speaker", "command")};
  }
  validate(s);
  return s;
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["group"] = to_string(s.group);
  j["d"] = s.d;
  j["Q"] = s.q;
  j["thresholds"] = {{"face_cos", s.face_cos}, {"voice_cos", s.voice_cos}};
  j["max_inter_cosine"] = s.max_inter_cosine;
  j["challenge_timeout"] = s.challenge_timeout;
  j["prescreen_on_enroll"] = s.prescreen_on_enroll;
  j["refresh_prescreen_on_pay"] = s.refresh_prescreen_on_pay;
  j["merchant"] = s.merchant;
  j["passengers"] = nlohmann::json::array();
  for (const auto& p : s.passengers) {
    nlohmann::json pj{{"name", p.name},
                      {"has_device", p.has_device},
                      {"enrolled", p.enrolled},
                      {"sigma", p.sigma},
                      {"transport", detail::transport_to_json(p.transport)}};
    if (p.connect_time != 0.0) pj["connect_time"] = p.connect_time;
    if (p.voice_twin_of) pj["voice_twin_of"] = *p.voice_twin_of;
    if (p.face) pj["face"] = *p.face;
    if (p.voice) pj["voice"] = *p.voice;
    j["passengers"].push_back(std::move(pj));
  }
  j["captures"] = nlohmann::json::array();
  for (const auto& c : s.captures) j["captures"].push_back({{"time", c.time}, {"passengers", c.passengers}});
  if (s.command) {
    j["command"] = {{"time", s.command->time}, {"transcript", s.command->transcript}, {"speaker", s.command->speaker}};
  }
  return j;
}

// Parses scenario text; syntax errors carry line and column.
inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError("", "JSON syntax error at line " + std::to_string(line) + ", column " +
                                std::to_string(col) + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(e.path(), e.detail(), path);
  }
}

// A random ride with up to `max_passengers` passengers: devices, enrollment,
// transports, captures, speaker and command all drawn from `rng`.
inline Scenario random_scenario(Rng& rng, std::size_t max_passengers = 5, GroupProfile group = GroupProfile::kTest) {
  Scenario s;
  s.name = "random";
  s.seed = rng.next_u64() >> 1;
  s.group = group;
  s.merchant = "Random Merchant";
  const std::size_t n = 1 + rng.uniform(max_passengers);
  for (std::size_t i = 0; i < n; ++i) {
    PassengerSpec p;
    p.name = "passenger-" + std::to_string(i);
    p.has_device = rng.uniform(5) != 0;
    p.enrolled = rng.uniform(10) != 0;
    p.sigma = 0.05 + 0.05 * static_cast<double>(rng.uniform(5));  // self-cosine stays above 0.9
    p.transport = rng.uniform(2) ? TransportProfile::ble() : TransportProfile::wifi();
    p.connect_time = static_cast<double>(rng.uniform(5));
    s.passengers.push_back(p);
  }
  if (n >= 2 && rng.uniform(6) == 0) s.passengers[1].voice_twin_of = 0;

  const std::size_t captures = rng.uniform(3);
  for (std::size_t c = 0; c < captures; ++c) {
    CaptureSpec cap{40.0 + 10.0 * static_cast<double>(c), {}};
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform(4) != 0) cap.passengers.push_back(i);
    }
    s.captures.push_back(cap);
  }
  s.refresh_prescreen_on_pay = rng.uniform(4) != 0;
  Rng text_rng = rng.derive("command", rng.next_u64());
  const auto sentence = generate_sentence(text_rng);
  s.command = CommandSpec{80.0, rng.uniform(5) == 0 ? corrupt_sentence(sentence, 2, text_rng) : sentence.command.transcript,
                          static_cast<std::size_t>(rng.uniform(n))};
  return s;
}

}  // namespace dcp
