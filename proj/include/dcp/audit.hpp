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

// Structured audit records, emitted as one JSON object per line.

#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace dcp {

struct AuditRecord {
  double time = 0.0;  // simulated seconds
  std::string actor;
  std::string event;
  std::string detail;

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

inline nlohmann::json to_json(const AuditRecord& r) {
  return {{"time", r.time}, {"actor", r.actor}, {"event", r.event}, {"detail", r.detail}};
}

class AuditLog {
 public:
  explicit AuditLog(std::string actor = "") : actor_(std::move(actor)) {}

  void add(double time, std::string event, std::string detail = "") {
    records_.push_back({time, actor_, std::move(event), std::move(detail)});
  }

  const std::vector<AuditRecord>& records() const { return records_; }
  std::size_t count(std::string_view event) const {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.event == event ? 1 : 0;
    return n;
  }
  const std::string& actor() const { return actor_; }
  void set_actor(std::string actor) { actor_ = std::move(actor); }

  friend bool operator==(const AuditLog&, const AuditLog&) = default;

 private:
  std::string actor_;
  std::vector<AuditRecord> records_;
};

inline std::string to_jsonl(const std::vector<AuditRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace dcp
