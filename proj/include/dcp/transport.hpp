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

// Simulated point-to-point links between the dashcam and one device.
//
// Default profiles are calibrated on the secure-profile enrollment frame
// (16,439 bytes for d = 128): about 10 s over BLE and 2 s over WiFi.

#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

#include "dcp/rng.hpp"

namespace dcp {

struct TransportProfile {
  std::string name = "ble";
  double bandwidth = 1650.0;   // bytes per second
  double latency = 0.03;       // seconds per message
  double drop_probability = 0.0;

  static TransportProfile ble() { return {"ble", 1650.0, 0.03, 0.0}; }
  static TransportProfile wifi() { return {"wifi", 8250.0, 0.005, 0.0}; }

  static TransportProfile by_name(const std::string& name) {
    if (name == "ble") return ble();
    if (name == "wifi") return wifi();
    throw std::invalid_argument("unknown transport '" + name + "' (expected ble or wifi)");
  }

  void validate() const {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("transport bandwidth must be positive");
    if (!(latency >= 0.0)) throw std::invalid_argument("transport latency must be non-negative");
    if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
      throw std::invalid_argument("drop probability must be in [0, 1)");
    }
  }
};

inline double simulate_transfer(const TransportProfile& p, std::size_t bytes) {
  return p.latency + static_cast<double>(bytes) / p.bandwidth;
}

enum class Direction { kToDashcam = 0, kToDevice = 1 };

// Messages in one direction are serialised: a frame starts once the previous
// one in the same direction has finished.
class Link {
 public:
  Link(TransportProfile profile, Rng rng) : profile_(std::move(profile)), rng_(std::move(rng)) {
    profile_.validate();
  }

  struct Delivery {
    bool dropped = false;
    double arrival = 0.0;
  };

  Delivery send(double now, Direction dir, std::size_t bytes) {
    double& busy = busy_until_[static_cast<int>(dir)];
    const double start = std::max(now, busy);
    busy = start + simulate_transfer(profile_, bytes);
    const bool dropped = profile_.drop_probability > 0.0 && rng_.uniform01() < profile_.drop_probability;
    return {dropped, busy};
  }

  const TransportProfile& profile() const { return profile_; }

 private:
  TransportProfile profile_;
  Rng rng_;
  double busy_until_[2] = {0.0, 0.0};
};

}  // namespace dcp
