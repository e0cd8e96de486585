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

// Synthetic command sentences and simulated recognition errors.

#pragma once

#include <string>
#include <vector>

#include "dcp/command.hpp"
#include "dcp/rng.hpp"

namespace dcp {

inline std::string number_to_words(std::uint32_t n) {
  static const char* kUnits[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};
  static const char* kTeens[] = {"ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                                 "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
  static const char* kTens[] = {"twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n < 10) return kUnits[n];
  if (n < 20) return kTeens[n - 10];
  if (n < 100) {
    std::string s = kTens[n / 10 - 2];
    if (n % 10) s += std::string(" ") + kUnits[n % 10];
    return s;
  }
  return std::to_string(n);
}

struct GeneratedSentence {
  PaymentCommand command;
  std::vector<std::string> tokens;
  std::vector<bool> content;  // false for number tokens
};

inline GeneratedSentence generate_sentence(Rng& rng) {
  GeneratedSentence g;
  auto word = [&](std::string w) {
    g.tokens.push_back(std::move(w));
    g.content.push_back(true);
  };
  auto number = [&](std::uint32_t n) {
    const std::string text = (n < 100 && rng.uniform(2) == 0) ? number_to_words(n) : std::to_string(n);
    for (auto& t : tokenize(text)) {
      g.tokens.push_back(t);
      g.content.push_back(false);
    }
  };

  if (rng.uniform(4) != 0) {
    word("hey");
    word("dashcam");
  }
  word("pay");
  if (rng.uniform(3) != 0) word("for");

  g.command.use_case = static_cast<UseCase>(rng.uniform(4));
  const auto slot = static_cast<std::uint32_t>(rng.uniform(2) ? rng.uniform(100) : rng.uniform(10000));
  switch (g.command.use_case) {
    case UseCase::kToll:
      word("toll");
      break;
    case UseCase::kParking:
      word("parking");
      if (rng.uniform(2)) word("at");
      if (rng.uniform(2)) word("space");
      if (rng.uniform(2)) word("number");
      number(slot);
      g.command.slot = slot;
      break;
    case UseCase::kFuel:
      word(rng.uniform(2) ? "gas" : "fuel");
      if (rng.uniform(2)) word("at");
      if (rng.uniform(2)) word("pump");
      if (rng.uniform(3) == 0) word("number");
      number(slot);
      g.command.slot = slot;
      break;
    case UseCase::kFastFood:
      word("order");
      if (rng.uniform(2)) word("number");
      number(slot);
      g.command.slot = slot;
      break;
  }
  g.command.transcript = join(g.tokens);
  return g;
}

// Applies `edits` random single-character insertions, deletions or
// substitutions; the result is never empty.
inline std::string perturb_word(std::string w, int edits, Rng& rng) {
  for (int i = 0; i < edits; ++i) {
    const char c = static_cast<char>('a' + rng.uniform(26));
    const auto op = rng.uniform(w.size() > 1 ? 3 : 2);
    if (op == 0) {
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(rng.uniform(w.size() + 1)), c);
    } else if (op == 1) {
      w[rng.uniform(w.size())] = c;
    } else {
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(rng.uniform(w.size())));
    }
  }
  return w;
}

// One content word of the sentence perturbed by up to `max_edits` edits.
inline std::string corrupt_sentence(const GeneratedSentence& g, int max_edits, Rng& rng) {
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    if (g.content[i]) slots.push_back(i);
  }
  auto tokens = g.tokens;
  const std::size_t victim = slots[rng.uniform(slots.size())];
  const int edits = 1 + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(max_edits)));
  tokens[victim] = perturb_word(tokens[victim], edits, rng);
  return join(tokens);
}

}  // namespace dcp
