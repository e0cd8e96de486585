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

// Voice-command handling on transcripts: trigger phrase detection, per-token
// spelling correction against a dictionary, and slot parsing for the four
// payment use cases.
//
// Grammar (after the optional trigger "hey dashcam"):
//
//   command  := "pay" ["for"] use-case
//   use-case := "toll"
//             | "parking" filler* NUMBER        filler in {at, space, number}
//             | ("gas" | "fuel") filler* NUMBER  filler in {at, pump, number}
//             | "order" filler* NUMBER           filler in {number}
//   NUMBER   := digits | number words from "zero" to "ninety nine"
//
// Each word is corrected only against the words the grammar allows at that
// point, so a misheard word competes with the right alternatives instead of
// with the whole vocabulary. Number tokens are never corrected.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dcp {

// Unit-cost insert/delete/substitute distance over any random-access sequence.
template <class Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) { return edit_distance(a, b); }

inline constexpr std::size_t kMaxCorrectionDistance = 2;

// Lowercases, turns every non-alphanumeric character into a separator and
// splits on whitespace.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      continue;  // "don't" -> "dont"
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string join(const std::vector<std::string>& tokens, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < tokens.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

class Dictionary {
 public:
  explicit Dictionary(std::vector<std::string> words) {
    for (auto& w : words) {
      std::string joined;
      for (const auto& t : tokenize(w)) joined += t;  // "dash cam" -> "dashcam"
      if (!joined.empty()) words_.push_back(std::move(joined));
    }
    std::sort(words_.begin(), words_.end());
    words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
    if (words_.empty()) throw std::invalid_argument("dictionary is empty");
  }

  // One word or phrase per line; '#' starts a comment.
  static Dictionary load(std::istream& in) {
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      words.push_back(line);
    }
    return Dictionary(std::move(words));
  }

  static Dictionary load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dictionary '" + path + "'");
    return load(in);
  }

  static const Dictionary& builtin() {
    static const Dictionary d({"hey", "dashcam", "pay", "for", "at", "toll", "parking", "space",
                               "number", "gas", "fuel", "pump", "order"});
    return d;
  }

  bool contains(std::string_view w) const {
    return std::binary_search(words_.begin(), words_.end(), w);
  }

  // Sorted, so the first minimum found is the lexicographically smallest.
  const std::vector<std::string>& words() const { return words_; }

  // Words of `allowed` that this dictionary permits, sorted.
  std::vector<std::string> restrict_to(std::initializer_list<std::string_view> allowed) const {
    std::vector<std::string> out;
    for (auto w : allowed) {
      if (contains(w)) out.emplace_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::string> words_;
};

inline bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Closest candidate within kMaxCorrectionDistance, ties broken
// lexicographically; nullopt when nothing is close enough.
inline std::optional<std::string> nearest_word(std::string_view token,
                                               const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = kMaxCorrectionDistance + 1;
  for (const auto& w : candidates) {  // callers pass sorted candidates
    const std::size_t d = levenshtein(token, w);
    if (d < best_d || (d == best_d && best && w < *best)) {
      best_d = d;
      best = w;
    }
  }
  return best;
}

inline std::string correct_token(std::string_view token, const Dictionary& dict) {
  if (is_digits(token)) return std::string(token);
  auto best = nearest_word(token, dict.words());
  return best ? *best : std::string(token);
}

// ---------------------------------------------------------------------------

struct TriggerResult {
  bool triggered = false;
  std::size_t consumed = 0;  // tokens that made up the trigger
  std::string remainder;     // normalised command body
};

// "hey dashcam", each word corrected; "dash cam" and similar splits are joined.
inline TriggerResult detect_trigger(const std::vector<std::string>& tokens,
                                    const Dictionary& dict = Dictionary::builtin()) {
  TriggerResult r;
  const auto hey = dict.restrict_to({"hey"});
  const auto dashcam = dict.restrict_to({"dashcam"});
  if (hey.empty() || dashcam.empty() || tokens.size() < 2) return r;
  if (!nearest_word(tokens[0], hey)) return r;
  if (nearest_word(tokens[1], dashcam)) {
    r.consumed = 2;
  } else if (tokens.size() >= 3 && nearest_word(tokens[1] + tokens[2], dashcam)) {
    r.consumed = 3;
  } else {
    return r;
  }
  r.triggered = true;
  r.remainder = join(tokens, r.consumed);
  return r;
}

inline TriggerResult detect_trigger(std::string_view transcript,
                                    const Dictionary& dict = Dictionary::builtin()) {
  return detect_trigger(tokenize(transcript), dict);
}

// ---------------------------------------------------------------------------

enum class UseCase : std::uint8_t { kFuel = 0, kToll = 1, kParking = 2, kFastFood = 3 };

inline const char* to_string(UseCase u) {
  switch (u) {
    case UseCase::kFuel: return "fuel";
    case UseCase::kToll: return "toll";
    case UseCase::kParking: return "parking";
    case UseCase::kFastFood: return "fast_food";
  }
  return "unknown";
}

inline std::optional<UseCase> use_case_from_string(std::string_view s) {
  if (s == "fuel") return UseCase::kFuel;
  if (s == "toll") return UseCase::kToll;
  if (s == "parking") return UseCase::kParking;
  if (s == "fast_food") return UseCase::kFastFood;
  return std::nullopt;
}

struct PaymentCommand {
  UseCase use_case = UseCase::kToll;
  std::optional<std::uint32_t> slot;  // pump, space or order number; never set for toll
  std::string transcript;             // raw input, provenance only

  // Commands compare by meaning; the raw transcript is ignored.
  friend bool operator==(const PaymentCommand& a, const PaymentCommand& b) {
    return a.use_case == b.use_case && a.slot == b.slot;
  }
};

class CommandError : public std::runtime_error {
 public:
  enum class Kind { kEmpty, kUnexpectedToken, kUnknownUseCase, kIncompleteCommand, kBadNumber };

  CommandError(Kind kind, std::size_t position, const std::string& what)
      : std::runtime_error(what), kind_(kind), position_(position) {}

  Kind kind() const noexcept { return kind_; }
  // Token index in the normalised transcript.
  std::size_t position() const noexcept { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

inline const char* to_string(CommandError::Kind k) {
  switch (k) {
    case CommandError::Kind::kEmpty: return "empty-command";
    case CommandError::Kind::kUnexpectedToken: return "unexpected-token";
    case CommandError::Kind::kUnknownUseCase: return "unknown-use-case";
    case CommandError::Kind::kIncompleteCommand: return "incomplete-command";
    case CommandError::Kind::kBadNumber: return "bad-number";
  }
  return "error";
}

namespace detail {

inline int unit_word(std::string_view w) {
  static constexpr std::string_view kUnits[] = {"zero", "one", "two",   "three", "four",
                                                "five", "six", "seven", "eight", "nine"};
  for (int i = 0; i < 10; ++i) {
    if (w == kUnits[i]) return i;
  }
  return -1;
}

inline int teen_word(std::string_view w) {
  static constexpr std::string_view kTeens[] = {"ten",     "eleven",  "twelve",    "thirteen",
                                                "fourteen", "fifteen", "sixteen",   "seventeen",
                                                "eighteen", "nineteen"};
  for (int i = 0; i < 10; ++i) {
    if (w == kTeens[i]) return 10 + i;
  }
  return -1;
}

inline int tens_word(std::string_view w) {
  static constexpr std::string_view kTens[] = {"twenty", "thirty",  "forty",  "fifty",
                                               "sixty",  "seventy", "eighty", "ninety"};
  for (int i = 0; i < 8; ++i) {
    if (w == kTens[i]) return 20 + 10 * i;
  }
  return -1;
}

// Parses a number starting at tokens[pos]; returns (value, tokens consumed).
inline std::optional<std::pair<std::uint32_t, std::size_t>> parse_number(
    const std::vector<std::string>& tokens, std::size_t pos) {
  const std::string& t = tokens[pos];
  if (is_digits(t)) {
    if (t.size() > 9) throw CommandError(CommandError::Kind::kBadNumber, pos, "number '" + t + "' too long");
    return std::pair{static_cast<std::uint32_t>(std::stoul(t)), std::size_t{1}};
  }
  if (int v = unit_word(t); v >= 0) return std::pair{static_cast<std::uint32_t>(v), std::size_t{1}};
  if (int v = teen_word(t); v >= 0) return std::pair{static_cast<std::uint32_t>(v), std::size_t{1}};
  if (int v = tens_word(t); v >= 0) {
    if (pos + 1 < tokens.size()) {
      if (int u = unit_word(tokens[pos + 1]); u > 0) {
        return std::pair{static_cast<std::uint32_t>(v + u), std::size_t{2}};
      }
    }
    return std::pair{static_cast<std::uint32_t>(v), std::size_t{1}};
  }
  return std::nullopt;
}

inline std::string describe(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : "|") + w;
  return out;
}

}  // namespace detail

// Parses a transcript with or without the trigger phrase. Throws CommandError.
inline PaymentCommand parse_command(std::string_view transcript,
                                    const Dictionary& dict = Dictionary::builtin()) {
  const std::vector<std::string> tokens = tokenize(transcript);
  const TriggerResult trig = detect_trigger(tokens, dict);
  std::size_t pos = trig.triggered ? trig.consumed : 0;

  auto unexpected = [&](const std::vector<std::string>& expected) {
    return CommandError(CommandError::Kind::kUnexpectedToken, pos,
                        "unexpected '" + tokens[pos] + "' at position " + std::to_string(pos) +
                            ", expected " + detail::describe(expected));
  };

  if (pos >= tokens.size()) {
    throw CommandError(CommandError::Kind::kEmpty, pos, "no command after trigger phrase");
  }

  const auto pay = dict.restrict_to({"pay"});
  if (!nearest_word(tokens[pos], pay)) throw unexpected(pay);
  ++pos;

  auto use_cases = dict.restrict_to({"toll", "parking", "gas", "fuel", "order"});
  auto with_for = use_cases;
  for (const auto& w : dict.restrict_to({"for"})) with_for.push_back(w);
  std::sort(with_for.begin(), with_for.end());

  auto unknown_use_case = [&] {
    const std::string got = pos < tokens.size() ? "'" + tokens[pos] + "'" : "end of command";
    return CommandError(CommandError::Kind::kUnknownUseCase, pos,
                        "unknown use case " + got + " at position " + std::to_string(pos) +
                            ", expected " + detail::describe(use_cases));
  };

  if (pos < tokens.size()) {
    auto w = nearest_word(tokens[pos], with_for);
    if (w && *w == "for") ++pos;
  }
  if (pos >= tokens.size()) throw unknown_use_case();
  const auto uc_word = nearest_word(tokens[pos], use_cases);
  if (!uc_word) throw unknown_use_case();
  ++pos;

  PaymentCommand cmd;
  cmd.transcript = std::string(transcript);
  std::vector<std::string> fillers;
  if (*uc_word == "toll") {
    cmd.use_case = UseCase::kToll;
  } else if (*uc_word == "parking") {
    cmd.use_case = UseCase::kParking;
    fillers = dict.restrict_to({"at", "space", "number"});
  } else if (*uc_word == "gas" || *uc_word == "fuel") {
    cmd.use_case = UseCase::kFuel;
    fillers = dict.restrict_to({"at", "pump", "number"});
  } else {
    cmd.use_case = UseCase::kFastFood;
    fillers = dict.restrict_to({"number"});
  }

  if (cmd.use_case != UseCase::kToll) {
    while (pos < tokens.size() && !cmd.slot) {
      if (auto num = detail::parse_number(tokens, pos)) {
        cmd.slot = num->first;
        pos += num->second;
      } else if (nearest_word(tokens[pos], fillers)) {
        ++pos;
      } else {
        throw unexpected(fillers);
      }
    }
    if (!cmd.slot) {
      throw CommandError(CommandError::Kind::kIncompleteCommand, pos,
                         std::string(to_string(cmd.use_case)) + " command is missing its number");
    }
  }
  if (pos < tokens.size()) throw unexpected({});
  return cmd;
}

struct ParseOutcome {
  std::optional<PaymentCommand> command;
  std::optional<CommandError> error;
};

// Never throws.
inline ParseOutcome try_parse_command(std::string_view transcript,
                                      const Dictionary& dict = Dictionary::builtin()) noexcept {
  ParseOutcome out;
  try {
    out.command = parse_command(transcript, dict);
  } catch (const CommandError& e) {
    out.error = e;
  } catch (const std::exception& e) {
    out.error = CommandError(CommandError::Kind::kUnexpectedToken, 0, e.what());
  }
  return out;
}

// Canonical sentence; parse_command(render_command(c)) == c.
inline std::string render_command(const PaymentCommand& c) {
  const std::string slot = c.slot ? std::to_string(*c.slot) : "";
  switch (c.use_case) {
    case UseCase::kToll: return "Hey DashCam, pay for toll.";
    case UseCase::kParking: return "Hey DashCam, pay for parking at space number " + slot + ".";
    case UseCase::kFuel: return "Hey DashCam, pay for gas at pump " + slot + ".";
    case UseCase::kFastFood: return "Hey DashCam, pay for order number " + slot + ".";
  }
  return "";
}

// Word error rate of `hypothesis` against `reference` over normalised tokens.
inline double word_error_rate(std::string_view reference, std::string_view hypothesis) {
  const auto ref = tokenize(reference);
  const auto hyp = tokenize(hypothesis);
  if (ref.empty()) return hyp.empty() ? 0.0 : 1.0;
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

// Every token corrected against the whole dictionary.
inline std::string correct_transcript(std::string_view transcript,
                                      const Dictionary& dict = Dictionary::builtin()) {
  std::vector<std::string> tokens = tokenize(transcript);
  for (auto& t : tokens) {
    if (detail::unit_word(t) >= 0 || detail::teen_word(t) >= 0 || detail::tens_word(t) >= 0) continue;
    t = correct_token(t, dict);
  }
  return join(tokens);
}

// ---------------------------------------------------------------------------
// Corpus files: one transcript per line, optionally followed by a tab and an
// expected parse ("toll", "parking 5208", "fuel 6", "fast_food 120", "error").

struct CorpusEntry {
  std::string transcript;
  std::optional<std::string> expected;
};

struct CorpusReport {
  std::size_t lines = 0;
  std::size_t parsed = 0;
  std::size_t annotated = 0;
  std::size_t correct = 0;

  double accuracy() const { return annotated == 0 ? 0.0 : static_cast<double>(correct) / annotated; }
};

inline std::vector<CorpusEntry> load_corpus(std::istream& in) {
  std::vector<CorpusEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    CorpusEntry e;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      e.transcript = line.substr(0, tab);
      e.expected = line.substr(tab + 1);
    } else {
      e.transcript = line;
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::string annotation_of(const ParseOutcome& o) {
  if (!o.command) return "error";
  std::string s = to_string(o.command->use_case);
  if (o.command->slot) s += " " + std::to_string(*o.command->slot);
  return s;
}

inline CorpusReport evaluate_corpus(const std::vector<CorpusEntry>& corpus,
                                    const Dictionary& dict = Dictionary::builtin()) {
  CorpusReport r;
  for (const auto& e : corpus) {
    ++r.lines;
    const ParseOutcome o = try_parse_command(e.transcript, dict);
    if (o.command) ++r.parsed;
    if (e.expected) {
      ++r.annotated;
      if (annotation_of(o) == *e.expected) ++r.correct;
    }
  }
  return r;
}

}  // namespace dcp
