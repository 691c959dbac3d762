// Copyright 2026 The refine-loop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "refine/moral.h"

#include <algorithm>
#include <cctype>
#include <utility>

#include "refine/error.h"
#include "refine/rng.h"

namespace refine::moral {
namespace {

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string Normalize(std::string_view word) {
  std::string out;
  for (char c : word) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

std::vector<std::string> NormalizedTokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& w : SplitWords(text)) {
    auto n = Normalize(w);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

std::string Join(const std::vector<std::string>& words, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::string StripTrailingPunct(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' ||
                        s.back() == ',' || s.back() == ';' || s.back() == ':' ||
                        std::isspace(static_cast<unsigned char>(s.back())))) {
    s.pop_back();
  }
  return s;
}

bool EndsClause(std::string_view word) {
  if (word.empty()) return false;
  const char c = word.back();
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

}  // namespace

std::string_view PolarityName(Polarity polarity) {
  return polarity == Polarity::kPositive ? "positive" : "negative";
}

JudgmentLexicon::JudgmentLexicon(std::vector<JudgmentForm> forms)
    : forms_(std::move(forms)) {
  for (const auto& form : forms_) {
    if (form.inverses.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "judgment \"" + form.surface + "\" has no inverse form");
    }
    for (const auto& inverse : form.inverses) {
      const JudgmentForm* target = Find(inverse);
      if (target == nullptr) {
        throw Error(ErrorCode::kInvalidConfig,
                    "inverse \"" + inverse + "\" of \"" + form.surface +
                        "\" is not a lexicon judgment");
      }
      if (target->polarity == form.polarity) {
        throw Error(ErrorCode::kInvalidConfig,
                    "inverse \"" + inverse + "\" of \"" + form.surface +
                        "\" has the same polarity");
      }
    }
  }
}

const JudgmentLexicon& JudgmentLexicon::Default() {
  static const JudgmentLexicon kDefault({
      {"You shouldn't", Polarity::kNegative, {"You should", "It's good"}, false},
      {"You should not", Polarity::kNegative, {"You should", "It's good"}, false},
      {"It's wrong", Polarity::kNegative, {"It's good", "You should"}, true},
      {"It's hurtful", Polarity::kNegative, {"You should", "It's good"}, true},
      {"It's bad", Polarity::kNegative, {"It's good", "It's important"}, true},
      {"It's rude", Polarity::kNegative, {"It's good", "You should"}, true},
      {"You should", Polarity::kPositive, {"You shouldn't", "It's wrong"}, false},
      {"It's good", Polarity::kPositive, {"It's bad", "It's wrong"}, true},
      {"It's important", Polarity::kPositive, {"It's bad", "You shouldn't"}, true},
      {"You must always", Polarity::kPositive, {"You shouldn't", "It's bad"}, false},
  });
  return kDefault;
}

const JudgmentForm* JudgmentLexicon::Find(std::string_view surface) const {
  for (const auto& form : forms_) {
    if (form.surface == surface) return &form;
  }
  return nullptr;
}

std::optional<std::pair<const JudgmentForm*, std::size_t>>
JudgmentLexicon::MatchPrefix(std::string_view text) const {
  const auto words = SplitWords(text);
  std::vector<std::string> normalized;
  for (const auto& w : words) normalized.push_back(Normalize(w));
  const JudgmentForm* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& form : forms_) {
    const auto tokens = NormalizedTokens(form.surface);
    if (tokens.empty() || tokens.size() > normalized.size()) continue;
    if (!std::equal(tokens.begin(), tokens.end(), normalized.begin())) continue;
    if (tokens.size() > best_len) {
      best = &form;
      best_len = tokens.size();
    }
  }
  if (best == nullptr) return std::nullopt;
  return std::make_pair(best, best_len);
}

JudgmentLexicon JudgmentLexicon::WithSynonyms(const SynonymTable& table) const {
  std::vector<JudgmentForm> forms = forms_;
  for (const auto& form : forms_) {
    auto words = SplitWords(form.surface);
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto it = table.find(Normalize(words[i]));
      if (it == table.end()) continue;
      for (const auto& synonym : it->second) {
        auto variant = words;
        variant[i] = synonym;
        JudgmentForm paraphrase = form;
        paraphrase.surface = Join(variant);
        const bool exists = std::any_of(
            forms.begin(), forms.end(),
            [&](const JudgmentForm& f) { return f.surface == paraphrase.surface; });
        if (!exists) forms.push_back(std::move(paraphrase));
      }
    }
  }
  return JudgmentLexicon(std::move(forms));
}

std::vector<std::string> JudgmentLexicon::ParaphrasesOf(
    std::string_view surface, const SynonymTable& table) const {
  std::vector<std::string> out;
  auto words = SplitWords(surface);
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto it = table.find(Normalize(words[i]));
    if (it == table.end()) continue;
    for (const auto& synonym : it->second) {
      auto variant = words;
      variant[i] = synonym;
      auto candidate = Join(variant);
      if (Find(candidate) != nullptr) out.push_back(std::move(candidate));
    }
  }
  return out;
}

std::string Norm::ActionPhrase() const {
  return to_marker ? "to " + action : action;
}

std::string Norm::Render() const {
  return judgment + " " + ActionPhrase() + ".";
}

Norm ParseNorm(std::string_view text, const JudgmentLexicon& lexicon) {
  auto match = lexicon.MatchPrefix(text);
  if (!match) {
    throw Error(ErrorCode::kUnparseableNorm,
                "no known judgment starts \"" + std::string(text) + "\"");
  }
  auto [form, consumed] = *match;
  auto words = SplitWords(text);
  bool to_marker = false;
  if (consumed < words.size() && Normalize(words[consumed]) == "to") {
    to_marker = true;
    ++consumed;
  }
  std::string action = StripTrailingPunct(Join(words, consumed));
  if (action.empty()) {
    throw Error(ErrorCode::kUnparseableNorm,
                "norm \"" + std::string(text) + "\" has no action");
  }
  return Norm{form->surface, std::move(action), form->polarity, to_marker};
}

Norm WithJudgment(const Norm& norm, const JudgmentForm& judgment) {
  const bool framing_changes =
      judgment.infinitive != (norm.to_marker);
  Norm out = norm;
  out.judgment = judgment.surface;
  out.polarity = judgment.polarity;
  if (framing_changes) out.to_marker = judgment.infinitive;
  return out;
}

Norm InvertJudgment(const Norm& norm, const JudgmentLexicon& lexicon,
                    std::uint64_t seed) {
  const JudgmentForm* form = lexicon.Find(norm.judgment);
  if (form == nullptr) {
    throw Error(ErrorCode::kUnparseableNorm,
                "judgment \"" + norm.judgment + "\" is not in the lexicon");
  }
  Rng rng(seed);
  const JudgmentForm* inverse = lexicon.Find(rng.Pick(form->inverses));
  return WithJudgment(norm, *inverse);
}

double TokenF1(std::string_view a, std::string_view b) {
  auto ta = NormalizedTokens(a);
  auto tb = NormalizedTokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : ta) ++counts[t];
  int overlap = 0;
  for (const auto& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(tb.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ta.size());
  return 2.0 * precision * recall / (precision + recall);
}

MoralDiagnosis DiagnoseNorm(const Norm& gold, const Norm& cand,
                            double overlap_threshold) {
  MoralDiagnosis out;
  const double f1 = TokenF1(gold.action, cand.action);
  if (f1 < overlap_threshold) {
    out.errors.push_back(errors::SemanticMisalignment{cand.ActionPhrase()});
    out.hint = gold.ActionPhrase();
  } else if (gold.polarity != cand.polarity) {
    out.errors.push_back(errors::Contradiction{});
  }
  return out;
}

const VerbLexicon& DefaultVerbs() {
  static const VerbLexicon kVerbs = {
      "answer", "apologize", "ask",    "attend", "be",     "break",  "bring",
      "build",  "buy",       "call",   "care",   "cause",  "cheat",  "clean",
      "complain", "cook",    "criticize", "cut",  "do",     "drink",  "drive",
      "eat",    "end",       "fight",  "fill",   "find",   "finish", "fix",
      "follow", "get",       "give",   "go",     "have",   "help",   "hide",
      "hit",    "hurt",      "ignore", "impress", "keep",  "know",   "laugh",
      "learn",  "leave",     "lie",    "look",   "lose",   "make",   "meet",
      "move",   "pay",       "play",   "protect", "punish", "put",   "quit",
      "read",   "relax",     "return", "save",   "say",    "see",    "sell",
      "send",   "share",     "show",   "sleep",  "spend",  "spread", "start",
      "stay",   "steal",     "stop",   "swim",   "take",   "talk",   "teach",
      "tell",   "throw",     "travel", "try",    "use",    "visit",  "wait",
      "walk",   "want",      "watch",  "wear",   "win",    "work",   "write",
  };
  return kVerbs;
}

std::vector<std::string> ExtractVerbPhrases(const MoralContext& context,
                                            const VerbLexicon& verbs) {
  static const std::set<std::string> kClauseWords = {
      "and",   "but",   "or",     "because", "so",    "when",
      "while", "was",   "were",   "is",      "are",   "if",
      "then",  "that",  "which",  "who",     "since", "after",
      "before", "until", "though", "although"};
  constexpr std::size_t kMaxWords = 8;
  std::vector<std::string> out;
  for (const std::string* sentence :
       {&context.situation, &context.intention, &context.immoral_action}) {
    const auto words = SplitWords(*sentence);
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
      if (Normalize(words[i]) != "to" || EndsClause(words[i])) continue;
      if (!verbs.count(Normalize(words[i + 1]))) continue;
      std::vector<std::string> phrase;
      for (std::size_t j = i + 1; j < words.size() && phrase.size() < kMaxWords; ++j) {
        if (j > i + 1 && kClauseWords.count(Normalize(words[j]))) break;
        phrase.push_back(StripTrailingPunct(words[j]));
        if (EndsClause(words[j])) break;
      }
      std::string joined = Join(phrase);
      if (!joined.empty() &&
          std::find(out.begin(), out.end(), joined) == out.end()) {
        out.push_back(std::move(joined));
      }
    }
  }
  return out;
}

}  // namespace refine::moral
