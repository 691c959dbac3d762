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

#ifndef REFINE_MORAL_H_
#define REFINE_MORAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "refine/feedback.h"

namespace refine::moral {

enum class Polarity { kPositive, kNegative };

std::string_view PolarityName(Polarity polarity);

struct MoralContext {
  std::string situation;
  std::string intention;
  std::string immoral_action;
};

// One judgment surface form, e.g. "It's hurtful" (negative). `infinitive`
// forms take "to <verb phrase>"; the others take a bare verb phrase
// ("You should <verb phrase>").
struct JudgmentForm {
  std::string surface;
  Polarity polarity;
  std::vector<std::string> inverses;
  bool infinitive;
};

// word -> alternatives, e.g. "bad" -> {"awful", "terrible"}.
using SynonymTable = std::map<std::string, std::vector<std::string>>;

class JudgmentLexicon {
 public:
  // Throws kInvalidConfig unless every form has at least one inverse and
  // every inverse is itself a form of the opposite polarity.
  explicit JudgmentLexicon(std::vector<JudgmentForm> forms);

  static const JudgmentLexicon& Default();

  const std::vector<JudgmentForm>& forms() const { return forms_; }
  const JudgmentForm* Find(std::string_view surface) const;

  // Longest form whose normalized tokens prefix the normalized text
  // (case-insensitive, punctuation such as apostrophes ignored). Returns the
  // form and the number of leading words it consumed.
  std::optional<std::pair<const JudgmentForm*, std::size_t>> MatchPrefix(
      std::string_view text) const;

  // Adds paraphrased forms (one word swapped for a synonym) that inherit
  // polarity, frame and inverses from their source form.
  JudgmentLexicon WithSynonyms(const SynonymTable& table) const;

  // Paraphrases of `surface` present in this lexicon, not including itself.
  std::vector<std::string> ParaphrasesOf(std::string_view surface,
                                         const SynonymTable& table) const;

 private:
  std::vector<JudgmentForm> forms_;
};

// A norm is a judgment plus an action. `action` is the bare verb phrase
// without a leading infinitive marker or final punctuation; `to_marker`
// records whether the surface text put "to" in front of it.
struct Norm {
  std::string judgment;
  std::string action;
  Polarity polarity;
  bool to_marker;

  // The action as written after the judgment, e.g. "to make fun of your
  // classmates".
  std::string ActionPhrase() const;
  // judgment + " " + action phrase + "."
  std::string Render() const;
  bool operator==(const Norm&) const = default;
};

// Throws kUnparseableNorm when no lexicon judgment prefixes the text or no
// action follows it.
Norm ParseNorm(std::string_view text, const JudgmentLexicon& lexicon);

// Same action, judgment swapped for a seeded choice among its inverses.
Norm InvertJudgment(const Norm& norm, const JudgmentLexicon& lexicon,
                    std::uint64_t seed);

// Re-frames `action` for `judgment` (adds or drops the infinitive marker).
Norm WithJudgment(const Norm& norm, const JudgmentForm& judgment);

// SQuAD-style token F1 over lowercase alphanumeric tokens.
double TokenF1(std::string_view a, std::string_view b);

inline constexpr double kDefaultOverlapThreshold = 0.6;

struct MoralDiagnosis {
  std::vector<TaskError> errors;
  // Gold action phrase, attached to misalignment feedback.
  std::optional<std::string> hint;
  bool clean() const { return errors.empty(); }
};

// Contradiction when the actions overlap (F1 >= threshold) but polarities
// differ; SemanticMisalignment(candidate action phrase) when they do not
// overlap. A gold-referenced proxy: it cannot judge norm quality.
MoralDiagnosis DiagnoseNorm(const Norm& gold, const Norm& cand,
                            double overlap_threshold);

using VerbLexicon = std::set<std::string>;
const VerbLexicon& DefaultVerbs();

// Infinitive verb phrases ("to <verb> ...") found in the context, in order
// of appearance, as bare phrases without the marker. A phrase stops at
// punctuation, a clause word ("and", "was", ...) or after eight words.
std::vector<std::string> ExtractVerbPhrases(const MoralContext& context,
                                            const VerbLexicon& verbs);

}  // namespace refine::moral

#endif  // REFINE_MORAL_H_
