#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtcoref/align.hpp"
#include "mtcoref/corpus.hpp"
#include "mtcoref/ingest.hpp"
#include "mtcoref/morpho.hpp"

namespace mtcoref {

enum class VerdictStatus {
  consistent,
  inconsistent,
  omitted_non_informative,
  omitted_unaligned,
  omitted_unknown_gender,
};

std::string_view to_string(VerdictStatus s);
std::optional<VerdictStatus> parse_verdict_status(std::string_view s);
bool is_omitted(VerdictStatus s);

struct EvalVerdict {
  std::string sentence_id;
  VerdictStatus status = VerdictStatus::omitted_unaligned;
  GenderCall entity_call = GenderCall::failed(CallOutcome::unknown);
  GenderCall pronoun_call = GenderCall::failed(CallOutcome::unknown);
  std::vector<std::size_t> pronoun_targets;
  std::vector<std::string> pronoun_surface;
  bool neutral_pronoun = false;

  // Context carried along for reports and annotation sheets.
  std::string dataset;
  std::string system;
  std::string language;
  std::string source_text;
  std::string target_text;
  std::string entity_surface;
};

/// Outcome of the decision table.
struct StatusDecision {
  VerdictStatus status;
  bool neutral_pronoun;
};

/// The verdict decision table, in order:
///   pronoun has no aligned target        -> omitted_unaligned
///   pronoun call non_informative         -> omitted_non_informative
///   entity has no aligned target         -> omitted_unaligned
///   entity call not a concrete gender    -> omitted_unknown_gender
///   pronoun call ambiguous or unknown    -> omitted_unknown_gender
///   genders equal                        -> consistent
///   otherwise                            -> inconsistent
/// neutral_pronoun marks an inconsistent verdict whose pronoun is neutral
/// while the source pronoun demands gendered reference.
StatusDecision decide_status(const GenderCall& entity, const GenderCall& pronoun, bool entity_aligned,
                             bool pronoun_aligned, bool source_demands_gender);

/// True for English pronouns whose translation must carry a gender
/// (it, he, she, him, her, his, hers and reflexives).
bool demands_gendered_reference(std::string_view source_pronoun);

EvalVerdict judge_sentence(const AnnotatedSentence& sent, const TranslationRecord& trans, const Alignment& alignment,
                           const GenderLexicon& lexicon);

/// Judges every corpus sentence that has a translation, in corpus order.
/// `alignments` is indexed like corpus.sentences(). Alignments are
/// validated against both token sequences.
std::vector<EvalVerdict> judge_corpus(const Corpus& corpus, const TranslationSet& translations,
                                      const std::vector<Alignment>& alignments, const GenderLexicon& lexicon,
                                      std::size_t jobs = 1);

/// hits / total, kept as integers so reported percentages are exact.
struct Ratio {
  std::size_t hits = 0;
  std::size_t total = 0;
  double percent() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total); }
};

struct MetricsReport {
  std::string dataset;
  std::string system;
  std::string language;
  std::size_t n_total = 0;
  std::size_t n_consistent = 0;
  std::size_t n_inconsistent = 0;
  std::map<std::string, std::size_t> n_omitted;  // by status name
  std::size_t n_neutral = 0;
  double consistency = 0.0;
  double neutral_rate = 0.0;
  std::optional<double> pronoun_accuracy;
  std::optional<double> gender_accuracy;
  std::optional<double> delta_s;
  std::optional<double> delta_g;

  std::size_t omitted_total() const;
  bool operator==(const MetricsReport&) const = default;
};

/// Core fields. Throws MetricError("no scorable instances") when every
/// verdict is omitted, and when verdicts mix datasets, systems or languages.
MetricsReport consistency(const std::vector<EvalVerdict>& verdicts);

/// Any aligned pronoun token equal to the gold target pronoun, after
/// lowercasing and stripping edge punctuation.
Ratio pronoun_accuracy(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus, const LanguageCode& language);

/// Entity gender equals source gender; omitted_unaligned and
/// omitted_unknown_gender verdicts are excluded.
Ratio gender_accuracy(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus);

/// Stereotypical minus anti-stereotypical gender accuracy, in points.
double delta_s(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// One-vs-rest precision/recall/F1 of entity-gender predictions for `g`
/// over the gender-accuracy population.
ClassScores gender_f1(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus, Gender g);

/// F1(male) - F1(female), in points.
double delta_g(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus);

/// Computes every metric the data supports; optional metrics whose inputs
/// are absent stay empty.
MetricsReport full_report(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus);

enum class SpanMatching { exact, head_overlap };

SpanMatching parse_span_matching(std::string_view name);

struct ResolverOptions {
  SpanMatching matching = SpanMatching::head_overlap;
  /// A cluster that also holds another candidate entity is wrong.
  bool penalize_distractors = true;
};

bool span_matches(const Span& predicted, const Span& gold, SpanMatching matching);

/// Whether the predicted clusters link the pronoun to its gold antecedent.
bool resolver_correct(const AnnotatedSentence& sent, const ClusterSet* predicted, const ResolverOptions& options);

/// Sentences whose pronoun is clustered with the gold antecedent and with
/// no other candidate. Missing predictions count as wrong.
Ratio resolver_accuracy(const Corpus& corpus, const std::vector<ClusterSet>& predicted,
                        const ResolverOptions& options = {});

// Serialization.
std::string verdict_to_json(const EvalVerdict& v);
EvalVerdict verdict_from_json(std::string_view line, const std::string& source = "<verdicts>", std::size_t line_no = 0);
std::string verdicts_to_jsonl(const std::vector<EvalVerdict>& verdicts);
std::vector<EvalVerdict> verdicts_from_jsonl(std::string_view content, const std::string& source = "<verdicts>");

/// Pretty-printed JSON, keys in a fixed order; optional metrics are null.
std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(std::string_view content, const std::string& source = "<report>");

/// Markdown tables: consistency by system and language pair, then the
/// per-metric breakdown of each report.
std::string reports_to_markdown(const std::vector<MetricsReport>& reports);

}  // namespace mtcoref
