#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtcoref/metrics.hpp"

namespace mtcoref {

/// One line of a human-validation sheet. Machine fields are copied from
/// the verdict; annotator fields start empty.
struct AnnotationRow {
  std::string sentence_id;
  std::string dataset;
  std::string system;
  std::string language;
  std::string source_text;
  std::string target_text;
  std::string pronoun_tokens;  // aligned pronoun evidence, space-joined
  std::string entity_gender;
  std::string pronoun_gender;
  std::string status;
  std::optional<bool> pronoun_correct;
  std::optional<bool> gender_correct;
  std::string note;

  static AnnotationRow from_verdict(const EvalVerdict& v);
};

/// Counter-based key for the index-th id (in sorted order) under `seed`.
std::uint64_t sample_key(std::uint64_t seed, std::uint64_t index);

/// Uniform sample of `n` verdicts without replacement. Depends only on the
/// id set and the seed; rows come back ordered by sentence id.
std::vector<AnnotationRow> sample(const std::vector<EvalVerdict>& verdicts, std::size_t n, std::uint64_t seed);

/// Fixed sheet header, validated verbatim on ingest.
extern const char* const kAnnotationHeader;

std::string format_sheet(const std::vector<AnnotationRow>& rows);
std::vector<AnnotationRow> parse_sheet(std::string_view content, const std::string& source = "<sheet>");
std::vector<AnnotationRow> read_sheet(const std::filesystem::path& path);

struct AgreementStats {
  std::size_t total = 0;
  std::size_t agreements = 0;
  std::size_t alignment_errors = 0;  // pronoun_correct = no
  std::size_t gender_errors = 0;     // pronoun_correct = yes, gender_correct = no

  double percent() const {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(agreements) / static_cast<double>(total);
  }
};

/// Agreement per (dataset, language). A row agrees when the annotator
/// confirms both the aligned pronoun and the predicted gender. Throws
/// ValidationError listing the ids of rows with an empty annotator field.
std::map<std::pair<std::string, std::string>, AgreementStats> agreement(const std::vector<AnnotationRow>& rows);

/// Unweighted mean of per-group agreement percentages.
double average_agreement(const std::map<std::pair<std::string, std::string>, AgreementStats>& groups);

}  // namespace mtcoref
