#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtcoref/types.hpp"

namespace mtcoref {

/// One English source instance with its candidate entities and the pronoun
/// whose antecedent is being tested.
struct AnnotatedSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<Span> entities;
  Span pronoun;
  std::size_t gold_antecedent = 0;
  std::optional<Gender> source_gender;
  std::optional<Stereotype> stereotype;
  std::map<std::string, std::string> gold_target_pronouns;  // language code -> pronoun

  const Span& antecedent() const { return entities.at(gold_antecedent); }
  std::string surface(const Span& s) const;

  /// Throws ValidationError naming the id on any invariant violation.
  void validate() const;
};

class Corpus {
 public:
  Corpus() = default;
  /// Validates every sentence and id uniqueness.
  Corpus(std::string dataset_name, std::vector<AnnotatedSentence> sentences);

  const std::string& dataset_name() const { return dataset_name_; }
  LanguageCode source_language() const { return LanguageCode::english(); }
  const std::vector<AnnotatedSentence>& sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }

  const AnnotatedSentence* find(std::string_view id) const;

 private:
  std::string dataset_name_;
  std::vector<AnnotatedSentence> sentences_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Coreference clusters predicted (or gold) for one sentence.
struct ClusterSet {
  std::string sentence_id;
  std::vector<std::vector<Span>> clusters;

  /// Sorts each cluster by start and rejects duplicate spans.
  void canonicalize();
};

enum class CorpusFormat { winox, winomt, bug, canonical };

CorpusFormat parse_corpus_format(std::string_view name);

/// Parses one of the supported dataset layouts. `dataset_name` defaults to
/// the file stem.
Corpus parse_corpus(const std::filesystem::path& path, CorpusFormat format,
                    std::optional<std::string> dataset_name = std::nullopt);

/// Same as parse_corpus but over in-memory text; `source` labels errors.
Corpus parse_corpus_text(std::string_view content, CorpusFormat format, const std::string& source,
                         const std::string& dataset_name);

/// Canonical JSON Lines rendering: fixed key order, no insignificant
/// whitespace, one record per line, trailing newline.
std::string serialize_corpus(const Corpus& corpus);
std::string serialize_sentence(const AnnotatedSentence& s);

/// Parses a cluster JSONL file. When `corpus` is supplied, ids and span
/// bounds are validated against it; otherwise bound checks are deferred
/// to validate_clusters.
std::vector<ClusterSet> parse_clusters(const std::filesystem::path& path, const Corpus* corpus = nullptr);
std::vector<ClusterSet> parse_clusters_text(std::string_view content, const std::string& source,
                                            const Corpus* corpus = nullptr);
void validate_clusters(const ClusterSet& cs, std::size_t token_count);
std::string serialize_clusters(const ClusterSet& cs);

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits on '\n', dropping a single trailing empty line and any '\r'.
std::vector<std::string_view> split_lines(std::string_view content);

}  // namespace mtcoref
