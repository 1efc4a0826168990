#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtcoref/corpus.hpp"

namespace mtcoref {

/// Source tokens with inline `<ENTk>` ... `</ENTk>` marker tokens.
struct MarkedSentence {
  std::vector<std::string> tokens;
  std::string origin_id;
  std::size_t cluster_count = 0;  // clusters with at least one marked mention
};

struct ClusteredSentence {
  std::vector<std::string> tokens;
  ClusterSet clusters;
};

/// The closed list of gendered English pronouns.
bool is_gendered_pronoun(std::string_view token);

bool has_non_singleton_cluster(const ClusterSet& clusters);
bool has_gendered_cluster(const ClusteredSentence& s);

/// Keeps sentences with at least one cluster of two or more mentions.
std::vector<ClusteredSentence> filter_coref(const std::vector<ClusteredSentence>& sentences);

/// Keeps sentences with a non-singleton cluster containing a single-token
/// mention that is exactly one of he, she, her, him, hers, his.
std::vector<ClusteredSentence> filter_gender(const std::vector<ClusteredSentence>& sentences);

/// Clusters are numbered 1..K by earliest mention start. Mentions are
/// visited by (start asc, length desc); one overlapping an already marked
/// mention is skipped. Throws ValidationError for a singleton cluster or a
/// token that already looks like a marker.
MarkedSentence insert_markers(const std::vector<std::string>& tokens, const std::vector<std::vector<Span>>& clusters,
                              std::string origin_id = {});

struct StrippedSentence {
  std::vector<std::string> tokens;
  std::vector<std::vector<Span>> clusters;  // ordered by marker number
};

/// Inverse of insert_markers. Throws ParseError (token position in the
/// message) for unbalanced, interleaved or empty marked regions.
StrippedSentence strip_markers(const std::vector<std::string>& marked);

/// True for `<ENTk>` / `</ENTk>` with k a positive integer.
bool is_marker_token(std::string_view token);

enum class AugmentMode { coref, gender };
enum class MarkerSource { predicted, gold, none };

AugmentMode parse_augment_mode(std::string_view s);
MarkerSource parse_marker_source(std::string_view s);

struct AugmentOptions {
  AugmentMode mode = AugmentMode::coref;
  MarkerSource markers = MarkerSource::predicted;
  /// Mark only clusters that contain a gendered pronoun.
  bool pronoun_clusters_only = false;
};

struct AugmentInput {
  std::string id;
  std::vector<std::string> tokens;
  std::optional<ClusterSet> predicted;
  std::optional<ClusterSet> gold;
  std::optional<std::string> target;  // parallel target line, copied through
};

struct AugmentedLine {
  MarkedSentence sentence;
  std::optional<std::string> target;
};

/// The gold cluster {antecedent, pronoun} of an annotated sentence.
ClusterSet gold_clusters(const AnnotatedSentence& s);

/// Filters by mode over the selected cluster source (gold for
/// MarkerSource::gold, predicted otherwise) and marks the survivors.
/// Order-preserving for any `jobs`.
std::vector<AugmentedLine> build_augmented(const std::vector<AugmentInput>& inputs, const AugmentOptions& options,
                                           std::size_t jobs = 1);

/// One marked sentence per line.
std::string format_marked_text(const std::vector<AugmentedLine>& lines);
/// One target line per kept sentence (empty when a line has no target).
std::string format_target_text(const std::vector<AugmentedLine>& lines);
/// JSONL sidecar: {"line": 1-based output line, "id": origin id, "clusters": K}.
std::string format_sidecar(const std::vector<AugmentedLine>& lines);

}  // namespace mtcoref
