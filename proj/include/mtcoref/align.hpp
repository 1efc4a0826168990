#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mtcoref {

/// Set of (source index, target index) links. Many-to-many is allowed.
struct Alignment {
  std::set<std::pair<std::size_t, std::size_t>> links;

  /// Target indices linked to any source token in [src_begin, src_end).
  std::set<std::size_t> targets_of(std::size_t src_begin, std::size_t src_end) const;
  /// Throws ValidationError if a link falls outside the given lengths.
  void validate(std::size_t src_len, std::size_t tgt_len) const;

  bool operator==(const Alignment&) const = default;
};

enum class Symmetrization { intersection, union_, grow_diag };

Symmetrization parse_symmetrization(std::string_view name);

struct TrainReport;

using SentencePair = std::pair<std::vector<std::string>, std::vector<std::string>>;

/// IBM Model 1 lexical translation probabilities t(target | source), with a
/// NULL source word. Words are stored in normalized (lowercased) form.
class TranslationTable {
 public:
  static constexpr std::string_view kNullWord = "NULL";

  /// t(target | source); 0 for pairs that never co-occurred.
  double prob(std::string_view target, std::string_view source) const;
  double null_prob(std::string_view target) const;

  /// Sum over targets of t(target | source). 1 for every trained source word.
  double row_sum(std::string_view source) const;
  std::vector<std::string> source_words() const;  // NULL excluded
  std::size_t entry_count() const { return probs_.size(); }

  /// `target<TAB>source<TAB>prob` lines, sorted by (source, target), NULL
  /// source first. Probabilities are printed with round-trip precision.
  std::string to_tsv() const;
  static TranslationTable from_tsv(std::string_view content, const std::string& source = "<table>");

  bool operator==(const TranslationTable&) const;

 private:
  friend class Model1Trainer;
  friend TranslationTable train_model1(const std::vector<SentencePair>&, int, TrainReport*);
  friend double model1_log_likelihood(const TranslationTable&, const std::vector<SentencePair>&);
  friend std::vector<std::vector<double>> link_posteriors(const TranslationTable&, const std::vector<std::string>&,
                                                          const std::vector<std::string>&);
  friend Alignment directional_align(const TranslationTable&, const std::vector<std::string>&,
                                     const std::vector<std::string>&);
  static constexpr std::uint32_t kNull = 0;

  std::uint32_t source_id(std::string_view w) const;
  std::uint32_t target_id(std::string_view w) const;
  double lookup(std::uint32_t tgt, std::uint32_t src) const;
  static std::uint64_t key(std::uint32_t src, std::uint32_t tgt) { return (std::uint64_t{src} << 32) | tgt; }

  // Source id 0 is NULL. Entries for one source word are contiguous.
  std::vector<std::string> source_vocab_{std::string(kNullWord)};
  std::vector<std::string> target_vocab_;
  std::unordered_map<std::string, std::uint32_t> source_index_;
  std::unordered_map<std::string, std::uint32_t> target_index_;
  std::vector<std::uint32_t> entry_source_;
  std::vector<std::uint32_t> entry_target_;
  std::vector<double> probs_;
  std::unordered_map<std::uint64_t, std::size_t> entry_index_;
};

struct TrainReport {
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // an empty side
  /// Corpus log-likelihood under the initial table and after each iteration.
  std::vector<double> log_likelihood;
};

/// Runs `iterations` EM updates from a uniform initialization over each
/// source word's co-occurring targets. Tokens are normalized before
/// training. Deterministic: accumulation follows corpus order, then target
/// position, then source position.
TranslationTable train_model1(const std::vector<SentencePair>& bitext, int iterations, TrainReport* report = nullptr);

/// Log-likelihood of the bitext under Model 1, dropping the constant
/// length term: sum over pairs and target positions of
/// log(sum_i t(f_j | e_i)) - m log(l + 1), with i ranging over NULL too.
double model1_log_likelihood(const TranslationTable& table, const std::vector<SentencePair>& bitext);

/// Posterior link distribution for each target position: entry 0 is NULL,
/// entry i + 1 is source position i. Rows for unseen targets are all zero.
std::vector<std::vector<double>> link_posteriors(const TranslationTable& table, const std::vector<std::string>& src,
                                                 const std::vector<std::string>& tgt);

/// Per-target argmax over NULL and source positions (NULL wins ties, then
/// the lowest source index). NULL links are dropped. Links are (src, tgt).
Alignment directional_align(const TranslationTable& table, const std::vector<std::string>& src,
                            const std::vector<std::string>& tgt);

Alignment symmetrize(const Alignment& forward, const Alignment& reverse, std::size_t src_len, std::size_t tgt_len,
                     Symmetrization method);

/// table_fwd models t(tgt | src), table_rev models t(src | tgt).
Alignment align_pair(const TranslationTable& table_fwd, const TranslationTable& table_rev,
                     const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                     Symmetrization method = Symmetrization::intersection);

/// Pharaoh `i-j` lines. An empty line is an empty alignment.
std::vector<Alignment> read_pharaoh(const std::filesystem::path& path);
std::vector<Alignment> parse_pharaoh(std::string_view content, const std::string& source = "<pharaoh>");
std::string format_pharaoh_line(const Alignment& a);
std::string format_pharaoh(const std::vector<Alignment>& alignments);
void write_pharaoh(const std::vector<Alignment>& alignments, const std::filesystem::path& path);

}  // namespace mtcoref
