#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtcoref/types.hpp"

namespace mtcoref {

enum class Category { noun, pronoun, determiner, participle, adjective, verb };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

/// One gender analysis of a word form. `informative` is false only for
/// pronoun forms whose gender follows something other than the referent
/// (French possessives agree with the possessed noun).
struct GenderReading {
  Gender gender = Gender::neutral;
  Category category = Category::noun;
  bool informative = true;

  auto operator<=>(const GenderReading&) const = default;
};

class GenderLexicon {
 public:
  explicit GenderLexicon(LanguageCode language) : language_(std::move(language)) {}

  const LanguageCode& language() const { return language_; }

  /// Adds a reading under the normalized form. Identical readings collapse.
  /// Throws ValidationError for a non-informative non-pronoun reading.
  void add(std::string_view form, const GenderReading& reading);
  void merge(const GenderLexicon& other);

  /// Readings for a surface token (normalized before lookup); nullptr if none.
  const std::set<GenderReading>* lookup(std::string_view token) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::set<GenderReading>>& entries() const { return entries_; }

 private:
  LanguageCode language_;
  std::map<std::string, std::set<GenderReading>> entries_;
};

enum class CallOutcome { ambiguous, unknown, non_informative };

std::string_view to_string(CallOutcome o);

/// Result of a gender analysis: a concrete gender or a failure outcome,
/// with the lexicon readings that produced it.
class GenderCall {
 public:
  using Evidence = std::vector<std::pair<std::size_t, GenderReading>>;

  static GenderCall of(Gender g, Evidence evidence) { return GenderCall(g, std::nullopt, std::move(evidence)); }
  static GenderCall failed(CallOutcome o, Evidence evidence = {}) {
    return GenderCall(std::nullopt, o, std::move(evidence));
  }

  const std::optional<Gender>& gender() const { return gender_; }
  const std::optional<CallOutcome>& outcome() const { return outcome_; }
  const Evidence& evidence() const { return evidence_; }
  bool is(Gender g) const { return gender_ == g; }
  bool is(CallOutcome o) const { return outcome_ == o; }

  /// "male" / "female" / "neutral" / "ambiguous" / "unknown" / "non_informative".
  std::string label() const;

  bool operator==(const GenderCall&) const = default;

 private:
  GenderCall(std::optional<Gender> g, std::optional<CallOutcome> o, Evidence e)
      : gender_(g), outcome_(o), evidence_(std::move(e)) {}

  std::optional<Gender> gender_;
  std::optional<CallOutcome> outcome_;
  Evidence evidence_;
};

/// Gender of a translated entity. The first aligned token (in target order)
/// with a noun reading decides; a noun with several genders is resolved by
/// a determiner reading on the immediately preceding target token.
GenderCall entity_gender(const GenderLexicon& lexicon, const std::vector<std::string>& tgt_tokens,
                         const std::set<std::size_t>& aligned);

/// Gender of a translated pronoun, pooling informative pronoun, participle,
/// adjective and verb readings over all aligned tokens.
GenderCall pronoun_gender(const GenderLexicon& lexicon, const std::vector<std::string>& tgt_tokens,
                          const std::set<std::size_t>& aligned);

/// TSV rows `form<TAB>gender<TAB>category[<TAB>flags]`, flags a comma list
/// drawn from {informative, noninformative}. `#` starts a comment line.
/// Registers `language` as a known code.
GenderLexicon load_lexicon(const std::filesystem::path& path, std::string_view language);
GenderLexicon parse_lexicon(std::string_view content, std::string_view language, const std::string& source = "<lexicon>");
std::string format_lexicon(const GenderLexicon& lexicon);

/// Built-in seed lexicon (pronoun tables, determiners, common nouns) for
/// de, fr, ru, es, he and ar. Throws ValidationError for other languages.
GenderLexicon seed_lexicon(const LanguageCode& language);
bool has_seed_lexicon(std::string_view language);

}  // namespace mtcoref
