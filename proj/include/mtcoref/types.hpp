#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtcoref {

/// Two-letter lowercase language identifier. Construction goes through
/// parse(), which rejects codes that are neither built in (de, fr, ru, es,
/// he, ar, en) nor registered by loading a lexicon for them.
class LanguageCode {
 public:
  static LanguageCode parse(std::string_view code);
  static LanguageCode english() { return LanguageCode("en"); }

  /// Adds a code to the accepted set. Must be two lowercase ASCII letters.
  static void register_code(std::string_view code);
  static bool is_known(std::string_view code);

  const std::string& str() const { return code_; }

  auto operator<=>(const LanguageCode&) const = default;

 private:
  explicit LanguageCode(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

enum class Gender { male, female, neutral };

enum class Stereotype { stereotypical, anti_stereotypical, none };

std::string_view to_string(Gender g);
std::string_view to_string(Stereotype s);
std::optional<Gender> parse_gender(std::string_view s);
std::optional<Stereotype> parse_stereotype(std::string_view s);

/// Half-open token range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(std::size_t token) const { return token >= start && token < end; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  /// Final token of the span, used as the mention head.
  std::size_t head() const { return end - 1; }

  auto operator<=>(const Span&) const = default;
};

/// Throws ValidationError unless 0 <= start < end <= token_count.
void check_span(const Span& s, std::size_t token_count, std::string_view what);

}  // namespace mtcoref
