#include "doctest.h"
#include "mtcoref/error.hpp"
#include "mtcoref/text.hpp"
#include "mtcoref/types.hpp"

using namespace mtcoref;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize splits whitespace and edge punctuation") {
  CHECK(text::tokenize("The trophy didn't fit.") == Tokens{"The", "trophy", "didn't", "fit", "."});
  CHECK(text::tokenize("  \"Hello,  world!\" ") == Tokens{"\"", "Hello", ",", "world", "!", "\""});
  CHECK(text::tokenize("(a)") == Tokens{"(", "a", ")"});
  CHECK(text::tokenize("") == Tokens{});
  CHECK(text::tokenize("...") == Tokens{".", ".", "."});
}

TEST_CASE("tokenize splits elided clitics after the apostrophe") {
  CHECK(text::tokenize("L'infirmière qu'elle") == Tokens{"L'", "infirmière", "qu'", "elle"});
  CHECK(text::tokenize("d'abord n'est") == Tokens{"d'", "abord", "n'", "est"});
  CHECK(text::tokenize("je l'ai trouvée.") == Tokens{"je", "l'", "ai", "trouvée", "."});
  CHECK(text::tokenize("l'") == Tokens{"l'"});
  // Not a clitic: the English contraction stays whole.
  CHECK(text::tokenize("didn't") == Tokens{"didn't"});
}

TEST_CASE("tokenize handles non-Latin scripts") {
  CHECK(text::tokenize("Он сказал, что она устала.") == Tokens{"Он", "сказал", ",", "что", "она", "устала", "."});
  CHECK(text::tokenize("הוא אמר.") == Tokens{"הוא", "אמר", "."});
}

TEST_CASE("tokenize rejects invalid UTF-8") { CHECK_THROWS_AS(text::tokenize("bad \xff byte"), ParseError); }

TEST_CASE("normalize lowercases, composes and strips vowel points") {
  CHECK(text::normalize("Valise") == "valise");
  CHECK(text::normalize("ÉLÈVE") == "élève");
  CHECK(text::normalize("e\xCC\x81") == "\xC3\xA9");  // e + combining acute -> é
  CHECK(text::normalize("הָלַכְתָּ") == "הלכת");
  CHECK(text::normalize("أَنْتَ") == "أنت");
  CHECK(text::normalize("Der") == "der");
}

TEST_CASE("normalize_surface strips edge punctuation only") {
  CHECK(text::normalize_surface("Elle,") == "elle");
  CHECK(text::normalize_surface("«il»") == "il");
  CHECK(text::normalize_surface("l'") == "l");
  CHECK(text::normalize_surface("aujourd'hui") == "aujourd'hui");
  CHECK(text::is_punctuation_token("."));
  CHECK_FALSE(text::is_punctuation_token("a."));
}

TEST_CASE("sha256_hex matches known digests") {
  CHECK(text::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("language codes") {
  CHECK(LanguageCode::parse("de").str() == "de");
  CHECK_THROWS_AS(LanguageCode::parse("xx"), ValidationError);
  CHECK_THROWS_AS(LanguageCode::register_code("XYZ"), ValidationError);
  LanguageCode::register_code("it");
  CHECK(LanguageCode::parse("it").str() == "it");
}

TEST_CASE("span invariants") {
  CHECK_NOTHROW(check_span({0, 1}, 1, "span"));
  CHECK_THROWS_WITH_AS(check_span({3, 2}, 5, "span"), doctest::Contains("start >= end"), ValidationError);
  CHECK_THROWS_WITH_AS(check_span({2, 6}, 5, "span"), doctest::Contains("exceeds sentence length"), ValidationError);
  Span s{2, 5};
  CHECK(s.head() == 4);
  CHECK(s.overlaps({4, 6}));
  CHECK_FALSE(s.overlaps({5, 6}));
}
