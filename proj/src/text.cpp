#include "mtcoref/text.hpp"

#include <openssl/evp.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <cstdio>
#include <memory>

#include "mtcoref/error.hpp"

namespace mtcoref::text {
namespace {

struct CodePoint {
  UChar32 cp;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  while (i < len) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(s.data(), i, len, c);
    out.push_back({c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_apostrophe(UChar32 c) { return c == U'\'' || c == 0x2019; }

bool is_punct(UChar32 c) {
  if (c < 0) return false;
  return u_ispunct(c) || u_charType(c) == U_MATH_SYMBOL || u_charType(c) == U_CURRENCY_SYMBOL;
}

// Elided forms split after the apostrophe: l'homme -> l' homme.
bool is_clitic_prefix(std::string_view lowered) {
  static constexpr std::array<std::string_view, 9> kPrefixes = {"l", "d", "n", "c", "j", "m", "s", "t", "qu"};
  for (auto p : kPrefixes)
    if (lowered == p) return true;
  return false;
}

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFC normalizer unavailable");
  return *n;
}

bool is_stripped_mark(UChar32 c) {
  // Hebrew points and cantillation, Arabic harakat, superscript alef.
  return (c >= 0x0591 && c <= 0x05BD) || c == 0x05BF || c == 0x05C1 || c == 0x05C2 || c == 0x05C4 ||
         c == 0x05C5 || c == 0x05C7 || (c >= 0x064B && c <= 0x065F) || c == 0x0670;
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Splits an apostrophe-bearing core into clitic + remainder when it matches.
void push_core(std::string_view core, std::vector<std::string>& out) {
  auto cps = decode(core);
  for (std::size_t k = 0; k + 1 < cps.size(); ++k) {
    if (!is_apostrophe(cps[k].cp)) continue;
    std::string_view prefix = core.substr(0, cps[k].begin);
    if (!prefix.empty() && is_clitic_prefix(lowercase(prefix))) {
      out.emplace_back(core.substr(0, cps[k].end));
      push_core(core.substr(cps[k].end), out);
      return;
    }
    break;
  }
  if (!core.empty()) out.emplace_back(core);
}

void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  auto cps = decode(chunk);
  std::size_t lo = 0;
  std::size_t hi = cps.size();
  std::vector<std::string> trailing;
  while (lo < hi && is_punct(cps[lo].cp)) {
    out.emplace_back(chunk.substr(cps[lo].begin, cps[lo].end - cps[lo].begin));
    ++lo;
  }
  while (hi > lo && is_punct(cps[hi - 1].cp)) {
    // Keep the apostrophe of a bare clitic such as "l'".
    if (is_apostrophe(cps[hi - 1].cp) && hi - 1 > lo) {
      auto prefix = chunk.substr(cps[lo].begin, cps[hi - 1].begin - cps[lo].begin);
      if (is_clitic_prefix(lowercase(prefix))) break;
    }
    trailing.emplace_back(chunk.substr(cps[hi - 1].begin, cps[hi - 1].end - cps[hi - 1].begin));
    --hi;
  }
  if (lo < hi) push_core(chunk.substr(cps[lo].begin, cps[hi - 1].end - cps[lo].begin), out);
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  auto cps = decode(text);
  for (const auto& c : cps)
    if (c.cp < 0) throw ParseError("", 0, "invalid UTF-8 in text to tokenize");
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && u_isUWhiteSpace(cps[i].cp)) ++i;
    if (i == cps.size()) break;
    std::size_t j = i;
    while (j < cps.size() && !u_isUWhiteSpace(cps[j].cp)) ++j;
    tokenize_chunk(text.substr(cps[i].begin, cps[j - 1].end - cps[i].begin), out);
    i = j;
  }
  return out;
}

std::string lowercase(std::string_view word) {
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string normalize(std::string_view word) {
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
  u.toLower(icu::Locale::getRoot());
  UErrorCode status = U_ZERO_ERROR;
  // Decompose-then-filter would also drop Latin accents; only strip the
  // Hebrew/Arabic marks, which are already standalone code points.
  icu::UnicodeString filtered;
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    if (!is_stripped_mark(c)) filtered.append(c);
    i += U16_LENGTH(c);
  }
  auto out = nfc().normalize(filtered, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return to_utf8(out);
}

std::string normalize_surface(std::string_view word) {
  auto cps = decode(word);
  std::size_t lo = 0, hi = cps.size();
  while (lo < hi && is_punct(cps[lo].cp)) ++lo;
  while (hi > lo && is_punct(cps[hi - 1].cp)) --hi;
  if (lo == hi) return {};
  return normalize(word.substr(cps[lo].begin, cps[hi - 1].end - cps[lo].begin));
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  for (const auto& c : decode(token))
    if (!is_punct(c.cp)) return false;
  return true;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

void require_utf8(std::string_view s, const std::string& source, std::size_t line) {
  for (const auto& c : decode(s))
    if (c.cp < 0) throw ParseError(source, line, "invalid UTF-8");
}

}  // namespace mtcoref::text
