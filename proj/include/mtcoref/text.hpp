#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mtcoref::text {

/// Deterministic tokenizer shared by corpus parsing and translation ingest.
/// Splits on whitespace, peels leading and trailing punctuation into
/// single-character tokens, and splits elided clitics (l', d', n', qu', ...)
/// after the apostrophe. Input must be valid UTF-8.
std::vector<std::string> tokenize(std::string_view text);

/// Lowercase + NFC, with Hebrew points and Arabic harakat removed. This is
/// the lookup key used by lexicons and the EM aligner.
std::string normalize(std::string_view word);

/// Lowercase + strip leading/trailing punctuation. No lemmatization.
std::string normalize_surface(std::string_view word);

/// Unicode-aware lowercase only.
std::string lowercase(std::string_view word);

bool is_punctuation_token(std::string_view token);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Throws ParseError if `s` is not valid UTF-8.
void require_utf8(std::string_view s, const std::string& source, std::size_t line);

}  // namespace mtcoref::text
