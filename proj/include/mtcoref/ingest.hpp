#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtcoref/corpus.hpp"
#include "mtcoref/types.hpp"

namespace mtcoref {

struct TranslationRecord {
  std::string sentence_id;
  std::string system;
  LanguageCode language = LanguageCode::english();
  std::string text;
  std::vector<std::string> tokens;
};

struct TranslationSet {
  std::string system;
  LanguageCode language = LanguageCode::english();
  std::map<std::string, TranslationRecord> records;

  const TranslationRecord* find(const std::string& id) const {
    auto it = records.find(id);
    return it == records.end() ? nullptr : &it->second;
  }
};

enum class TranslationFormat { automatic, plain, jsonl };

struct LoadOptions {
  TranslationFormat format = TranslationFormat::automatic;
  /// Plain mode: split lines on whitespace instead of running the tokenizer.
  bool pretokenized = false;
};

/// Plain text binds line k to corpus sentence k. JSONL records are
/// {"id", "text", "tokens"?} and must cover exactly the corpus ids.
/// automatic picks JSONL for .jsonl/.json files.
TranslationSet load_translations(const std::filesystem::path& path, const Corpus& corpus, const std::string& system,
                                 const LanguageCode& language, const LoadOptions& options = {});

TranslationSet load_translations_text(std::string_view content, const std::string& source, bool jsonl,
                                      const Corpus& corpus, const std::string& system, const LanguageCode& language,
                                      bool pretokenized = false);

/// Writes the JSONL form, ordered by corpus order where available.
std::string serialize_translations(const TranslationSet& set, const Corpus* corpus = nullptr);

/// Declarative description of an HTTP translation endpoint.
///
/// Placeholders: {text} (JSON-escaped in the body, percent-encoded in the
/// URL), {target_lang}, {source_lang}. `response_path` is a dot-separated
/// path into the JSON response; numeric segments index arrays.
struct EndpointConfig {
  std::string system;
  std::string url;
  std::string method = "POST";
  std::string body;
  std::string content_type = "application/json";
  std::string response_path;
  std::map<std::string, std::string> headers;
  int retries = 1;
  int max_in_flight = 4;
  std::chrono::seconds timeout{30};

  /// Throws ValidationError for a missing field or malformed path.
  void validate() const;
};

EndpointConfig parse_endpoint_config(std::string_view json_text, const std::string& source = "<config>");
EndpointConfig load_endpoint_config(const std::filesystem::path& path);

struct FetchFailure {
  std::string sentence_id;
  std::string reason;
};

struct FetchResult {
  TranslationSet translations;
  std::vector<FetchFailure> failures;
  std::size_t requests_issued = 0;
  std::size_t cache_hits = 0;
};

/// Whitespace-collapsed form of a source sentence, used in the cache key.
std::string normalize_source_text(std::string_view text);

/// sha256 over (system, language, normalized source text).
std::string translation_cache_key(const std::string& system, const LanguageCode& language, std::string_view source_text);

/// Cache entry path: <dir>/<k[0:2]>/<k[2:4]>/<k>.json
std::filesystem::path cache_entry_path(const std::filesystem::path& cache_dir, const std::string& key);

/// Resolves the cache directory: MTCOREF_CACHE_DIR if set, else `fallback`.
std::filesystem::path resolve_cache_dir(const std::filesystem::path& fallback);

/// Translates every corpus sentence through the endpoint, consulting and
/// populating the on-disk cache. Failed sentences are reported, not thrown.
FetchResult fetch_translations(const Corpus& corpus, const EndpointConfig& config, const LanguageCode& language,
                               const std::filesystem::path& cache_dir);

/// Extracts a string at `path` from a JSON document; throws Error when the
/// path does not resolve to a string.
std::string extract_response_text(std::string_view body, const std::string& path);

}  // namespace mtcoref
