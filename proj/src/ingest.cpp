#include "httplib.h"

#include "mtcoref/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> whitespace_split(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

TranslationRecord make_record(std::string id, const std::string& system, const LanguageCode& language, std::string text_,
                              std::optional<std::vector<std::string>> tokens, bool pretokenized) {
  TranslationRecord r;
  r.sentence_id = std::move(id);
  r.system = system;
  r.language = language;
  if (tokens) r.tokens = std::move(*tokens);
  else if (pretokenized) r.tokens = whitespace_split(text_);
  else r.tokens = text::tokenize(text_);
  r.text = std::move(text_);
  return r;
}

}  // namespace

TranslationSet load_translations_text(std::string_view content, const std::string& source, bool jsonl,
                                      const Corpus& corpus, const std::string& system, const LanguageCode& language,
                                      bool pretokenized) {
  TranslationSet set{system, language, {}};
  auto lines = split_lines(content);
  if (!jsonl) {
    if (lines.size() != corpus.size())
      throw ParseError(source, 0,
                       "expected " + std::to_string(corpus.size()) + " lines, found " + std::to_string(lines.size()));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      text::require_utf8(lines[i], source, i + 1);
      const auto& id = corpus.sentences()[i].id;
      set.records.emplace(id, make_record(id, system, language, std::string(lines[i]), std::nullopt, pretokenized));
    }
    return set;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    text::require_utf8(lines[i], source, line_no);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("text") || !j["text"].is_string())
      throw ParseError(source, line_no, "translation record needs string fields 'id' and 'text'");
    std::optional<std::vector<std::string>> toks;
    if (j.contains("tokens")) {
      if (!j["tokens"].is_array()) throw ParseError(source, line_no, "tokens must be an array of strings");
      toks.emplace();
      for (const auto& t : j["tokens"]) {
        if (!t.is_string()) throw ParseError(source, line_no, "tokens must be an array of strings");
        toks->push_back(t.get<std::string>());
      }
    }
    auto id = j["id"].get<std::string>();
    if (!corpus.find(id)) throw ParseError(source, line_no, "id '" + id + "' is not in the corpus");
    if (set.records.count(id)) throw ParseError(source, line_no, "duplicate id '" + id + "'");
    set.records.emplace(id, make_record(id, system, language, j["text"].get<std::string>(), std::move(toks), false));
  }
  for (const auto& s : corpus.sentences())
    if (!set.records.count(s.id)) throw ParseError(source, 0, "no translation for sentence '" + s.id + "'");
  return set;
}

TranslationSet load_translations(const std::filesystem::path& path, const Corpus& corpus, const std::string& system,
                                 const LanguageCode& language, const LoadOptions& options) {
  bool jsonl = options.format == TranslationFormat::jsonl;
  if (options.format == TranslationFormat::automatic) {
    auto ext = path.extension().string();
    jsonl = ext == ".jsonl" || ext == ".json";
  }
  return load_translations_text(read_file(path), path.string(), jsonl, corpus, system, language, options.pretokenized);
}

std::string serialize_translations(const TranslationSet& set, const Corpus* corpus) {
  std::string out;
  auto emit = [&](const TranslationRecord& r) {
    ordered_json j;
    j["id"] = r.sentence_id;
    j["text"] = r.text;
    j["tokens"] = r.tokens;
    out += j.dump();
    out += '\n';
  };
  if (corpus) {
    for (const auto& s : corpus->sentences())
      if (const auto* r = set.find(s.id)) emit(*r);
  } else {
    for (const auto& [id, r] : set.records) emit(r);
  }
  return out;
}

// ---------------------------------------------------------------- endpoint config

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto dot = path.find('.', pos);
    out.push_back(path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
    if (dot == std::string::npos) return out;
    pos = dot + 1;
  }
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

void EndpointConfig::validate() const {
  if (system.empty()) throw ValidationError("endpoint config: 'system' is required");
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)
    throw ValidationError("endpoint config: 'url' must start with http:// or https://");
  if (method != "GET" && method != "POST") throw ValidationError("endpoint config: 'method' must be GET or POST");
  if (response_path.empty()) throw ValidationError("endpoint config: 'response_path' is required");
  for (const auto& seg : split_path(response_path))
    if (seg.empty()) throw ValidationError("endpoint config: malformed response_path '" + response_path + "'");
  if (retries < 0) throw ValidationError("endpoint config: 'retries' must be >= 0");
  if (max_in_flight < 1) throw ValidationError("endpoint config: 'max_in_flight' must be >= 1");
  if (method == "GET" && url.find("{text}") == std::string::npos)
    throw ValidationError("endpoint config: GET endpoints need {text} in the url");
  if (method == "POST" && body.find("{text}") == std::string::npos && url.find("{text}") == std::string::npos)
    throw ValidationError("endpoint config: {text} placeholder missing from body and url");
}

EndpointConfig parse_endpoint_config(std::string_view json_text, const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, std::string("malformed JSON: ") + e.what());
  }
  static const std::set<std::string> kKeys = {"system",  "url",           "method",  "body",         "content_type",
                                              "response_path", "headers", "retries", "max_in_flight", "timeout_seconds"};
  if (!j.is_object()) throw ParseError(source, 0, "endpoint config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!kKeys.count(k)) throw ParseError(source, 0, "unknown endpoint config key '" + k + "'");
  }
  EndpointConfig c;
  try {
    c.system = j.value("system", "");
    c.url = j.value("url", "");
    c.method = j.value("method", c.method);
    c.body = j.value("body", "");
    c.content_type = j.value("content_type", c.content_type);
    c.response_path = j.value("response_path", "");
    if (j.contains("headers")) c.headers = j["headers"].get<std::map<std::string, std::string>>();
    c.retries = j.value("retries", c.retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.timeout = std::chrono::seconds(j.value("timeout_seconds", 30));
  } catch (const json::exception& e) {
    throw ParseError(source, 0, std::string("bad field type: ") + e.what());
  }
  c.validate();
  return c;
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  return parse_endpoint_config(read_file(path), path.string());
}

std::string extract_response_text(std::string_view body, const std::string& path) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    throw Error("response is not valid JSON");
  }
  const json* cur = &j;
  for (const auto& seg : split_path(path)) {
    if (cur->is_object() && cur->contains(seg)) {
      cur = &(*cur)[seg];
    } else if (cur->is_array() && is_index(seg) && std::stoul(seg) < cur->size()) {
      cur = &(*cur)[std::stoul(seg)];
    } else {
      throw Error("response path '" + path + "' does not resolve at segment '" + seg + "'");
    }
  }
  if (!cur->is_string()) throw Error("response path '" + path + "' does not point at a string");
  return cur->get<std::string>();
}

// ---------------------------------------------------------------- cache

std::string normalize_source_text(std::string_view text_) {
  std::string collapsed;
  bool pending_space = false;
  for (char c : text_) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed += ' ';
    pending_space = false;
    collapsed += c;
  }
  return collapsed;
}

std::string translation_cache_key(const std::string& system, const LanguageCode& language, std::string_view source_text) {
  std::string material = system;
  material += '\x1f';
  material += language.str();
  material += '\x1f';
  material += normalize_source_text(source_text);
  return text::sha256_hex(material);
}

std::filesystem::path cache_entry_path(const std::filesystem::path& cache_dir, const std::string& key) {
  return cache_dir / key.substr(0, 2) / key.substr(2, 2) / (key + ".json");
}

std::filesystem::path resolve_cache_dir(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("MTCOREF_CACHE_DIR"); env && *env) return env;
  return fallback;
}

// ---------------------------------------------------------------- fetching

namespace {

std::string json_escape_inner(const std::string& s) {
  auto dumped = json(s).dump();
  return dumped.substr(1, dumped.size() - 2);
}

std::string percent_encode(const std::string& s) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = tmpl.find(key, pos)) != std::string::npos) {
    tmpl.replace(pos, key.size(), value);
    pos += value.size();
  }
  return tmpl;
}

struct Request {
  std::string host;  // scheme://host[:port]
  std::string target;
  std::string body;
};

Request build_request(const EndpointConfig& c, const std::string& source_text, const LanguageCode& lang) {
  auto url = substitute(c.url, "{text}", percent_encode(source_text));
  url = substitute(url, "{target_lang}", lang.str());
  url = substitute(url, "{source_lang}", "en");
  auto scheme_end = url.find("://") + 3;
  auto path_begin = url.find('/', scheme_end);
  Request r;
  r.host = url.substr(0, path_begin);
  r.target = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  r.body = substitute(c.body, "{text}", json_escape_inner(source_text));
  r.body = substitute(r.body, "{target_lang}", lang.str());
  r.body = substitute(r.body, "{source_lang}", "en");
  return r;
}

struct Job {
  std::string key;
  std::string source_text;
  std::vector<std::string> ids;
};

// Outcome per job: translated text or a failure reason.
struct Outcome {
  std::optional<std::string> text;
  std::string failure;
  bool fatal = false;
};

Outcome run_job(const EndpointConfig& c, const Job& job, const LanguageCode& lang, std::atomic<std::size_t>& requests) {
  auto req = build_request(c, job.source_text, lang);
  httplib::Client client(req.host);
  client.set_connection_timeout(c.timeout);
  client.set_read_timeout(c.timeout);
  httplib::Headers headers(c.headers.begin(), c.headers.end());
  std::string last;
  for (int attempt = 0; attempt <= c.retries; ++attempt) {
    ++requests;
    auto res = c.method == "GET" ? client.Get(req.target, headers)
                                 : client.Post(req.target, headers, req.body, c.content_type);
    if (!res) {
      last = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last = "HTTP " + std::to_string(res->status);
      if (res->status < 500) break;
      continue;
    }
    try {
      return Outcome{extract_response_text(res->body, c.response_path), {}, false};
    } catch (const Error& e) {
      return Outcome{std::nullopt, e.what(), true};
    }
  }
  return Outcome{std::nullopt, last, false};
}

}  // namespace

FetchResult fetch_translations(const Corpus& corpus, const EndpointConfig& config, const LanguageCode& language,
                               const std::filesystem::path& cache_dir) {
  config.validate();
  FetchResult result;
  result.translations.system = config.system;
  result.translations.language = language;

  // Dedupe identical sources so each key is requested at most once.
  std::vector<Job> jobs;
  std::unordered_map<std::string, std::size_t> by_key;
  std::map<std::string, std::string> resolved;  // key -> text
  for (const auto& s : corpus.sentences()) {
    auto source_text = text::join(s.tokens);
    auto key = translation_cache_key(config.system, language, source_text);
    if (resolved.count(key)) continue;
    auto entry = cache_entry_path(cache_dir, key);
    if (std::filesystem::exists(entry)) {
      try {
        auto j = json::parse(read_file(entry));
        resolved[key] = j.at("text").get<std::string>();
        ++result.cache_hits;
        continue;
      } catch (const json::exception&) {
        // unreadable entry: refetch and overwrite
      }
    }
    auto [it, inserted] = by_key.emplace(key, jobs.size());
    if (inserted) jobs.push_back(Job{key, source_text, {}});
    jobs[it->second].ids.push_back(s.id);
  }

  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> requests{0};
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight), jobs.size());
  std::vector<std::exception_ptr> errors(n_workers);
  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        outcomes[i] = run_job(config, jobs[i], language, requests);
        if (outcomes[i].text) {
          ordered_json entry;
          entry["system"] = config.system;
          entry["language"] = language.str();
          entry["source"] = normalize_source_text(jobs[i].source_text);
          entry["text"] = *outcomes[i].text;
          write_file_atomic(cache_entry_path(cache_dir, jobs[i].key), entry.dump() + "\n");
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = jobs.size();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker, w);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  result.requests_issued = requests;

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].fatal) throw Error("endpoint '" + config.system + "': " + outcomes[i].failure);
    if (outcomes[i].text) resolved[jobs[i].key] = *outcomes[i].text;
  }
  std::map<std::string, std::string> failure_by_key;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!outcomes[i].text) failure_by_key[jobs[i].key] = outcomes[i].failure;

  for (const auto& s : corpus.sentences()) {
    auto key = translation_cache_key(config.system, language, text::join(s.tokens));
    if (auto it = resolved.find(key); it != resolved.end()) {
      result.translations.records.emplace(
          s.id, TranslationRecord{s.id, config.system, language, it->second, text::tokenize(it->second)});
    } else {
      result.failures.push_back({s.id, failure_by_key[key]});
    }
  }
  return result;
}

}  // namespace mtcoref
