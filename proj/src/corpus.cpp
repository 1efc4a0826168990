#include "mtcoref/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

using nlohmann::ordered_json;

// ---------------------------------------------------------------- types

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::set<std::string, std::less<>>& registry() {
  static std::set<std::string, std::less<>> codes = {"ar", "de", "en", "es", "fr", "he", "ru"};
  return codes;
}

bool well_formed_code(std::string_view code) {
  return code.size() == 2 && std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

LanguageCode LanguageCode::parse(std::string_view code) {
  if (!is_known(code)) throw ValidationError("unknown language code '" + std::string(code) + "'");
  return LanguageCode(std::string(code));
}

void LanguageCode::register_code(std::string_view code) {
  if (!well_formed_code(code))
    throw ValidationError("language code must be two lowercase letters, got '" + std::string(code) + "'");
  std::lock_guard lock(registry_mutex());
  registry().emplace(code);
}

bool LanguageCode::is_known(std::string_view code) {
  std::lock_guard lock(registry_mutex());
  return registry().find(code) != registry().end();
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::neutral: return "neutral";
  }
  return "?";
}

std::string_view to_string(Stereotype s) {
  switch (s) {
    case Stereotype::stereotypical: return "stereotypical";
    case Stereotype::anti_stereotypical: return "anti_stereotypical";
    case Stereotype::none: return "none";
  }
  return "?";
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  if (s == "neutral") return Gender::neutral;
  return std::nullopt;
}

std::optional<Stereotype> parse_stereotype(std::string_view s) {
  if (s == "stereotypical" || s == "pro") return Stereotype::stereotypical;
  if (s == "anti_stereotypical" || s == "anti") return Stereotype::anti_stereotypical;
  if (s == "none") return Stereotype::none;
  return std::nullopt;
}

void check_span(const Span& s, std::size_t token_count, std::string_view what) {
  if (s.start >= s.end)
    throw ValidationError(std::string(what) + ": start >= end [" + std::to_string(s.start) + "," +
                          std::to_string(s.end) + "]");
  if (s.end > token_count)
    throw ValidationError(std::string(what) + ": span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                          "] exceeds sentence length " + std::to_string(token_count));
}

// ---------------------------------------------------------------- file io

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

// ---------------------------------------------------------------- sentence

std::string AnnotatedSentence::surface(const Span& s) const {
  std::string out;
  for (std::size_t i = s.start; i < s.end && i < tokens.size(); ++i) {
    if (i != s.start) out += ' ';
    out += tokens[i];
  }
  return out;
}

void AnnotatedSentence::validate() const {
  const std::string who = "sentence '" + id + "'";
  if (id.empty()) throw ValidationError("sentence with empty id");
  if (tokens.empty()) throw ValidationError(who + ": no tokens");
  if (entities.empty()) throw ValidationError(who + ": no candidate entities");
  for (std::size_t i = 0; i < entities.size(); ++i) check_span(entities[i], tokens.size(), who + " entity " + std::to_string(i));
  check_span(pronoun, tokens.size(), who + " pronoun");
  if (gold_antecedent >= entities.size())
    throw ValidationError(who + ": gold_antecedent " + std::to_string(gold_antecedent) + " out of range");
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].overlaps(pronoun)) throw ValidationError(who + ": pronoun span overlaps entity " + std::to_string(i));
    for (std::size_t j = i + 1; j < entities.size(); ++j)
      if (entities[i].overlaps(entities[j]))
        throw ValidationError(who + ": entities " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
  }
  for (const auto& [lang, pron] : gold_target_pronouns) {
    if (!LanguageCode::is_known(lang)) throw ValidationError(who + ": unknown language code '" + lang + "'");
    (void)pron;
  }
}

Corpus::Corpus(std::string dataset_name, std::vector<AnnotatedSentence> sentences)
    : dataset_name_(std::move(dataset_name)), sentences_(std::move(sentences)) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    sentences_[i].validate();
    if (!index_.emplace(sentences_[i].id, i).second)
      throw ValidationError("duplicate sentence id '" + sentences_[i].id + "'");
  }
}

const AnnotatedSentence* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &sentences_[it->second];
}

void ClusterSet::canonicalize() {
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end())
      throw ValidationError("sentence '" + sentence_id + "': duplicate span within a cluster");
  }
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "winox") return CorpusFormat::winox;
  if (name == "winomt") return CorpusFormat::winomt;
  if (name == "bug") return CorpusFormat::bug;
  if (name == "canonical") return CorpusFormat::canonical;
  throw ValidationError("unknown corpus format '" + std::string(name) + "' (expected winox|winomt|bug|canonical)");
}

// ---------------------------------------------------------------- parsing

namespace {

struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(source, line, reason); }
};

std::size_t as_index(const ordered_json& v, const LineContext& ctx, std::string_view what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) ctx.fail(std::string(what) + " must be a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

Span as_span(const ordered_json& v, const LineContext& ctx, std::string_view what) {
  if (!v.is_array() || v.size() != 2) ctx.fail(std::string(what) + " must be a [start, end] pair");
  return Span{as_index(v[0], ctx, what), as_index(v[1], ctx, what)};
}

std::string as_string(const ordered_json& v, const LineContext& ctx, std::string_view what) {
  if (!v.is_string()) ctx.fail(std::string(what) + " must be a string");
  return v.get<std::string>();
}

ordered_json parse_json_line(std::string_view line, const LineContext& ctx) {
  text::require_utf8(line, ctx.source, ctx.line);
  try {
    auto j = ordered_json::parse(line);
    if (!j.is_object()) ctx.fail("expected a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    ctx.fail(std::string("malformed JSON: ") + e.what());
  }
}

AnnotatedSentence canonical_record(const ordered_json& j, const LineContext& ctx) {
  static const std::set<std::string> kKeys = {"id",           "tokens",     "entities",  "pronoun",
                                              "gold_antecedent", "source_gender", "stereotype",
                                              "gold_target_pronouns"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!kKeys.count(k)) ctx.fail("unknown key '" + k + "'");
  }
  for (const char* k : {"id", "tokens", "entities", "pronoun", "gold_antecedent"})
    if (!j.contains(k)) ctx.fail(std::string("missing key '") + k + "'");

  AnnotatedSentence s;
  s.id = as_string(j["id"], ctx, "id");
  if (!j["tokens"].is_array()) ctx.fail("tokens must be an array");
  for (const auto& t : j["tokens"]) s.tokens.push_back(as_string(t, ctx, "token"));
  if (!j["entities"].is_array()) ctx.fail("entities must be an array");
  for (const auto& e : j["entities"]) s.entities.push_back(as_span(e, ctx, "entity"));
  s.pronoun = as_span(j["pronoun"], ctx, "pronoun");
  s.gold_antecedent = as_index(j["gold_antecedent"], ctx, "gold_antecedent");
  if (j.contains("source_gender")) {
    auto g = parse_gender(as_string(j["source_gender"], ctx, "source_gender"));
    if (!g) ctx.fail("source_gender must be male|female|neutral");
    s.source_gender = g;
  }
  if (j.contains("stereotype")) {
    auto v = as_string(j["stereotype"], ctx, "stereotype");
    auto st = parse_stereotype(v);
    if (!st || v == "pro" || v == "anti") ctx.fail("stereotype must be stereotypical|anti_stereotypical|none");
    s.stereotype = st;
  }
  if (j.contains("gold_target_pronouns")) {
    const auto& m = j["gold_target_pronouns"];
    if (!m.is_object()) ctx.fail("gold_target_pronouns must be an object");
    for (const auto& [lang, p] : m.items()) {
      if (!LanguageCode::is_known(lang)) ctx.fail("unknown language code '" + lang + "'");
      s.gold_target_pronouns[lang] = as_string(p, ctx, "gold target pronoun");
    }
  }
  return s;
}

std::vector<std::string> lowered(const std::vector<std::string>& toks) {
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(text::lowercase(t));
  return out;
}

// First occurrence of `needle` in `hay` at or after `from`, not overlapping `avoid`.
std::optional<Span> find_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle,
                                  std::size_t from, const std::vector<Span>& avoid) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (!std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) continue;
    Span s{i, i + needle.size()};
    if (std::any_of(avoid.begin(), avoid.end(), [&](const Span& a) { return a.overlaps(s); })) continue;
    return s;
  }
  return std::nullopt;
}

// Wino-X adapter. Record shape:
//   {"id"|"qID", "sentence", "option1", "option2", "answer": 1|2,
//    "pronoun"?: "it", "pronoun_occurrence"?: n, "target_pronouns"?: {"fr": "elle"}}
// Options are located as their first token-sequence match (case-insensitive);
// the pronoun defaults to the first occurrence after both options.
AnnotatedSentence winox_record(const ordered_json& j, const LineContext& ctx, const std::string& dataset) {
  static const std::set<std::string> kKeys = {"id",      "qID",     "sentence",           "option1",
                                              "option2", "answer",  "pronoun",            "pronoun_occurrence",
                                              "target_pronouns"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!kKeys.count(k)) ctx.fail("unknown Wino-X key '" + k + "'");
  }
  for (const char* k : {"sentence", "option1", "option2", "answer"})
    if (!j.contains(k)) ctx.fail(std::string("missing key '") + k + "'");

  AnnotatedSentence s;
  if (j.contains("id")) s.id = as_string(j["id"], ctx, "id");
  else if (j.contains("qID")) s.id = as_string(j["qID"], ctx, "qID");
  else s.id = dataset + "-" + std::to_string(ctx.line);

  s.tokens = text::tokenize(as_string(j["sentence"], ctx, "sentence"));
  const auto low = lowered(s.tokens);
  for (const char* opt : {"option1", "option2"}) {
    auto needle = lowered(text::tokenize(as_string(j[opt], ctx, opt)));
    auto span = find_sequence(low, needle, 0, s.entities);
    if (!span) ctx.fail(std::string(opt) + " '" + j[opt].get<std::string>() + "' not found in sentence");
    s.entities.push_back(*span);
  }
  const auto answer = as_index(j["answer"], ctx, "answer");
  if (answer != 1 && answer != 2) ctx.fail("answer must be 1 or 2");
  s.gold_antecedent = answer - 1;

  const std::string pron = j.contains("pronoun") ? as_string(j["pronoun"], ctx, "pronoun") : std::string("it");
  auto needle = lowered(text::tokenize(pron));
  std::optional<Span> found;
  if (j.contains("pronoun_occurrence")) {
    auto n = as_index(j["pronoun_occurrence"], ctx, "pronoun_occurrence");
    if (n == 0) ctx.fail("pronoun_occurrence is 1-based");
    std::size_t from = 0;
    for (std::size_t k = 0; k < n; ++k) {
      found = find_sequence(low, needle, from, s.entities);
      if (!found) break;
      from = found->end;
    }
  } else {
    std::size_t after = std::max(s.entities[0].end, s.entities[1].end);
    found = find_sequence(low, needle, after, s.entities);
    if (!found) found = find_sequence(low, needle, 0, s.entities);
  }
  if (!found) ctx.fail("pronoun '" + pron + "' not found in sentence");
  s.pronoun = *found;

  if (j.contains("target_pronouns")) {
    const auto& m = j["target_pronouns"];
    if (!m.is_object()) ctx.fail("target_pronouns must be an object");
    for (const auto& [lang, p] : m.items()) {
      if (!LanguageCode::is_known(lang)) ctx.fail("unknown language code '" + lang + "'");
      s.gold_target_pronouns[lang] = as_string(p, ctx, "target pronoun");
    }
  }
  return s;
}

constexpr std::string_view kTsvHeader = "gender\tprofession_index\tsentence\tprofession\tpronoun\tstereotype";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

// WinoMT / BUG adapter. Six tab-separated columns:
//   gender, profession_index (0-based token index), sentence, profession,
//   pronoun, stereotype (stereotypical|anti_stereotypical|none|pro|anti)
AnnotatedSentence gendered_record(std::string_view line, const LineContext& ctx, const std::string& dataset) {
  auto cols = split_tabs(line);
  if (cols.size() != 6)
    ctx.fail("expected 6 tab-separated columns (" + std::string("gender, profession_index, sentence, profession, "
                                                                "pronoun, stereotype") +
             "), found " + std::to_string(cols.size()));
  AnnotatedSentence s;
  s.id = dataset + "-" + std::to_string(ctx.line);
  auto g = parse_gender(cols[0]);
  if (!g) ctx.fail("gender column must be male|female|neutral, got '" + std::string(cols[0]) + "'");
  s.source_gender = g;

  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), index);
  if (ec != std::errc() || ptr != cols[1].data() + cols[1].size())
    ctx.fail("profession_index must be a non-negative integer, got '" + std::string(cols[1]) + "'");

  s.tokens = text::tokenize(cols[2]);
  const auto low = lowered(s.tokens);
  auto prof = lowered(text::tokenize(cols[3]));
  if (prof.empty()) ctx.fail("empty profession");
  if (index + prof.size() > low.size() ||
      !std::equal(prof.begin(), prof.end(), low.begin() + static_cast<std::ptrdiff_t>(index)))
    ctx.fail("profession '" + std::string(cols[3]) + "' not found at token " + std::to_string(index));
  s.entities.push_back(Span{index, index + prof.size()});

  auto pron = lowered(text::tokenize(cols[4]));
  auto found = find_sequence(low, pron, 0, s.entities);
  if (!found) ctx.fail("pronoun '" + std::string(cols[4]) + "' not found in sentence");
  s.pronoun = *found;

  auto st = parse_stereotype(cols[5]);
  if (!st) ctx.fail("stereotype column must be stereotypical|anti_stereotypical|none, got '" + std::string(cols[5]) + "'");
  s.stereotype = st;
  return s;
}

}  // namespace

Corpus parse_corpus_text(std::string_view content, CorpusFormat format, const std::string& source,
                         const std::string& dataset_name) {
  std::vector<AnnotatedSentence> sentences;
  std::set<std::string> seen;
  bool header_seen = false;
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LineContext ctx{source, i + 1};
    auto line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    AnnotatedSentence s;
    switch (format) {
      case CorpusFormat::canonical: s = canonical_record(parse_json_line(line, ctx), ctx); break;
      case CorpusFormat::winox: s = winox_record(parse_json_line(line, ctx), ctx, dataset_name); break;
      case CorpusFormat::winomt:
      case CorpusFormat::bug:
        text::require_utf8(line, source, ctx.line);
        if (!header_seen && sentences.empty() && line == kTsvHeader) {
          header_seen = true;
          continue;
        }
        if (format == CorpusFormat::bug && !header_seen)
          ctx.fail("BUG files must start with the header '" + std::string("gender<TAB>profession_index<TAB>sentence"
                                                                          "<TAB>profession<TAB>pronoun<TAB>stereotype") +
                   "'");
        s = gendered_record(line, ctx, dataset_name);
        break;
    }
    try {
      s.validate();
    } catch (const ValidationError& e) {
      ctx.fail(e.what());
    }
    if (!seen.insert(s.id).second) ctx.fail("duplicate id '" + s.id + "'");
    sentences.push_back(std::move(s));
  }
  return Corpus(dataset_name, std::move(sentences));
}

Corpus parse_corpus(const std::filesystem::path& path, CorpusFormat format, std::optional<std::string> dataset_name) {
  auto content = read_file(path);
  return parse_corpus_text(content, format, path.string(), dataset_name.value_or(path.stem().string()));
}

// ---------------------------------------------------------------- serialization

namespace {

ordered_json span_json(const Span& s) { return ordered_json::array({s.start, s.end}); }

}  // namespace

std::string serialize_sentence(const AnnotatedSentence& s) {
  ordered_json j;
  j["id"] = s.id;
  j["tokens"] = s.tokens;
  j["entities"] = ordered_json::array();
  for (const auto& e : s.entities) j["entities"].push_back(span_json(e));
  j["pronoun"] = span_json(s.pronoun);
  j["gold_antecedent"] = s.gold_antecedent;
  if (s.source_gender) j["source_gender"] = std::string(to_string(*s.source_gender));
  if (s.stereotype) j["stereotype"] = std::string(to_string(*s.stereotype));
  if (!s.gold_target_pronouns.empty()) {
    ordered_json m = ordered_json::object();
    for (const auto& [lang, p] : s.gold_target_pronouns) m[lang] = p;
    j["gold_target_pronouns"] = m;
  }
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.sentences()) {
    out += serialize_sentence(s);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------- clusters

void validate_clusters(const ClusterSet& cs, std::size_t token_count) {
  for (const auto& c : cs.clusters)
    for (const auto& s : c) check_span(s, token_count, "sentence '" + cs.sentence_id + "' cluster mention");
}

std::vector<ClusterSet> parse_clusters_text(std::string_view content, const std::string& source,
                                            const Corpus* corpus) {
  std::vector<ClusterSet> out;
  std::set<std::string> seen;
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LineContext ctx{source, i + 1};
    auto line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto j = parse_json_line(line, ctx);
    for (const auto& [k, v] : j.items()) {
      (void)v;
      if (k != "id" && k != "clusters") ctx.fail("unknown key '" + k + "'");
    }
    if (!j.contains("id") || !j.contains("clusters")) ctx.fail("cluster record needs 'id' and 'clusters'");
    ClusterSet cs;
    cs.sentence_id = as_string(j["id"], ctx, "id");
    if (!j["clusters"].is_array()) ctx.fail("clusters must be an array");
    for (const auto& c : j["clusters"]) {
      if (!c.is_array() || c.empty()) ctx.fail("each cluster must be a non-empty array of spans");
      std::vector<Span> cluster;
      for (const auto& m : c) {
        auto sp = as_span(m, ctx, "mention");
        if (sp.start >= sp.end) ctx.fail("start >= end [" + std::to_string(sp.start) + "," + std::to_string(sp.end) + "]");
        cluster.push_back(sp);
      }
      cs.clusters.push_back(std::move(cluster));
    }
    try {
      cs.canonicalize();
      if (corpus) {
        const auto* sent = corpus->find(cs.sentence_id);
        if (!sent) throw ValidationError("unknown sentence id '" + cs.sentence_id + "'");
        validate_clusters(cs, sent->tokens.size());
      }
    } catch (const ValidationError& e) {
      ctx.fail(e.what());
    }
    if (!seen.insert(cs.sentence_id).second) ctx.fail("duplicate id '" + cs.sentence_id + "'");
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<ClusterSet> parse_clusters(const std::filesystem::path& path, const Corpus* corpus) {
  return parse_clusters_text(read_file(path), path.string(), corpus);
}

std::string serialize_clusters(const ClusterSet& cs) {
  ordered_json j;
  j["id"] = cs.sentence_id;
  j["clusters"] = ordered_json::array();
  for (const auto& c : cs.clusters) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : c) arr.push_back(span_json(s));
    j["clusters"].push_back(arr);
  }
  return j.dump();
}

}  // namespace mtcoref
