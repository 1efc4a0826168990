#include "mtcoref/validate.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "mtcoref/error.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

const char* const kAnnotationHeader =
    "sentence_id\tdataset\tsystem\tlanguage\tsource\ttarget\tpronoun_tokens\tentity_gender\tpronoun_gender\tstatus\t"
    "pronoun_correct\tgender_correct\tnote";

AnnotationRow AnnotationRow::from_verdict(const EvalVerdict& v) {
  AnnotationRow r;
  r.sentence_id = v.sentence_id;
  r.dataset = v.dataset;
  r.system = v.system;
  r.language = v.language;
  r.source_text = v.source_text;
  r.target_text = v.target_text;
  r.pronoun_tokens = text::join(v.pronoun_surface);
  r.entity_gender = v.entity_call.label();
  r.pronoun_gender = v.pronoun_call.label();
  r.status = std::string(to_string(v.status));
  return r;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t sample_key(std::uint64_t seed, std::uint64_t index) { return splitmix64(splitmix64(seed) ^ splitmix64(~index)); }

std::vector<AnnotationRow> sample(const std::vector<EvalVerdict>& verdicts, std::size_t n, std::uint64_t seed) {
  if (n > verdicts.size())
    throw ValidationError("cannot sample " + std::to_string(n) + " of " + std::to_string(verdicts.size()) + " verdicts");
  std::vector<const EvalVerdict*> sorted;
  for (const auto& v : verdicts) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->sentence_id < b->sentence_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->sentence_id == sorted[i - 1]->sentence_id)
      throw ValidationError("duplicate verdict id '" + sorted[i]->sentence_id + "'");

  std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
  keyed.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) keyed.emplace_back(sample_key(seed, i), i);
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(n), keyed.end());
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < n; ++k) chosen.push_back(keyed[k].second);
  std::sort(chosen.begin(), chosen.end());
  std::vector<AnnotationRow> rows;
  for (auto i : chosen) rows.push_back(AnnotationRow::from_verdict(*sorted[i]));
  return rows;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

std::string yes_no(const std::optional<bool>& b) { return b ? (*b ? "yes" : "no") : ""; }

}  // namespace

std::string format_sheet(const std::vector<AnnotationRow>& rows) {
  std::string out = kAnnotationHeader;
  out += '\n';
  for (const auto& r : rows) {
    const std::string fields[] = {r.sentence_id,    r.dataset,       r.system, r.language,
                                  r.source_text,    r.target_text,   r.pronoun_tokens,
                                  r.entity_gender,  r.pronoun_gender, r.status,
                                  yes_no(r.pronoun_correct), yes_no(r.gender_correct), r.note};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += '\t';
      out += escape(fields[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<AnnotationRow> parse_sheet(std::string_view content, const std::string& source) {
  auto lines = split_lines(content);
  if (lines.empty() || lines[0] != kAnnotationHeader)
    throw ParseError(source, 1, "annotation sheet header does not match the expected columns");
  std::vector<AnnotationRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      auto tab = lines[i].find('\t', pos);
      cols.push_back(unescape(lines[i].substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos)));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (cols.size() != 13) throw ParseError(source, i + 1, "expected 13 columns, found " + std::to_string(cols.size()));
    auto flag = [&](const std::string& v, const char* what) -> std::optional<bool> {
      if (v.empty()) return std::nullopt;
      if (v == "yes") return true;
      if (v == "no") return false;
      throw ParseError(source, i + 1, std::string(what) + " must be yes, no or empty, got '" + v + "'");
    };
    AnnotationRow r;
    r.sentence_id = cols[0];
    r.dataset = cols[1];
    r.system = cols[2];
    r.language = cols[3];
    r.source_text = cols[4];
    r.target_text = cols[5];
    r.pronoun_tokens = cols[6];
    r.entity_gender = cols[7];
    r.pronoun_gender = cols[8];
    r.status = cols[9];
    r.pronoun_correct = flag(cols[10], "pronoun_correct");
    r.gender_correct = flag(cols[11], "gender_correct");
    r.note = cols[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AnnotationRow> read_sheet(const std::filesystem::path& path) {
  return parse_sheet(read_file(path), path.string());
}

std::map<std::pair<std::string, std::string>, AgreementStats> agreement(const std::vector<AnnotationRow>& rows) {
  std::vector<std::string> unfilled;
  for (const auto& r : rows)
    if (!r.pronoun_correct || !r.gender_correct) unfilled.push_back(r.sentence_id);
  if (!unfilled.empty()) {
    std::string ids;
    for (const auto& id : unfilled) ids += (ids.empty() ? "" : ", ") + id;
    throw ValidationError("unfilled annotation rows: " + ids);
  }
  std::map<std::pair<std::string, std::string>, AgreementStats> out;
  for (const auto& r : rows) {
    auto& s = out[{r.dataset, r.language}];
    ++s.total;
    if (!*r.pronoun_correct) ++s.alignment_errors;
    else if (!*r.gender_correct) ++s.gender_errors;
    else ++s.agreements;
  }
  return out;
}

double average_agreement(const std::map<std::pair<std::string, std::string>, AgreementStats>& groups) {
  if (groups.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [k, s] : groups) sum += s.percent();
  return sum / static_cast<double>(groups.size());
}

}  // namespace mtcoref
