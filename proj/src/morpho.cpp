#include "mtcoref/morpho.hpp"

#include <algorithm>

#include "mtcoref/corpus.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::noun: return "noun";
    case Category::pronoun: return "pronoun";
    case Category::determiner: return "determiner";
    case Category::participle: return "participle";
    case Category::adjective: return "adjective";
    case Category::verb: return "verb";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view s) {
  for (auto c : {Category::noun, Category::pronoun, Category::determiner, Category::participle, Category::adjective,
                 Category::verb})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::string_view to_string(CallOutcome o) {
  switch (o) {
    case CallOutcome::ambiguous: return "ambiguous";
    case CallOutcome::unknown: return "unknown";
    case CallOutcome::non_informative: return "non_informative";
  }
  return "?";
}

std::string GenderCall::label() const {
  if (gender_) return std::string(to_string(*gender_));
  return std::string(to_string(*outcome_));
}

// ---------------------------------------------------------------- lexicon

void GenderLexicon::add(std::string_view form, const GenderReading& reading) {
  if (!reading.informative && reading.category != Category::pronoun)
    throw ValidationError("non-informative reading for '" + std::string(form) + "' must be a pronoun");
  auto key = text::normalize(form);
  if (key.empty()) throw ValidationError("empty lexicon form");
  entries_[key].insert(reading);
}

void GenderLexicon::merge(const GenderLexicon& other) {
  for (const auto& [form, readings] : other.entries_) entries_[form].insert(readings.begin(), readings.end());
}

const std::set<GenderReading>* GenderLexicon::lookup(std::string_view token) const {
  auto it = entries_.find(text::normalize(token));
  return it == entries_.end() ? nullptr : &it->second;
}

GenderLexicon parse_lexicon(std::string_view content, std::string_view language, const std::string& source) {
  LanguageCode::register_code(language);
  GenderLexicon lex(LanguageCode::parse(language));
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    text::require_utf8(line, source, i + 1);
    std::vector<std::string_view> cols;
    std::size_t pos = 0;
    while (true) {
      auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (cols.size() < 3 || cols.size() > 4)
      throw ParseError(source, i + 1, "expected form<TAB>gender<TAB>category[<TAB>flags]");
    GenderReading r;
    auto g = parse_gender(cols[1]);
    if (!g) throw ParseError(source, i + 1, "unknown gender label '" + std::string(cols[1]) + "'");
    r.gender = *g;
    auto c = parse_category(cols[2]);
    if (!c) throw ParseError(source, i + 1, "unknown category label '" + std::string(cols[2]) + "'");
    r.category = *c;
    bool saw_inf = false, saw_noninf = false;
    if (cols.size() == 4) {
      std::string_view flags = cols[3];
      std::size_t fp = 0;
      while (fp <= flags.size()) {
        auto comma = flags.find(',', fp);
        auto flag = flags.substr(fp, comma == std::string_view::npos ? std::string_view::npos : comma - fp);
        if (flag == "informative") saw_inf = true;
        else if (flag == "noninformative") saw_noninf = true;
        else if (!flag.empty()) throw ParseError(source, i + 1, "unknown flag '" + std::string(flag) + "'");
        if (comma == std::string_view::npos) break;
        fp = comma + 1;
      }
    }
    if (saw_inf && saw_noninf) throw ParseError(source, i + 1, "flags informative and noninformative are exclusive");
    r.informative = !saw_noninf;
    try {
      lex.add(cols[0], r);
    } catch (const ValidationError& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
  return lex;
}

GenderLexicon load_lexicon(const std::filesystem::path& path, std::string_view language) {
  return parse_lexicon(read_file(path), language, path.string());
}

std::string format_lexicon(const GenderLexicon& lexicon) {
  std::string out;
  for (const auto& [form, readings] : lexicon.entries())
    for (const auto& r : readings) {
      out += form;
      out += '\t';
      out += to_string(r.gender);
      out += '\t';
      out += to_string(r.category);
      out += '\t';
      out += r.informative ? "informative" : "noninformative";
      out += '\n';
    }
  return out;
}

// ---------------------------------------------------------------- calls

GenderCall entity_gender(const GenderLexicon& lexicon, const std::vector<std::string>& tgt_tokens,
                         const std::set<std::size_t>& aligned) {
  for (auto idx : aligned) {
    if (idx >= tgt_tokens.size()) continue;
    const auto* readings = lexicon.lookup(tgt_tokens[idx]);
    if (!readings) continue;
    GenderCall::Evidence nouns;
    std::set<Gender> genders;
    for (const auto& r : *readings)
      if (r.category == Category::noun) {
        nouns.emplace_back(idx, r);
        genders.insert(r.gender);
      }
    if (nouns.empty()) continue;
    if (genders.size() == 1) return GenderCall::of(*genders.begin(), std::move(nouns));

    if (idx > 0) {
      if (const auto* prev = lexicon.lookup(tgt_tokens[idx - 1])) {
        std::set<Gender> det_genders;
        GenderCall::Evidence dets;
        for (const auto& r : *prev)
          if (r.category == Category::determiner) {
            det_genders.insert(r.gender);
            dets.emplace_back(idx - 1, r);
          }
        if (det_genders.size() == 1 && genders.count(*det_genders.begin())) {
          const auto g = *det_genders.begin();
          GenderCall::Evidence ev;
          for (const auto& n : nouns)
            if (n.second.gender == g) ev.push_back(n);
          ev.insert(ev.end(), dets.begin(), dets.end());
          return GenderCall::of(g, std::move(ev));
        }
      }
    }
    return GenderCall::failed(CallOutcome::ambiguous, std::move(nouns));
  }
  return GenderCall::failed(CallOutcome::unknown);
}

GenderCall pronoun_gender(const GenderLexicon& lexicon, const std::vector<std::string>& tgt_tokens,
                          const std::set<std::size_t>& aligned) {
  GenderCall::Evidence informative, non_informative;
  std::set<Gender> genders;
  for (auto idx : aligned) {
    if (idx >= tgt_tokens.size()) continue;
    const auto* readings = lexicon.lookup(tgt_tokens[idx]);
    if (!readings) continue;
    for (const auto& r : *readings) {
      if (r.category == Category::noun || r.category == Category::determiner) continue;
      if (r.informative) {
        informative.emplace_back(idx, r);
        genders.insert(r.gender);
      } else {
        non_informative.emplace_back(idx, r);
      }
    }
  }
  if (genders.size() == 1) return GenderCall::of(*genders.begin(), std::move(informative));
  if (genders.size() > 1) return GenderCall::failed(CallOutcome::ambiguous, std::move(informative));
  if (!non_informative.empty()) return GenderCall::failed(CallOutcome::non_informative, std::move(non_informative));
  return GenderCall::failed(CallOutcome::unknown);
}

}  // namespace mtcoref
