#include "mtcoref/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/parallel.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

using nlohmann::ordered_json;

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::consistent: return "consistent";
    case VerdictStatus::inconsistent: return "inconsistent";
    case VerdictStatus::omitted_non_informative: return "omitted_non_informative";
    case VerdictStatus::omitted_unaligned: return "omitted_unaligned";
    case VerdictStatus::omitted_unknown_gender: return "omitted_unknown_gender";
  }
  return "?";
}

std::optional<VerdictStatus> parse_verdict_status(std::string_view s) {
  for (auto v : {VerdictStatus::consistent, VerdictStatus::inconsistent, VerdictStatus::omitted_non_informative,
                 VerdictStatus::omitted_unaligned, VerdictStatus::omitted_unknown_gender})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

bool is_omitted(VerdictStatus s) { return s != VerdictStatus::consistent && s != VerdictStatus::inconsistent; }

// ---------------------------------------------------------------- judging

StatusDecision decide_status(const GenderCall& entity, const GenderCall& pronoun, bool entity_aligned,
                             bool pronoun_aligned, bool source_demands_gender) {
  if (!pronoun_aligned) return {VerdictStatus::omitted_unaligned, false};
  if (pronoun.is(CallOutcome::non_informative)) return {VerdictStatus::omitted_non_informative, false};
  if (!entity_aligned) return {VerdictStatus::omitted_unaligned, false};
  if (!entity.gender() || !pronoun.gender()) return {VerdictStatus::omitted_unknown_gender, false};
  if (*entity.gender() == *pronoun.gender()) return {VerdictStatus::consistent, false};
  return {VerdictStatus::inconsistent, source_demands_gender && *pronoun.gender() == Gender::neutral};
}

bool demands_gendered_reference(std::string_view source_pronoun) {
  static const std::set<std::string, std::less<>> kGendered = {"it",      "he",      "she",     "him",
                                                               "her",     "his",     "hers",    "its",
                                                               "himself", "herself", "itself"};
  return kGendered.count(text::normalize_surface(source_pronoun)) > 0;
}

EvalVerdict judge_sentence(const AnnotatedSentence& sent, const TranslationRecord& trans, const Alignment& alignment,
                           const GenderLexicon& lexicon) {
  const auto& tgt = trans.tokens;
  auto in_range = [&](std::set<std::size_t> s) {
    std::erase_if(s, [&](std::size_t i) { return i >= tgt.size(); });
    return s;
  };
  const auto& ante = sent.antecedent();
  const auto entity_targets = in_range(alignment.targets_of(ante.start, ante.end));
  const auto pronoun_targets = in_range(alignment.targets_of(sent.pronoun.start, sent.pronoun.end));

  EvalVerdict v;
  v.sentence_id = sent.id;
  v.language = trans.language.str();
  v.system = trans.system;
  v.source_text = text::join(sent.tokens);
  v.target_text = trans.text.empty() ? text::join(tgt) : trans.text;
  v.entity_surface = sent.surface(ante);
  v.entity_call = entity_targets.empty() ? GenderCall::failed(CallOutcome::unknown)
                                         : entity_gender(lexicon, tgt, entity_targets);
  v.pronoun_call = pronoun_targets.empty() ? GenderCall::failed(CallOutcome::unknown)
                                           : pronoun_gender(lexicon, tgt, pronoun_targets);
  for (auto i : pronoun_targets) {
    v.pronoun_targets.push_back(i);
    v.pronoun_surface.push_back(tgt[i]);
  }
  const auto d = decide_status(v.entity_call, v.pronoun_call, !entity_targets.empty(), !pronoun_targets.empty(),
                               demands_gendered_reference(sent.surface(sent.pronoun)));
  v.status = d.status;
  v.neutral_pronoun = d.neutral_pronoun;
  return v;
}

std::vector<EvalVerdict> judge_corpus(const Corpus& corpus, const TranslationSet& translations,
                                      const std::vector<Alignment>& alignments, const GenderLexicon& lexicon,
                                      std::size_t jobs) {
  const auto& sents = corpus.sentences();
  if (alignments.size() != sents.size())
    throw ValidationError("expected " + std::to_string(sents.size()) + " alignments, found " +
                          std::to_string(alignments.size()));
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < sents.size(); ++i)
    if (translations.find(sents[i].id)) todo.push_back(i);
  for (auto i : todo) {
    try {
      alignments[i].validate(sents[i].tokens.size(), translations.find(sents[i].id)->tokens.size());
    } catch (const ValidationError& e) {
      throw ValidationError("sentence '" + sents[i].id + "': " + e.what());
    }
  }
  auto verdicts = parallel_map(todo.size(), jobs, [&](std::size_t k) {
    const auto i = todo[k];
    auto v = judge_sentence(sents[i], *translations.find(sents[i].id), alignments[i], lexicon);
    v.dataset = corpus.dataset_name();
    return v;
  });
  return verdicts;
}

// ---------------------------------------------------------------- corpus metrics

std::size_t MetricsReport::omitted_total() const {
  std::size_t n = 0;
  for (const auto& [k, c] : n_omitted) n += c;
  return n;
}

MetricsReport consistency(const std::vector<EvalVerdict>& verdicts) {
  MetricsReport r;
  if (!verdicts.empty()) {
    r.dataset = verdicts.front().dataset;
    r.system = verdicts.front().system;
    r.language = verdicts.front().language;
  }
  for (auto s : {VerdictStatus::omitted_non_informative, VerdictStatus::omitted_unaligned,
                 VerdictStatus::omitted_unknown_gender})
    r.n_omitted[std::string(to_string(s))] = 0;
  for (const auto& v : verdicts) {
    if (v.dataset != r.dataset || v.system != r.system || v.language != r.language)
      throw MetricError("verdicts mix datasets, systems or languages");
    ++r.n_total;
    if (v.status == VerdictStatus::consistent) ++r.n_consistent;
    else if (v.status == VerdictStatus::inconsistent) ++r.n_inconsistent;
    else ++r.n_omitted[std::string(to_string(v.status))];
    if (v.neutral_pronoun) ++r.n_neutral;
  }
  const auto scorable = r.n_consistent + r.n_inconsistent;
  if (scorable == 0) throw MetricError("no scorable instances");
  r.consistency = Ratio{r.n_consistent, scorable}.percent();
  r.neutral_rate = Ratio{r.n_neutral, scorable}.percent();
  return r;
}

namespace {

const AnnotatedSentence& sentence_for(const Corpus& corpus, const EvalVerdict& v) {
  const auto* s = corpus.find(v.sentence_id);
  if (!s) throw MetricError("verdict for unknown sentence '" + v.sentence_id + "'");
  return *s;
}

bool gender_scorable(const EvalVerdict& v) {
  return v.status != VerdictStatus::omitted_unaligned && v.status != VerdictStatus::omitted_unknown_gender;
}

template <typename Pred>
Ratio gender_accuracy_where(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus, Pred keep) {
  Ratio r;
  for (const auto& v : verdicts) {
    const auto& s = sentence_for(corpus, v);
    if (!s.source_gender || !gender_scorable(v) || !keep(s)) continue;
    ++r.total;
    if (v.entity_call.gender() == s.source_gender) ++r.hits;
  }
  return r;
}

void require_source_gender(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus) {
  for (const auto& v : verdicts)
    if (sentence_for(corpus, v).source_gender) return;
  throw MetricError("no sentence carries source_gender; gender metrics need WinoMT/BUG-style data");
}

}  // namespace

Ratio pronoun_accuracy(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus, const LanguageCode& language) {
  Ratio r;
  for (const auto& v : verdicts) {
    const auto& s = sentence_for(corpus, v);
    auto it = s.gold_target_pronouns.find(language.str());
    if (it == s.gold_target_pronouns.end()) continue;
    const auto gold = text::normalize_surface(it->second);
    if (gold.empty()) continue;
    ++r.total;
    if (std::any_of(v.pronoun_surface.begin(), v.pronoun_surface.end(),
                    [&](const std::string& t) { return text::normalize_surface(t) == gold; }))
      ++r.hits;
  }
  if (r.total == 0)
    throw MetricError("no gold target pronouns for '" + language.str() + "'; pronoun accuracy needs Wino-X-style data");
  return r;
}

Ratio gender_accuracy(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus) {
  require_source_gender(verdicts, corpus);
  auto r = gender_accuracy_where(verdicts, corpus, [](const AnnotatedSentence&) { return true; });
  if (r.total == 0) throw MetricError("no scorable instances for gender accuracy");
  return r;
}

double delta_s(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus) {
  require_source_gender(verdicts, corpus);
  auto subset = [&](Stereotype st) {
    auto r = gender_accuracy_where(verdicts, corpus, [st](const AnnotatedSentence& s) { return s.stereotype == st; });
    if (r.total == 0) throw MetricError("empty " + std::string(to_string(st)) + " subset");
    return r;
  };
  return subset(Stereotype::stereotypical).percent() - subset(Stereotype::anti_stereotypical).percent();
}

ClassScores gender_f1(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus, Gender g) {
  require_source_gender(verdicts, corpus);
  std::size_t predicted = 0, gold = 0, correct = 0;
  for (const auto& v : verdicts) {
    const auto& s = sentence_for(corpus, v);
    if (!s.source_gender || !gender_scorable(v)) continue;
    const bool pred_g = v.entity_call.gender() == g;
    const bool gold_g = s.source_gender == g;
    predicted += pred_g;
    gold += gold_g;
    correct += pred_g && gold_g;
  }
  if (gold == 0) throw MetricError("empty " + std::string(to_string(g)) + " subset");
  ClassScores c;
  c.precision = predicted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted);
  c.recall = static_cast<double>(correct) / static_cast<double>(gold);
  c.f1 = c.precision + c.recall == 0.0 ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
  return c;
}

double delta_g(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus) {
  return 100.0 * (gender_f1(verdicts, corpus, Gender::male).f1 - gender_f1(verdicts, corpus, Gender::female).f1);
}

MetricsReport full_report(const std::vector<EvalVerdict>& verdicts, const Corpus& corpus) {
  auto r = consistency(verdicts);
  auto attempt = [](auto fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const MetricError&) {
      return std::nullopt;
    }
  };
  if (!r.language.empty() && LanguageCode::is_known(r.language)) {
    const auto lang = LanguageCode::parse(r.language);
    r.pronoun_accuracy = attempt([&] { return pronoun_accuracy(verdicts, corpus, lang).percent(); });
  }
  r.gender_accuracy = attempt([&] { return gender_accuracy(verdicts, corpus).percent(); });
  r.delta_s = attempt([&] { return delta_s(verdicts, corpus); });
  r.delta_g = attempt([&] { return delta_g(verdicts, corpus); });
  return r;
}

// ---------------------------------------------------------------- resolver

SpanMatching parse_span_matching(std::string_view name) {
  if (name == "exact") return SpanMatching::exact;
  if (name == "head_overlap" || name == "head-overlap") return SpanMatching::head_overlap;
  throw ValidationError("unknown matching '" + std::string(name) + "' (expected exact|head_overlap)");
}

bool span_matches(const Span& predicted, const Span& gold, SpanMatching matching) {
  return matching == SpanMatching::exact ? predicted == gold : predicted.contains(gold.head());
}

bool resolver_correct(const AnnotatedSentence& sent, const ClusterSet* predicted, const ResolverOptions& options) {
  if (!predicted) return false;
  const auto& ante = sent.antecedent();
  for (const auto& cluster : predicted->clusters) {
    for (std::size_t p = 0; p < cluster.size(); ++p) {
      if (!span_matches(cluster[p], sent.pronoun, options.matching)) continue;
      bool has_ante = false, has_other = false;
      for (std::size_t m = 0; m < cluster.size(); ++m) {
        if (m == p) continue;
        if (span_matches(cluster[m], ante, options.matching)) has_ante = true;
        for (std::size_t k = 0; k < sent.entities.size(); ++k)
          if (k != sent.gold_antecedent && span_matches(cluster[m], sent.entities[k], options.matching))
            has_other = true;
      }
      if (has_ante && !(options.penalize_distractors && has_other)) return true;
    }
  }
  return false;
}

Ratio resolver_accuracy(const Corpus& corpus, const std::vector<ClusterSet>& predicted, const ResolverOptions& options) {
  std::unordered_map<std::string, const ClusterSet*> by_id;
  for (const auto& cs : predicted) by_id.emplace(cs.sentence_id, &cs);
  Ratio r;
  for (const auto& s : corpus.sentences()) {
    ++r.total;
    auto it = by_id.find(s.id);
    if (resolver_correct(s, it == by_id.end() ? nullptr : it->second, options)) ++r.hits;
  }
  return r;
}

// ---------------------------------------------------------------- serialization

namespace {

ordered_json call_to_json(const GenderCall& c) {
  ordered_json j;
  j["label"] = c.label();
  j["evidence"] = ordered_json::array();
  for (const auto& [idx, r] : c.evidence())
    j["evidence"].push_back({idx, std::string(to_string(r.gender)), std::string(to_string(r.category)), r.informative});
  return j;
}

GenderCall call_from_json(const ordered_json& j) {
  GenderCall::Evidence ev;
  for (const auto& e : j.at("evidence")) {
    GenderReading r;
    r.gender = parse_gender(e.at(1).get<std::string>()).value();
    r.category = parse_category(e.at(2).get<std::string>()).value();
    r.informative = e.at(3).get<bool>();
    ev.emplace_back(e.at(0).get<std::size_t>(), r);
  }
  const auto label = j.at("label").get<std::string>();
  if (auto g = parse_gender(label)) return GenderCall::of(*g, std::move(ev));
  for (auto o : {CallOutcome::ambiguous, CallOutcome::unknown, CallOutcome::non_informative})
    if (to_string(o) == label) return GenderCall::failed(o, std::move(ev));
  throw std::invalid_argument("unknown call label '" + label + "'");
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::string verdict_to_json(const EvalVerdict& v) {
  ordered_json j;
  j["id"] = v.sentence_id;
  j["dataset"] = v.dataset;
  j["system"] = v.system;
  j["language"] = v.language;
  j["status"] = std::string(to_string(v.status));
  j["neutral_pronoun"] = v.neutral_pronoun;
  j["entity_call"] = call_to_json(v.entity_call);
  j["pronoun_call"] = call_to_json(v.pronoun_call);
  j["pronoun_targets"] = v.pronoun_targets;
  j["pronoun_surface"] = v.pronoun_surface;
  j["entity_surface"] = v.entity_surface;
  j["source"] = v.source_text;
  j["target"] = v.target_text;
  return j.dump();
}

EvalVerdict verdict_from_json(std::string_view line, const std::string& source, std::size_t line_no) {
  try {
    auto j = ordered_json::parse(line);
    EvalVerdict v;
    v.sentence_id = j.at("id").get<std::string>();
    v.dataset = j.at("dataset").get<std::string>();
    v.system = j.at("system").get<std::string>();
    v.language = j.at("language").get<std::string>();
    auto st = parse_verdict_status(j.at("status").get<std::string>());
    if (!st) throw std::invalid_argument("unknown status");
    v.status = *st;
    v.neutral_pronoun = j.at("neutral_pronoun").get<bool>();
    v.entity_call = call_from_json(j.at("entity_call"));
    v.pronoun_call = call_from_json(j.at("pronoun_call"));
    v.pronoun_targets = j.at("pronoun_targets").get<std::vector<std::size_t>>();
    v.pronoun_surface = j.at("pronoun_surface").get<std::vector<std::string>>();
    v.entity_surface = j.at("entity_surface").get<std::string>();
    v.source_text = j.at("source").get<std::string>();
    v.target_text = j.at("target").get<std::string>();
    return v;
  } catch (const std::exception& e) {
    throw ParseError(source, line_no, std::string("malformed verdict: ") + e.what());
  }
}

std::string verdicts_to_jsonl(const std::vector<EvalVerdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    out += verdict_to_json(v);
    out += '\n';
  }
  return out;
}

std::vector<EvalVerdict> verdicts_from_jsonl(std::string_view content, const std::string& source) {
  std::vector<EvalVerdict> out;
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string_view::npos) continue;
    out.push_back(verdict_from_json(lines[i], source, i + 1));
  }
  return out;
}

std::string report_to_json(const MetricsReport& r) {
  ordered_json j;
  j["dataset"] = r.dataset;
  j["system"] = r.system;
  j["language"] = r.language;
  j["n_total"] = r.n_total;
  j["n_consistent"] = r.n_consistent;
  j["n_inconsistent"] = r.n_inconsistent;
  j["n_omitted"] = ordered_json::object();
  for (const auto& [k, c] : r.n_omitted) j["n_omitted"][k] = c;
  j["n_neutral"] = r.n_neutral;
  j["consistency"] = r.consistency;
  j["neutral_rate"] = r.neutral_rate;
  j["pronoun_accuracy"] = optional_json(r.pronoun_accuracy);
  j["gender_accuracy"] = optional_json(r.gender_accuracy);
  j["delta_s"] = optional_json(r.delta_s);
  j["delta_g"] = optional_json(r.delta_g);
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(std::string_view content, const std::string& source) {
  try {
    auto j = ordered_json::parse(content);
    MetricsReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.system = j.at("system").get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.n_total = j.at("n_total").get<std::size_t>();
    r.n_consistent = j.at("n_consistent").get<std::size_t>();
    r.n_inconsistent = j.at("n_inconsistent").get<std::size_t>();
    r.n_omitted = j.at("n_omitted").get<std::map<std::string, std::size_t>>();
    r.n_neutral = j.at("n_neutral").get<std::size_t>();
    r.consistency = j.at("consistency").get<double>();
    r.neutral_rate = j.at("neutral_rate").get<double>();
    auto opt = [&](const char* k) -> std::optional<double> {
      if (!j.contains(k) || j[k].is_null()) return std::nullopt;
      return j[k].get<double>();
    };
    r.pronoun_accuracy = opt("pronoun_accuracy");
    r.gender_accuracy = opt("gender_accuracy");
    r.delta_s = opt("delta_s");
    r.delta_g = opt("delta_g");
    return r;
  } catch (const std::exception& e) {
    throw ParseError(source, 0, std::string("malformed metrics report: ") + e.what());
  }
}

namespace {

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string fixed1(const std::optional<double>& v) { return v ? fixed1(*v) : std::string("-"); }

}  // namespace

std::string reports_to_markdown(const std::vector<MetricsReport>& reports) {
  std::string out;
  // Grid: rows are systems, columns are language pairs, one grid per dataset.
  std::map<std::string, std::vector<const MetricsReport*>> by_dataset;
  for (const auto& r : reports) by_dataset[r.dataset].push_back(&r);
  for (const auto& [dataset, rs] : by_dataset) {
    std::vector<std::string> systems, langs;
    for (const auto* r : rs) {
      if (std::find(systems.begin(), systems.end(), r->system) == systems.end()) systems.push_back(r->system);
      if (std::find(langs.begin(), langs.end(), r->language) == langs.end()) langs.push_back(r->language);
    }
    std::sort(langs.begin(), langs.end());
    out += "### Target-side consistency: " + dataset + "\n\n| System |";
    for (const auto& l : langs) out += " en→" + l + " |";
    out += " Avg |\n|---|";
    for (std::size_t i = 0; i <= langs.size(); ++i) out += "---:|";
    out += "\n";
    for (const auto& sys : systems) {
      out += "| " + sys + " |";
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& l : langs) {
        auto it = std::find_if(rs.begin(), rs.end(), [&](const MetricsReport* r) { return r->system == sys && r->language == l; });
        if (it == rs.end()) {
          out += " - |";
        } else {
          out += " " + fixed1((*it)->consistency) + " |";
          sum += (*it)->consistency;
          ++n;
        }
      }
      out += " " + (n ? fixed1(sum / static_cast<double>(n)) : std::string("-")) + " |\n";
    }
    out += "\n";
  }
  for (const auto& r : reports) {
    out += "### Metrics: " + r.dataset + ", " + r.system + ", en→" + r.language + "\n\n";
    out += "| Metric | Value |\n|---|---:|\n";
    out += "| consistency | " + fixed1(r.consistency) + " |\n";
    out += "| neutral rate | " + fixed1(r.neutral_rate) + " |\n";
    out += "| pronoun accuracy | " + fixed1(r.pronoun_accuracy) + " |\n";
    out += "| gender accuracy | " + fixed1(r.gender_accuracy) + " |\n";
    out += "| ΔS | " + fixed1(r.delta_s) + " |\n";
    out += "| ΔG | " + fixed1(r.delta_g) + " |\n";
    out += "| scored | " + std::to_string(r.n_consistent + r.n_inconsistent) + " |\n";
    for (const auto& [k, c] : r.n_omitted) out += "| " + k + " | " + std::to_string(c) + " |\n";
    out += "| total | " + std::to_string(r.n_total) + " |\n\n";
  }
  return out;
}

}  // namespace mtcoref
