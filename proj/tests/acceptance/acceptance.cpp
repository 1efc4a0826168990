// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "mtcoref/align.hpp"
#include "mtcoref/augment.hpp"
#include "mtcoref/metrics.hpp"
#include "mtcoref/text.hpp"
#include "mtcoref/validate.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace mtcoref;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mtcoref");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::vector<std::string> fix12_args(const fs::path& out) {
  const auto f = testing::fixture("fix12");
  return {"evaluate", "--corpus", (f / "corpus.jsonl").string(), "--translations",
          (f / "translations.jsonl").string(), "--language", "fr", "--alignments", (f / "gold.pharaoh").string(),
          "--lexicon", (f / "lexicon.tsv").string(), "--no-seed-lexicon", "--system", "fixture", "--out",
          out.string()};
}

// 1. Golden pipeline on the 12-sentence fixture.
Check fix12_pipeline() {
  Check c;
  testing::TempDir tmp;
  const auto start = Clock::now();
  c.expect(run_cli(fix12_args(tmp.path())) == 0, "evaluate failed");
  const double elapsed = seconds_since(start);
  if (!c.ok) return c;
  auto m = report_from_json(slurp(tmp / "metrics.json"));
  auto expected = nlohmann::json::parse(slurp(testing::fixture("fix12/expected.json")))["metrics"];
  c.expect(m.consistency == 75.0, "consistency " + std::to_string(m.consistency));
  c.expect(m.pronoun_accuracy == 62.5, "pronoun accuracy");
  c.expect(m.gender_accuracy == 70.0, "gender accuracy");
  c.expect(m.delta_s == 25.0, "delta S");
  c.expect(m.consistency == expected["consistency"].get<double>() &&
               *m.gender_accuracy == expected["gender_accuracy"].get<double>(),
           "disagrees with frozen oracle");
  c.expect(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
  c.detail = c.ok ? "consistency 75.0, pronoun 62.5, gender 70.0, dS 25.0 in " + std::to_string(elapsed) + " s"
                  : c.detail;
  return c;
}

// 2. Every combination of entity/pronoun outcome, alignment and source
// pronoun class lands in exactly one status, driven through judge_sentence.
Check decision_table() {
  Check c;
  const auto lexicon = parse_lexicon(
      "emale\tmale\tnoun\nefemale\tfemale\tnoun\neneutral\tneutral\tnoun\n"
      "eboth\tmale\tnoun\neboth\tfemale\tnoun\n"
      "pmale\tmale\tpronoun\npfemale\tfemale\tpronoun\npneutral\tneutral\tpronoun\n"
      "pboth\tmale\tpronoun\npboth\tfemale\tpronoun\n"
      "pposs\tmale\tpronoun\tnoninformative\npposs\tfemale\tpronoun\tnoninformative\n",
      "de");
  const std::vector<std::string> entity_words{"emale", "efemale", "eneutral", "eboth", "eunknown"};
  const std::vector<std::string> pronoun_words{"pmale", "pfemale", "pneutral", "pboth", "punknown", "pposs"};
  std::size_t combos = 0;
  std::map<VerdictStatus, std::size_t> seen;
  for (const auto& ew : entity_words)
    for (const auto& pw : pronoun_words)
      for (bool ea : {false, true})
        for (bool pa : {false, true})
          for (const std::string src_pron : {"it", "they"}) {
            AnnotatedSentence s;
            s.id = "t";
            s.tokens = {"The", "thing", "said", src_pron, "left"};
            s.entities = {{0, 2}};
            s.pronoun = {3, 4};
            TranslationRecord tr{"t", "sys", LanguageCode::parse("de"), "", {ew, pw}};
            Alignment al;
            if (ea) al.links.insert({1, 0});
            if (pa) al.links.insert({3, 1});
            const auto v = judge_sentence(s, tr, al, lexicon);
            ++combos;
            ++seen[v.status];

            const bool p_noninf = pw == "pposs";
            const bool concrete = ew != "eboth" && ew != "eunknown" && pw != "pboth" && pw != "punknown" && !p_noninf;
            const bool same = concrete && ew.substr(1) == pw.substr(1);
            const std::vector<std::pair<VerdictStatus, bool>> table{
                {VerdictStatus::omitted_unaligned, !pa || (!p_noninf && !ea)},
                {VerdictStatus::omitted_non_informative, pa && p_noninf},
                {VerdictStatus::omitted_unknown_gender, pa && ea && !p_noninf && !concrete},
                {VerdictStatus::consistent, pa && ea && concrete && same},
                {VerdictStatus::inconsistent, pa && ea && concrete && !same},
            };
            const auto hits = std::count_if(table.begin(), table.end(), [](auto& x) { return x.second; });
            c.expect(hits == 1, "predicate table not a partition at " + ew + "/" + pw);
            const auto want = std::find_if(table.begin(), table.end(), [](auto& x) { return x.second; })->first;
            c.expect(v.status == want, "wrong status for " + ew + "/" + pw + " aligned " + std::to_string(ea) +
                                           std::to_string(pa) + " " + src_pron);
            c.expect(v.neutral_pronoun == (want == VerdictStatus::inconsistent && src_pron == "it" && pw == "pneutral"),
                     "neutral flag for " + ew + "/" + pw);
          }
  c.expect(combos == 240, "combination count");
  c.expect(seen.size() == 5, "not every status reached");
  if (c.ok) c.detail = std::to_string(combos) + " combinations, each with exactly one status, all 5 statuses reached";
  return c;
}

// 3. IBM Model 1 on the toy corpus.
Check model1() {
  Check c;
  const std::vector<SentencePair> toy{{{"the", "house"}, {"das", "haus"}},
                                      {{"the", "book"}, {"das", "buch"}},
                                      {{"a", "house"}, {"ein", "haus"}}};
  std::vector<SentencePair> rev_toy;
  for (const auto& [s, t] : toy) rev_toy.emplace_back(t, s);
  const auto expected = nlohmann::json::parse(slurp(testing::fixture("model1/expected.json")));
  const auto start = Clock::now();
  TrainReport report;
  const auto fwd = train_model1(toy, 10, &report);
  const auto rev = train_model1(rev_toy, 10);
  const auto alignment = align_pair(fwd, rev, {"the", "house"}, {"das", "haus"});
  const double elapsed = seconds_since(start);

  c.expect(report.log_likelihood.size() == 11, "log-likelihood trace length");
  for (std::size_t i = 1; i < report.log_likelihood.size(); ++i)
    c.expect(report.log_likelihood[i] >= report.log_likelihood[i - 1], "log-likelihood decreased");
  const double haus = fwd.prob("haus", "house");
  c.expect(haus > 0.9, "t(haus|house) = " + std::to_string(haus));
  for (const auto& w : fwd.source_words()) c.expect(std::abs(fwd.row_sum(w) - 1.0) < 1e-9, "row sum for " + w);
  c.expect(std::abs(fwd.row_sum("NULL") - 1.0) < 1e-9, "NULL row sum");
  for (const auto& e : expected["forward"]) {
    const auto tgt = e[0].get<std::string>(), src = e[1].get<std::string>();
    const double p = src == "NULL" ? fwd.null_prob(tgt) : fwd.prob(tgt, src);
    c.expect(std::abs(p - e[2].get<double>()) < 1e-12, "t(" + tgt + "|" + src + ") differs from oracle");
  }
  std::set<std::pair<std::size_t, std::size_t>> want;
  for (const auto& p : expected["intersection"]) want.emplace(p[0].get<std::size_t>(), p[1].get<std::size_t>());
  c.expect(alignment.links == want, "alignment differs from oracle");
  c.expect(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
  if (c.ok) c.detail = "t(haus|house) = " + std::to_string(haus) + ", monotone likelihood, oracle alignment " +
                       format_pharaoh_line(alignment);
  return c;
}

// 4. Augmentation properties and the trophy/suitcase rendering.
Check augmentation() {
  Check c;
  const auto corpus = testing::synthetic_clusters(50, 2024);
  const auto coref = filter_coref(corpus);
  const auto gender = filter_gender(corpus);
  std::set<std::string> coref_ids;
  for (const auto& s : coref) coref_ids.insert(s.clusters.sentence_id);
  for (const auto& s : gender) c.expect(coref_ids.count(s.clusters.sentence_id) == 1, "gender not within coref");
  for (const auto& s : corpus) {
    const auto marked = insert_markers(s.tokens, testing::non_singletons(s.clusters));
    c.expect(text::join(strip_markers(marked.tokens).tokens) == text::join(s.tokens),
             "round-trip changed " + s.clusters.sentence_id);
  }
  const std::vector<std::string> trophy{"The", "trophy", "didn't", "fit", "in", "the", "suitcase",
                                        "because", "it", "was", "too", "small"};
  const auto rendered = text::join(insert_markers(trophy, {{{6, 7}, {8, 9}}}).tokens);
  c.expect(rendered == "The trophy didn't fit in the <ENT1> suitcase </ENT1> because <ENT1> it </ENT1> was too small",
           "rendered '" + rendered + "'");
  if (c.ok)
    c.detail = "gender " + std::to_string(gender.size()) + " of coref " + std::to_string(coref.size()) +
               ", 50 round-trips exact, '" + rendered + "'";
  return c;
}

AnnotatedSentence gendered(const std::string& id, Gender g, Stereotype st) {
  AnnotatedSentence s;
  s.id = id;
  s.tokens = {"The", "doctor", "left", "because", "she", "was", "tired"};
  s.entities = {{0, 2}};
  s.pronoun = {4, 5};
  s.source_gender = g;
  s.stereotype = st;
  return s;
}

EvalVerdict predicted(const std::string& id, Gender gold, Gender call) {
  EvalVerdict v;
  v.sentence_id = id;
  v.dataset = "d";
  v.system = "s";
  v.language = "de";
  v.entity_call = GenderCall::of(call, {});
  v.pronoun_call = GenderCall::of(call, {});
  v.status = gold == call ? VerdictStatus::consistent : VerdictStatus::inconsistent;
  return v;
}

// 5. Delta G closed form.
Check delta_g_closed_form() {
  Check c;
  const Corpus corpus("d", {gendered("f1", Gender::female, Stereotype::stereotypical),
                            gendered("f2", Gender::female, Stereotype::anti_stereotypical),
                            gendered("m1", Gender::male, Stereotype::stereotypical),
                            gendered("m2", Gender::male, Stereotype::anti_stereotypical)});
  std::vector<EvalVerdict> male, perfect;
  for (const auto& s : corpus.sentences()) {
    male.push_back(predicted(s.id, *s.source_gender, Gender::male));
    perfect.push_back(predicted(s.id, *s.source_gender, *s.source_gender));
  }
  const double dg = delta_g(male, corpus);
  c.expect(std::abs(dg - 66.7) <= 0.05, "always-male delta G " + std::to_string(dg));
  c.expect(delta_g(perfect, corpus) == 0.0, "perfect delta G");
  c.expect(delta_s(perfect, corpus) == 0.0, "perfect delta S");
  if (c.ok) c.detail = "always-male dG = " + std::to_string(dg) + ", perfect dS = dG = 0";
  return c;
}

// 6. Human-validation arithmetic on a sheet with the Hebrew error counts.
Check hebrew_agreement() {
  Check c;
  std::vector<AnnotationRow> rows;
  for (int i = 0; i < 100; ++i) {
    AnnotationRow r;
    r.sentence_id = "he-" + std::to_string(i);
    r.dataset = "winomt";
    r.language = "he";
    r.pronoun_correct = i >= 14;
    r.gender_correct = i >= 21;
    rows.push_back(r);
  }
  const auto groups = agreement(parse_sheet(format_sheet(rows)));
  const auto& s = groups.at({"winomt", "he"});
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", s.percent());
  c.expect(std::string(buf) == "79.0", std::string("agreement ") + buf);
  c.expect(s.alignment_errors == 14 && s.gender_errors == 7 && s.agreements == 79 && s.total == 100, "breakdown");
  if (c.ok) c.detail = "14 alignment + 7 gender errors of 100 -> 79.0%";
  return c;
}

// Brute force over token positions: a cluster is correct when some ordered
// pair of distinct mentions covers the pronoun and the antecedent.
bool brute_correct(const AnnotatedSentence& s, const ClusterSet& cs, bool exact, bool penalize) {
  auto covers = [&](const Span& pred, const Span& gold) {
    if (exact) return pred.start == gold.start && pred.end == gold.end;
    for (std::size_t i = pred.start; i < pred.end; ++i)
      if (i + 1 == gold.end) return true;
    return false;
  };
  for (const auto& cluster : cs.clusters)
    for (std::size_t p = 0; p < cluster.size(); ++p)
      for (std::size_t a = 0; a < cluster.size(); ++a) {
        if (a == p || !covers(cluster[p], s.pronoun) || !covers(cluster[a], s.antecedent())) continue;
        bool distracted = false;
        for (std::size_t m = 0; m < cluster.size(); ++m)
          for (std::size_t e = 0; e < s.entities.size(); ++e)
            if (m != p && e != s.gold_antecedent && covers(cluster[m], s.entities[e])) distracted = true;
        if (!penalize || !distracted) return true;
      }
  return false;
}

// 7. Resolver scoring against brute force on random small instances.
Check resolver() {
  Check c;
  std::mt19937 rng(77);
  std::size_t hits_exact = 0, hits_head = 0, random_hits = 0;
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<AnnotatedSentence> sents;
    std::vector<ClusterSet> preds, supersets;
    for (int k = 0; k < 5; ++k) {
      AnnotatedSentence s;
      s.id = "r" + std::to_string(inst) + "-" + std::to_string(k);
      const std::size_t n = 12;
      for (std::size_t t = 0; t < n; ++t) s.tokens.push_back("w" + std::to_string(t));
      // Entities at [1,3), [5,7), optionally [9,11); pronoun at 4 or 8.
      s.entities = {{1, 3}, {5, 7}};
      if (rng() % 2) s.entities.push_back({9, 11});
      s.pronoun = rng() % 2 ? Span{4, 5} : Span{8, 9};
      s.gold_antecedent = rng() % s.entities.size();
      sents.push_back(s);

      ClusterSet cs{s.id, {}};
      const std::size_t clusters = 1 + rng() % 2;
      for (std::size_t ci = 0; ci < clusters; ++ci) {
        std::vector<Span> cluster;
        const std::size_t mentions = 1 + rng() % 3;
        for (std::size_t m = 0; m < mentions; ++m) {
          const std::size_t start = rng() % n;
          const Span span{start, start + 1 + rng() % std::min<std::size_t>(3, n - start)};
          if (std::find(cluster.begin(), cluster.end(), span) == cluster.end()) cluster.push_back(span);
        }
        cs.clusters.push_back(cluster);
      }
      preds.push_back(cs);

      // Antecedent and pronoun widened leftwards without covering another
      // gold token of interest. A widened distractor would hide from exact
      // matching only, so superset clusters carry none.
      ClusterSet wide{s.id, {}};
      std::vector<Span> widened;
      for (const auto& g : {s.antecedent(), s.pronoun}) {
        const std::size_t left = g.start - 1;
        const bool grow = rng() % 2 && g.start > 0 && left != 2 && left != 4 && left != 6 && left != 8 && left != 10;
        widened.push_back(grow ? Span{left, g.end} : g);
      }
      wide.clusters.push_back(widened);
      supersets.push_back(wide);
    }
    const Corpus corpus("r", sents);
    for (bool penalize : {true, false}) {
      for (auto matching : {SpanMatching::exact, SpanMatching::head_overlap}) {
        const auto r = resolver_accuracy(corpus, preds, {matching, penalize});
        std::size_t brute = 0;
        for (std::size_t i = 0; i < sents.size(); ++i)
          brute += brute_correct(sents[i], preds[i], matching == SpanMatching::exact, penalize);
        c.expect(r.hits == brute && r.total == sents.size(), "instance " + std::to_string(inst) + " disagrees");
        random_hits += brute;
      }
      const auto exact = resolver_accuracy(corpus, supersets, {SpanMatching::exact, penalize});
      const auto head = resolver_accuracy(corpus, supersets, {SpanMatching::head_overlap, penalize});
      c.expect(exact.hits <= head.hits, "exact above head_overlap on instance " + std::to_string(inst));
      hits_exact += exact.hits;
      hits_head += head.hits;
    }
  }
  c.expect(hits_exact < hits_head, "superset spans never separated the two modes");
  c.expect(random_hits > 0, "random clusters never scored");
  if (c.ok)
    c.detail = "20 instances match brute force in both modes (" + std::to_string(random_hits) +
               " correct sentences); superset spans: exact " + std::to_string(hits_exact) +
               " <= head " + std::to_string(hits_head);
  return c;
}

std::vector<std::string> sorted_lines(const std::string& content) {
  std::vector<std::string> out;
  std::istringstream in(content);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  std::sort(out.begin(), out.end());
  return out;
}

// 8. Worker count does not change outputs.
Check determinism() {
  Check c;
  testing::TempDir tmp;
  for (const bool train : {false, true}) {
    std::map<std::string, std::pair<std::string, std::vector<std::string>>> runs;
    for (const std::string jobs : {"1", "8"}) {
      auto args = fix12_args(tmp / (std::string(train ? "train-" : "gold-") + jobs));
      if (train) {
        args.erase(args.begin() + 7, args.begin() + 9);
        args.insert(args.end(), {"--train-aligner", "--iterations", "10"});
      }
      args.insert(args.end(), {"--jobs", jobs});
      if (run_cli(args) != 0) {
        c.expect(false, "evaluate failed with --jobs " + jobs);
        return c;
      }
      const fs::path dir = args[args.size() - (train ? 6 : 3)];
      runs[jobs] = {slurp(dir / "metrics.json"), sorted_lines(slurp(dir / "verdicts.jsonl"))};
    }
    c.expect(runs["1"].first == runs["8"].first, "metrics.json differs between --jobs 1 and 8");
    c.expect(runs["1"].second == runs["8"].second, "verdicts differ between --jobs 1 and 8");
  }
  if (c.ok) c.detail = "gold alignments and trained aligner: identical metrics.json and sorted verdicts for --jobs 1 and 8";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"1 fix12-golden-pipeline", fix12_pipeline},  {"2 decision-table-exhaustive", decision_table},
      {"3 ibm-model1-toy", model1},                 {"4 augmentation-markers", augmentation},
      {"5 delta-g-closed-form", delta_g_closed_form}, {"6 hebrew-agreement", hebrew_agreement},
      {"7 resolver-brute-force", resolver},         {"8 jobs-determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    failures += !c.ok;
    std::cout << (c.ok ? "PASS " : "FAIL ") << name << ": " << c.detail << "\n";
  }
  return failures == 0 ? 0 : 1;
}
