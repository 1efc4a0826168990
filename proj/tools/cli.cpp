#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include "json.hpp"
#include "mtcoref/align.hpp"
#include "mtcoref/augment.hpp"
#include "mtcoref/corpus.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/ingest.hpp"
#include "mtcoref/manifest.hpp"
#include "mtcoref/metrics.hpp"
#include "mtcoref/morpho.hpp"
#include "mtcoref/parallel.hpp"
#include "mtcoref/text.hpp"
#include "mtcoref/validate.hpp"

namespace mtcoref::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultCacheDir = ".mtcoref-cache";

/// Thrown for flag combinations CLI11 cannot express.
class UsageError : public Error {
 public:
  using Error::Error;
};

void add_corpus_flags(CLI::App* sub, Settings& s, bool required = true) {
  auto* opt = sub->add_option("--corpus", s.corpus, "Source corpus file")->check(CLI::ExistingFile);
  if (required) opt->required();
  sub->add_option("--corpus-format", s.corpus_format, "Corpus layout: winox|winomt|bug|canonical")
      ->check(CLI::IsMember({"winox", "winomt", "bug", "canonical"}))
      ->capture_default_str();
  sub->add_option("--dataset", s.dataset, "Dataset label for reports (default: corpus file stem)");
}

void add_jobs_flag(CLI::App* sub, Settings& s) {
  sub->add_option("--jobs", s.jobs, "Worker threads for per-sentence stages")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
      ->capture_default_str();
}

void add_translation_flags(CLI::App* sub, Settings& s) {
  sub->add_option("--translations", s.translations, "Translation file: one line per corpus sentence, or JSONL {id,text}")
      ->check(CLI::ExistingFile);
  sub->add_option("--translation-format", s.translation_format, "Translation file layout: auto|plain|jsonl")
      ->check(CLI::IsMember({"auto", "plain", "jsonl"}))
      ->capture_default_str();
  sub->add_flag("--pretokenized", s.pretokenized, "Plain translations are already space-tokenized");
  sub->add_option("--system", s.system, "MT system label")->capture_default_str();
  sub->add_option("--language", s.language, "Target language code (de, fr, ru, es, he, ar, ...)")->required();
}

void add_alignment_flags(CLI::App* sub, Settings& s) {
  auto* al = sub->add_option("--alignments", s.alignments, "Pharaoh alignment file, line k = corpus sentence k")
                 ->check(CLI::ExistingFile);
  auto* tb = sub->add_option("--tables", s.tables, "Directory with forward.tsv and reverse.tsv from align-train")
                 ->check(CLI::ExistingDirectory);
  auto* tr = sub->add_flag("--train-aligner", s.train_aligner, "Train IBM Model 1 on the corpus/translation pairs");
  al->excludes(tb)->excludes(tr);
  tb->excludes(tr);
  sub->add_option("--iterations", s.iterations, "EM iterations when training")->capture_default_str();
  sub->add_option("--symmetrization", s.symmetrization, "intersection|union|grow_diag")
      ->check(CLI::IsMember({"intersection", "union", "grow_diag"}))
      ->capture_default_str();
}

void add_out_flag(CLI::App* sub, Settings& s, bool required) {
  auto* o = sub->add_option("--out", s.out_dir, "Output directory (receives manifest.json)");
  if (required) o->required();
}

Corpus load_corpus(const Settings& s) {
  std::optional<std::string> name;
  if (!s.dataset.empty()) name = s.dataset;
  return parse_corpus(s.corpus, parse_corpus_format(s.corpus_format), name);
}

GenderLexicon load_lexicons(const Settings& s) {
  std::optional<GenderLexicon> lex;
  if (!s.lexicon.empty()) lex = load_lexicon(s.lexicon, s.language);
  if (!s.no_seed_lexicon && has_seed_lexicon(s.language)) {
    auto seed = seed_lexicon(LanguageCode::parse(s.language));
    if (lex) seed.merge(*lex);
    lex = std::move(seed);
  }
  if (!lex) throw UsageError("no lexicon: pass --lexicon or use a language with a built-in seed lexicon");
  return std::move(*lex);
}

TranslationSet load_translation_file(const Settings& s, const Corpus& corpus, const LanguageCode& lang) {
  LoadOptions opts;
  opts.pretokenized = s.pretokenized;
  if (s.translation_format == "plain") opts.format = TranslationFormat::plain;
  else if (s.translation_format == "jsonl") opts.format = TranslationFormat::jsonl;
  return load_translations(s.translations, corpus, s.system, lang, opts);
}

fs::path cache_dir(const Settings& s) {
  return s.cache_dir.empty() ? resolve_cache_dir(kDefaultCacheDir) : fs::path(s.cache_dir);
}

void report_failures(const FetchResult& r, std::ostream& err) {
  err << "fetched " << r.translations.records.size() << " translations (" << r.cache_hits << " cached, "
      << r.requests_issued << " requests), " << r.failures.size() << " failed\n";
  for (const auto& f : r.failures) err << "  failed " << f.sentence_id << ": " << f.reason << "\n";
}

std::vector<Alignment> align_corpus(const Corpus& corpus, const TranslationSet& translations,
                                    const TranslationTable& fwd, const TranslationTable& rev, Symmetrization method,
                                    std::size_t jobs) {
  const auto& sents = corpus.sentences();
  return parallel_map(sents.size(), jobs, [&](std::size_t i) {
    const auto* t = translations.find(sents[i].id);
    return t ? align_pair(fwd, rev, sents[i].tokens, t->tokens, method) : Alignment{};
  });
}

std::vector<SentencePair> corpus_bitext(const Corpus& corpus, const TranslationSet& translations) {
  std::vector<SentencePair> bitext;
  for (const auto& sent : corpus.sentences())
    if (const auto* t = translations.find(sent.id)) bitext.emplace_back(sent.tokens, t->tokens);
  return bitext;
}

std::vector<SentencePair> text_bitext(const Settings& s) {
  auto src = read_file(s.src_text), tgt = read_file(s.tgt_text);
  auto sl = split_lines(src), tl = split_lines(tgt);
  if (sl.size() != tl.size())
    throw ValidationError("parallel text line counts differ: " + std::to_string(sl.size()) + " vs " +
                          std::to_string(tl.size()));
  auto toks = [&](std::string_view line) {
    if (!s.pretokenized) return text::tokenize(line);
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
      if (c == ' ' || c == '\t') {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  };
  std::vector<SentencePair> bitext;
  for (std::size_t i = 0; i < sl.size(); ++i) bitext.emplace_back(toks(sl[i]), toks(tl[i]));
  return bitext;
}

std::pair<TranslationTable, TranslationTable> load_tables(const fs::path& dir) {
  return {TranslationTable::from_tsv(read_file(dir / "forward.tsv"), (dir / "forward.tsv").string()),
          TranslationTable::from_tsv(read_file(dir / "reverse.tsv"), (dir / "reverse.tsv").string())};
}

std::vector<SentencePair> reversed(const std::vector<SentencePair>& bitext) {
  std::vector<SentencePair> out;
  out.reserve(bitext.size());
  for (const auto& [a, b] : bitext) out.emplace_back(b, a);
  return out;
}

RunManifest make_manifest(const CLI::App* sub, const std::vector<fs::path>& inputs) {
  RunManifest m;
  m.subcommand = sub->get_name();
  for (const auto* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty() || opt->get_name() == "-h,--help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
      if (value.empty() && opt->get_expected_min() == 0) value = "false";
    }
    m.config[opt->get_name(false, true)] = value;
  }
  m.digest_inputs(inputs);
  m.timestamp = utc_timestamp();
  return m;
}

void write_output(const fs::path& dir, const std::string& name, std::string_view content) {
  write_file_atomic(dir / name, content);
}

// ---------------------------------------------------------------- subcommands

int cmd_evaluate(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  if (s.translations.empty() == s.endpoint.empty())
    throw UsageError("select exactly one translation source: --translations or --endpoint");
  if (s.alignments.empty() && s.tables.empty() && !s.train_aligner)
    throw UsageError("select one alignment source: --alignments, --tables or --train-aligner");

  auto lexicon = load_lexicons(s);
  const auto lang = LanguageCode::parse(s.language);
  const auto corpus = load_corpus(s);

  TranslationSet translations;
  if (!s.translations.empty()) {
    translations = load_translation_file(s, corpus, lang);
  } else {
    auto fetched = fetch_translations(corpus, load_endpoint_config(s.endpoint), lang, cache_dir(s));
    report_failures(fetched, err);
    translations = std::move(fetched.translations);
  }

  std::vector<Alignment> alignments;
  if (!s.alignments.empty()) {
    alignments = read_pharaoh(s.alignments);
    if (alignments.size() != corpus.size())
      throw ValidationError("expected " + std::to_string(corpus.size()) + " alignment lines, found " +
                            std::to_string(alignments.size()));
  } else {
    std::pair<TranslationTable, TranslationTable> tables;
    if (!s.tables.empty()) {
      tables = load_tables(s.tables);
    } else {
      auto bitext = corpus_bitext(corpus, translations);
      tables = {train_model1(bitext, s.iterations), train_model1(reversed(bitext), s.iterations)};
    }
    alignments = align_corpus(corpus, translations, tables.first, tables.second,
                              parse_symmetrization(s.symmetrization), s.jobs);
  }

  const auto verdicts = judge_corpus(corpus, translations, alignments, lexicon, s.jobs);
  const auto report = full_report(verdicts, corpus);

  const fs::path dir = s.out_dir;
  write_output(dir, "verdicts.jsonl", verdicts_to_jsonl(verdicts));
  write_output(dir, "metrics.json", report_to_json(report));
  write_output(dir, "report.md", reports_to_markdown({report}));
  std::vector<fs::path> inputs{s.corpus, s.translations, s.endpoint, s.alignments, s.lexicon};
  if (!s.tables.empty()) {
    inputs.push_back(fs::path(s.tables) / "forward.tsv");
    inputs.push_back(fs::path(s.tables) / "reverse.tsv");
  }
  make_manifest(sub, inputs).write(dir);

  out << (s.format == "json" ? report_to_json(report) : reports_to_markdown({report}));
  return 0;
}

int cmd_align_train(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream&) {
  std::vector<SentencePair> bitext;
  std::vector<fs::path> inputs;
  if (!s.src_text.empty()) {
    bitext = text_bitext(s);
    inputs = {s.src_text, s.tgt_text};
  } else {
    if (s.corpus.empty() || s.translations.empty() || s.language.empty())
      throw UsageError("align-train needs --src-text/--tgt-text or --corpus/--translations/--language");
    const auto corpus = load_corpus(s);
    bitext = corpus_bitext(corpus, load_translation_file(s, corpus, LanguageCode::parse(s.language)));
    inputs = {s.corpus, s.translations};
  }
  TrainReport fwd_report, rev_report;
  auto fwd = train_model1(bitext, s.iterations, &fwd_report);
  auto rev = train_model1(reversed(bitext), s.iterations, &rev_report);
  const fs::path dir = s.out_dir;
  write_output(dir, "forward.tsv", fwd.to_tsv());
  write_output(dir, "reverse.tsv", rev.to_tsv());
  nlohmann::ordered_json j;
  j["pairs_used"] = fwd_report.pairs_used;
  j["pairs_skipped"] = fwd_report.pairs_skipped;
  j["forward_log_likelihood"] = fwd_report.log_likelihood;
  j["reverse_log_likelihood"] = rev_report.log_likelihood;
  write_output(dir, "train_report.json", j.dump(2) + "\n");
  make_manifest(sub, inputs).write(dir);
  out << "trained on " << fwd_report.pairs_used << " pairs (" << fwd_report.pairs_skipped << " skipped), "
      << s.iterations << " iterations\n";
  return 0;
}

int cmd_align(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream&) {
  auto [fwd, rev] = load_tables(s.tables);
  const auto method = parse_symmetrization(s.symmetrization);
  std::vector<Alignment> alignments;
  std::vector<fs::path> inputs{fs::path(s.tables) / "forward.tsv", fs::path(s.tables) / "reverse.tsv"};
  if (!s.src_text.empty()) {
    auto bitext = text_bitext(s);
    alignments = parallel_map(bitext.size(), s.jobs, [&](std::size_t i) {
      return align_pair(fwd, rev, bitext[i].first, bitext[i].second, method);
    });
    inputs.insert(inputs.end(), {s.src_text, s.tgt_text});
  } else {
    if (s.corpus.empty() || s.translations.empty() || s.language.empty())
      throw UsageError("align needs --src-text/--tgt-text or --corpus/--translations/--language");
    const auto corpus = load_corpus(s);
    const auto translations = load_translation_file(s, corpus, LanguageCode::parse(s.language));
    alignments = align_corpus(corpus, translations, fwd, rev, method, s.jobs);
    inputs.insert(inputs.end(), {s.corpus, s.translations});
  }
  const fs::path dir = s.out_dir;
  write_pharaoh(alignments, dir / "alignments.pharaoh");
  make_manifest(sub, inputs).write(dir);
  out << "wrote " << alignments.size() << " alignments\n";
  return 0;
}

int cmd_augment(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream&) {
  if (s.corpus.empty() == s.text.empty()) throw UsageError("select exactly one input: --corpus or --text");
  AugmentOptions opts;
  opts.mode = parse_augment_mode(s.mode);
  opts.markers = parse_marker_source(s.markers);
  opts.pronoun_clusters_only = s.pronoun_clusters_only;
  if (opts.markers != MarkerSource::gold && s.clusters.empty())
    throw UsageError("--clusters is required unless --markers gold");

  std::vector<AugmentInput> inputs;
  std::vector<fs::path> digests{s.corpus, s.text, s.target_text, s.clusters};
  std::vector<std::string_view> target_lines;
  std::string target_content;
  if (!s.target_text.empty()) {
    target_content = read_file(s.target_text);
    target_lines = split_lines(target_content);
  }
  std::map<std::string, ClusterSet> predicted;
  if (!s.text.empty()) {
    if (opts.markers == MarkerSource::gold) throw UsageError("--markers gold needs an annotated --corpus");
    for (auto& cs : parse_clusters(s.clusters)) predicted.emplace(cs.sentence_id, std::move(cs));
    auto content = read_file(s.text);
    auto lines = split_lines(content);
    if (!target_lines.empty() && target_lines.size() != lines.size())
      throw ValidationError("--target-text has " + std::to_string(target_lines.size()) + " lines, expected " +
                            std::to_string(lines.size()));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      AugmentInput in;
      in.id = std::to_string(i + 1);
      in.tokens = text::tokenize(lines[i]);
      auto it = predicted.find(in.id);
      in.predicted = it != predicted.end() ? it->second : ClusterSet{in.id, {}};
      if (!target_lines.empty()) in.target = std::string(target_lines[i]);
      inputs.push_back(std::move(in));
    }
  } else {
    const auto corpus = load_corpus(s);
    if (!s.clusters.empty())
      for (auto& cs : parse_clusters(s.clusters, &corpus)) predicted.emplace(cs.sentence_id, std::move(cs));
    if (!target_lines.empty() && target_lines.size() != corpus.size())
      throw ValidationError("--target-text has " + std::to_string(target_lines.size()) + " lines, expected " +
                            std::to_string(corpus.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& sent = corpus.sentences()[i];
      AugmentInput in;
      in.id = sent.id;
      in.tokens = sent.tokens;
      auto it = predicted.find(sent.id);
      in.predicted = it != predicted.end() ? it->second : ClusterSet{sent.id, {}};
      in.gold = gold_clusters(sent);
      if (!target_lines.empty()) in.target = std::string(target_lines[i]);
      inputs.push_back(std::move(in));
    }
  }

  const auto lines = build_augmented(inputs, opts, s.jobs);
  const fs::path dir = s.out_dir;
  write_output(dir, "marked.txt", format_marked_text(lines));
  write_output(dir, "sidecar.jsonl", format_sidecar(lines));
  if (!s.target_text.empty()) write_output(dir, "target.txt", format_target_text(lines));
  make_manifest(sub, digests).write(dir);
  out << "kept " << lines.size() << " of " << inputs.size() << " sentences\n";
  return 0;
}

int cmd_score_resolver(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream&) {
  const auto corpus = load_corpus(s);
  const auto predicted = parse_clusters(s.clusters, &corpus);
  ResolverOptions opts;
  opts.matching = parse_span_matching(s.matching);
  opts.penalize_distractors = !s.allow_distractors;
  const auto r = resolver_accuracy(corpus, predicted, opts);
  nlohmann::ordered_json j;
  j["dataset"] = corpus.dataset_name();
  j["matching"] = s.matching;
  j["penalize_distractors"] = opts.penalize_distractors;
  j["correct"] = r.hits;
  j["total"] = r.total;
  j["accuracy"] = r.percent();
  if (!s.out_dir.empty()) {
    write_output(s.out_dir, "resolver.json", j.dump(2) + "\n");
    make_manifest(sub, {s.corpus, s.clusters}).write(s.out_dir);
  }
  if (s.format == "json") {
    out << j.dump(2) << "\n";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", r.percent());
    out << "| Dataset | Matching | Resolver accuracy |\n|---|---|---:|\n| " << corpus.dataset_name() << " | "
        << s.matching << " | " << buf << " |\n";
  }
  return 0;
}

int cmd_sample(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream&) {
  auto verdicts = verdicts_from_jsonl(read_file(s.verdicts), s.verdicts);
  if (!s.include_omitted) std::erase_if(verdicts, [](const EvalVerdict& v) { return is_omitted(v.status); });
  const auto rows = sample(verdicts, s.sample_size, s.seed);
  const auto sheet = format_sheet(rows);
  if (!s.out_dir.empty()) {
    write_output(s.out_dir, "sheet.tsv", sheet);
    make_manifest(sub, {s.verdicts}).write(s.out_dir);
    out << "sampled " << rows.size() << " of " << verdicts.size() << " verdicts\n";
  } else {
    out << sheet;
  }
  return 0;
}

int cmd_agree(const Settings& s, const CLI::App*, std::ostream& out, std::ostream&) {
  std::vector<AnnotationRow> rows;
  for (const auto& path : s.sheets) {
    auto part = read_sheet(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto groups = agreement(rows);
  if (s.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& [key, st] : groups) {
      nlohmann::ordered_json g;
      g["dataset"] = key.first;
      g["language"] = key.second;
      g["total"] = st.total;
      g["agreements"] = st.agreements;
      g["alignment_errors"] = st.alignment_errors;
      g["gender_errors"] = st.gender_errors;
      g["agreement"] = st.percent();
      j.push_back(g);
    }
    nlohmann::ordered_json doc;
    doc["groups"] = j;
    doc["average_agreement"] = average_agreement(groups);
    out << doc.dump(2) << "\n";
    return 0;
  }
  out << "| Dataset | Language | Alignment errors | Gender errors | Correct | Total | Agreement |\n"
      << "|---|---|---:|---:|---:|---:|---:|\n";
  char buf[32];
  for (const auto& [key, st] : groups) {
    std::snprintf(buf, sizeof buf, "%.1f", st.percent());
    out << "| " << key.first << " | " << key.second << " | " << st.alignment_errors << " | " << st.gender_errors
        << " | " << st.agreements << " | " << st.total << " | " << buf << " |\n";
  }
  std::snprintf(buf, sizeof buf, "%.1f", average_agreement(groups));
  out << "\naverage agreement: " << buf << "\n";
  return 0;
}

int cmd_fetch(const Settings& s, const CLI::App* sub, std::ostream& out, std::ostream& err) {
  const auto lang = LanguageCode::parse(s.language);
  const auto corpus = load_corpus(s);
  const auto config = load_endpoint_config(s.endpoint);
  auto result = fetch_translations(corpus, config, lang, cache_dir(s));
  report_failures(result, err);
  const fs::path dir = s.out_dir;
  write_output(dir, "translations.jsonl", serialize_translations(result.translations, &corpus));
  std::string failures;
  for (const auto& f : result.failures) {
    nlohmann::ordered_json j;
    j["id"] = f.sentence_id;
    j["reason"] = f.reason;
    failures += j.dump() + "\n";
  }
  write_output(dir, "failures.jsonl", failures);
  make_manifest(sub, {s.corpus, s.endpoint}).write(dir);
  out << "translated " << result.translations.records.size() << " of " << corpus.size() << " sentences\n";
  return 0;
}

int cmd_report(const Settings& s, const CLI::App*, std::ostream& out, std::ostream&) {
  std::vector<MetricsReport> reports;
  for (const auto& p : s.metrics) reports.push_back(report_from_json(read_file(p), p));
  out << reports_to_markdown(reports);
  return 0;
}

}  // namespace

std::unique_ptr<CLI::App> build_app(Settings& s) {
  auto app = std::make_unique<CLI::App>("Reference-free coreference evaluation of MT output via target-side gender "
                                        "agreement, plus coreference-marked corpus augmentation.",
                                        "mtcoref");
  app->require_subcommand(1);
  app->set_version_flag("--version", std::string(kToolVersion), "Print the tool version");

  auto* ev = app->add_subcommand("evaluate", "Judge translations and report target-side consistency metrics");
  add_corpus_flags(ev, s);
  add_translation_flags(ev, s);
  auto* ep = ev->add_option("--endpoint", s.endpoint, "HTTP endpoint config (JSON) to fetch translations")
                 ->check(CLI::ExistingFile);
  ev->get_option("--translations")->excludes(ep);
  ev->add_option("--cache-dir", s.cache_dir, "Translation cache directory (default: $MTCOREF_CACHE_DIR or .mtcoref-cache)");
  add_alignment_flags(ev, s);
  ev->add_option("--lexicon", s.lexicon, "Gender lexicon TSV (merged over the built-in seed)")->check(CLI::ExistingFile);
  ev->add_flag("--no-seed-lexicon", s.no_seed_lexicon, "Do not merge the built-in seed lexicon");
  ev->add_option("--format", s.format, "Stdout report format: markdown|json")
      ->check(CLI::IsMember({"markdown", "json"}))
      ->capture_default_str();
  add_out_flag(ev, s, true);
  add_jobs_flag(ev, s);

  auto* at = app->add_subcommand("align-train", "Train forward and reverse IBM Model 1 tables");
  at->add_option("--src-text", s.src_text, "Source side of a line-aligned bitext")->check(CLI::ExistingFile);
  at->add_option("--tgt-text", s.tgt_text, "Target side of a line-aligned bitext")->check(CLI::ExistingFile);
  at->get_option("--src-text")->needs(at->get_option("--tgt-text"));
  add_corpus_flags(at, s, false);
  at->add_option("--translations", s.translations, "Translations of --corpus")->check(CLI::ExistingFile);
  at->add_option("--translation-format", s.translation_format, "Translation file layout: auto|plain|jsonl")
      ->check(CLI::IsMember({"auto", "plain", "jsonl"}))
      ->capture_default_str();
  at->add_flag("--pretokenized", s.pretokenized, "Input text is already space-tokenized");
  at->add_option("--language", s.language, "Target language code (with --corpus)");
  at->add_option("--iterations", s.iterations, "EM iterations")->check(CLI::PositiveNumber)->capture_default_str();
  add_out_flag(at, s, true);

  auto* al = app->add_subcommand("align", "Word-align sentence pairs with trained tables (Pharaoh output)");
  al->add_option("--tables", s.tables, "Directory with forward.tsv and reverse.tsv")
      ->check(CLI::ExistingDirectory)
      ->required();
  al->add_option("--src-text", s.src_text, "Source side of a line-aligned bitext")->check(CLI::ExistingFile);
  al->add_option("--tgt-text", s.tgt_text, "Target side of a line-aligned bitext")->check(CLI::ExistingFile);
  al->get_option("--src-text")->needs(al->get_option("--tgt-text"));
  add_corpus_flags(al, s, false);
  al->add_option("--translations", s.translations, "Translations of --corpus")->check(CLI::ExistingFile);
  al->add_option("--translation-format", s.translation_format, "Translation file layout: auto|plain|jsonl")
      ->check(CLI::IsMember({"auto", "plain", "jsonl"}))
      ->capture_default_str();
  al->add_flag("--pretokenized", s.pretokenized, "Input text is already space-tokenized");
  al->add_option("--language", s.language, "Target language code (with --corpus)");
  al->add_option("--symmetrization", s.symmetrization, "intersection|union|grow_diag")
      ->check(CLI::IsMember({"intersection", "union", "grow_diag"}))
      ->capture_default_str();
  add_out_flag(al, s, true);
  add_jobs_flag(al, s);

  auto* au = app->add_subcommand("augment", "Build Coref/Gender fine-tuning data with inline <ENTk> markers");
  add_corpus_flags(au, s, false);
  au->add_option("--text", s.text, "Raw source sentences, one per line (cluster ids are 1-based line numbers)")
      ->check(CLI::ExistingFile);
  au->add_option("--target-text", s.target_text, "Parallel target lines copied for kept sentences")
      ->check(CLI::ExistingFile);
  au->add_option("--clusters", s.clusters, "Predicted cluster JSONL")->check(CLI::ExistingFile);
  au->add_option("--mode", s.mode, "Filter: coref (non-singleton clusters) | gender (gendered-pronoun clusters)")
      ->check(CLI::IsMember({"coref", "gender"}))
      ->capture_default_str();
  au->add_option("--markers", s.markers, "Marker source: predicted|gold|none")
      ->check(CLI::IsMember({"predicted", "gold", "none"}))
      ->capture_default_str();
  au->add_flag("--pronoun-clusters-only", s.pronoun_clusters_only, "Mark only clusters holding a gendered pronoun");
  add_out_flag(au, s, true);
  add_jobs_flag(au, s);

  auto* sr = app->add_subcommand("score-resolver", "Score predicted coreference clusters against gold antecedents");
  add_corpus_flags(sr, s);
  sr->add_option("--clusters", s.clusters, "Predicted cluster JSONL")->check(CLI::ExistingFile)->required();
  sr->add_option("--matching", s.matching, "Span matching: exact|head_overlap")
      ->check(CLI::IsMember({"exact", "head_overlap"}))
      ->capture_default_str();
  sr->add_flag("--allow-distractors", s.allow_distractors, "Do not penalize clusters that also hold another candidate");
  sr->add_option("--format", s.format, "Stdout format: markdown|json")
      ->check(CLI::IsMember({"markdown", "json"}))
      ->capture_default_str();
  add_out_flag(sr, s, false);

  auto* sa = app->add_subcommand("sample", "Draw a seeded human-validation sample as an annotation sheet");
  sa->add_option("--verdicts", s.verdicts, "verdicts.jsonl from evaluate")->check(CLI::ExistingFile)->required();
  sa->add_option("-n,--n", s.sample_size, "Sample size")->capture_default_str();
  sa->add_option("--seed", s.seed, "64-bit sampling seed (required)")->required();
  sa->add_flag("--include-omitted", s.include_omitted, "Also sample omitted verdicts");
  add_out_flag(sa, s, false);

  auto* ag = app->add_subcommand("agree", "Agreement between filled annotation sheets and machine verdicts");
  ag->add_option("--sheet", s.sheets, "Filled annotation sheet TSV (repeatable)")
      ->check(CLI::ExistingFile)
      ->required();
  ag->add_option("--format", s.format, "Stdout format: markdown|json")
      ->check(CLI::IsMember({"markdown", "json"}))
      ->capture_default_str();

  auto* fe = app->add_subcommand("fetch", "Translate a corpus through an HTTP endpoint with on-disk caching");
  add_corpus_flags(fe, s);
  fe->add_option("--endpoint", s.endpoint, "HTTP endpoint config (JSON)")->check(CLI::ExistingFile)->required();
  fe->add_option("--language", s.language, "Target language code")->required();
  fe->add_option("--cache-dir", s.cache_dir, "Cache directory (default: $MTCOREF_CACHE_DIR or .mtcoref-cache)");
  add_out_flag(fe, s, true);

  auto* rp = app->add_subcommand("report", "Merge metrics.json files into consistency tables");
  rp->add_option("--metrics", s.metrics, "metrics.json files (repeatable)")->check(CLI::ExistingFile)->required();

  return app;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings s;
  auto app = build_app(s);
  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const auto* sub = app->get_subcommands().front();
  const auto& name = sub->get_name();
  try {
    if (name == "evaluate") return cmd_evaluate(s, sub, out, err);
    if (name == "align-train") return cmd_align_train(s, sub, out, err);
    if (name == "align") return cmd_align(s, sub, out, err);
    if (name == "augment") return cmd_augment(s, sub, out, err);
    if (name == "score-resolver") return cmd_score_resolver(s, sub, out, err);
    if (name == "sample") return cmd_sample(s, sub, out, err);
    if (name == "agree") return cmd_agree(s, sub, out, err);
    if (name == "fetch") return cmd_fetch(s, sub, out, err);
    if (name == "report") return cmd_report(s, sub, out, err);
  } catch (const MetricError& e) {
    err << "mtcoref " << name << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "mtcoref " << name << ": " << e.what() << "\n";
    return 2;
  }
  err << "unknown subcommand " << name << "\n";
  return 2;
}

}  // namespace mtcoref::cli
