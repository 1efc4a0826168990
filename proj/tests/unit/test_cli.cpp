#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "mtcoref/corpus.hpp"
#include "mtcoref/validate.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mtcoref");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mtcoref::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  const auto content = slurp(p);
  std::vector<std::string> out;
  for (auto l : mtcoref::split_lines(content)) out.emplace_back(l);
  return out;
}

void spit(const fs::path& p, const std::string& content) { std::ofstream(p, std::ios::binary) << content; }

std::vector<std::string> fix12_evaluate(const fs::path& out) {
  const auto f = testing::fixture("fix12");
  return {"evaluate",      "--corpus",   (f / "corpus.jsonl").string(), "--translations",
          (f / "translations.jsonl").string(), "--language", "fr",      "--alignments",
          (f / "gold.pharaoh").string(), "--lexicon", (f / "lexicon.tsv").string(), "--no-seed-lexicon",
          "--system",      "fixture",    "--out",                        out.string()};
}

std::string without_timestamp(const std::string& manifest) {
  auto j = nlohmann::json::parse(manifest);
  j.erase("timestamp");
  return j.dump();
}

}  // namespace

TEST_CASE("every flag of every subcommand is documented") {
  mtcoref::cli::Settings s;
  auto app = mtcoref::cli::build_app(s);
  auto subs = app->get_subcommands({});
  CHECK(subs.size() == 9);
  for (const auto* sub : subs) {
    CHECK_MESSAGE(!sub->get_description().empty(), sub->get_name());
    auto help = invoke({sub->get_name(), "--help"});
    CHECK(help.code == 0);
    for (const auto* opt : sub->get_options()) {
      CHECK_MESSAGE(!opt->get_description().empty(), std::string(sub->get_name() + " " + opt->get_name()));
      for (const auto& name : opt->get_lnames())
        CHECK_MESSAGE(help.out.find("--" + name) != std::string::npos, std::string(sub->get_name() + " --" + name));
    }
  }
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"evaluate", "--bogus"}).code == 2);
}

TEST_CASE("evaluate on the 12-sentence fixture") {
  testing::TempDir tmp;
  auto r = invoke(fix12_evaluate(tmp.path()));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("| consistency | 75.0 |") != std::string::npos);
  for (auto name : {"verdicts.jsonl", "metrics.json", "report.md", "manifest.json"}) CHECK(fs::exists(tmp / name));
  CHECK(lines(tmp / "verdicts.jsonl").size() == 12);
  auto manifest = nlohmann::json::parse(slurp(tmp / "manifest.json"));
  CHECK(manifest["subcommand"] == "evaluate");
  CHECK(manifest["config"]["--language"] == "fr");
  CHECK(manifest["config"]["--train-aligner"] == "false");
  CHECK(manifest["input_digests"].size() == 4);

  // Re-running with the same inputs reproduces every output byte for byte.
  std::map<std::string, std::string> first;
  for (auto name : {"verdicts.jsonl", "metrics.json", "report.md"}) first[name] = slurp(tmp / name);
  const auto first_manifest = without_timestamp(slurp(tmp / "manifest.json"));
  REQUIRE(invoke(fix12_evaluate(tmp.path())).code == 0);
  for (const auto& [name, content] : first) CHECK(slurp(tmp / name) == content);
  CHECK(without_timestamp(slurp(tmp / "manifest.json")) == first_manifest);

  auto args = fix12_evaluate(tmp / "json");
  args.insert(args.end(), {"--format", "json", "--jobs", "8"});
  auto j = invoke(args);
  REQUIRE(j.code == 0);
  auto report = nlohmann::json::parse(j.out);
  CHECK(report["consistency"] == 75.0);
  CHECK(report["pronoun_accuracy"] == 62.5);
  CHECK(slurp(tmp / "json" / "verdicts.jsonl") == first["verdicts.jsonl"]);
}

TEST_CASE("evaluate usage and domain failures") {
  testing::TempDir tmp;
  auto missing = fix12_evaluate(tmp.path());
  const std::string ghost = (tmp / "no-such-lexicon.tsv").string();
  missing[10] = ghost;
  auto r = invoke(missing);
  CHECK(r.code == 2);
  CHECK(r.err.find(ghost) != std::string::npos);

  auto both = fix12_evaluate(tmp.path());
  both.insert(both.end(), {"--endpoint", testing::fixture("fix12/corpus.jsonl").string()});
  r = invoke(both);
  CHECK(r.code == 2);
  CHECK(r.err.find("--translations excludes --endpoint") != std::string::npos);

  auto no_source = fix12_evaluate(tmp.path());
  no_source.erase(no_source.begin() + 3, no_source.begin() + 5);
  r = invoke(no_source);
  CHECK(r.code == 2);
  CHECK(r.err.find("exactly one translation source") != std::string::npos);

  auto two_aligners = fix12_evaluate(tmp.path());
  two_aligners.push_back("--train-aligner");
  CHECK(invoke(two_aligners).code == 2);

  auto no_aligner = fix12_evaluate(tmp.path());
  no_aligner.erase(no_aligner.begin() + 7, no_aligner.begin() + 9);
  CHECK(invoke(no_aligner).code == 2);

  // A lexicon that knows no target word leaves nothing to score.
  spit(tmp / "empty.tsv", "maison\tfemale\tnoun\n");
  auto barren = fix12_evaluate(tmp / "barren");
  barren[10] = (tmp / "empty.tsv").string();
  r = invoke(barren);
  CHECK(r.code == 1);
  CHECK(r.err.find("no scorable instances") != std::string::npos);
}

TEST_CASE("sample and agree") {
  testing::TempDir tmp;
  REQUIRE(invoke(fix12_evaluate(tmp / "eval")).code == 0);
  const auto verdicts = (tmp / "eval" / "verdicts.jsonl").string();

  auto no_seed = invoke({"sample", "--verdicts", verdicts, "-n", "3"});
  CHECK(no_seed.code == 2);
  CHECK(no_seed.err.find("--seed") != std::string::npos);
  CHECK(invoke({"sample", "--verdicts", verdicts, "-n", "9", "--seed", "1"}).code == 2);

  auto printed = invoke({"sample", "--verdicts", verdicts, "-n", "3", "--seed", "7"});
  REQUIRE(printed.code == 0);
  CHECK(invoke({"sample", "--verdicts", verdicts, "-n", "3", "--seed", "7"}).out == printed.out);
  REQUIRE(invoke({"sample", "--verdicts", verdicts, "-n", "12", "--seed", "7", "--include-omitted", "--out",
                  (tmp / "s").string()})
              .code == 0);
  auto rows = mtcoref::parse_sheet(slurp(tmp / "s" / "sheet.tsv"));
  CHECK(rows.size() == 12);

  CHECK(invoke({"agree", "--sheet", (tmp / "s" / "sheet.tsv").string()}).code == 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].pronoun_correct = i != 0;
    rows[i].gender_correct = i != 1;
  }
  spit(tmp / "filled.tsv", mtcoref::format_sheet(rows));
  auto agree = invoke({"agree", "--sheet", (tmp / "filled.tsv").string(), "--format", "json"});
  REQUIRE_MESSAGE(agree.code == 0, agree.err);
  auto j = nlohmann::json::parse(agree.out);
  CHECK(j["groups"][0]["alignment_errors"] == 1);
  CHECK(j["groups"][0]["gender_errors"] == 1);
  CHECK(j["groups"][0]["agreements"] == 10);
}

TEST_CASE("augment, score-resolver and report") {
  testing::TempDir tmp;
  const auto corpus = testing::fixture("fix12/corpus.jsonl").string();
  auto coref = invoke({"augment", "--corpus", corpus, "--markers", "gold", "--out", (tmp / "a").string()});
  REQUIRE_MESSAGE(coref.code == 0, coref.err);
  auto marked = lines(tmp / "a" / "marked.txt");
  REQUIRE(marked.size() == 12);
  CHECK(marked[0] == "<ENT1> The nurse </ENT1> told the patient that <ENT1> she </ENT1> was tired .");
  CHECK(lines(tmp / "a" / "sidecar.jsonl").size() == 12);
  CHECK(invoke({"augment", "--corpus", corpus, "--out", (tmp / "b").string()}).code == 2);

  spit(tmp / "src.txt", "The doctor said she left\nThe box fell\n");
  spit(tmp / "clusters.jsonl", "{\"id\":\"1\",\"clusters\":[[[0,2],[3,4]]]}\n");
  auto raw = invoke({"augment", "--text", (tmp / "src.txt").string(), "--clusters", (tmp / "clusters.jsonl").string(),
                     "--mode", "gender", "--out", (tmp / "c").string()});
  REQUIRE_MESSAGE(raw.code == 0, raw.err);
  CHECK(slurp(tmp / "c" / "marked.txt") == "<ENT1> The doctor </ENT1> said <ENT1> she </ENT1> left\n");

  spit(tmp / "pred.jsonl",
       "{\"id\":\"fix-01\",\"clusters\":[[[1,2],[6,7]]]}\n"
       "{\"id\":\"fix-02\",\"clusters\":[[[3,5],[6,7]]]}\n");
  auto head = invoke({"score-resolver", "--corpus", corpus, "--clusters", (tmp / "pred.jsonl").string(), "--format",
                      "json"});
  REQUIRE_MESSAGE(head.code == 0, head.err);
  CHECK(nlohmann::json::parse(head.out)["correct"] == 1);
  CHECK(nlohmann::json::parse(head.out)["total"] == 12);
  auto exact = invoke({"score-resolver", "--corpus", corpus, "--clusters", (tmp / "pred.jsonl").string(), "--matching",
                       "exact", "--format", "json"});
  CHECK(nlohmann::json::parse(exact.out)["correct"] == 0);

  REQUIRE(invoke(fix12_evaluate(tmp / "e")).code == 0);
  auto merged = invoke({"report", "--metrics", (tmp / "e" / "metrics.json").string()});
  CHECK(merged.code == 0);
  CHECK(merged.out.find("75.0") != std::string::npos);
}

TEST_CASE("align-train then align over raw bitext") {
  testing::TempDir tmp;
  spit(tmp / "src.txt", "the house\nthe book\na book\n");
  spit(tmp / "tgt.txt", "das Haus\ndas Buch\nein Buch\n");
  auto train = invoke({"align-train", "--src-text", (tmp / "src.txt").string(), "--tgt-text",
                       (tmp / "tgt.txt").string(), "--iterations", "10", "--out", (tmp / "t").string()});
  REQUIRE_MESSAGE(train.code == 0, train.err);
  for (auto name : {"forward.tsv", "reverse.tsv", "train_report.json", "manifest.json"})
    CHECK(fs::exists(tmp / "t" / name));
  auto align = invoke({"align", "--tables", (tmp / "t").string(), "--src-text", (tmp / "src.txt").string(),
                       "--tgt-text", (tmp / "tgt.txt").string(), "--out", (tmp / "al").string()});
  REQUIRE_MESSAGE(align.code == 0, align.err);
  CHECK(slurp(tmp / "al" / "alignments.pharaoh") == "0-0 1-1\n0-0 1-1\n0-0 1-1\n");
}
