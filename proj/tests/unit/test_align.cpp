#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "mtcoref/align.hpp"
#include "mtcoref/corpus.hpp"
#include "mtcoref/error.hpp"
#include "support.hpp"

using namespace mtcoref;
using Tokens = std::vector<std::string>;
using Links = std::set<std::pair<std::size_t, std::size_t>>;

namespace {

std::vector<SentencePair> toy_corpus() {
  return {{{"the", "house"}, {"das", "haus"}}, {{"the", "book"}, {"das", "buch"}}, {{"a", "house"}, {"ein", "haus"}}};
}

std::vector<SentencePair> reversed(const std::vector<SentencePair>& b) {
  std::vector<SentencePair> out;
  for (const auto& [s, t] : b) out.emplace_back(t, s);
  return out;
}

nlohmann::json oracle() { return nlohmann::json::parse(read_file(testing::fixture("model1/expected.json"))); }

Links links_of(const nlohmann::json& arr) {
  Links out;
  for (const auto& p : arr) out.emplace(p[0].get<std::size_t>(), p[1].get<std::size_t>());
  return out;
}

}  // namespace

TEST_CASE("toy corpus matches the oracle EM run") {
  const auto expected = oracle();
  TrainReport report;
  const auto start = std::chrono::steady_clock::now();
  auto fwd = train_model1(toy_corpus(), 10, &report);
  auto rev = train_model1(reversed(toy_corpus()), 10);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));

  CHECK(fwd.prob("haus", "house") > 0.9);
  REQUIRE(fwd.entry_count() == expected["forward"].size());
  for (const auto& e : expected["forward"]) {
    const auto tgt = e[0].get<std::string>(), src = e[1].get<std::string>();
    const double p = src == "NULL" ? fwd.null_prob(tgt) : fwd.prob(tgt, src);
    CHECK_MESSAGE(std::abs(p - e[2].get<double>()) < 1e-12, "t(", tgt, "|", src, ")");
  }
  for (const auto& e : expected["reverse"]) {
    const auto tgt = e[0].get<std::string>(), src = e[1].get<std::string>();
    const double p = src == "NULL" ? rev.null_prob(tgt) : rev.prob(tgt, src);
    CHECK(std::abs(p - e[2].get<double>()) < 1e-12);
  }
  REQUIRE(report.log_likelihood.size() == 11);
  for (std::size_t i = 0; i < 11; ++i)
    CHECK(std::abs(report.log_likelihood[i] - expected["log_likelihood"][i].get<double>()) < 1e-9);
  for (std::size_t i = 1; i < 11; ++i) CHECK(report.log_likelihood[i] >= report.log_likelihood[i - 1]);

  const Tokens src{"the", "house"}, tgt{"das", "haus"};
  CHECK(directional_align(fwd, src, tgt).links == links_of(expected["forward_alignment"]));
  CHECK(align_pair(fwd, rev, src, tgt).links == links_of(expected["intersection"]));
  CHECK(align_pair(fwd, rev, src, tgt).links == Links{{0, 0}, {1, 1}});
}

TEST_CASE("trained rows are normalized") {
  auto fwd = train_model1(toy_corpus(), 10);
  for (const auto& w : fwd.source_words()) CHECK(std::abs(fwd.row_sum(w) - 1.0) < 1e-9);
  CHECK(std::abs(fwd.row_sum("NULL") - 1.0) < 1e-9);
}

TEST_CASE("single pair: first E-step splits the link evenly") {
  const std::vector<SentencePair> pair{{{"a"}, {"b"}}};
  auto t = train_model1(pair, 1);
  const auto post = link_posteriors(t, {"a"}, {"b"});
  REQUIRE(post.size() == 1);
  CHECK(post[0][0] == doctest::Approx(0.5));  // NULL
  CHECK(post[0][1] == doctest::Approx(0.5));  // "a"
  CHECK(post[0][0] + post[0][1] == doctest::Approx(1.0));
  CHECK(t.prob("b", "a") == doctest::Approx(1.0));
  CHECK(t.null_prob("b") == doctest::Approx(1.0));
}

TEST_CASE("training preconditions and skipped pairs") {
  CHECK_THROWS_WITH_AS(train_model1({}, 5), "bitext is empty", ValidationError);
  CHECK_THROWS_WITH_AS(train_model1(toy_corpus(), 0), doctest::Contains("iterations must be >= 1"), ValidationError);
  auto with_empty = toy_corpus();
  with_empty.push_back({{}, {"x"}});
  TrainReport report;
  train_model1(with_empty, 2, &report);
  CHECK(report.pairs_used == 3);
  CHECK(report.pairs_skipped == 1);
}

TEST_CASE("training is case-insensitive and deterministic") {
  auto a = train_model1(toy_corpus(), 5);
  auto upper = toy_corpus();
  upper[0].first[1] = "HOUSE";
  auto b = train_model1(upper, 5);
  CHECK(a == b);
  CHECK(a.to_tsv() == train_model1(toy_corpus(), 5).to_tsv());
}

TEST_CASE("tables round-trip through TSV") {
  auto t = train_model1(toy_corpus(), 4);
  auto tsv = t.to_tsv();
  CHECK(tsv.rfind("buch\tNULL\t", 0) == 0);
  auto back = TranslationTable::from_tsv(tsv);
  CHECK(back == t);
  CHECK(back.to_tsv() == tsv);
  CHECK_THROWS_AS(TranslationTable::from_tsv("a\tb\n"), ParseError);
  CHECK_THROWS_AS(TranslationTable::from_tsv("a\tb\t1.5\n"), ParseError);
}

TEST_CASE("unseen words stay unlinked; identity on a diagonal table") {
  auto fwd = train_model1(toy_corpus(), 10);
  auto rev = train_model1(reversed(toy_corpus()), 10);
  CHECK(align_pair(fwd, rev, {"zebra"}, {"zebra"}).links.empty());

  std::vector<SentencePair> diag;
  const Tokens words{"alpha", "beta", "gamma", "delta"};
  for (std::size_t i = 0; i < words.size(); ++i) {
    diag.push_back({{words[i]}, {words[i]}});
    diag.push_back({{words[i], words[(i + 1) % 4]}, {words[i], words[(i + 1) % 4]}});
  }
  auto f = train_model1(diag, 10), r = train_model1(reversed(diag), 10);
  CHECK(align_pair(f, r, words, words).links == Links{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
}

TEST_CASE("symmetrization") {
  Alignment fwd{{{0, 0}, {1, 1}}}, rev{{{1, 1}, {2, 1}}};
  CHECK(symmetrize(fwd, rev, 3, 2, Symmetrization::intersection).links == Links{{1, 1}});
  CHECK(symmetrize(fwd, rev, 3, 2, Symmetrization::union_).links == Links{{0, 0}, {1, 1}, {2, 1}});
  auto gd = symmetrize(fwd, rev, 3, 2, Symmetrization::grow_diag).links;
  CHECK(gd.count({1, 1}));
  CHECK(parse_symmetrization("grow_diag") == Symmetrization::grow_diag);
  CHECK_THROWS_AS(parse_symmetrization("gdfa"), ValidationError);
}

TEST_CASE("symmetrization algebra on random pairs") {
  std::mt19937 rng(42);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + rng() % 6, m = 1 + rng() % 6;
    Alignment f, r;
    for (std::size_t k = 0; k < n * m / 2; ++k) {
      if (rng() % 2) f.links.emplace(rng() % n, rng() % m);
      if (rng() % 2) r.links.emplace(rng() % n, rng() % m);
    }
    auto inter = symmetrize(f, r, n, m, Symmetrization::intersection).links;
    auto grow = symmetrize(f, r, n, m, Symmetrization::grow_diag).links;
    auto uni = symmetrize(f, r, n, m, Symmetrization::union_).links;
    REQUIRE(std::includes(grow.begin(), grow.end(), inter.begin(), inter.end()));
    REQUIRE(std::includes(uni.begin(), uni.end(), grow.begin(), grow.end()));
  }
}

TEST_CASE("pharaoh format") {
  auto a = parse_pharaoh("0-0 1-2 1-1\n\n");
  REQUIRE(a.size() == 2);
  CHECK(a[0].links == Links{{0, 0}, {1, 1}, {1, 2}});
  CHECK(format_pharaoh_line(a[0]) == "0-0 1-1 1-2");
  CHECK(a[1].links.empty());
  CHECK(format_pharaoh(a) == "0-0 1-1 1-2\n\n");
  try {
    parse_pharaoh("3-x\n", "a.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_pharaoh("0-0 1_1\n"), ParseError);

  testing::TempDir dir;
  std::vector<Alignment> many{Alignment{{{2, 3}, {0, 1}}}, Alignment{}, Alignment{{{5, 5}}}};
  write_pharaoh(many, dir / "a.pharaoh");
  CHECK(read_pharaoh(dir / "a.pharaoh") == many);

  Alignment bad{{{4, 0}}};
  CHECK_THROWS_AS(bad.validate(3, 3), ValidationError);
  CHECK(Alignment{{{0, 1}, {1, 1}, {1, 2}, {3, 0}}}.targets_of(0, 2) == std::set<std::size_t>{1, 2});
}
