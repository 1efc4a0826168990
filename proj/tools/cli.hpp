#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace mtcoref::cli {

/// Every flag of every subcommand lands here.
struct Settings {
  // shared
  std::string corpus;
  std::string corpus_format = "canonical";
  std::string dataset;
  std::string out_dir;
  std::string format = "markdown";
  std::size_t jobs = 1;

  // evaluate / fetch / align
  std::string translations;
  std::string translation_format = "auto";
  bool pretokenized = false;
  std::string endpoint;
  std::string cache_dir;
  std::string system = "system";
  std::string language;
  std::string alignments;
  std::string tables;
  bool train_aligner = false;
  int iterations = 5;
  std::string symmetrization = "intersection";
  std::string lexicon;
  bool no_seed_lexicon = false;

  // align-train / align over raw parallel text
  std::string src_text;
  std::string tgt_text;

  // augment
  std::string clusters;
  std::string text;
  std::string target_text;
  std::string mode = "coref";
  std::string markers = "predicted";
  bool pronoun_clusters_only = false;

  // score-resolver
  std::string matching = "head_overlap";
  bool allow_distractors = false;

  // sample / agree / report
  std::string verdicts;
  std::size_t sample_size = 50;
  std::uint64_t seed = 0;
  bool include_omitted = false;
  std::vector<std::string> sheets;
  std::vector<std::string> metrics;
};

/// Builds the command tree bound to `settings`. Exposed for tests.
std::unique_ptr<CLI::App> build_app(Settings& settings);

/// Exit codes: 0 success, 1 evaluation-domain failure, 2 usage or I/O failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mtcoref::cli
