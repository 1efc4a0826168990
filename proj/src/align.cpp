#include "mtcoref/align.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "mtcoref/corpus.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

// ---------------------------------------------------------------- Alignment

std::set<std::size_t> Alignment::targets_of(std::size_t src_begin, std::size_t src_end) const {
  std::set<std::size_t> out;
  for (auto it = links.lower_bound({src_begin, 0}); it != links.end() && it->first < src_end; ++it)
    out.insert(it->second);
  return out;
}

void Alignment::validate(std::size_t src_len, std::size_t tgt_len) const {
  for (const auto& [s, t] : links)
    if (s >= src_len || t >= tgt_len)
      throw ValidationError("alignment link " + std::to_string(s) + "-" + std::to_string(t) + " outside " +
                            std::to_string(src_len) + "x" + std::to_string(tgt_len) + " sentence pair");
}

Symmetrization parse_symmetrization(std::string_view name) {
  if (name == "intersection") return Symmetrization::intersection;
  if (name == "union") return Symmetrization::union_;
  if (name == "grow_diag" || name == "grow-diag") return Symmetrization::grow_diag;
  throw ValidationError("unknown symmetrization '" + std::string(name) + "' (expected intersection|union|grow_diag)");
}

// ---------------------------------------------------------------- table

std::uint32_t TranslationTable::source_id(std::string_view w) const {
  auto it = source_index_.find(std::string(w));
  return it == source_index_.end() ? UINT32_MAX : it->second;
}

std::uint32_t TranslationTable::target_id(std::string_view w) const {
  auto it = target_index_.find(std::string(w));
  return it == target_index_.end() ? UINT32_MAX : it->second;
}

double TranslationTable::lookup(std::uint32_t tgt, std::uint32_t src) const {
  if (tgt == UINT32_MAX || src == UINT32_MAX) return 0.0;
  auto it = entry_index_.find(key(src, tgt));
  return it == entry_index_.end() ? 0.0 : probs_[it->second];
}

double TranslationTable::prob(std::string_view target, std::string_view source) const {
  return lookup(target_id(text::normalize(target)), source_id(text::normalize(source)));
}

double TranslationTable::null_prob(std::string_view target) const {
  return lookup(target_id(text::normalize(target)), kNull);
}

double TranslationTable::row_sum(std::string_view source) const {
  auto src = source == kNullWord ? kNull : source_id(text::normalize(source));
  double sum = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k)
    if (entry_source_[k] == src) sum += probs_[k];
  return sum;
}

std::vector<std::string> TranslationTable::source_words() const {
  return {source_vocab_.begin() + 1, source_vocab_.end()};
}

bool TranslationTable::operator==(const TranslationTable& o) const { return to_tsv() == o.to_tsv(); }

std::string TranslationTable::to_tsv() const {
  std::vector<std::size_t> order(probs_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  auto src_rank = [&](std::size_t k) { return entry_source_[k] == kNull ? std::string() : source_vocab_[entry_source_[k]]; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    bool na = entry_source_[a] == kNull, nb = entry_source_[b] == kNull;
    if (na != nb) return na;
    auto sa = src_rank(a), sb = src_rank(b);
    if (sa != sb) return sa < sb;
    return target_vocab_[entry_target_[a]] < target_vocab_[entry_target_[b]];
  });
  std::string out;
  char buf[64];
  for (auto k : order) {
    std::snprintf(buf, sizeof buf, "%.17g", probs_[k]);
    out += target_vocab_[entry_target_[k]];
    out += '\t';
    out += source_vocab_[entry_source_[k]];
    out += '\t';
    out += buf;
    out += '\n';
  }
  return out;
}

// Builds tables incrementally; shared by training and TSV loading.
class Model1Trainer {
 public:
  explicit Model1Trainer(TranslationTable& t) : t_(t) {}

  std::uint32_t intern_source(const std::string& w) {
    auto [it, inserted] = t_.source_index_.emplace(w, static_cast<std::uint32_t>(t_.source_vocab_.size()));
    if (inserted) t_.source_vocab_.push_back(w);
    return it->second;
  }
  std::uint32_t intern_target(const std::string& w) {
    auto [it, inserted] = t_.target_index_.emplace(w, static_cast<std::uint32_t>(t_.target_vocab_.size()));
    if (inserted) t_.target_vocab_.push_back(w);
    return it->second;
  }
  void add_entry(std::uint32_t src, std::uint32_t tgt, double p) {
    t_.entry_index_.emplace(TranslationTable::key(src, tgt), t_.probs_.size());
    t_.entry_source_.push_back(src);
    t_.entry_target_.push_back(tgt);
    t_.probs_.push_back(p);
  }
  std::vector<double>& probs() { return t_.probs_; }
  std::size_t entry(std::uint32_t src, std::uint32_t tgt) const { return t_.entry_index_.at(TranslationTable::key(src, tgt)); }
  const std::vector<std::uint32_t>& entry_source() const { return t_.entry_source_; }

 private:
  TranslationTable& t_;
};

TranslationTable TranslationTable::from_tsv(std::string_view content, const std::string& source) {
  TranslationTable t;
  Model1Trainer b(t);
  auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos)
      throw ParseError(source, i + 1, "expected target<TAB>source<TAB>prob");
    std::string tgt(line.substr(0, t1));
    std::string src(line.substr(t1 + 1, t2 - t1 - 1));
    std::string p_str(line.substr(t2 + 1));
    char* end = nullptr;
    double p = std::strtod(p_str.c_str(), &end);
    if (p_str.empty() || end != p_str.c_str() + p_str.size() || !(p >= 0.0 && p <= 1.0))
      throw ParseError(source, i + 1, "probability must be a number in [0,1], got '" + p_str + "'");
    auto src_id = src == kNullWord ? kNull : b.intern_source(src);
    auto tgt_id = b.intern_target(tgt);
    if (t.entry_index_.count(key(src_id, tgt_id))) throw ParseError(source, i + 1, "duplicate entry");
    b.add_entry(src_id, tgt_id, p);
  }
  return t;
}

// ---------------------------------------------------------------- training

namespace {

struct EncodedPair {
  std::vector<std::uint32_t> src;  // with NULL (id 0) at position 0
  std::vector<std::uint32_t> tgt;
};

}  // namespace

TranslationTable train_model1(const std::vector<SentencePair>& bitext, int iterations, TrainReport* report) {
  if (bitext.empty()) throw ValidationError("bitext is empty");
  if (iterations < 1) throw ValidationError("iterations must be >= 1");

  TranslationTable table;
  Model1Trainer b(table);
  TrainReport local;
  std::vector<EncodedPair> pairs;
  std::vector<SentencePair> used;
  for (const auto& [src, tgt] : bitext) {
    if (src.empty() || tgt.empty()) {
      ++local.pairs_skipped;
      continue;
    }
    EncodedPair p;
    p.src.push_back(TranslationTable::kNull);
    for (const auto& w : src) p.src.push_back(b.intern_source(text::normalize(w)));
    for (const auto& w : tgt) p.tgt.push_back(b.intern_target(text::normalize(w)));
    pairs.push_back(std::move(p));
    used.push_back({src, tgt});
  }
  local.pairs_used = pairs.size();
  if (pairs.empty()) throw ValidationError("bitext has no usable sentence pairs");

  // Co-occurrence sets, entries grouped by source word in target-id order.
  std::map<std::uint32_t, std::set<std::uint32_t>> cooc;
  for (const auto& p : pairs)
    for (auto s : p.src) cooc[s].insert(p.tgt.begin(), p.tgt.end());
  for (const auto& [s, targets] : cooc) {
    const double uniform = 1.0 / static_cast<double>(targets.size());
    for (auto t : targets) b.add_entry(s, t, uniform);
  }

  auto& probs = b.probs();
  const auto& entry_src = b.entry_source();
  // Resolve entry offsets once per pair for the inner loops.
  std::vector<std::vector<std::size_t>> offsets(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    offsets[k].reserve(p.src.size() * p.tgt.size());
    for (auto t : p.tgt)
      for (auto s : p.src) offsets[k].push_back(b.entry(s, t));
  }

  local.log_likelihood.push_back(model1_log_likelihood(table, used));
  std::vector<double> counts(probs.size());
  std::vector<double> totals(table.source_vocab_.size());
  for (int it = 0; it < iterations; ++it) {
    std::fill(counts.begin(), counts.end(), 0.0);
    std::fill(totals.begin(), totals.end(), 0.0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& p = pairs[k];
      const auto n_src = p.src.size();
      for (std::size_t j = 0; j < p.tgt.size(); ++j) {
        const auto* off = &offsets[k][j * n_src];
        double z = 0.0;
        for (std::size_t i = 0; i < n_src; ++i) z += probs[off[i]];
        if (z <= 0.0) continue;
        for (std::size_t i = 0; i < n_src; ++i) {
          const double c = probs[off[i]] / z;
          counts[off[i]] += c;
          totals[p.src[i]] += c;
        }
      }
    }
    for (std::size_t e = 0; e < probs.size(); ++e)
      probs[e] = totals[entry_src[e]] > 0.0 ? counts[e] / totals[entry_src[e]] : 0.0;
    local.log_likelihood.push_back(model1_log_likelihood(table, used));
  }
  if (report) *report = std::move(local);
  return table;
}

double model1_log_likelihood(const TranslationTable& table, const std::vector<SentencePair>& bitext) {
  double ll = 0.0;
  for (const auto& [src, tgt] : bitext) {
    if (src.empty() || tgt.empty()) continue;
    std::vector<std::uint32_t> src_ids{TranslationTable::kNull};
    for (const auto& w : src) src_ids.push_back(table.source_id(text::normalize(w)));
    for (const auto& w : tgt) {
      auto f = table.target_id(text::normalize(w));
      double sum = 0.0;
      for (auto e : src_ids) sum += table.lookup(f, e);
      ll += std::log(sum);
    }
    ll -= static_cast<double>(tgt.size()) * std::log(static_cast<double>(src.size() + 1));
  }
  return ll;
}

std::vector<std::vector<double>> link_posteriors(const TranslationTable& table, const std::vector<std::string>& src,
                                                 const std::vector<std::string>& tgt) {
  std::vector<std::uint32_t> src_ids{TranslationTable::kNull};
  for (const auto& w : src) src_ids.push_back(table.source_id(text::normalize(w)));
  std::vector<std::vector<double>> out;
  for (const auto& w : tgt) {
    auto f = table.target_id(text::normalize(w));
    std::vector<double> row;
    double z = 0.0;
    for (auto e : src_ids) {
      row.push_back(table.lookup(f, e));
      z += row.back();
    }
    if (z > 0.0)
      for (auto& v : row) v /= z;
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------- alignment

Alignment directional_align(const TranslationTable& table, const std::vector<std::string>& src,
                            const std::vector<std::string>& tgt) {
  std::vector<std::uint32_t> src_ids;
  for (const auto& w : src) src_ids.push_back(table.source_id(text::normalize(w)));
  Alignment a;
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    auto f = table.target_id(text::normalize(tgt[j]));
    double best = table.lookup(f, TranslationTable::kNull);
    std::size_t best_i = SIZE_MAX;
    for (std::size_t i = 0; i < src_ids.size(); ++i) {
      double p = table.lookup(f, src_ids[i]);
      if (p > best) {
        best = p;
        best_i = i;
      }
    }
    if (best_i != SIZE_MAX && best > 0.0) a.links.emplace(best_i, j);
  }
  return a;
}

Alignment symmetrize(const Alignment& forward, const Alignment& reverse, std::size_t src_len, std::size_t tgt_len,
                     Symmetrization method) {
  Alignment out;
  switch (method) {
    case Symmetrization::intersection:
      std::set_intersection(forward.links.begin(), forward.links.end(), reverse.links.begin(), reverse.links.end(),
                            std::inserter(out.links, out.links.end()));
      return out;
    case Symmetrization::union_:
      std::set_union(forward.links.begin(), forward.links.end(), reverse.links.begin(), reverse.links.end(),
                     std::inserter(out.links, out.links.end()));
      return out;
    case Symmetrization::grow_diag: break;
  }
  Alignment uni;
  std::set_union(forward.links.begin(), forward.links.end(), reverse.links.begin(), reverse.links.end(),
                 std::inserter(uni.links, uni.links.end()));
  std::set_intersection(forward.links.begin(), forward.links.end(), reverse.links.begin(), reverse.links.end(),
                        std::inserter(out.links, out.links.end()));
  std::vector<bool> src_aligned(src_len), tgt_aligned(tgt_len);
  for (const auto& [s, t] : out.links) {
    src_aligned[s] = true;
    tgt_aligned[t] = true;
  }
  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (std::size_t s = 0; s < src_len; ++s) {
      for (std::size_t t = 0; t < tgt_len; ++t) {
        if (!out.links.count({s, t})) continue;
        for (const auto& d : kNeighbors) {
          const auto ns = static_cast<long long>(s) + d[0];
          const auto nt = static_cast<long long>(t) + d[1];
          if (ns < 0 || nt < 0 || ns >= static_cast<long long>(src_len) || nt >= static_cast<long long>(tgt_len)) continue;
          const std::pair<std::size_t, std::size_t> cand{static_cast<std::size_t>(ns), static_cast<std::size_t>(nt)};
          if ((!src_aligned[cand.first] || !tgt_aligned[cand.second]) && uni.links.count(cand) &&
              !out.links.count(cand)) {
            out.links.insert(cand);
            src_aligned[cand.first] = true;
            tgt_aligned[cand.second] = true;
            added = true;
          }
        }
      }
    }
  }
  return out;
}

Alignment align_pair(const TranslationTable& table_fwd, const TranslationTable& table_rev,
                     const std::vector<std::string>& src, const std::vector<std::string>& tgt, Symmetrization method) {
  auto fwd = directional_align(table_fwd, src, tgt);
  Alignment rev;
  for (const auto& [t, s] : directional_align(table_rev, tgt, src).links) rev.links.emplace(s, t);
  return symmetrize(fwd, rev, src.size(), tgt.size(), method);
}

// ---------------------------------------------------------------- pharaoh

std::vector<Alignment> parse_pharaoh(std::string_view content, const std::string& source) {
  std::vector<Alignment> out;
  auto lines = split_lines(content);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    auto line = lines[li];
    Alignment a;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos == line.size()) break;
      auto end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      auto tok = line.substr(pos, end - pos);
      auto dash = tok.find('-');
      std::size_t s = 0, t = 0;
      bool ok = dash != std::string_view::npos && dash > 0 && dash + 1 < tok.size();
      if (ok) {
        auto r1 = std::from_chars(tok.data(), tok.data() + dash, s);
        auto r2 = std::from_chars(tok.data() + dash + 1, tok.data() + tok.size(), t);
        ok = r1.ec == std::errc() && r1.ptr == tok.data() + dash && r2.ec == std::errc() &&
             r2.ptr == tok.data() + tok.size();
      }
      if (!ok)
        throw ParseError(source, li + 1,
                         "column " + std::to_string(pos + 1) + ": malformed link '" + std::string(tok) + "'");
      a.links.emplace(s, t);
      pos = end;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Alignment> read_pharaoh(const std::filesystem::path& path) {
  return parse_pharaoh(read_file(path), path.string());
}

std::string format_pharaoh_line(const Alignment& a) {
  std::string out;
  for (const auto& [s, t] : a.links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(s) + "-" + std::to_string(t);
  }
  return out;
}

std::string format_pharaoh(const std::vector<Alignment>& alignments) {
  std::string out;
  for (const auto& a : alignments) {
    out += format_pharaoh_line(a);
    out += '\n';
  }
  return out;
}

void write_pharaoh(const std::vector<Alignment>& alignments, const std::filesystem::path& path) {
  write_file_atomic(path, format_pharaoh(alignments));
}

}  // namespace mtcoref
