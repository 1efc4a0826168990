#include "mtcoref/augment.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "mtcoref/error.hpp"
#include "mtcoref/parallel.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

namespace {

struct MarkerToken {
  bool closing;
  std::size_t number;
};

std::optional<MarkerToken> parse_marker(std::string_view tok) {
  if (tok.size() < 6 || tok.front() != '<' || tok.back() != '>') return std::nullopt;
  bool closing = tok[1] == '/';
  auto body = tok.substr(closing ? 2 : 1, tok.size() - (closing ? 3 : 2));
  if (body.substr(0, 3) != "ENT") return std::nullopt;
  auto digits = body.substr(3);
  if (digits.empty() || digits[0] == '0') return std::nullopt;
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return MarkerToken{closing, n};
}

std::string open_tag(std::size_t k) { return "<ENT" + std::to_string(k) + ">"; }
std::string close_tag(std::size_t k) { return "</ENT" + std::to_string(k) + ">"; }

}  // namespace

bool is_marker_token(std::string_view token) { return parse_marker(token).has_value(); }

bool is_gendered_pronoun(std::string_view token) {
  static constexpr std::string_view kPronouns[] = {"he", "she", "her", "him", "hers", "his"};
  const auto low = text::lowercase(token);
  return std::find(std::begin(kPronouns), std::end(kPronouns), low) != std::end(kPronouns);
}

bool has_non_singleton_cluster(const ClusterSet& clusters) {
  return std::any_of(clusters.clusters.begin(), clusters.clusters.end(), [](const auto& c) { return c.size() >= 2; });
}

namespace {

bool cluster_has_gendered_pronoun(const std::vector<std::string>& tokens, const std::vector<Span>& cluster) {
  return std::any_of(cluster.begin(), cluster.end(), [&](const Span& m) {
    return m.size() == 1 && m.start < tokens.size() && is_gendered_pronoun(tokens[m.start]);
  });
}

}  // namespace

bool has_gendered_cluster(const ClusteredSentence& s) {
  return std::any_of(s.clusters.clusters.begin(), s.clusters.clusters.end(), [&](const auto& c) {
    return c.size() >= 2 && cluster_has_gendered_pronoun(s.tokens, c);
  });
}

std::vector<ClusteredSentence> filter_coref(const std::vector<ClusteredSentence>& sentences) {
  std::vector<ClusteredSentence> out;
  std::copy_if(sentences.begin(), sentences.end(), std::back_inserter(out),
               [](const ClusteredSentence& s) { return has_non_singleton_cluster(s.clusters); });
  return out;
}

std::vector<ClusteredSentence> filter_gender(const std::vector<ClusteredSentence>& sentences) {
  std::vector<ClusteredSentence> out;
  std::copy_if(sentences.begin(), sentences.end(), std::back_inserter(out), has_gendered_cluster);
  return out;
}

MarkedSentence insert_markers(const std::vector<std::string>& tokens, const std::vector<std::vector<Span>>& clusters,
                              std::string origin_id) {
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (is_marker_token(tokens[i]))
      throw ValidationError("token " + std::to_string(i) + " '" + tokens[i] + "' collides with the marker syntax");
  for (const auto& c : clusters) {
    if (c.size() < 2) throw ValidationError("insert_markers expects non-singleton clusters only");
    for (const auto& m : c) check_span(m, tokens.size(), "mention");
  }

  // Number clusters by earliest mention start; ties keep input order.
  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  auto first_start = [&](std::size_t c) {
    return std::min_element(clusters[c].begin(), clusters[c].end())->start;
  };
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return first_start(a) < first_start(b); });
  std::vector<std::size_t> number(clusters.size());
  for (std::size_t k = 0; k < order.size(); ++k) number[order[k]] = k + 1;

  struct Mention {
    Span span;
    std::size_t number;
  };
  std::vector<Mention> mentions;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (const auto& m : clusters[c]) mentions.push_back({m, number[c]});
  std::stable_sort(mentions.begin(), mentions.end(), [](const Mention& a, const Mention& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    if (a.span.size() != b.span.size()) return a.span.size() > b.span.size();
    return a.number < b.number;
  });
  std::vector<Mention> kept;
  for (const auto& m : mentions)
    if (std::none_of(kept.begin(), kept.end(), [&](const Mention& k) { return k.span.overlaps(m.span); }))
      kept.push_back(m);

  std::vector<std::vector<std::string>> before(tokens.size()), after(tokens.size());
  std::set<std::size_t> marked_clusters;
  for (const auto& m : kept) {
    before[m.span.start].push_back(open_tag(m.number));
    after[m.span.end - 1].push_back(close_tag(m.number));
    marked_clusters.insert(m.number);
  }
  MarkedSentence out;
  out.origin_id = std::move(origin_id);
  out.cluster_count = marked_clusters.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.tokens.insert(out.tokens.end(), before[i].begin(), before[i].end());
    out.tokens.push_back(tokens[i]);
    out.tokens.insert(out.tokens.end(), after[i].begin(), after[i].end());
  }
  return out;
}

StrippedSentence strip_markers(const std::vector<std::string>& marked) {
  StrippedSentence out;
  std::map<std::size_t, std::vector<Span>> clusters;
  struct Open {
    std::size_t number;
    std::size_t start;
    std::size_t position;
  };
  std::vector<Open> stack;
  auto fail = [](std::size_t pos, const std::string& why) -> void {
    throw ParseError("", 0, "token " + std::to_string(pos) + ": " + why);
  };
  for (std::size_t pos = 0; pos < marked.size(); ++pos) {
    auto m = parse_marker(marked[pos]);
    if (!m) {
      out.tokens.push_back(marked[pos]);
      continue;
    }
    if (!m->closing) {
      if (std::any_of(stack.begin(), stack.end(), [&](const Open& o) { return o.number == m->number; }))
        fail(pos, "nested marker " + marked[pos]);
      stack.push_back({m->number, out.tokens.size(), pos});
      continue;
    }
    if (stack.empty() || stack.back().number != m->number) fail(pos, "mismatched marker " + marked[pos]);
    auto open = stack.back();
    stack.pop_back();
    if (open.start == out.tokens.size()) fail(pos, "empty marked region " + open_tag(open.number));
    clusters[open.number].push_back(Span{open.start, out.tokens.size()});
  }
  if (!stack.empty()) fail(stack.back().position, "unclosed marker " + open_tag(stack.back().number));
  for (auto& [k, spans] : clusters) {
    std::sort(spans.begin(), spans.end());
    out.clusters.push_back(std::move(spans));
  }
  return out;
}

AugmentMode parse_augment_mode(std::string_view s) {
  if (s == "coref") return AugmentMode::coref;
  if (s == "gender") return AugmentMode::gender;
  throw ValidationError("unknown augment mode '" + std::string(s) + "' (expected coref|gender)");
}

MarkerSource parse_marker_source(std::string_view s) {
  if (s == "predicted") return MarkerSource::predicted;
  if (s == "gold") return MarkerSource::gold;
  if (s == "none") return MarkerSource::none;
  throw ValidationError("unknown marker source '" + std::string(s) + "' (expected predicted|gold|none)");
}

ClusterSet gold_clusters(const AnnotatedSentence& s) {
  ClusterSet cs;
  cs.sentence_id = s.id;
  cs.clusters.push_back({s.antecedent(), s.pronoun});
  cs.canonicalize();
  return cs;
}

std::vector<AugmentedLine> build_augmented(const std::vector<AugmentInput>& inputs, const AugmentOptions& options,
                                           std::size_t jobs) {
  auto results = parallel_map(inputs.size(), jobs, [&](std::size_t i) -> std::optional<AugmentedLine> {
    const auto& in = inputs[i];
    const auto& source = options.markers == MarkerSource::gold ? in.gold : in.predicted;
    if (!source)
      throw ValidationError("sentence '" + in.id + "': no " +
                            (options.markers == MarkerSource::gold ? std::string("gold") : std::string("predicted")) +
                            " clusters");
    validate_clusters(*source, in.tokens.size());
    ClusteredSentence cs{in.tokens, *source};
    const bool keep = options.mode == AugmentMode::coref ? has_non_singleton_cluster(cs.clusters) : has_gendered_cluster(cs);
    if (!keep) return std::nullopt;
    AugmentedLine line;
    line.target = in.target;
    if (options.markers == MarkerSource::none) {
      line.sentence = MarkedSentence{in.tokens, in.id, 0};
      return line;
    }
    std::vector<std::vector<Span>> to_mark;
    for (const auto& c : cs.clusters.clusters) {
      if (c.size() < 2) continue;
      if (options.pronoun_clusters_only && !cluster_has_gendered_pronoun(in.tokens, c)) continue;
      to_mark.push_back(c);
    }
    line.sentence = insert_markers(in.tokens, to_mark, in.id);
    return line;
  });
  std::vector<AugmentedLine> out;
  for (auto& r : results)
    if (r) out.push_back(std::move(*r));
  return out;
}

std::string format_marked_text(const std::vector<AugmentedLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += text::join(l.sentence.tokens);
    out += '\n';
  }
  return out;
}

std::string format_target_text(const std::vector<AugmentedLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l.target.value_or("");
    out += '\n';
  }
  return out;
}

std::string format_sidecar(const std::vector<AugmentedLine>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    nlohmann::ordered_json j;
    j["line"] = i + 1;
    j["id"] = lines[i].sentence.origin_id;
    j["clusters"] = lines[i].sentence.cluster_count;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace mtcoref
