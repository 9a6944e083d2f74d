#include "nesum/extractive.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "nesum/rng.hpp"
#include "nesum/utf8.hpp"

namespace nesum {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::first:
      return "first";
    case Method::random:
      return "random";
    case Method::textrank:
      return "textrank";
    case Method::ned:
      return "ned";
    case Method::seq2seq:
      return "seq2seq";
    case Method::seq2seq_ner:
      return "seq2seq_ner";
  }
  return "first";
}

std::optional<Method> parse_method(std::string_view s) {
  if (s == "first") return Method::first;
  if (s == "random") return Method::random;
  if (s == "textrank") return Method::textrank;
  if (s == "ned") return Method::ned;
  if (s == "seq2seq") return Method::seq2seq;
  if (s == "seq2seq-ner" || s == "seq2seq_ner") return Method::seq2seq_ner;
  return std::nullopt;
}

bool is_extractive(Method m) {
  return m == Method::first || m == Method::random || m == Method::textrank ||
         m == Method::ned;
}

namespace {

SummarizerOutput sentence_output(const AnnotatedText& a, const std::string& doc_id,
                                 Method method, std::size_t index) {
  const TokenRange r = a.sentence_bounds.at(index);
  SummarizerOutput out;
  out.doc_id = doc_id;
  out.method = method;
  out.summary_tokens.assign(a.tokens.begin() + r.begin, a.tokens.begin() + r.end);
  out.chosen_sentence = index;
  return out;
}

void require_sentences(const AnnotatedText& a) {
  if (a.sentence_bounds.empty())
    throw ArgumentError("article has no sentences");
}

}  // namespace

SummarizerOutput select_first(const AnnotatedText& a, const std::string& doc_id) {
  require_sentences(a);
  return sentence_output(a, doc_id, Method::first, 0);
}

SummarizerOutput select_random(const AnnotatedText& a, const std::string& doc_id,
                               std::uint64_t seed) {
  require_sentences(a);
  SplitMix64 rng(seed ^ fnv1a64(doc_id));
  auto index = static_cast<std::size_t>(rng.below(a.sentence_bounds.size()));
  auto out = sentence_output(a, doc_id, Method::random, index);
  out.seed = seed;
  return out;
}

std::vector<SentenceScore> ned_scores(const AnnotatedText& a) {
  std::vector<SentenceScore> scores;
  scores.reserve(a.sentence_bounds.size());
  for (std::size_t s = 0; s < a.sentence_bounds.size(); ++s) {
    const TokenRange r = a.sentence_bounds[s];
    const double density =
        static_cast<double>(entity_token_count(a, r)) / static_cast<double>(r.size());
    scores.push_back({s, density});
  }
  return scores;
}

SummarizerOutput select_ned(const AnnotatedText& a, const std::string& doc_id,
                            std::size_t min_sentence_len) {
  require_sentences(a);
  const auto scores = ned_scores(a);
  bool any_eligible = std::any_of(
      a.sentence_bounds.begin(), a.sentence_bounds.end(),
      [&](const TokenRange& r) { return r.size() >= min_sentence_len; });
  std::size_t best = 0;
  bool have_best = false;
  for (const auto& sc : scores) {
    if (any_eligible && a.sentence_bounds[sc.sentence_index].size() < min_sentence_len)
      continue;
    if (!have_best || sc.score > scores[best].score) {
      best = sc.sentence_index;
      have_best = true;
    }
  }
  return sentence_output(a, doc_id, Method::ned, best);
}

namespace {

constexpr double kDamping = 0.85;
constexpr double kEpsilon = 1e-6;
constexpr int kMaxIterations = 100;

std::unordered_set<std::string> lowered_token_set(const AnnotatedText& a,
                                                  TokenRange r) {
  std::unordered_set<std::string> set;
  for (std::size_t i = r.begin; i < r.end; ++i) set.insert(utf8::lower(a.tokens[i]));
  return set;
}

}  // namespace

std::vector<double> textrank_scores(const AnnotatedText& a) {
  require_sentences(a);
  const std::size_t n = a.sentence_bounds.size();
  if (n == 1) return {1.0};

  std::vector<std::unordered_set<std::string>> sets;
  sets.reserve(n);
  for (const auto& r : a.sentence_bounds) sets.push_back(lowered_token_set(a, r));

  std::vector<std::vector<double>> weight(n, std::vector<double>(n, 0.0));
  std::vector<double> outsum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t shared = 0;
      const auto &small = sets[i].size() <= sets[j].size() ? sets[i] : sets[j];
      const auto &large = sets[i].size() <= sets[j].size() ? sets[j] : sets[i];
      for (const auto& tok : small)
        if (large.count(tok)) ++shared;
      const double denom = std::log(1.0 + a.sentence_bounds[i].size()) +
                           std::log(1.0 + a.sentence_bounds[j].size());
      const double w = shared / denom;
      weight[i][j] = w;
      weight[j][i] = w;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) outsum[i] += weight[i][j];

  std::vector<double> score(n, 1.0 / n), next(n, 0.0);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double incoming = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || outsum[j] <= 0.0) continue;
        incoming += weight[j][i] / outsum[j] * score[j];
      }
      next[i] = (1.0 - kDamping) + kDamping * incoming;
    }
    double sum = 0.0;
    for (double v : next) sum += v;
    const double scale = n / sum;
    double max_delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] *= scale;
      max_delta = std::max(max_delta, std::fabs(next[i] - score[i]));
    }
    score.swap(next);
    if (max_delta < kEpsilon) break;
  }
  return score;
}

SummarizerOutput textrank_select(const AnnotatedText& a, const std::string& doc_id) {
  require_sentences(a);
  if (a.sentence_bounds.size() == 1)
    return sentence_output(a, doc_id, Method::textrank, 0);
  const auto scores = textrank_scores(a);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return sentence_output(a, doc_id, Method::textrank, best);
}

}  // namespace nesum
