#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nesum/corpus.hpp"

namespace nesum {

enum class Method { first, random, textrank, ned, seq2seq, seq2seq_ner };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);
bool is_extractive(Method m);

struct SentenceScore {
  std::size_t sentence_index = 0;
  double score = 0.0;
};

struct SummarizerOutput {
  std::string doc_id;
  Method method = Method::first;
  std::vector<std::string> summary_tokens;
  std::optional<std::size_t> chosen_sentence;  // present iff method extractive
  std::optional<std::uint64_t> seed;           // present for the random baseline
};

/// First sentence of the article. Throws ArgumentError on an empty article.
SummarizerOutput select_first(const AnnotatedText& a, const std::string& doc_id);

/// Uniformly random sentence, reproducible across platforms: drawn from
/// splitmix64 seeded with (seed XOR fnv1a64(doc_id)), index = draw mod n.
SummarizerOutput select_random(const AnnotatedText& a, const std::string& doc_id,
                               std::uint64_t seed);

/// Per-sentence entity density: (B/I-tagged tokens in sentence) / (sentence
/// length in tokens). Scores are in [0, 1].
std::vector<SentenceScore> ned_scores(const AnnotatedText& a);

/// Sentence with the highest entity density; ties go to the earliest
/// sentence. Sentences shorter than min_sentence_len tokens are skipped
/// unless every sentence is shorter, in which case all are eligible again.
SummarizerOutput select_ned(const AnnotatedText& a, const std::string& doc_id,
                            std::size_t min_sentence_len = 1);

/// TextRank sentence scores. The sentence graph is undirected with
///   weight(i, j) = |shared distinct lowercased tokens|
///                  / (log(1 + |s_i|) + log(1 + |s_j|))
/// and scores follow the damped update (d = 0.85)
///   score_i <- (1 - d) + d * sum_j weight(j, i) / outsum_j * score_j
/// from a uniform 1/N start, rescaled to sum to N after every iteration,
/// until the max componentwise change is below 1e-6 or 100 iterations.
std::vector<double> textrank_scores(const AnnotatedText& a);

/// Highest-ranked TextRank sentence, ties to the earliest index. A single
/// sentence is returned directly without iteration.
SummarizerOutput textrank_select(const AnnotatedText& a, const std::string& doc_id);

}  // namespace nesum
