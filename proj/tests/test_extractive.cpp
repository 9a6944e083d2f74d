#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "nesum/extractive.hpp"
#include "nesum/utf8.hpp"

using namespace nesum;

namespace {

AnnotatedText make_article(const std::vector<std::vector<std::string>>& sentences,
                           const std::vector<std::vector<int>>& entity_marks = {}) {
  AnnotatedText a;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::size_t begin = a.tokens.size();
    for (std::size_t i = 0; i < sentences[s].size(); ++i) {
      a.tokens.push_back(sentences[s][i]);
      bool entity = !entity_marks.empty() && entity_marks[s][i] != 0;
      a.tags.push_back(entity ? IobTag::begin(EntityType::PersonalNames)
                              : IobTag::outside());
    }
    a.sentence_bounds.push_back({begin, a.tokens.size()});
  }
  return a;
}

AnnotatedText random_article(std::mt19937_64& gen, std::size_t max_sentences,
                             int vocab = 14) {
  std::size_t n = 1 + gen() % max_sentences;
  std::vector<std::vector<std::string>> sentences(n);
  std::vector<std::vector<int>> marks(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t len = 1 + gen() % 12;
    for (std::size_t i = 0; i < len; ++i) {
      sentences[s].push_back("w" + std::to_string(gen() % vocab));
      marks[s].push_back(gen() % 4 == 0 ? 1 : 0);
    }
  }
  return make_article(sentences, marks);
}

// Independent dense-matrix power iteration over the documented update.
std::vector<double> dense_textrank(const AnnotatedText& a) {
  const auto n = static_cast<Eigen::Index>(a.sentence_bounds.size());
  if (n == 1) return {1.0};
  std::vector<std::set<std::string>> sets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = a.sentence_bounds[i];
    for (std::size_t k = r.begin; k < r.end; ++k)
      sets[i].insert(utf8::lower(a.tokens[k]));
  }
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      std::size_t shared = 0;
      for (const auto& t : sets[i])
        if (sets[j].count(t)) ++shared;
      weight(i, j) = shared / (std::log(1.0 + a.sentence_bounds[i].size()) +
                               std::log(1.0 + a.sentence_bounds[j].size()));
    }
  Eigen::VectorXd outsum = weight.rowwise().sum();
  Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    if (outsum(j) > 0.0) transition.col(j) = weight.row(j).transpose() / outsum(j);

  Eigen::VectorXd score = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd next =
        Eigen::VectorXd::Constant(n, 0.15) + 0.85 * (transition * score);
    next *= n / next.sum();
    double delta = (next - score).cwiseAbs().maxCoeff();
    score = next;
    if (delta < 1e-6) break;
  }
  return {score.data(), score.data() + n};
}

}  // namespace

TEST_CASE("select_first returns sentence zero") {
  auto a = make_article({{"Prvni", "veta", "."}, {"Druha", "."}, {"Treti", "."}});
  auto out = select_first(a, "d");
  CHECK(out.summary_tokens == std::vector<std::string>{"Prvni", "veta", "."});
  CHECK(out.chosen_sentence == 0);
  CHECK(out.method == Method::first);
  CHECK(!out.seed.has_value());

  auto single = make_article({{"Jedna", "."}});
  CHECK(select_first(single, "d").summary_tokens ==
        std::vector<std::string>{"Jedna", "."});

  CHECK_THROWS_AS(select_first(AnnotatedText{}, "d"), ArgumentError);
}

TEST_CASE("select_random is deterministic per (doc, seed)") {
  auto a = make_article({{"A", "."}, {"B", "."}, {"C", "."}, {"D", "."}});
  auto one = select_random(a, "doc-1", 7);
  auto two = select_random(a, "doc-1", 7);
  CHECK(one.chosen_sentence == two.chosen_sentence);
  CHECK(one.seed == 7);

  auto single = make_article({{"Jedna", "."}});
  for (std::uint64_t seed : {0, 1, 99})
    CHECK(select_random(single, "x", seed).chosen_sentence == 0);

  CHECK_THROWS_AS(select_random(AnnotatedText{}, "d", 1), ArgumentError);
}

TEST_CASE("select_random is close to uniform over seeds") {
  auto a = make_article({{"A", "."}, {"B", "."}, {"C", "."}, {"D", "."}});
  std::array<int, 4> hits{};
  const int draws = 10000;
  for (int seed = 0; seed < draws; ++seed) {
    auto out = select_random(a, "doc-uniform", static_cast<std::uint64_t>(seed));
    ++hits[*out.chosen_sentence];
  }
  for (int h : hits) {
    CHECK(h >= 0.23 * draws);
    CHECK(h <= 0.27 * draws);
  }
}

TEST_CASE("ned_scores ratio per sentence") {
  auto a = make_article({{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}},
                        {{1, 1, 0, 0, 0, 0, 0, 0, 0, 0}});
  auto scores = ned_scores(a);
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].score == doctest::Approx(0.2));

  auto all_o = make_article({{"a", "b"}}, {{0, 0}});
  CHECK(ned_scores(all_o)[0].score == 0.0);

  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto art = random_article(gen, 12);
    auto got = ned_scores(art);
    REQUIRE(got.size() == art.sentence_bounds.size());
    for (std::size_t s = 0; s < got.size(); ++s) {
      auto r = art.sentence_bounds[s];
      std::size_t ents = 0;
      for (std::size_t i = r.begin; i < r.end; ++i)
        if (art.tags[i].is_entity()) ++ents;
      CHECK(got[s].score == double(ents) / r.size());
      CHECK(got[s].score >= 0.0);
      CHECK(got[s].score <= 1.0);
    }
  }
}

TEST_CASE("select_ned argmax with earliest-index ties") {
  auto a = make_article({{"x", "y"}, {"a", "b"}, {"p", "q", "r", "s", "t"}},
                        {{0, 0}, {1, 0}, {1, 0, 0, 0, 0}});
  // densities: 0, 0.5, 0.2
  CHECK(select_ned(a, "d").chosen_sentence == 1);

  auto ties = make_article({{"a", "b"}, {"c", "d"}}, {{1, 0}, {1, 0}});
  CHECK(select_ned(ties, "d").chosen_sentence == 0);

  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 300; ++trial) {
    auto art = random_article(gen, 20);
    auto scores = ned_scores(art);
    std::size_t expected = 0;
    for (std::size_t s = 1; s < scores.size(); ++s)
      if (scores[s].score > scores[expected].score) expected = s;
    CHECK(select_ned(art, "d").chosen_sentence == expected);
  }
}

TEST_CASE("select_ned ignores entity types, only B/I vs O") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    auto art = random_article(gen, 10);
    auto relabeled = art;
    for (auto& t : relabeled.tags)
      if (t.is_entity()) t.type = static_cast<EntityType>(gen() % kEntityTypeCount);
    repair_iob2(relabeled.tags);
    CHECK(select_ned(art, "d").chosen_sentence ==
          select_ned(relabeled, "d").chosen_sentence);
  }
}

TEST_CASE("adding an all-O sentence never changes the chosen NED text") {
  std::mt19937_64 gen(34);
  for (int trial = 0; trial < 100; ++trial) {
    auto art = random_article(gen, 8);
    // needs at least one entity token: in an all-O article every density
    // ties at zero and an all-O sentence inserted up front wins the tie
    bool any_entity = false;
    for (const auto& t : art.tags) any_entity |= t.is_entity();
    if (!any_entity) continue;
    auto before = select_ned(art, "d");

    AnnotatedText extended;
    std::size_t insert_at = gen() % (art.sentence_bounds.size() + 1);
    std::vector<std::string> filler = {"nic", "tu", "není", "."};
    for (std::size_t s = 0; s <= art.sentence_bounds.size(); ++s) {
      if (s == insert_at) {
        std::size_t begin = extended.tokens.size();
        for (const auto& t : filler) {
          extended.tokens.push_back(t);
          extended.tags.push_back(IobTag::outside());
        }
        extended.sentence_bounds.push_back({begin, extended.tokens.size()});
      }
      if (s == art.sentence_bounds.size()) break;
      auto r = art.sentence_bounds[s];
      std::size_t begin = extended.tokens.size();
      for (std::size_t i = r.begin; i < r.end; ++i) {
        extended.tokens.push_back(art.tokens[i]);
        extended.tags.push_back(art.tags[i]);
      }
      extended.sentence_bounds.push_back({begin, extended.tokens.size()});
    }

    auto after = select_ned(extended, "d");
    CHECK(after.summary_tokens == before.summary_tokens);
  }
}

TEST_CASE("select_ned with min sentence length") {
  auto a = make_article({{"Jan", "."}, {"dlouhá", "věta", "bez", "entit", "."}},
                        {{1, 0}, {0, 0, 0, 0, 0}});
  CHECK(select_ned(a, "d").chosen_sentence == 0);
  CHECK(select_ned(a, "d", 3).chosen_sentence == 1);
  // when nothing qualifies, everything is eligible again
  CHECK(select_ned(a, "d", 100).chosen_sentence == 0);
}

TEST_CASE("textrank degenerate cases") {
  auto single = make_article({{"Jedna", "věta", "."}});
  auto out = textrank_select(single, "d");
  CHECK(out.chosen_sentence == 0);

  // two identical sentences plus an unrelated one: symmetry forces a tie,
  // tie rule picks the first
  auto sym = make_article({{"stejná", "slova", "tady"},
                           {"stejná", "slova", "tady"},
                           {"nic", "jiného", "vůbec"}});
  auto scores = textrank_scores(sym);
  CHECK(scores[0] == doctest::Approx(scores[1]));
  CHECK(textrank_select(sym, "d").chosen_sentence == 0);

  CHECK_THROWS_AS(textrank_select(AnnotatedText{}, "d"), ArgumentError);
}

TEST_CASE("textrank invariants: positive scores summing to N") {
  std::mt19937_64 gen(55);
  for (int trial = 0; trial < 60; ++trial) {
    auto art = random_article(gen, 10);
    auto scores = textrank_scores(art);
    double sum = 0;
    for (double s : scores) {
      CHECK(s > 0.0);
      sum += s;
    }
    CHECK(sum == doctest::Approx(double(scores.size())).epsilon(1e-6));
  }
}

TEST_CASE("textrank matches the dense power-iteration oracle") {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 100; ++trial) {
    auto art = random_article(gen, 8);
    auto got = textrank_scores(art);
    auto expected = dense_textrank(art);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-6));
    std::size_t oracle_best = 0;
    for (std::size_t i = 1; i < expected.size(); ++i)
      if (expected[i] > expected[oracle_best]) oracle_best = i;
    CHECK(textrank_select(art, "d").chosen_sentence == oracle_best);
  }
}

TEST_CASE("all extractive outputs are verbatim sentences of the source") {
  std::mt19937_64 gen(66);
  for (int trial = 0; trial < 60; ++trial) {
    auto art = random_article(gen, 9);
    for (auto out : {select_first(art, "d"), select_random(art, "d", trial),
                     select_ned(art, "d"), textrank_select(art, "d")}) {
      REQUIRE(out.chosen_sentence.has_value());
      auto r = art.sentence_bounds[*out.chosen_sentence];
      std::vector<std::string> sentence(art.tokens.begin() + r.begin,
                                        art.tokens.begin() + r.end);
      CHECK(out.summary_tokens == sentence);
    }
  }
}
