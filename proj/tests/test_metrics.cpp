#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <cmath>
#include <random>

#include "nesum/metrics.hpp"

using namespace nesum;

namespace {

// Clipped n-gram overlap by explicit enumeration over sorted multisets.
Prf brute_force_rouge_n(const std::vector<std::string>& ref,
                        const std::vector<std::string>& cand, std::size_t n) {
  std::map<std::vector<std::string>, long> ref_grams, cand_grams;
  for (std::size_t i = 0; i + n <= ref.size(); ++i)
    ++ref_grams[{ref.begin() + i, ref.begin() + i + n}];
  for (std::size_t i = 0; i + n <= cand.size(); ++i)
    ++cand_grams[{cand.begin() + i, cand.begin() + i + n}];
  long overlap = 0;
  for (const auto& [gram, c] : ref_grams) {
    auto it = cand_grams.find(gram);
    if (it != cand_grams.end()) overlap += std::min(c, it->second);
  }
  long ref_total = ref.size() >= n ? long(ref.size() - n + 1) : 0;
  long cand_total = cand.size() >= n ? long(cand.size() - n + 1) : 0;
  double p = cand_total ? double(overlap) / cand_total : 0.0;
  double r = ref_total ? double(overlap) / ref_total : 0.0;
  return Prf::from_pr(p, r);
}

// Full-table LCS with no shared code with the two-row production version.
std::size_t lcs_table(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                           std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                      : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

std::vector<std::string> random_tokens(std::mt19937_64& gen, std::size_t max_len,
                                       int vocab) {
  std::vector<std::string> out(gen() % (max_len + 1));
  for (auto& t : out) t = "w" + std::to_string(gen() % vocab);
  return out;
}

}  // namespace

TEST_CASE("rouge_raw_n basics") {
  std::vector<std::string> abc = {"a", "b", "c"};
  auto prf = rouge_raw_n(abc, abc, 1);
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == 1.0);
  CHECK(prf.f == 1.0);

  std::vector<std::string> abd = {"a", "b", "d"};
  prf = rouge_raw_n(abd, abc, 1);
  CHECK(prf.precision == doctest::Approx(2.0 / 3));
  CHECK(prf.recall == doctest::Approx(2.0 / 3));
  CHECK(prf.f == doctest::Approx(2.0 / 3));

  // duplicates are clipped
  std::vector<std::string> aab = {"a", "a", "b"};
  std::vector<std::string> aaa = {"a", "a", "a"};
  prf = rouge_raw_n(aab, aaa, 1);
  CHECK(prf.precision == doctest::Approx(2.0 / 3));
  CHECK(prf.recall == doctest::Approx(2.0 / 3));

  CHECK_THROWS_AS(rouge_raw_n(abc, abc, 0), ArgumentError);

  // fewer tokens than n means no n-grams on that side
  prf = rouge_raw_n(abc, {}, 1);
  CHECK(prf.precision == 0.0);
  CHECK(prf.recall == 0.0);
  CHECK(prf.f == 0.0);
  prf = rouge_raw_n(std::vector<std::string>{"a"}, abc, 2);
  CHECK(prf.recall == 0.0);
}

TEST_CASE("rouge_raw_l basics") {
  std::vector<std::string> five = {"a", "b", "c", "d", "e"};
  auto prf = rouge_raw_l(five, five);
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == 1.0);
  CHECK(prf.f == 1.0);

  std::vector<std::string> abcd = {"a", "b", "c", "d"};
  std::vector<std::string> acdb = {"a", "c", "d", "b"};
  prf = rouge_raw_l(abcd, acdb);
  CHECK(prf.precision == doctest::Approx(3.0 / 4));
  CHECK(prf.recall == doctest::Approx(3.0 / 4));

  std::vector<std::string> xyz = {"x", "y", "z"};
  prf = rouge_raw_l(abcd, xyz);
  CHECK(prf.precision == 0.0);
  CHECK(prf.recall == 0.0);
  CHECK(prf.f == 0.0);
}

TEST_CASE("rouge_raw matches brute-force oracles on random pairs") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 500; ++trial) {
    auto ref = random_tokens(gen, 40, 12);
    auto cand = random_tokens(gen, 40, 12);
    for (std::size_t n : {1, 2, 3}) {
      auto got = rouge_raw_n(ref, cand, n);
      auto expected = brute_force_rouge_n(ref, cand, n);
      CHECK(got.precision == expected.precision);
      CHECK(got.recall == expected.recall);
      CHECK(got.f == expected.f);
    }
    auto l = rouge_raw_l(ref, cand);
    std::size_t lcs = lcs_table(ref, cand);
    CHECK(l.precision == (cand.empty() ? 0.0 : double(lcs) / cand.size()));
    CHECK(l.recall == (ref.empty() ? 0.0 : double(lcs) / ref.size()));
  }
}

TEST_CASE("swap symmetry: precision(a,b) == recall(b,a)") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_tokens(gen, 25, 8);
    auto b = random_tokens(gen, 25, 8);
    for (std::size_t n : {1, 2}) {
      CHECK(rouge_raw_n(a, b, n).precision == rouge_raw_n(b, a, n).recall);
      CHECK(rouge_raw_n(a, b, n).recall == rouge_raw_n(b, a, n).precision);
    }
    CHECK(rouge_raw_l(a, b).precision == rouge_raw_l(b, a).recall);
  }
}

TEST_CASE("component ranges and F between min and max") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_tokens(gen, 30, 6);
    auto b = random_tokens(gen, 30, 6);
    for (auto prf : {rouge_raw_n(a, b, 1), rouge_raw_n(a, b, 2), rouge_raw_l(a, b)}) {
      CHECK(prf.precision >= 0.0);
      CHECK(prf.precision <= 1.0);
      CHECK(prf.recall >= 0.0);
      CHECK(prf.recall <= 1.0);
      CHECK(prf.f >= 0.0);
      CHECK(prf.f <= 1.0);
      if (prf.precision > 0 && prf.recall > 0) {
        CHECK(prf.f <= std::max(prf.precision, prf.recall) + 1e-15);
        CHECK(prf.f >= std::min(prf.precision, prf.recall) - 1e-15);
      }
    }
  }
}

TEST_CASE("appending a reference token to the candidate never lowers recall") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto ref = random_tokens(gen, 20, 5);
    if (ref.empty()) continue;
    auto cand = random_tokens(gen, 20, 5);
    double before = rouge_raw_n(ref, cand, 1).recall;
    cand.push_back(ref[gen() % ref.size()]);
    double after = rouge_raw_n(ref, cand, 1).recall;
    CHECK(after >= before);
  }
}

TEST_CASE("entity_view filters B/I tokens in order") {
  std::vector<std::string> tokens = {"Jan", "Novák", "přišel"};
  std::vector<IobTag> tags = {IobTag::begin(EntityType::PersonalNames),
                              IobTag::inside(EntityType::PersonalNames),
                              IobTag::outside()};
  CHECK(entity_view(tokens, tags) == EntityTokenView{"Jan", "Novák"});
  CHECK(entity_view({"a"}, {IobTag::outside()}).empty());
  CHECK_THROWS_AS(entity_view(tokens, {IobTag::outside()}), ArgumentError);

  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = gen() % 50;
    std::vector<std::string> toks(n);
    std::vector<IobTag> tg(n);
    for (std::size_t i = 0; i < n; ++i) {
      toks[i] = "t" + std::to_string(gen() % 9);
      int k = gen() % 3;
      auto type = static_cast<EntityType>(gen() % kEntityTypeCount);
      tg[i] = k == 0 ? IobTag::outside()
                     : (k == 1 ? IobTag::begin(type) : IobTag::inside(type));
    }
    std::vector<std::string> expected;
    for (std::size_t i = 0; i < n; ++i)
      if (tg[i].kind != IobTag::Kind::O) expected.push_back(toks[i]);
    CHECK(entity_view(toks, tg) == expected);
  }
}

TEST_CASE("rouge_ne zero convention and reduction to unigram rouge") {
  EntityTokenView praha = {"Praha"};
  auto prf = rouge_ne(praha, praha);
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == 1.0);
  CHECK(prf.f == 1.0);

  // empty on either side zeroes everything
  prf = rouge_ne({}, praha);
  CHECK(prf.precision == 0.0);
  CHECK(prf.recall == 0.0);
  CHECK(prf.f == 0.0);
  prf = rouge_ne(praha, {});
  CHECK(prf == Prf{});
  prf = rouge_ne({}, {});
  CHECK(prf == Prf{});

  // conventional orientation: precision normalizes by the candidate
  EntityTokenView ref = {"Jan", "Novák"}, cand = {"Novák"};
  prf = rouge_ne(ref, cand);
  CHECK(prf.precision == doctest::Approx(1.0));
  CHECK(prf.recall == doctest::Approx(0.5));
  CHECK(prf.f == doctest::Approx(2.0 / 3));

  // the paper-literal flag transposes the denominators
  auto flipped = rouge_ne(ref, cand, true);
  CHECK(flipped.precision == doctest::Approx(0.5));
  CHECK(flipped.recall == doctest::Approx(1.0));
  CHECK(flipped.f == doctest::Approx(2.0 / 3));
}

TEST_CASE("aggregate averages components and F directly") {
  MetricReport a, b;
  a.rouge1 = Prf::from_pr(0.0, 0.0);
  b.rouge1 = Prf::from_pr(1.0, 1.0);
  a.rouge2 = Prf::from_pr(0.5, 0.5);
  b.rouge2 = Prf::from_pr(0.5, 1.0);
  std::vector<MetricReport> reports = {a, b};
  auto mean = aggregate(reports);
  CHECK(mean.rouge1.precision == doctest::Approx(0.5));
  CHECK(mean.rouge1.f == doctest::Approx(0.5));
  // F averaged directly, not recomputed from mean P/R
  double f_direct = (a.rouge2.f + b.rouge2.f) / 2;
  CHECK(mean.rouge2.f == doctest::Approx(f_direct));
  CHECK(mean.rouge2.f != doctest::Approx(2 * 0.5 * 0.75 / 1.25));

  std::vector<MetricReport> one = {a};
  auto same = aggregate(one);
  CHECK(same.rouge2.precision == a.rouge2.precision);

  CHECK_THROWS_AS(aggregate(std::span<const MetricReport>{}), ArgumentError);
}

TEST_CASE("aggregate matches a two-pass mean oracle on random reports") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<MetricReport> reports(100);
  for (auto& r : reports) {
    for (auto metric : {&MetricReport::rouge1, &MetricReport::rouge2,
                        &MetricReport::rougeL, &MetricReport::rougeNE})
      r.*metric = Prf::from_pr(unit(gen), unit(gen));
  }
  auto mean = aggregate(reports);
  double sum_p = 0;
  for (const auto& r : reports) sum_p += r.rougeL.precision;
  CHECK(mean.rougeL.precision == doctest::Approx(sum_p / reports.size()).epsilon(1e-12));
  double sum_f = 0;
  for (const auto& r : reports) sum_f += r.rougeNE.f;
  CHECK(mean.rougeNE.f == doctest::Approx(sum_f / reports.size()).epsilon(1e-12));
}

TEST_CASE("report JSON shape") {
  MetricReport r;
  r.rouge1 = Prf::from_pr(0.25, 0.5);
  auto js = report_to_json(r);
  CHECK(js.find("\"rouge1\"") != std::string::npos);
  CHECK(js.find("\"rougeNE\"") != std::string::npos);
  CHECK(js.find("0.25") != std::string::npos);
}

TEST_CASE("LCS bounds: below min length, above longest common contiguous run") {
  std::mt19937_64 gen(59);
  for (int trial = 0; trial < 200; ++trial) {
    auto ref = random_tokens(gen, 25, 5);
    auto cand = random_tokens(gen, 25, 5);
    if (ref.empty() || cand.empty()) continue;
    auto prf = rouge_raw_l(ref, cand);
    // recover L from the exact rational r = L / len(ref)
    auto lcs = static_cast<std::size_t>(std::llround(prf.recall * ref.size()));
    CHECK(lcs <= std::min(ref.size(), cand.size()));

    std::size_t longest_run = 0;
    for (std::size_t i = 0; i < ref.size(); ++i)
      for (std::size_t j = 0; j < cand.size(); ++j) {
        std::size_t k = 0;
        while (i + k < ref.size() && j + k < cand.size() &&
               ref[i + k] == cand[j + k])
          ++k;
        longest_run = std::max(longest_run, k);
      }
    CHECK(lcs >= longest_run);
  }
}
