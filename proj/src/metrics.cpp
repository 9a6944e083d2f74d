#include "nesum/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

namespace nesum {

Prf Prf::from_pr(double p, double r) {
  Prf out;
  out.precision = p;
  out.recall = r;
  out.f = (p + r == 0.0) ? 0.0 : 2.0 * p * r / (p + r);
  return out;
}

namespace {

// n-grams keyed by their tokens joined with an unstorable separator (tokens
// never contain whitespace, so '\x1f' cannot collide).
std::unordered_map<std::string, std::size_t> ngram_counts(
    std::span<const std::string> tokens, std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

Prf rouge_raw_n(std::span<const std::string> reference,
                std::span<const std::string> candidate, std::size_t n) {
  if (n == 0) throw ArgumentError("rouge_raw_n requires n >= 1");
  const auto ref_counts = ngram_counts(reference, n);
  const auto cand_counts = ngram_counts(candidate, n);
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  const std::size_t ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;
  const std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  const double p = cand_total ? static_cast<double>(overlap) / cand_total : 0.0;
  const double r = ref_total ? static_cast<double>(overlap) / ref_total : 0.0;
  return Prf::from_pr(p, r);
}

Prf rouge_raw_l(std::span<const std::string> reference,
                std::span<const std::string> candidate) {
  const std::size_t n = reference.size(), m = candidate.size();
  std::size_t lcs = 0;
  if (n && m) {
    // two-row DP over token equality
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= m; ++j) {
        if (reference[i - 1] == candidate[j - 1])
          cur[j] = prev[j - 1] + 1;
        else
          cur[j] = std::max(prev[j], cur[j - 1]);
      }
      std::swap(prev, cur);
    }
    lcs = prev[m];
  }
  const double p = m ? static_cast<double>(lcs) / m : 0.0;
  const double r = n ? static_cast<double>(lcs) / n : 0.0;
  return Prf::from_pr(p, r);
}

EntityTokenView entity_view(const std::vector<std::string>& tokens,
                            const std::vector<IobTag>& tags) {
  if (tokens.size() != tags.size())
    throw ArgumentError("entity_view: tokens and tags differ in length");
  EntityTokenView view;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tags[i].is_entity()) view.push_back(tokens[i]);
  return view;
}

Prf rouge_ne(const EntityTokenView& reference_view,
             const EntityTokenView& candidate_view, bool paper_literal) {
  if (reference_view.empty() || candidate_view.empty()) return Prf{};
  Prf conventional = rouge_raw_n(reference_view, candidate_view, 1);
  if (!paper_literal) return conventional;
  return Prf::from_pr(conventional.recall, conventional.precision);
}

MetricReport aggregate(std::span<const MetricReport> reports) {
  if (reports.empty()) throw ArgumentError("aggregate: empty report stream");
  const double n = static_cast<double>(reports.size());
  MetricReport mean;
  auto acc = [&](Prf MetricReport::*metric, double Prf::*component) {
    double sum = 0.0;
    for (const auto& r : reports) sum += r.*metric.*component;
    mean.*metric.*component = sum / n;
  };
  for (auto metric : {&MetricReport::rouge1, &MetricReport::rouge2,
                      &MetricReport::rougeL, &MetricReport::rougeNE}) {
    acc(metric, &Prf::precision);
    acc(metric, &Prf::recall);
    acc(metric, &Prf::f);
  }
  return mean;
}

std::string report_to_json(const MetricReport& report) {
  nlohmann::json j;
  auto put = [&](const char* name, const Prf& v) {
    j[name] = {{"p", v.precision}, {"r", v.recall}, {"f", v.f}};
  };
  put("rouge1", report.rouge1);
  put("rouge2", report.rouge2);
  put("rougeL", report.rougeL);
  put("rougeNE", report.rougeNE);
  return j.dump();
}

}  // namespace nesum
