#pragma once

// Independent brute-force oracles: direct transcriptions of the metric,
// BM25, and Shapley definitions. These deliberately share no code with the
// library implementations they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "juris/features.hpp"

namespace juris::testing {

struct OracleMetrics {
  double ap = 0.0, p3 = 0.0, r3 = 0.0, r5 = 0.0, hits3 = 0.0, hits5 = 0.0, mrr5 = 0.0;
};

// ranking: ordered doc ids, best first. positives: the relevant set.
inline OracleMetrics oracle_metrics(const std::vector<std::string>& ranking,
                                    const std::set<std::string>& positives) {
  OracleMetrics m;

  // AP: for every relevant document, precision at its rank (0 when not
  // retrieved), averaged over |positives|.
  double ap_sum = 0.0;
  for (const auto& pos : positives) {
    size_t rank = 0;
    bool found = false;
    for (size_t i = 0; i < ranking.size(); ++i) {
      if (ranking[i] == pos) {
        rank = i + 1;
        found = true;
        break;
      }
    }
    if (!found) continue;
    size_t rel_at_or_before = 0;
    for (size_t i = 0; i < rank; ++i) {
      if (positives.count(ranking[i])) ++rel_at_or_before;
    }
    ap_sum += static_cast<double>(rel_at_or_before) / static_cast<double>(rank);
  }
  m.ap = ap_sum / static_cast<double>(positives.size());

  auto count_in_top = [&](size_t k) {
    size_t n = 0;
    for (size_t i = 0; i < ranking.size() && i < k; ++i) {
      if (positives.count(ranking[i])) ++n;
    }
    return n;
  };
  m.p3 = static_cast<double>(count_in_top(3)) / 3.0;
  m.r3 = static_cast<double>(count_in_top(3)) / static_cast<double>(positives.size());
  m.r5 = static_cast<double>(count_in_top(5)) / static_cast<double>(positives.size());
  m.hits3 = count_in_top(3) > 0 ? 1.0 : 0.0;
  m.hits5 = count_in_top(5) > 0 ? 1.0 : 0.0;
  for (size_t i = 0; i < ranking.size() && i < 5; ++i) {
    if (positives.count(ranking[i])) {
      m.mrr5 = 1.0 / static_cast<double>(i + 1);
      break;
    }
  }
  return m;
}

// Okapi BM25 recomputed from raw token streams.
inline double oracle_bm25(const std::vector<std::vector<std::string>>& doc_tokens,
                          size_t doc_index, const std::vector<std::string>& query_terms,
                          double k1, double b) {
  const double n_docs = static_cast<double>(doc_tokens.size());
  double total_len = 0.0;
  for (const auto& toks : doc_tokens) total_len += static_cast<double>(toks.size());
  const double avgdl = total_len / n_docs;
  const double dl = static_cast<double>(doc_tokens[doc_index].size());

  std::set<std::string> unique(query_terms.begin(), query_terms.end());
  double score = 0.0;
  for (const auto& term : unique) {
    double df = 0.0;
    for (const auto& toks : doc_tokens) {
      if (std::find(toks.begin(), toks.end(), term) != toks.end()) df += 1.0;
    }
    double tf = 0.0;
    for (const auto& tok : doc_tokens[doc_index]) {
      if (tok == term) tf += 1.0;
    }
    if (tf == 0.0) continue;
    const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    const double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
    score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
  }
  return score;
}

// Shapley via full permutation enumeration (5! = 120 orderings).
inline std::array<double, 5> oracle_shapley_permutations(
    const std::function<double(const FeatureVector&)>& f, const FeatureVector& v,
    const FeatureVector& baseline) {
  std::array<int, 5> perm{0, 1, 2, 3, 4};
  std::array<double, 5> phi{};
  int count = 0;
  std::sort(perm.begin(), perm.end());
  do {
    FeatureVector current = baseline;
    double prev = f(current);
    for (int idx : perm) {
      current[idx] = v[idx];
      const double now = f(current);
      phi[idx] += now - prev;
      prev = now;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& p : phi) p /= static_cast<double>(count);
  return phi;
}

}  // namespace juris::testing
