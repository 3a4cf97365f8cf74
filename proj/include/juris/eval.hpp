#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "juris/corpus.hpp"

namespace juris {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

// Candidates in final order: descending score, ties broken by ascending
// doc id. Construction enforces the ordering and rejects duplicate ids.
struct RankedList {
  std::string query_id;
  std::vector<ScoredDoc> items;

  static RankedList from_scores(std::string query_id, std::vector<ScoredDoc> scored);
  std::vector<std::string> doc_ids() const;
};

struct QueryMetrics {
  double ap = 0.0;
  double p3 = 0.0;
  double r3 = 0.0;
  double r5 = 0.0;
  double hits3 = 0.0;
  double hits5 = 0.0;
  double mrr5 = 0.0;
  double ndcg5 = 0.0;  // optional extra, graded gains
};

struct MetricsReport {
  std::map<std::string, QueryMetrics> per_query;
  QueryMetrics mean;
  int evaluated = 0;
  int excluded_no_positives = 0;  // zero-positive queries, excluded from means

  nlohmann::json to_json() const;
};

// Mean precision at each relevant hit, divided by |positives|. Positives
// missing from the ranking contribute zero. positives must be nonempty.
double average_precision(const RankedList& ranking, const std::set<std::string>& positives);

QueryMetrics query_metrics(const RankedList& ranking, const std::set<std::string>& positives,
                           const std::map<std::string, int>& graded);

// Per-query metrics plus arithmetic means over queries with at least one
// positive judgment (zero-positive queries are counted and excluded).
MetricsReport metrics_suite(const std::vector<RankedList>& rankings, const QrelSet& qrels);

// Paired sign-flip randomization test on the mean difference, smoothed:
// p = (1 + #{|permuted| >= |observed|}) / (1 + iterations).
double significance_test(const std::vector<double>& per_query_a,
                         const std::vector<double>& per_query_b, int iterations,
                         uint64_t seed);

// Per-charge sampling without replacement of ceil(ratio * class size)
// documents. Every charge present in the input survives in the output.
// Output preserves input order.
std::vector<Document> stratified_subsample(const std::vector<Document>& docs, double ratio,
                                           uint64_t seed);

// run.tsv: qid <TAB> docid <TAB> score.
std::vector<RankedList> load_run(const std::string& path);
void save_run(const std::vector<RankedList>& rankings, const std::string& path);

}  // namespace juris
