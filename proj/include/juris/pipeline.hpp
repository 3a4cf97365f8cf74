#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "juris/corpus.hpp"
#include "juris/eval.hpp"
#include "juris/features.hpp"
#include "juris/inference.hpp"
#include "juris/lexical.hpp"
#include "juris/scorer.hpp"

namespace juris {

// Everything rank_query needs, borrowed by pointer; nothing here owns data.
struct RankContext {
  const InvertedIndex* index = nullptr;
  const std::map<std::string, const Document*>* docs = nullptr;
  const std::map<std::string, IndicatorResult>* indicators = nullptr;
  const ScorerModel* scorer = nullptr;  // null -> rule_score
  double epsilon = kDefaultEpsilon;
  // When a query has no pool, take the BM25 top-k as its pool (0 disables).
  int fallback_top_k = 0;
};

struct ScoredCandidate {
  std::string doc_id;
  FeatureVector features;
  double score = 0.0;
};

// Assemble the five views for every pool candidate (v5 normalized within
// this pool) and score them. Missing indicator entries behave as an empty
// inference (all-zero latent views).
std::vector<ScoredCandidate> score_pool(const Query& query, const RankContext& ctx);

RankedList rank_query(const Query& query, const RankContext& ctx);

// Per-query ranking across a query set; parallel across queries when
// threads > 1, output order always matches input order.
std::vector<RankedList> rank_all(const std::vector<Query>& queries, const RankContext& ctx,
                                 int threads = 1);

// One features.tsv row.
struct FeatureRow {
  std::string qid;
  std::string doc_id;
  FeatureVector v;
  int label = 0;
};

std::vector<FeatureRow> collect_feature_rows(const std::vector<Query>& queries,
                                             const RankContext& ctx, const QrelSet* qrels);

// features.tsv: qid docid v1..v5 label, tab-separated with a header line.
void save_features(const std::vector<FeatureRow>& rows, const std::string& path);
std::vector<FeatureRow> load_features(const std::string& path);

// Paper protocol: per query one positive pool plus BM25-mined hard
// negatives at cfg ratio. BM25 order comes from v5 descending.
std::vector<TrainExample> build_training_pairs(const std::vector<FeatureRow>& rows,
                                               int neg_ratio);

void run_in_parallel(size_t count, int threads, const std::function<void(size_t)>& fn);

}  // namespace juris
