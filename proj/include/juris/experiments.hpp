#pragma once

#include <map>
#include <string>
#include <vector>

#include "juris/eval.hpp"
#include "juris/pipeline.hpp"

namespace juris {

// Feature-group and architecture ablations. The feature groups follow the
// scorer's input taxonomy: lexical = {v5}, charge = {v1, v3},
// element = {v2, v4}.
enum class AblationVariant {
  kFull,
  kWithoutLexical,
  kWithoutCharge,
  kWithoutElement,
  kOnlyLexical,
  kOnlyCharge,
  kOnlyElement,
  kRuleBased,
  kIndependentGeneration,
  kFileBackedOff,
};

AblationVariant ablation_variant_from_string(const std::string& name);
std::string to_string(AblationVariant v);
std::vector<AblationVariant> all_ablation_variants();

struct AblationInputs {
  const std::vector<Query>* train_queries = nullptr;
  const std::vector<Query>* eval_queries = nullptr;
  const QrelSet* qrels = nullptr;
  const InvertedIndex* index = nullptr;
  const std::map<std::string, const Document*>* docs = nullptr;
  // Indicator sources. primary is whatever the full model runs with
  // (file-backed when available, else the built-in generator); builtin and
  // independent are used by the file-backed-off / independent-generation
  // variants.
  const std::map<std::string, IndicatorResult>* indicators_primary = nullptr;
  const std::map<std::string, IndicatorResult>* indicators_builtin = nullptr;
  const std::map<std::string, IndicatorResult>* indicators_independent = nullptr;
  TrainConfig train;
  double epsilon = kDefaultEpsilon;
  int fallback_top_k = 0;
  int threads = 1;
};

// Masked features are frozen to their training-set mean (computed before
// masking), the scorer is retrained on the variant's training pairs, and
// the eval split is re-ranked. only-lexical ranks by v5 directly — the
// plain BM25 ordering — and rule-based scores the unmasked vector with the
// unweighted sum; neither trains.
MetricsReport run_ablation(AblationVariant variant, const AblationInputs& in);

// Deterministic shuffle-split of queries into train/eval.
std::pair<std::vector<Query>, std::vector<Query>> split_queries(
    const std::vector<Query>& queries, double train_fraction, uint64_t seed);

std::map<std::string, IndicatorResult> infer_all(const GeneratorModel& model,
                                                 const std::vector<Query>& queries,
                                                 const Taxonomy& tax, int threads = 1);

struct SweepInputs {
  const std::vector<Document>* corpus = nullptr;  // full labeled corpus
  const std::map<std::string, const Document*>* docs = nullptr;
  const std::vector<Query>* train_queries = nullptr;
  const std::vector<Query>* eval_queries = nullptr;
  const QrelSet* qrels = nullptr;
  const Taxonomy* taxonomy = nullptr;
  const InvertedIndex* index = nullptr;  // built over the full corpus
  GeneratorMode mode = GeneratorMode::kHierarchical;
  double smoothing_alpha = 1.0;
  int top_k_elements = 6;
  TokenizerConfig tokenizer;
  TrainConfig train;
  double epsilon = kDefaultEpsilon;
  int fallback_top_k = 0;
  int threads = 1;
  uint64_t seed = 42;
};

struct SweepRow {
  double ratio = 1.0;
  int train_docs = 0;
  QueryMetrics mean;
};

// Data-efficiency protocol: per ratio (ascending), stratified-subsample the
// labeled documents, refit the generator, re-infer, retrain the scorer, and
// evaluate. The retrieval index stays fixed on the full corpus.
std::vector<SweepRow> run_sweep(std::vector<double> ratios, const SweepInputs& in);

// Table 7-style layout: ratio, MAP, P@3, R@5, Hits@5, MRR@5.
std::string sweep_table(const std::vector<SweepRow>& rows);

}  // namespace juris
