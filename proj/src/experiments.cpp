#include "juris/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "juris/io.hpp"
#include "juris/rng.hpp"

namespace juris {

AblationVariant ablation_variant_from_string(const std::string& name) {
  if (name == "full") return AblationVariant::kFull;
  if (name == "w/o-lexical" || name == "wo-lexical") return AblationVariant::kWithoutLexical;
  if (name == "w/o-charge" || name == "wo-charge") return AblationVariant::kWithoutCharge;
  if (name == "w/o-element" || name == "wo-element") return AblationVariant::kWithoutElement;
  if (name == "only-lexical") return AblationVariant::kOnlyLexical;
  if (name == "only-charge") return AblationVariant::kOnlyCharge;
  if (name == "only-element") return AblationVariant::kOnlyElement;
  if (name == "rule-based") return AblationVariant::kRuleBased;
  if (name == "independent-generation") return AblationVariant::kIndependentGeneration;
  if (name == "file-backed-off") return AblationVariant::kFileBackedOff;
  throw DataError("unknown ablation variant \"" + name + "\"");
}

std::string to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kWithoutLexical: return "w/o-lexical";
    case AblationVariant::kWithoutCharge: return "w/o-charge";
    case AblationVariant::kWithoutElement: return "w/o-element";
    case AblationVariant::kOnlyLexical: return "only-lexical";
    case AblationVariant::kOnlyCharge: return "only-charge";
    case AblationVariant::kOnlyElement: return "only-element";
    case AblationVariant::kRuleBased: return "rule-based";
    case AblationVariant::kIndependentGeneration: return "independent-generation";
    case AblationVariant::kFileBackedOff: return "file-backed-off";
  }
  return "full";
}

std::vector<AblationVariant> all_ablation_variants() {
  return {AblationVariant::kFull,
          AblationVariant::kWithoutLexical,
          AblationVariant::kWithoutCharge,
          AblationVariant::kWithoutElement,
          AblationVariant::kOnlyLexical,
          AblationVariant::kOnlyCharge,
          AblationVariant::kOnlyElement,
          AblationVariant::kRuleBased,
          AblationVariant::kIndependentGeneration,
          AblationVariant::kFileBackedOff};
}

namespace {

std::vector<int> masked_features(AblationVariant v) {
  switch (v) {
    case AblationVariant::kWithoutLexical: return {4};
    case AblationVariant::kWithoutCharge: return {0, 2};
    case AblationVariant::kWithoutElement: return {1, 3};
    case AblationVariant::kOnlyCharge: return {1, 3, 4};
    case AblationVariant::kOnlyElement: return {0, 2, 4};
    default: return {};
  }
}

void apply_mask(std::vector<FeatureRow>& rows, const std::vector<int>& mask,
                const FeatureVector& baseline) {
  for (auto& row : rows) {
    for (int i : mask) row.v[i] = baseline[i];
  }
}

FeatureVector mean_of_rows(const std::vector<FeatureRow>& rows) {
  FeatureVector mean;
  if (rows.empty()) return mean;
  for (const auto& row : rows) {
    for (int i = 0; i < FeatureVector::kDim; ++i) mean[i] += row.v[i];
  }
  for (int i = 0; i < FeatureVector::kDim; ++i) {
    mean[i] /= static_cast<double>(rows.size());
  }
  return mean;
}

}  // namespace

MetricsReport run_ablation(AblationVariant variant, const AblationInputs& in) {
  if (in.train_queries == nullptr || in.eval_queries == nullptr || in.qrels == nullptr ||
      in.index == nullptr || in.docs == nullptr) {
    throw DataError("run_ablation: inputs incomplete");
  }
  const std::map<std::string, IndicatorResult>* indicators = in.indicators_primary;
  if (variant == AblationVariant::kIndependentGeneration) {
    indicators = in.indicators_independent;
    if (indicators == nullptr) {
      throw DataError("run_ablation: independent-generation needs independent indicators");
    }
  } else if (variant == AblationVariant::kFileBackedOff) {
    indicators = in.indicators_builtin;
    if (indicators == nullptr) {
      throw DataError("run_ablation: file-backed-off needs built-in generator indicators");
    }
  }
  if (indicators == nullptr) throw DataError("run_ablation: no indicator source");

  RankContext ctx;
  ctx.index = in.index;
  ctx.docs = in.docs;
  ctx.indicators = indicators;
  ctx.scorer = nullptr;
  ctx.epsilon = in.epsilon;
  ctx.fallback_top_k = in.fallback_top_k;

  auto train_rows = collect_feature_rows(*in.train_queries, ctx, in.qrels);
  auto eval_rows = collect_feature_rows(*in.eval_queries, ctx, in.qrels);

  const auto mask = masked_features(variant);
  if (!mask.empty()) {
    const FeatureVector baseline = mean_of_rows(train_rows);
    apply_mask(train_rows, mask, baseline);
    apply_mask(eval_rows, mask, baseline);
  }

  std::function<double(const FeatureVector&)> score;
  ScorerModel model;
  if (variant == AblationVariant::kRuleBased) {
    score = [](const FeatureVector& v) { return rule_score(v); };
  } else if (variant == AblationVariant::kOnlyLexical) {
    score = [](const FeatureVector& v) { return v.v5; };
  } else {
    auto pairs = build_training_pairs(train_rows, in.train.neg_ratio);
    model = train_scorer(pairs, in.train).model;
    score = [&model](const FeatureVector& v) { return model.forward(v); };
  }

  std::map<std::string, std::vector<ScoredDoc>> by_query;
  for (const auto& row : eval_rows) {
    by_query[row.qid].push_back({row.doc_id, score(row.v)});
  }
  std::vector<RankedList> rankings;
  rankings.reserve(by_query.size());
  for (auto& [qid, scored] : by_query) {
    rankings.push_back(RankedList::from_scores(qid, std::move(scored)));
  }
  return metrics_suite(rankings, *in.qrels);
}

std::pair<std::vector<Query>, std::vector<Query>> split_queries(
    const std::vector<Query>& queries, double train_fraction, uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw DataError("split_queries: train_fraction must be in (0, 1)");
  }
  std::vector<size_t> order(queries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = rng_stream(seed, "query-split");
  rng.shuffle(order);
  size_t n_train = static_cast<size_t>(
      std::floor(train_fraction * static_cast<double>(queries.size())));
  n_train = std::max<size_t>(1, std::min(n_train, queries.size() - 1));
  std::vector<Query> train, eval;
  for (size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train : eval).push_back(queries[order[i]]);
  }
  return {std::move(train), std::move(eval)};
}

std::map<std::string, IndicatorResult> infer_all(const GeneratorModel& model,
                                                 const std::vector<Query>& queries,
                                                 const Taxonomy& tax, int threads) {
  std::vector<IndicatorResult> results(queries.size());
  run_in_parallel(queries.size(), threads,
                  [&](size_t i) { results[i] = infer(model, queries[i], tax); });
  std::map<std::string, IndicatorResult> out;
  for (size_t i = 0; i < queries.size(); ++i) out[queries[i].id] = std::move(results[i]);
  return out;
}

std::vector<SweepRow> run_sweep(std::vector<double> ratios, const SweepInputs& in) {
  if (in.corpus == nullptr || in.docs == nullptr || in.train_queries == nullptr ||
      in.eval_queries == nullptr || in.qrels == nullptr || in.taxonomy == nullptr ||
      in.index == nullptr) {
    throw DataError("run_sweep: inputs incomplete");
  }
  if (ratios.empty()) throw DataError("run_sweep: no ratios given");
  std::sort(ratios.begin(), ratios.end());

  std::vector<Document> labeled;
  for (const auto& doc : *in.corpus) {
    if (!doc.charges.empty()) labeled.push_back(doc);
  }
  if (labeled.empty()) throw DataError("run_sweep: corpus has no labeled documents");

  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    auto subset = stratified_subsample(labeled, ratio, in.seed);
    GeneratorModel gen = fit_generator(subset, *in.taxonomy, in.mode, in.smoothing_alpha,
                                       in.top_k_elements, in.tokenizer);

    std::vector<Query> all_queries = *in.train_queries;
    all_queries.insert(all_queries.end(), in.eval_queries->begin(), in.eval_queries->end());
    auto indicators = infer_all(gen, all_queries, *in.taxonomy, in.threads);

    RankContext ctx;
    ctx.index = in.index;
    ctx.docs = in.docs;
    ctx.indicators = &indicators;
    ctx.epsilon = in.epsilon;
    ctx.fallback_top_k = in.fallback_top_k;

    auto train_rows = collect_feature_rows(*in.train_queries, ctx, in.qrels);
    auto pairs = build_training_pairs(train_rows, in.train.neg_ratio);
    ScorerModel model = train_scorer(pairs, in.train).model;
    ctx.scorer = &model;

    auto rankings = rank_all(*in.eval_queries, ctx, in.threads);
    MetricsReport report = metrics_suite(rankings, *in.qrels);

    SweepRow row;
    row.ratio = ratio;
    row.train_docs = static_cast<int>(subset.size());
    row.mean = report.mean;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "ratio\ttrain_docs\tMAP\tP@3\tR@5\tHits@5\tMRR@5\n";
  for (const auto& row : rows) {
    os << format_fixed(row.ratio, 2) << "\t" << row.train_docs << "\t"
       << format_fixed(row.mean.ap, 6) << "\t" << format_fixed(row.mean.p3, 6) << "\t"
       << format_fixed(row.mean.r5, 6) << "\t" << format_fixed(row.mean.hits5, 6) << "\t"
       << format_fixed(row.mean.mrr5, 6) << "\n";
  }
  return os.str();
}

}  // namespace juris
