#include "juris/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "juris/io.hpp"

namespace juris {

void run_in_parallel(size_t count, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const size_t workers = std::min<size_t>(static_cast<size_t>(threads), count);
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ScoredCandidate> score_pool(const Query& query, const RankContext& ctx) {
  if (ctx.index == nullptr || ctx.docs == nullptr || ctx.indicators == nullptr) {
    throw DataError("score_pool: pipeline context incomplete");
  }
  const auto query_terms = tokenize(query.text, ctx.index->tokenizer());

  std::vector<std::string> pool = query.pool;
  if (pool.empty()) {
    if (ctx.fallback_top_k <= 0) {
      throw DataError("query \"" + query.id +
                      "\" has an empty pool and no retrieval fallback is configured");
    }
    for (auto& [doc_id, score] :
         ctx.index->top_k(query_terms, static_cast<size_t>(ctx.fallback_top_k))) {
      (void)score;
      pool.push_back(std::move(doc_id));
    }
    if (pool.empty()) {
      throw DataError("query \"" + query.id +
                      "\" has no lexical overlap with the corpus; cannot build a pool");
    }
  }

  std::map<std::string, double> bm25;
  for (const auto& doc_id : pool) bm25[doc_id] = bm25_score(*ctx.index, query_terms, doc_id);
  const auto norm = normalize_per_query(bm25);

  static const IndicatorResult kEmptyIndicator;
  auto ind_it = ctx.indicators->find(query.id);
  const IndicatorResult& indicator =
      ind_it == ctx.indicators->end() ? kEmptyIndicator : ind_it->second;

  std::vector<ScoredCandidate> out;
  out.reserve(pool.size());
  for (const auto& doc_id : pool) {
    auto doc_it = ctx.docs->find(doc_id);
    if (doc_it == ctx.docs->end()) {
      throw DataError("query \"" + query.id + "\" references unknown document \"" + doc_id +
                      "\"");
    }
    ScoredCandidate cand;
    cand.doc_id = doc_id;
    cand.features = assemble_features(indicator, *doc_it->second, norm.at(doc_id), ctx.epsilon);
    cand.score = ctx.scorer != nullptr ? ctx.scorer->forward(cand.features)
                                       : rule_score(cand.features);
    out.push_back(std::move(cand));
  }
  return out;
}

RankedList rank_query(const Query& query, const RankContext& ctx) {
  std::vector<ScoredDoc> scored;
  for (auto& cand : score_pool(query, ctx)) scored.push_back({cand.doc_id, cand.score});
  return RankedList::from_scores(query.id, std::move(scored));
}

std::vector<RankedList> rank_all(const std::vector<Query>& queries, const RankContext& ctx,
                                 int threads) {
  std::vector<RankedList> out(queries.size());
  run_in_parallel(queries.size(), threads,
                  [&](size_t i) { out[i] = rank_query(queries[i], ctx); });
  return out;
}

std::vector<FeatureRow> collect_feature_rows(const std::vector<Query>& queries,
                                             const RankContext& ctx, const QrelSet* qrels) {
  std::vector<std::vector<FeatureRow>> per_query(queries.size());
  run_in_parallel(queries.size(), 1, [&](size_t i) {
    const Query& query = queries[i];
    for (auto& cand : score_pool(query, ctx)) {
      FeatureRow row;
      row.qid = query.id;
      row.doc_id = cand.doc_id;
      row.v = cand.features;
      row.label = qrels != nullptr && qrels->is_positive(query.id, cand.doc_id) ? 1 : 0;
      per_query[i].push_back(std::move(row));
    }
  });
  std::vector<FeatureRow> out;
  for (auto& rows : per_query) {
    for (auto& row : rows) out.push_back(std::move(row));
  }
  return out;
}

void save_features(const std::vector<FeatureRow>& rows, const std::string& path) {
  std::ostringstream os;
  os << "qid\tdocid\tv1\tv2\tv3\tv4\tv5\tlabel\n";
  for (const auto& row : rows) {
    os << row.qid << "\t" << row.doc_id;
    for (int i = 0; i < FeatureVector::kDim; ++i) os << "\t" << format_double(row.v[i]);
    os << "\t" << row.label << "\n";
  }
  write_file_atomic(path, os.str());
}

std::vector<FeatureRow> load_features(const std::string& path) {
  std::vector<FeatureRow> rows;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    if (line_no == 1 && line.rfind("qid\t", 0) == 0) return;  // header
    auto fields = split_tabs(line);
    if (fields.size() != 8) {
      throw DataError(path, line_no, "expected 8 tab-separated columns");
    }
    FeatureRow row;
    row.qid = fields[0];
    row.doc_id = fields[1];
    try {
      for (int i = 0; i < FeatureVector::kDim; ++i) {
        row.v[i] = std::stod(fields[static_cast<size_t>(2 + i)]);
      }
      row.label = std::stoi(fields[7]);
    } catch (const std::exception&) {
      throw DataError(path, line_no, "malformed numeric field");
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<TrainExample> build_training_pairs(const std::vector<FeatureRow>& rows,
                                               int neg_ratio) {
  if (neg_ratio < 0) throw DataError("build_training_pairs: neg_ratio must be >= 0");
  // Group rows per query, keeping first-seen query order.
  std::vector<std::string> query_order;
  std::map<std::string, std::vector<const FeatureRow*>> by_query;
  for (const auto& row : rows) {
    auto [it, inserted] = by_query.try_emplace(row.qid);
    if (inserted) query_order.push_back(row.qid);
    it->second.push_back(&row);
  }

  std::vector<TrainExample> out;
  for (const auto& qid : query_order) {
    auto& q_rows = by_query[qid];
    std::vector<const FeatureRow*> positives;
    std::vector<const FeatureRow*> negatives;
    for (const auto* row : q_rows) {
      (row->label > 0 ? positives : negatives).push_back(row);
    }
    if (positives.empty()) continue;
    // Hard negatives: highest v5 first (v5 is the per-query-normalized BM25,
    // so this is exactly BM25 order), ties by ascending doc id.
    std::sort(negatives.begin(), negatives.end(),
              [](const FeatureRow* a, const FeatureRow* b) {
                if (a->v.v5 != b->v.v5) return a->v.v5 > b->v.v5;
                return a->doc_id < b->doc_id;
              });
    const size_t want = static_cast<size_t>(neg_ratio) * positives.size();
    if (negatives.size() > want) negatives.resize(want);
    for (const auto* row : positives) out.push_back({row->v, 1.0});
    for (const auto* row : negatives) out.push_back({row->v, 0.0});
  }
  return out;
}

}  // namespace juris
