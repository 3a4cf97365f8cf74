#include "juris/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "juris/io.hpp"
#include "juris/rng.hpp"

namespace juris {

using nlohmann::json;

RankedList RankedList::from_scores(std::string query_id, std::vector<ScoredDoc> scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  for (size_t i = 1; i < scored.size(); ++i) {
    if (scored[i].doc_id == scored[i - 1].doc_id) {
      throw DataError("ranking for query \"" + query_id + "\" contains duplicate doc id \"" +
                      scored[i].doc_id + "\"");
    }
  }
  RankedList list;
  list.query_id = std::move(query_id);
  list.items = std::move(scored);
  return list;
}

std::vector<std::string> RankedList::doc_ids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.doc_id);
  return out;
}

double average_precision(const RankedList& ranking, const std::set<std::string>& positives) {
  if (positives.empty()) throw DataError("average_precision: empty positive set");
  double sum = 0.0;
  int hits = 0;
  for (size_t i = 0; i < ranking.items.size(); ++i) {
    if (positives.count(ranking.items[i].doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(positives.size());
}

namespace {

int hits_at(const RankedList& ranking, const std::set<std::string>& positives, size_t k) {
  int hits = 0;
  const size_t limit = std::min(k, ranking.items.size());
  for (size_t i = 0; i < limit; ++i) {
    if (positives.count(ranking.items[i].doc_id)) ++hits;
  }
  return hits;
}

double ndcg_at(const RankedList& ranking, const std::map<std::string, int>& graded, size_t k) {
  double dcg = 0.0;
  const size_t limit = std::min(k, ranking.items.size());
  for (size_t i = 0; i < limit; ++i) {
    auto it = graded.find(ranking.items[i].doc_id);
    const double gain = it == graded.end() ? 0.0 : std::pow(2.0, it->second) - 1.0;
    dcg += gain / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> labels;
  labels.reserve(graded.size());
  for (const auto& [doc_id, label] : graded) labels.push_back(label);
  std::sort(labels.rbegin(), labels.rend());
  double idcg = 0.0;
  for (size_t i = 0; i < std::min(k, labels.size()); ++i) {
    idcg += (std::pow(2.0, labels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

}  // namespace

QueryMetrics query_metrics(const RankedList& ranking, const std::set<std::string>& positives,
                           const std::map<std::string, int>& graded) {
  QueryMetrics m;
  const double num_pos = static_cast<double>(positives.size());
  const int h3 = hits_at(ranking, positives, 3);
  const int h5 = hits_at(ranking, positives, 5);
  m.ap = average_precision(ranking, positives);
  m.p3 = static_cast<double>(h3) / 3.0;
  m.r3 = static_cast<double>(h3) / num_pos;
  m.r5 = static_cast<double>(h5) / num_pos;
  m.hits3 = h3 > 0 ? 1.0 : 0.0;
  m.hits5 = h5 > 0 ? 1.0 : 0.0;
  m.mrr5 = 0.0;
  for (size_t i = 0; i < std::min<size_t>(5, ranking.items.size()); ++i) {
    if (positives.count(ranking.items[i].doc_id)) {
      m.mrr5 = 1.0 / static_cast<double>(i + 1);
      break;
    }
  }
  m.ndcg5 = ndcg_at(ranking, graded, 5);
  return m;
}

MetricsReport metrics_suite(const std::vector<RankedList>& rankings, const QrelSet& qrels) {
  MetricsReport report;
  for (const auto& ranking : rankings) {
    const auto& positives = qrels.positives(ranking.query_id);
    if (positives.empty()) {
      ++report.excluded_no_positives;
      continue;
    }
    QueryMetrics m = query_metrics(ranking, positives, qrels.graded(ranking.query_id));
    report.mean.ap += m.ap;
    report.mean.p3 += m.p3;
    report.mean.r3 += m.r3;
    report.mean.r5 += m.r5;
    report.mean.hits3 += m.hits3;
    report.mean.hits5 += m.hits5;
    report.mean.mrr5 += m.mrr5;
    report.mean.ndcg5 += m.ndcg5;
    report.per_query.emplace(ranking.query_id, m);
    ++report.evaluated;
  }
  if (report.evaluated > 0) {
    const double n = static_cast<double>(report.evaluated);
    report.mean.ap /= n;
    report.mean.p3 /= n;
    report.mean.r3 /= n;
    report.mean.r5 /= n;
    report.mean.hits3 /= n;
    report.mean.hits5 /= n;
    report.mean.mrr5 /= n;
    report.mean.ndcg5 /= n;
  }
  return report;
}

namespace {

json metrics_to_json(const QueryMetrics& m) {
  json j;
  j["map"] = m.ap;
  j["p@3"] = m.p3;
  j["r@3"] = m.r3;
  j["r@5"] = m.r5;
  j["hits@3"] = m.hits3;
  j["hits@5"] = m.hits5;
  j["mrr@5"] = m.mrr5;
  j["ndcg@5"] = m.ndcg5;
  return j;
}

}  // namespace

json MetricsReport::to_json() const {
  json j;
  j["num_queries"] = evaluated + excluded_no_positives;
  j["num_evaluated"] = evaluated;
  j["num_excluded_no_positives"] = excluded_no_positives;
  j["mean"] = metrics_to_json(mean);
  json per = json::object();
  for (const auto& [qid, m] : per_query) per[qid] = metrics_to_json(m);
  j["per_query"] = std::move(per);
  return j;
}

double significance_test(const std::vector<double>& per_query_a,
                         const std::vector<double>& per_query_b, int iterations,
                         uint64_t seed) {
  if (per_query_a.size() != per_query_b.size()) {
    throw DataError("significance_test: per-query vectors differ in length");
  }
  if (per_query_a.empty()) throw DataError("significance_test: empty input");
  if (iterations <= 0) throw DataError("significance_test: iterations must be > 0");

  const size_t n = per_query_a.size();
  std::vector<double> diff(n);
  double observed = 0.0;
  for (size_t i = 0; i < n; ++i) {
    diff[i] = per_query_a[i] - per_query_b[i];
    observed += diff[i];
  }
  observed = std::abs(observed / static_cast<double>(n));

  Rng rng = rng_stream(seed, "significance");
  long long at_least = 0;
  for (int it = 0; it < iterations; ++it) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      sum += (rng.next_u64() & 1u) ? diff[i] : -diff[i];
    }
    if (std::abs(sum / static_cast<double>(n)) >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(1 + iterations);
}

std::vector<Document> stratified_subsample(const std::vector<Document>& docs, double ratio,
                                           uint64_t seed) {
  if (ratio <= 0.0 || ratio > 1.0) {
    throw DataError("stratified_subsample: ratio must be in (0, 1]");
  }
  // Strata keyed by primary charge (lexicographically first; charges are
  // stored sorted). Unlabeled documents form their own stratum.
  std::map<std::string, std::vector<size_t>> strata;
  for (size_t i = 0; i < docs.size(); ++i) {
    const std::string key = docs[i].charges.empty() ? std::string() : docs[i].charges.front();
    strata[key].push_back(i);
  }

  std::set<size_t> selected;
  for (auto& [charge, members] : strata) {
    // Canonical intra-stratum order, so the draw is independent of the
    // input permutation.
    std::sort(members.begin(), members.end(), [&docs](size_t a, size_t b) {
      return docs[a].id < docs[b].id;
    });
    const size_t want = static_cast<size_t>(
        std::ceil(ratio * static_cast<double>(members.size())));
    Rng rng = rng_stream(seed, "subsample:" + charge);
    for (size_t idx : rng.sample_without_replacement(members.size(), want)) {
      selected.insert(members[idx]);
    }
  }

  // A charge carried only as a secondary label can still drop out; repair by
  // adding the lexicographically smallest unselected document carrying it.
  std::set<std::string> covered;
  for (size_t i : selected) {
    for (const auto& c : docs[i].charges) covered.insert(c);
  }
  std::map<std::string, size_t> best_for_charge;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (selected.count(i)) continue;
    for (const auto& c : docs[i].charges) {
      if (covered.count(c)) continue;
      auto it = best_for_charge.find(c);
      if (it == best_for_charge.end() || docs[i].id < docs[it->second].id) {
        best_for_charge[c] = i;
      }
    }
  }
  for (const auto& [charge, i] : best_for_charge) {
    if (!covered.count(charge)) {
      selected.insert(i);
      for (const auto& c : docs[i].charges) covered.insert(c);
    }
  }

  std::vector<Document> out;
  out.reserve(selected.size());
  for (size_t i = 0; i < docs.size(); ++i) {
    if (selected.count(i)) out.push_back(docs[i]);
  }
  return out;
}

std::vector<RankedList> load_run(const std::string& path) {
  std::map<std::string, std::vector<ScoredDoc>> by_query;
  std::vector<std::string> order;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    std::istringstream ss(line);
    std::string qid, doc_id, score_text;
    if (!(ss >> qid >> doc_id >> score_text)) {
      throw DataError(path, line_no, "expected qid docid score");
    }
    double score = 0.0;
    try {
      size_t consumed = 0;
      score = std::stod(score_text, &consumed);
      if (consumed != score_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(path, line_no, "non-numeric score \"" + score_text + "\"");
    }
    if (!by_query.count(qid)) order.push_back(qid);
    by_query[qid].push_back({doc_id, score});
  });
  std::vector<RankedList> out;
  out.reserve(order.size());
  for (const auto& qid : order) {
    out.push_back(RankedList::from_scores(qid, std::move(by_query[qid])));
  }
  return out;
}

void save_run(const std::vector<RankedList>& rankings, const std::string& path) {
  std::ostringstream os;
  for (const auto& ranking : rankings) {
    for (const auto& item : ranking.items) {
      os << ranking.query_id << "\t" << item.doc_id << "\t" << format_double(item.score)
         << "\n";
    }
  }
  write_file_atomic(path, os.str());
}

}  // namespace juris
