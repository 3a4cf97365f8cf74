#include "juris/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "juris/io.hpp"
#include "juris/text.hpp"

namespace juris {

using nlohmann::json;

GeneratorMode generator_mode_from_string(const std::string& name) {
  if (name == "hierarchical") return GeneratorMode::kHierarchical;
  if (name == "independent") return GeneratorMode::kIndependent;
  throw DataError("unknown generator mode \"" + name + "\" (expected hierarchical|independent)");
}

std::string to_string(GeneratorMode mode) {
  return mode == GeneratorMode::kHierarchical ? "hierarchical" : "independent";
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kFileBacked: return "file-backed";
    case Provenance::kHierarchical: return "hierarchical";
    case Provenance::kIndependent: return "independent";
  }
  return "hierarchical";
}

double GeneratorModel::token_loglik_for(const std::string& charge,
                                        const std::string& term) const {
  auto cit = token_loglik.find(charge);
  if (cit == token_loglik.end()) return unseen_loglik.at(charge);
  auto tit = cit->second.find(term);
  return tit == cit->second.end() ? unseen_loglik.at(charge) : tit->second;
}

GeneratorModel fit_generator(const std::vector<Document>& docs, const Taxonomy& tax,
                             GeneratorMode mode, double smoothing_alpha,
                             int top_k_elements, const TokenizerConfig& cfg) {
  if (smoothing_alpha <= 0.0) throw DataError("fit_generator: smoothing_alpha must be > 0");
  if (top_k_elements < 1) throw DataError("fit_generator: top_k_elements must be >= 1");
  if (tax.elements.empty()) throw DataError("fit_generator: taxonomy has no elements");

  GeneratorModel model;
  model.mode = mode;
  model.tokenizer = cfg;
  model.smoothing_alpha = smoothing_alpha;
  model.top_k_elements = top_k_elements;

  std::map<std::string, std::map<std::string, long long>> token_counts;
  std::map<std::string, long long> token_totals;
  std::map<std::string, long long> doc_counts;
  std::map<std::string, std::map<std::string, long long>> element_counts;
  std::map<std::string, long long> element_totals;
  std::map<std::string, long long> marginal_counts;
  long long marginal_total = 0;
  long long labeled_docs = 0;

  for (const auto& doc : docs) {
    if (doc.charges.empty()) continue;
    ++labeled_docs;
    auto tokens = tokenize(doc.text, cfg);
    for (const auto& charge : doc.charges) {
      if (!tax.charges.count(charge)) {
        throw DataError("fit_generator: document \"" + doc.id + "\" carries charge \"" +
                        charge + "\" absent from the taxonomy");
      }
      doc_counts[charge] += 1;
      token_totals[charge] += static_cast<long long>(tokens.size());
      auto& per_charge = token_counts[charge];
      for (const auto& t : tokens) {
        per_charge[t] += 1;
        model.vocab.insert(t);
      }
      for (const auto& e : doc.elements) {
        if (!tax.elements.count(e)) {
          throw DataError("fit_generator: document \"" + doc.id + "\" carries element \"" +
                          e + "\" absent from the taxonomy");
        }
        element_counts[charge][e] += 1;
        element_totals[charge] += 1;
      }
    }
    for (const auto& e : doc.elements) {
      marginal_counts[e] += 1;
      marginal_total += 1;
    }
  }
  if (labeled_docs == 0) throw DataError("fit_generator: no labeled documents");

  long long total_doc_labels = 0;
  for (const auto& [charge, n] : doc_counts) total_doc_labels += n;
  const double vocab_slots = static_cast<double>(model.vocab.size()) + 1.0;

  for (const auto& [charge, n] : doc_counts) {
    model.charge_log_prior[charge] =
        std::log(static_cast<double>(n) / static_cast<double>(total_doc_labels));
    const double denom =
        static_cast<double>(token_totals[charge]) + smoothing_alpha * vocab_slots;
    model.unseen_loglik[charge] = std::log(smoothing_alpha / denom);
    auto& out = model.token_loglik[charge];
    for (const auto& [term, count] : token_counts[charge]) {
      out[term] = std::log((static_cast<double>(count) + smoothing_alpha) / denom);
    }
  }

  const double element_slots = static_cast<double>(tax.elements.size());
  for (const auto& [charge, n] : doc_counts) {
    (void)n;
    const double denom =
        static_cast<double>(element_totals[charge]) + smoothing_alpha * element_slots;
    auto& out = model.element_given_charge[charge];
    const auto& counts = element_counts[charge];
    for (const auto& element : tax.elements) {
      auto it = counts.find(element);
      const double count = it == counts.end() ? 0.0 : static_cast<double>(it->second);
      out[element] = (count + smoothing_alpha) / denom;
    }
  }
  {
    const double denom =
        static_cast<double>(marginal_total) + smoothing_alpha * element_slots;
    for (const auto& element : tax.elements) {
      auto it = marginal_counts.find(element);
      const double count = it == marginal_counts.end() ? 0.0 : static_cast<double>(it->second);
      model.element_marginal[element] = (count + smoothing_alpha) / denom;
    }
  }
  return model;
}

std::map<std::string, double> charge_log_scores(const GeneratorModel& model,
                                                const std::vector<std::string>& tokens) {
  std::map<std::string, double> scores;
  for (const auto& [charge, prior] : model.charge_log_prior) {
    double s = prior;
    for (const auto& t : tokens) s += model.token_loglik_for(charge, t);
    scores[charge] = s;
  }
  return scores;
}

std::map<std::string, double> posterior_from_scores(
    const std::map<std::string, double>& log_scores) {
  if (log_scores.empty()) return {};
  double max_score = -std::numeric_limits<double>::infinity();
  for (const auto& [charge, s] : log_scores) max_score = std::max(max_score, s);
  double z = 0.0;
  for (const auto& [charge, s] : log_scores) z += std::exp(s - max_score);
  std::map<std::string, double> posterior;
  for (const auto& [charge, s] : log_scores) posterior[charge] = std::exp(s - max_score) / z;
  return posterior;
}

namespace {

// Top-k by weight, ties by ascending element name.
std::vector<std::pair<std::string, double>> top_elements(
    const std::map<std::string, double>& weights, int k) {
  std::vector<std::pair<std::string, double>> items(weights.begin(), weights.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (items.size() > static_cast<size_t>(k)) items.resize(static_cast<size_t>(k));
  return items;
}

}  // namespace

IndicatorResult infer(const GeneratorModel& model, const Query& query,
                      const Taxonomy& tax, const TokenizerConfig& cfg) {
  IndicatorResult result;
  result.provenance = model.mode == GeneratorMode::kHierarchical
                          ? Provenance::kHierarchical
                          : Provenance::kIndependent;
  if (query.text.empty() || model.charge_log_prior.empty()) return result;

  auto tokens = tokenize(query.text, cfg);
  auto scores = charge_log_scores(model, tokens);
  auto posterior = posterior_from_scores(scores);

  // argmax with lexicographic tie-break: std::map iterates charges in
  // ascending order and ties keep the first.
  std::string best_charge;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& [charge, s] : scores) {
    if (s > best_score) {
      best_score = s;
      best_charge = charge;
    }
  }
  result.charges = {best_charge};
  result.charge_confidence = posterior.at(best_charge);

  const std::map<std::string, double>* element_weights = nullptr;
  if (model.mode == GeneratorMode::kHierarchical) {
    auto it = model.element_given_charge.find(best_charge);
    if (it != model.element_given_charge.end()) element_weights = &it->second;
  } else {
    element_weights = &model.element_marginal;
  }
  if (element_weights != nullptr && !element_weights->empty()) {
    auto selected = top_elements(*element_weights, model.top_k_elements);
    double log_sum = 0.0;
    for (const auto& [element, prob] : selected) {
      result.elements.insert(element);
      log_sum += std::log(prob);
    }
    result.element_confidence =
        std::exp(log_sum / static_cast<double>(selected.size()));
  }

  auto [charges, elements] = filter_valid(result.charges, result.elements, tax);
  result.charges = std::move(charges);
  result.elements = std::move(elements);
  return result;
}

IndicatorFile load_indicators(const std::string& path, const Taxonomy& tax) {
  IndicatorFile out;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    json j = parse_json_line(path, line_no, line);
    auto qid_it = j.find("qid");
    if (qid_it == j.end() || !qid_it->is_string() || qid_it->get<std::string>().empty()) {
      ++out.skipped;
      return;
    }
    const std::string qid = qid_it->get<std::string>();

    IndicatorResult r;
    r.provenance = Provenance::kFileBacked;
    std::set<std::string> raw_charges, raw_elements;
    if (auto it = j.find("charges"); it != j.end() && it->is_array()) {
      for (const auto& c : *it) {
        if (c.is_string()) raw_charges.insert(c.get<std::string>());
      }
    }
    if (auto it = j.find("elements"); it != j.end() && it->is_array()) {
      for (const auto& e : *it) {
        if (e.is_string()) raw_elements.insert(e.get<std::string>());
      }
    }
    auto read_logprob = [&](const char* key) -> double {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) return 0.0;  // no segment -> confidence 0
      if (!it->is_number()) {
        throw DataError(path, line_no, std::string(key) + " must be a number");
      }
      double lp = it->get<double>();
      if (lp > 0.0) {
        throw DataError(path, line_no,
                        std::string(key) + " is " + format_double(lp) +
                            " but log-probabilities cannot exceed 0");
      }
      return std::exp(lp);
    };
    r.charge_confidence = read_logprob("charge_logprob_mean");
    r.element_confidence = read_logprob("element_logprob_mean");

    auto [charges, elements] = filter_valid(raw_charges, raw_elements, tax);
    r.charges = std::move(charges);
    r.elements = std::move(elements);
    out.by_query[qid] = std::move(r);
  });
  return out;
}

void save_indicators(const std::map<std::string, IndicatorResult>& indicators,
                     const std::string& path) {
  std::ostringstream os;
  for (const auto& [qid, r] : indicators) {
    json j;
    j["qid"] = qid;
    j["charges"] = r.charges;
    j["elements"] = r.elements;
    if (r.charge_confidence > 0.0) {
      j["charge_logprob_mean"] = std::log(r.charge_confidence);
    } else {
      j["charge_logprob_mean"] = nullptr;
    }
    if (r.element_confidence > 0.0) {
      j["element_logprob_mean"] = std::log(r.element_confidence);
    } else {
      j["element_logprob_mean"] = nullptr;
    }
    j["provenance"] = to_string(r.provenance);
    os << j.dump() << "\n";
  }
  write_file_atomic(path, os.str());
}

std::string GeneratorModel::to_json_string() const {
  json j;
  j["mode"] = to_string(mode);
  j["tokenizer"] = {{"mode", juris::to_string(tokenizer.mode)},
                    {"lowercase", tokenizer.lowercase}};
  j["smoothing_alpha"] = smoothing_alpha;
  j["top_k_elements"] = top_k_elements;
  j["charge_log_prior"] = charge_log_prior;
  j["token_loglik"] = token_loglik;
  j["unseen_loglik"] = unseen_loglik;
  j["element_given_charge"] = element_given_charge;
  j["element_marginal"] = element_marginal;
  j["vocab"] = vocab;
  return j.dump();
}

GeneratorModel GeneratorModel::from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("malformed generator model JSON");
  GeneratorModel m;
  m.mode = generator_mode_from_string(j.at("mode").get<std::string>());
  m.tokenizer.mode = tokenizer_mode_from_string(j.at("tokenizer").at("mode").get<std::string>());
  m.tokenizer.lowercase = j.at("tokenizer").at("lowercase").get<bool>();
  m.smoothing_alpha = j.at("smoothing_alpha").get<double>();
  m.top_k_elements = j.at("top_k_elements").get<int>();
  m.charge_log_prior = j.at("charge_log_prior").get<std::map<std::string, double>>();
  m.token_loglik =
      j.at("token_loglik").get<std::map<std::string, std::map<std::string, double>>>();
  m.unseen_loglik = j.at("unseen_loglik").get<std::map<std::string, double>>();
  m.element_given_charge =
      j.at("element_given_charge").get<std::map<std::string, std::map<std::string, double>>>();
  m.element_marginal = j.at("element_marginal").get<std::map<std::string, double>>();
  m.vocab = j.at("vocab").get<std::set<std::string>>();
  return m;
}

void GeneratorModel::save(const std::string& path) const {
  write_file_atomic(path, to_json_string());
}

GeneratorModel GeneratorModel::load(const std::string& path) {
  return from_json_string(read_file(path));
}

}  // namespace juris
