#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "juris/corpus.hpp"
#include "juris/lexical.hpp"
#include "juris/taxonomy.hpp"

namespace juris {

enum class GeneratorMode { kHierarchical, kIndependent };
GeneratorMode generator_mode_from_string(const std::string& name);
std::string to_string(GeneratorMode mode);

enum class Provenance { kFileBacked, kHierarchical, kIndependent };
std::string to_string(Provenance p);

// The inferred latent structure for one query: charge set, element set, and
// the confidence pair feeding v1/v2. Always taxonomy-filtered before it
// leaves this module.
struct IndicatorResult {
  std::set<std::string> charges;
  std::set<std::string> elements;
  double charge_confidence = 0.0;
  double element_confidence = 0.0;
  Provenance provenance = Provenance::kHierarchical;
};

// Multinomial charge model with per-charge element conditionals (hierarchical)
// and a charge-free element marginal (independent). Stands in for the neural
// generator at desk scale; anything producing indicators.jsonl plugs into the
// same pipeline via load_indicators.
struct GeneratorModel {
  GeneratorMode mode = GeneratorMode::kHierarchical;
  TokenizerConfig tokenizer;
  double smoothing_alpha = 1.0;
  int top_k_elements = 6;

  std::map<std::string, double> charge_log_prior;
  // charge -> term -> log P(term | charge); mass for unseen terms below.
  std::map<std::string, std::map<std::string, double>> token_loglik;
  std::map<std::string, double> unseen_loglik;
  // charge -> element -> P(element | charge), smoothed over K_element.
  std::map<std::string, std::map<std::string, double>> element_given_charge;
  std::map<std::string, double> element_marginal;
  std::set<std::string> vocab;

  double token_loglik_for(const std::string& charge, const std::string& term) const;

  std::string to_json_string() const;
  static GeneratorModel from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static GeneratorModel load(const std::string& path);
};

// Fit from labeled documents (docs with empty charges are skipped). Charges
// and elements appearing in labels must already be taxonomy-valid.
GeneratorModel fit_generator(const std::vector<Document>& docs, const Taxonomy& tax,
                             GeneratorMode mode, double smoothing_alpha,
                             int top_k_elements, const TokenizerConfig& cfg);

// log P(c) + sum of token log-likelihoods, per charge.
std::map<std::string, double> charge_log_scores(const GeneratorModel& model,
                                                const std::vector<std::string>& tokens);

// Normalize log scores into a posterior via log-sum-exp. Invariant under
// adding a constant to every score.
std::map<std::string, double> posterior_from_scores(
    const std::map<std::string, double>& log_scores);

IndicatorResult infer(const GeneratorModel& model, const Query& query,
                      const Taxonomy& tax, const TokenizerConfig& cfg);
inline IndicatorResult infer(const GeneratorModel& model, const Query& query,
                             const Taxonomy& tax) {
  return infer(model, query, tax, model.tokenizer);
}

struct IndicatorFile {
  std::map<std::string, IndicatorResult> by_query;
  size_t skipped = 0;  // lines without a qid
};

// indicators.jsonl: {"qid","charges","elements","charge_logprob_mean",
// "element_logprob_mean"}. Confidences are exp(mean log-prob); a missing or
// null logprob means "no usable segment" and maps to confidence 0.
IndicatorFile load_indicators(const std::string& path, const Taxonomy& tax);

void save_indicators(const std::map<std::string, IndicatorResult>& indicators,
                     const std::string& path);

}  // namespace juris
