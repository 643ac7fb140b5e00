#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fednlp/classifier.hpp"
#include "fednlp/corpus.hpp"
#include "fednlp/text.hpp"

namespace fednlp {

struct ExplainConfig {
  std::size_t n_samples = 1000;
  std::optional<double> kernel_width;  // default 0.75 * sqrt(distinct tokens)
  double ridge_lambda = 1.0;
  std::size_t top_k = 10;
  std::uint64_t seed = 42;
  // All 2^m masks are enumerated instead of sampled when the document has at
  // most this many distinct tokens.
  std::size_t exhaustive_max_tokens = 12;

  void validate() const;
};

struct TokenWeight {
  std::string token;
  double weight = 0.0;
};

struct Explanation {
  RateDecision target_class = RateDecision::Maintain;
  std::vector<TokenWeight> feature_weights;  // descending |weight|, at most top_k
  double intercept = 0.0;
  double local_fidelity_r2 = 1.0;
  std::vector<double> sentence_highlights;  // one per sentence, in [0, 1]
  std::size_t samples_used = 0;
  bool exhaustive = false;
  bool degenerate = false;  // the model output was constant over all samples
};

// Interpretable representation: mask[j] == 1 keeps distinct token j.
using Mask = std::vector<std::uint8_t>;

// First mask keeps everything; the remaining n - 1 are uniform over subsets.
// Mask i depends only on (seed, i).
std::vector<Mask> perturbation_samples(std::size_t n_tokens, std::size_t n, std::uint64_t seed);

// All 2^n_tokens masks with the all-ones mask first. n_tokens must be <= 20.
std::vector<Mask> exhaustive_masks(std::size_t n_tokens);

// exp(-d^2 / width^2), d the cosine distance from the all-ones mask.
double kernel_weight(const Mask& mask, double width);

struct SurrogateFit {
  std::vector<double> weights;
  double intercept = 0.0;
  double r2 = 1.0;
  bool degenerate = false;
};

// Weighted ridge regression with an unpenalized intercept.
SurrogateFit fit_weighted_ridge(std::span<const Mask> masks, std::span<const double> targets,
                                std::span<const double> sample_weights, double lambda);

// Black-box scorer over token sequences.
using TextClassifier = std::function<ClassScores(std::span<const std::string> tokens)>;

Explanation explain(const TextClassifier& classifier, const TokenizedDoc& doc, RateDecision target,
                    const ExplainConfig& cfg = {});
Explanation explain(const GbdtModel& model, const TokenizedDoc& doc, RateDecision target,
                    const ExplainConfig& cfg = {});
// Explains the model's predicted class.
Explanation explain(const GbdtModel& model, const TokenizedDoc& doc, const ExplainConfig& cfg = {});
Explanation explain(const GbdtModel& model, const Document& doc, RateDecision target, const ExplainConfig& cfg = {});

void to_json(nlohmann::json& j, const Explanation& e);

}  // namespace fednlp
