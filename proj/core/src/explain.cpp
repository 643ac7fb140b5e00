#include "fednlp/explain.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/random.hpp"

namespace fednlp {

void ExplainConfig::validate() const {
  if (n_samples == 0) throw InvalidArgument("n_samples must be positive");
  if (kernel_width && !(*kernel_width > 0.0)) throw InvalidArgument("kernel_width must be positive");
  if (!(ridge_lambda > 0.0)) throw InvalidArgument("ridge_lambda must be positive");
  if (top_k == 0) throw InvalidArgument("top_k must be positive");
  if (exhaustive_max_tokens > 20) throw InvalidArgument("exhaustive_max_tokens must be <= 20");
}

std::vector<Mask> perturbation_samples(std::size_t n_tokens, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample count must be positive");
  std::vector<Mask> masks;
  masks.reserve(n);
  masks.emplace_back(n_tokens, std::uint8_t{1});
  for (std::size_t i = 1; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    Mask m(n_tokens);
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < n_tokens; ++j) {
      if (j % 64 == 0) bits = rng.next();
      m[j] = static_cast<std::uint8_t>(bits & 1u);
      bits >>= 1;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<Mask> exhaustive_masks(std::size_t n_tokens) {
  if (n_tokens > 20) throw InvalidArgument("exhaustive enumeration limited to 20 tokens");
  const std::size_t total = std::size_t{1} << n_tokens;
  std::vector<Mask> masks;
  masks.reserve(total);
  // Enumerate removal sets: code 0 removes nothing, so all-ones comes first.
  for (std::size_t code = 0; code < total; ++code) {
    Mask m(n_tokens);
    for (std::size_t j = 0; j < n_tokens; ++j) m[j] = ((code >> j) & 1u) ? 0 : 1;
    masks.push_back(std::move(m));
  }
  return masks;
}

double kernel_weight(const Mask& mask, double width) {
  if (mask.empty()) return 1.0;
  std::size_t kept = 0;
  for (auto b : mask) kept += b;
  // cos(z, 1) = |z| / (sqrt(|z|) sqrt(m)) for a binary z.
  const double cosine = kept ? std::sqrt(static_cast<double>(kept) / static_cast<double>(mask.size())) : 0.0;
  const double d = 1.0 - cosine;
  return std::exp(-(d * d) / (width * width));
}

SurrogateFit fit_weighted_ridge(std::span<const Mask> masks, std::span<const double> targets,
                                std::span<const double> sample_weights, double lambda) {
  const auto n = masks.size();
  if (n == 0 || targets.size() != n || sample_weights.size() != n) {
    throw InvalidArgument("surrogate fit needs matching, nonempty samples");
  }
  const auto m = masks.front().size();
  SurrogateFit fit;
  fit.weights.assign(m, 0.0);

  double wsum = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += sample_weights[i];
    ybar += sample_weights[i] * targets[i];
  }
  ybar /= wsum;
  const auto [ymin, ymax] = std::minmax_element(targets.begin(), targets.end());
  if (*ymin == *ymax) {
    fit.intercept = *ymin;
    fit.r2 = 1.0;
    fit.degenerate = true;
    return fit;
  }

  Eigen::VectorXd xbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (masks[i][j]) xbar[static_cast<Eigen::Index>(j)] += sample_weights[i];
    }
  }
  xbar /= wsum;

  // Centering by weighted means removes the unpenalized intercept exactly.
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < n; ++i) {
    const double sw = std::sqrt(sample_weights[i]);
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      a(r, c) = sw * ((masks[i][j] ? 1.0 : 0.0) - xbar[c]);
    }
    b[r] = sw * (targets[i] - ybar);
  }

  Eigen::VectorXd beta;
  if (m <= n) {
    Eigen::MatrixXd gram = a.transpose() * a;
    gram.diagonal().array() += lambda;
    beta = gram.llt().solve(a.transpose() * b);
  } else {
    Eigen::MatrixXd gram = a * a.transpose();
    gram.diagonal().array() += lambda;
    beta = a.transpose() * gram.llt().solve(b);
  }
  for (std::size_t j = 0; j < m; ++j) fit.weights[j] = beta[static_cast<Eigen::Index>(j)];
  fit.intercept = ybar - xbar.dot(beta);

  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double yhat = fit.intercept;
    for (std::size_t j = 0; j < m; ++j) {
      if (masks[i][j]) yhat += fit.weights[j];
    }
    ss_res += sample_weights[i] * (targets[i] - yhat) * (targets[i] - yhat);
    ss_tot += sample_weights[i] * (targets[i] - ybar) * (targets[i] - ybar);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

struct DistinctTokens {
  std::vector<std::string> tokens;  // ascending
  std::vector<std::size_t> index_of_position;  // token position -> distinct index
};

DistinctTokens distinct_tokens(const TokenizedDoc& doc) {
  DistinctTokens d;
  d.tokens = doc.tokens;
  std::sort(d.tokens.begin(), d.tokens.end());
  d.tokens.erase(std::unique(d.tokens.begin(), d.tokens.end()), d.tokens.end());
  d.index_of_position.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    const auto it = std::lower_bound(d.tokens.begin(), d.tokens.end(), t);
    d.index_of_position.push_back(static_cast<std::size_t>(it - d.tokens.begin()));
  }
  return d;
}

template <class MaskedProbability>
Explanation explain_masked(const TokenizedDoc& doc, const DistinctTokens& distinct, MaskedProbability&& probability,
                           RateDecision target, const ExplainConfig& cfg) {
  const auto m = distinct.tokens.size();
  Explanation ex;
  ex.target_class = target;
  ex.exhaustive = m <= cfg.exhaustive_max_tokens;
  const auto masks = ex.exhaustive ? exhaustive_masks(m) : perturbation_samples(m, cfg.n_samples, cfg.seed);
  ex.samples_used = masks.size();

  const double width = cfg.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(m)));
  std::vector<double> targets(masks.size()), weights(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    targets[i] = probability(masks[i]);
    weights[i] = kernel_weight(masks[i], width);
  }

  const auto fit = fit_weighted_ridge(masks, targets, weights, cfg.ridge_lambda);
  ex.intercept = fit.intercept;
  ex.local_fidelity_r2 = fit.r2;
  ex.degenerate = fit.degenerate;

  std::vector<std::size_t> order(m);
  for (std::size_t j = 0; j < m; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double wa = std::abs(fit.weights[a]), wb = std::abs(fit.weights[b]);
    return wa != wb ? wa > wb : a < b;
  });
  order.resize(std::min(cfg.top_k, m));
  std::vector<double> supporting(m, 0.0);
  for (auto j : order) {
    ex.feature_weights.push_back({distinct.tokens[j], fit.weights[j]});
    if (fit.weights[j] > 0.0) supporting[j] = fit.weights[j];
  }

  ex.sentence_highlights.assign(doc.sentences.size(), 0.0);
  std::vector<std::size_t> seen_in(m, SIZE_MAX);
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    double total = 0.0;
    for (std::size_t p = doc.sentences[s].begin; p < doc.sentences[s].end; ++p) {
      const auto j = distinct.index_of_position[p];
      if (seen_in[j] == s) continue;
      seen_in[j] = s;
      total += supporting[j];
    }
    ex.sentence_highlights[s] = total;
  }
  const double top = ex.sentence_highlights.empty()
                         ? 0.0
                         : *std::max_element(ex.sentence_highlights.begin(), ex.sentence_highlights.end());
  for (auto& h : ex.sentence_highlights) h = top > 0.0 ? h / top : 0.0;
  return ex;
}

}  // namespace

Explanation explain(const TextClassifier& classifier, const TokenizedDoc& doc, RateDecision target,
                    const ExplainConfig& cfg) {
  cfg.validate();
  if (doc.tokens.empty()) throw EmptyDocument();
  const auto distinct = distinct_tokens(doc);
  const auto cls = static_cast<std::size_t>(class_index(target));
  std::vector<std::string> kept;
  auto probability = [&](const Mask& mask) {
    kept.clear();
    for (std::size_t p = 0; p < doc.tokens.size(); ++p) {
      if (mask[distinct.index_of_position[p]]) kept.push_back(doc.tokens[p]);
    }
    return classifier(kept)[cls];
  };
  return explain_masked(doc, distinct, probability, target, cfg);
}

Explanation explain(const GbdtModel& model, const TokenizedDoc& doc, RateDecision target, const ExplainConfig& cfg) {
  cfg.validate();
  if (doc.tokens.empty()) throw EmptyDocument();
  const auto distinct = distinct_tokens(doc);
  const auto& tfidf = model.tfidf();

  // Masking deletes every occurrence of a token, so each distinct token
  // contributes a fixed tf * idf term whenever it is kept.
  struct Contribution {
    std::uint32_t feature;
    double weight;
  };
  std::vector<std::optional<Contribution>> contribution(distinct.tokens.size());
  std::vector<double> counts(distinct.tokens.size(), 0.0);
  for (auto j : distinct.index_of_position) counts[j] += 1.0;
  for (std::size_t j = 0; j < distinct.tokens.size(); ++j) {
    if (auto idx = tfidf.index_of(distinct.tokens[j])) contribution[j] = Contribution{*idx, counts[j] * tfidf.idf()[*idx]};
  }

  const auto cls = static_cast<std::size_t>(class_index(target));
  std::vector<std::pair<std::uint32_t, double>> entries;
  auto probability = [&](const Mask& mask) {
    entries.clear();
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (mask[j] && contribution[j]) entries.emplace_back(contribution[j]->feature, contribution[j]->weight);
    }
    return model.ensemble().predict_proba(make_unit_vector(entries, tfidf.size()))[cls];
  };
  return explain_masked(doc, distinct, probability, target, cfg);
}

Explanation explain(const GbdtModel& model, const TokenizedDoc& doc, const ExplainConfig& cfg) {
  return explain(model, doc, model.predict_tokens(doc.tokens).label, cfg);
}

Explanation explain(const GbdtModel& model, const Document& doc, RateDecision target, const ExplainConfig& cfg) {
  static const SentenceSplitter splitter;
  return explain(model, splitter.segment(doc.id, doc.body), target, cfg);
}

void to_json(nlohmann::json& j, const Explanation& e) {
  auto features = nlohmann::json::array();
  for (const auto& f : e.feature_weights) features.push_back({{"token", f.token}, {"weight", f.weight}});
  auto sentences = nlohmann::json::array();
  for (std::size_t s = 0; s < e.sentence_highlights.size(); ++s) {
    sentences.push_back({{"index", s}, {"intensity", e.sentence_highlights[s]}});
  }
  j = {{"class", std::string(to_string(e.target_class))},
       {"intercept", e.intercept},
       {"r2", e.local_fidelity_r2},
       {"features", features},
       {"sentences", sentences}};
}

}  // namespace fednlp
