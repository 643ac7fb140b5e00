#include "fednlp/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fednlp/corpus.hpp"
#include "fednlp/errors.hpp"
#include "fednlp/random.hpp"

namespace fednlp {

using nlohmann::json;

void LdaConfig::validate() const {
  if (k < 2) throw InvalidArgument("LDA needs k >= 2");
  if (!(effective_alpha() > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (burn_in >= n_iterations) throw InvalidArgument("burn_in must be smaller than n_iterations");
  if (sample_lag == 0) throw InvalidArgument("sample_lag must be positive");
}

void check_count_conservation(const GibbsCounts& c) {
  std::vector<std::uint64_t> from_docs(c.k, 0);
  for (std::size_t d = 0; d < c.doc_topic.size(); ++d) {
    std::uint64_t total = 0;
    for (std::size_t t = 0; t < c.k; ++t) {
      total += c.doc_topic[d][t];
      from_docs[t] += c.doc_topic[d][t];
    }
    if (total != c.doc_length[d]) {
      throw Error("document " + std::to_string(d) + ": topic counts sum to " + std::to_string(total) +
                  ", length is " + std::to_string(c.doc_length[d]));
    }
  }
  for (std::size_t t = 0; t < c.k; ++t) {
    std::uint64_t words = 0;
    for (std::size_t w = 0; w < c.vocabulary_size; ++w) words += c.topic_word[t * c.vocabulary_size + w];
    if (words != c.topic_total[t] || from_docs[t] != c.topic_total[t]) {
      throw Error("topic " + std::to_string(t) + ": word counts " + std::to_string(words) + ", document counts " +
                  std::to_string(from_docs[t]) + ", total " + std::to_string(c.topic_total[t]));
    }
  }
}

std::optional<std::size_t> TopicModel::word_index(std::string_view term) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == vocabulary.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - vocabulary.begin());
}

namespace {

// Samples an index from unnormalized cumulative weights.
std::size_t draw(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

void normalize_row(std::vector<double>& row) {
  const double s = std::accumulate(row.begin(), row.end(), 0.0);
  if (s > 0.0) {
    for (auto& v : row) v /= s;
  } else {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
  }
}

}  // namespace

TopicModel fit_lda(std::span<const TokenizedDoc> docs, const LdaConfig& cfg, const WordList& stopwords,
                   const SweepObserver& observer) {
  cfg.validate();
  if (docs.size() < cfg.k) {
    throw DegenerateCorpus("LDA needs at least k = " + std::to_string(cfg.k) + " documents, got " +
                           std::to_string(docs.size()));
  }

  std::unordered_map<std::string_view, std::size_t> freq;
  for (const auto& doc : docs) {
    for (const auto& t : doc.tokens) {
      if (!stopwords.contains(t)) ++freq[t];
    }
  }
  TopicModel model;
  for (const auto& [term, n] : freq) {
    if (n >= cfg.min_term_count) model.vocabulary.emplace_back(term);
  }
  if (model.vocabulary.empty()) throw DegenerateCorpus("no terms survive stopword and min-count filtering");
  std::sort(model.vocabulary.begin(), model.vocabulary.end());

  const std::size_t K = cfg.k;
  const std::size_t V = model.vocabulary.size();
  const std::size_t D = docs.size();
  const double alpha = cfg.effective_alpha();
  const double beta = cfg.beta;
  model.k = K;
  model.alpha = alpha;
  model.beta = beta;

  std::vector<std::size_t> order(D);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return docs[a].doc_id < docs[b].doc_id; });

  // All sampler state is indexed by position in `order`.
  std::vector<std::vector<std::uint32_t>> words(D), topics(D);
  std::vector<std::vector<std::uint32_t>> n_dk(D, std::vector<std::uint32_t>(K, 0));
  std::vector<std::uint32_t> n_kw(K * V, 0), n_k(K, 0);
  std::vector<std::size_t> length(D, 0);
  std::vector<Rng> rngs;
  rngs.reserve(D);
  for (std::size_t p = 0; p < D; ++p) {
    const auto& doc = docs[order[p]];
    for (const auto& t : doc.tokens) {
      if (stopwords.contains(t)) continue;
      if (auto w = model.word_index(t)) words[p].push_back(static_cast<std::uint32_t>(*w));
    }
    length[p] = words[p].size();
    rngs.emplace_back(derive_seed(cfg.seed, fnv1a64(doc.doc_id)));
    topics[p].resize(words[p].size());
    for (std::size_t i = 0; i < words[p].size(); ++i) {
      const auto z = static_cast<std::uint32_t>(rngs[p].below(K));
      topics[p][i] = z;
      ++n_dk[p][z];
      ++n_kw[z * V + words[p][i]];
      ++n_k[z];
    }
  }

  const double v_beta = static_cast<double>(V) * beta;
  const double lg_beta = std::lgamma(beta);
  const double lg_vbeta = std::lgamma(v_beta);
  auto log_likelihood = [&] {
    double ll = 0.0;
    for (std::size_t t = 0; t < K; ++t) {
      ll += lg_vbeta - std::lgamma(static_cast<double>(n_k[t]) + v_beta);
      for (std::size_t w = 0; w < V; ++w) {
        const auto c = n_kw[t * V + w];
        if (c) ll += std::lgamma(static_cast<double>(c) + beta) - lg_beta;
      }
    }
    return ll;
  };

  std::vector<std::vector<double>> phi_sum(K, std::vector<double>(V, 0.0));
  std::vector<std::vector<double>> theta_sum(D, std::vector<double>(K, 0.0));
  std::size_t n_samples = 0;
  auto accumulate_estimate = [&] {
    for (std::size_t t = 0; t < K; ++t) {
      const double denom = static_cast<double>(n_k[t]) + v_beta;
      for (std::size_t w = 0; w < V; ++w) phi_sum[t][w] += (static_cast<double>(n_kw[t * V + w]) + beta) / denom;
    }
    for (std::size_t p = 0; p < D; ++p) {
      const double denom = static_cast<double>(length[p]) + static_cast<double>(K) * alpha;
      for (std::size_t t = 0; t < K; ++t) theta_sum[p][t] += (static_cast<double>(n_dk[p][t]) + alpha) / denom;
    }
    ++n_samples;
  };

  std::vector<double> cumulative(K);
  model.log_likelihood_trace.reserve(cfg.n_iterations);
  for (std::size_t it = 0; it < cfg.n_iterations; ++it) {
    for (std::size_t p = 0; p < D; ++p) {
      auto& rng = rngs[p];
      for (std::size_t i = 0; i < words[p].size(); ++i) {
        const auto w = words[p][i];
        const auto old = topics[p][i];
        --n_dk[p][old];
        --n_kw[old * V + w];
        --n_k[old];
        double acc = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          acc += (static_cast<double>(n_dk[p][t]) + alpha) * (static_cast<double>(n_kw[t * V + w]) + beta) /
                 (static_cast<double>(n_k[t]) + v_beta);
          cumulative[t] = acc;
        }
        const auto z = static_cast<std::uint32_t>(draw(cumulative, rng));
        topics[p][i] = z;
        ++n_dk[p][z];
        ++n_kw[z * V + w];
        ++n_k[z];
      }
    }
    model.log_likelihood_trace.push_back(log_likelihood());
    if (observer) {
      observer(GibbsCounts{K, V, n_dk, n_kw, n_k, length, it});
    }
#ifndef NDEBUG
    check_count_conservation(GibbsCounts{K, V, n_dk, n_kw, n_k, length, it});
#endif
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.sample_lag == 0) accumulate_estimate();
  }
  if (n_samples == 0) accumulate_estimate();

  model.topic_word = std::move(phi_sum);
  for (auto& row : model.topic_word) normalize_row(row);
  model.doc_ids.resize(D);
  model.doc_topic.assign(D, {});
  for (std::size_t p = 0; p < D; ++p) {
    model.doc_ids[order[p]] = docs[order[p]].doc_id;
    model.doc_topic[order[p]] = std::move(theta_sum[p]);
    normalize_row(model.doc_topic[order[p]]);
  }
  return model;
}

std::vector<std::pair<std::string, double>> topic_terms(const TopicModel& model, std::size_t t, std::size_t k_terms) {
  if (t >= model.k) {
    throw IndexOutOfRange("topic " + std::to_string(t) + " out of range for k = " + std::to_string(model.k));
  }
  const auto& row = model.topic_word[t];
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto keep = std::min(k_terms, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return row[a] != row[b] ? row[a] > row[b] : model.vocabulary[a] < model.vocabulary[b];
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.emplace_back(model.vocabulary[idx[i]], row[idx[i]]);
  return out;
}

std::vector<double> infer_topics(const TopicModel& model, std::span<const std::string> tokens, std::size_t iterations,
                                 std::uint64_t seed) {
  const auto K = model.k;
  std::vector<std::size_t> words;
  for (const auto& t : tokens) {
    if (auto w = model.word_index(t)) words.push_back(*w);
  }
  std::vector<double> mixture(K, 0.0);
  if (words.empty() || iterations == 0) {
    std::fill(mixture.begin(), mixture.end(), 1.0 / static_cast<double>(K));
    return mixture;
  }
  Rng rng(derive_seed(seed, words.size()));
  std::vector<std::uint32_t> z(words.size());
  std::vector<std::uint32_t> counts(K, 0);
  for (auto& zi : z) {
    zi = static_cast<std::uint32_t>(rng.below(K));
    ++counts[zi];
  }
  std::vector<double> cumulative(K);
  const std::size_t burn = iterations / 2;
  std::size_t samples = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --counts[z[i]];
      double acc = 0.0;
      for (std::size_t t = 0; t < K; ++t) {
        acc += (static_cast<double>(counts[t]) + model.alpha) * model.topic_word[t][words[i]];
        cumulative[t] = acc;
      }
      z[i] = static_cast<std::uint32_t>(draw(cumulative, rng));
      ++counts[z[i]];
    }
    if (it >= burn) {
      const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * model.alpha;
      for (std::size_t t = 0; t < K; ++t) mixture[t] += (static_cast<double>(counts[t]) + model.alpha) / denom;
      ++samples;
    }
  }
  normalize_row(mixture);
  return mixture;
}

json topics_view(const TopicModel& model, std::size_t terms_per_topic) {
  json topics = json::array();
  for (std::size_t t = 0; t < model.k; ++t) {
    json terms = json::array();
    for (const auto& [term, p] : topic_terms(model, t, terms_per_topic)) terms.push_back({{"term", term}, {"p", p}});
    topics.push_back({{"id", t}, {"terms", terms}});
  }
  json doc_topics = json::array();
  for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
    doc_topics.push_back({{"doc_id", model.doc_ids[d]}, {"mixture", model.doc_topic[d]}});
  }
  return {{"k", model.k}, {"topics", topics}, {"doc_topics", doc_topics}};
}

json topic_model_to_json(const TopicModel& model) {
  json j = topics_view(model);
  j["model"] = {{"alpha", model.alpha},
                {"beta", model.beta},
                {"vocabulary", model.vocabulary},
                {"topic_word", model.topic_word},
                {"log_likelihood_trace", model.log_likelihood_trace}};
  return j;
}

TopicModel topic_model_from_json(const json& j) {
  try {
    TopicModel m;
    m.k = j.at("k").get<std::size_t>();
    const auto& full = j.at("model");
    m.alpha = full.at("alpha").get<double>();
    m.beta = full.at("beta").get<double>();
    m.vocabulary = full.at("vocabulary").get<std::vector<std::string>>();
    m.topic_word = full.at("topic_word").get<std::vector<std::vector<double>>>();
    m.log_likelihood_trace = full.value("log_likelihood_trace", std::vector<double>{});
    for (const auto& dt : j.at("doc_topics")) {
      m.doc_ids.push_back(dt.at("doc_id").get<std::string>());
      m.doc_topic.push_back(dt.at("mixture").get<std::vector<double>>());
    }
    if (m.k < 2 || m.topic_word.size() != m.k) throw SchemaError(0, "topic_word", "expected k rows");
    for (const auto& row : m.topic_word) {
      if (row.size() != m.vocabulary.size()) throw SchemaError(0, "topic_word", "row width differs from vocabulary");
    }
    if (!std::is_sorted(m.vocabulary.begin(), m.vocabulary.end())) {
      throw SchemaError(0, "vocabulary", "must be sorted ascending");
    }
    for (const auto& row : m.doc_topic) {
      if (row.size() != m.k) throw SchemaError(0, "doc_topics", "mixture width differs from k");
    }
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(0, "<topic model>", e.what());
  }
}

void save_topic_model(const TopicModel& model, const std::filesystem::path& path) {
  write_file(path, topic_model_to_json(model).dump() + "\n");
}

TopicModel load_topic_model(const std::filesystem::path& path) { return topic_model_from_json(read_json_file(path)); }

}  // namespace fednlp
