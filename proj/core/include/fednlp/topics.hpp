#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fednlp/text.hpp"

namespace fednlp {

struct LdaConfig {
  std::size_t k = 8;
  std::optional<double> alpha;  // default 50 / k
  double beta = 0.01;
  std::size_t n_iterations = 1000;
  std::size_t burn_in = 200;
  std::size_t sample_lag = 10;
  std::size_t min_term_count = 5;
  std::uint64_t seed = 42;

  double effective_alpha() const noexcept { return alpha.value_or(50.0 / static_cast<double>(k)); }
  void validate() const;
};

// Sampler counts exposed to sweep observers.
struct GibbsCounts {
  std::size_t k = 0;
  std::size_t vocabulary_size = 0;
  std::span<const std::vector<std::uint32_t>> doc_topic;   // [doc][topic]
  std::span<const std::uint32_t> topic_word;                // [topic * V + word]
  std::span<const std::uint32_t> topic_total;               // [topic]
  std::span<const std::size_t> doc_length;                  // [doc]
  std::size_t iteration = 0;
};

// Invoked after every full sweep.
using SweepObserver = std::function<void(const GibbsCounts&)>;

// Throws a description of the first broken invariant; used by tests and
// debug builds.
void check_count_conservation(const GibbsCounts& counts);

class TopicModel {
 public:
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> vocabulary;            // ascending; index = word id
  std::vector<std::vector<double>> topic_word;    // k x V, rows sum to 1
  std::vector<std::string> doc_ids;               // input order
  std::vector<std::vector<double>> doc_topic;     // D x k, rows sum to 1
  std::vector<double> log_likelihood_trace;       // one entry per sweep

  std::optional<std::size_t> word_index(std::string_view term) const;
};

// Collapsed Gibbs sampling. Documents are processed in doc_id order with
// per-document seeds, so estimates do not depend on input order. Throws
// DegenerateCorpus when fewer than k documents or no vocabulary survive.
TopicModel fit_lda(std::span<const TokenizedDoc> docs, const LdaConfig& cfg, const WordList& stopwords = {},
                   const SweepObserver& observer = {});

// Top terms of topic t by probability, ties by ascending term.
std::vector<std::pair<std::string, double>> topic_terms(const TopicModel& model, std::size_t t, std::size_t k_terms);

// Topic mixture for unseen text with topic_word held fixed.
std::vector<double> infer_topics(const TopicModel& model, std::span<const std::string> tokens,
                                 std::size_t iterations = 100, std::uint64_t seed = 42);

inline constexpr std::size_t kTopicViewTerms = 30;

// {k, topics: [{id, terms: [{term, p}]}], doc_topics: [{doc_id, mixture}]}
nlohmann::json topics_view(const TopicModel& model, std::size_t terms_per_topic = kTopicViewTerms);

// Full model (view plus the parameters needed for inference).
nlohmann::json topic_model_to_json(const TopicModel& model);
TopicModel topic_model_from_json(const nlohmann::json& j);
void save_topic_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_topic_model(const std::filesystem::path& path);

}  // namespace fednlp
