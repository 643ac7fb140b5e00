#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fednlp/text.hpp"

namespace fednlp {

// Symmetric, zero-diagonal, nonnegative similarity matrix (row-major).
class SentenceGraph {
 public:
  SentenceGraph() = default;
  explicit SentenceGraph(std::size_t n) : n_(n), weights_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double weight(std::size_t i, std::size_t j) const noexcept { return weights_[i * n_ + j]; }
  // Sets both (i, j) and (j, i); self-loops are rejected.
  void set_weight(std::size_t i, std::size_t j, double w);

  // Nodes taking part in ranking; the rest keep score 0.
  const std::vector<bool>& active() const noexcept { return active_; }
  void set_active(std::vector<bool> active) { active_ = std::move(active); }

 private:
  std::size_t n_ = 0;
  std::vector<double> weights_;
  std::vector<bool> active_;
};

// weight(i, j) = |shared distinct non-stopword tokens| / (ln|Si| + ln|Sj|),
// |S| counting non-stopword tokens. Sentences with fewer than two such
// tokens are marked inactive.
SentenceGraph build_graph(const TokenizedDoc& doc, const WordList& stopwords);

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-6;  // bound on the L1 distance of the result to the fixed point
  std::size_t max_iterations = 200;
};

struct PageRankResult {
  std::vector<double> scores;
  std::size_t iterations = 0;
  bool converged = true;  // false: max_iterations reached, last iterate returned
};

// Weighted PageRank over the active nodes; isolated nodes link uniformly to
// all active nodes. Scores sum to 1.
PageRankResult pagerank(const SentenceGraph& g, const PageRankOptions& options = {});

struct Summary {
  std::vector<std::size_t> selected;  // ascending sentence indices
  std::vector<double> scores;          // one per sentence
  std::string text;
  bool converged = true;
};

// max(3, 10% of the sentence count).
std::size_t default_summary_length(std::size_t sentence_count) noexcept;

// Top n_sentences by score, earlier sentence on ties, in document order.
Summary summarize(const TokenizedDoc& doc, std::size_t n_sentences, const WordList& stopwords = default_stopwords(),
                  const PageRankOptions& options = {});

void to_json(nlohmann::json& j, const Summary& s);

}  // namespace fednlp
