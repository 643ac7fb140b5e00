#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fednlp/corpus.hpp"
#include "fednlp/features.hpp"

namespace fednlp {

struct GbdtConfig {
  std::size_t n_rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 4;
  std::size_t min_leaf_samples = 5;
  double l2_leaf_reg = 1.0;
  double feature_subsample = 0.8;
  std::uint64_t seed = 42;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;

  bool operator==(const GbdtConfig&) const = default;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // rows with value <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf output, -G / (H + lambda)

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // root at 0

  const TreeNode& leaf_for(const SparseVector& x) const;
  double predict(const SparseVector& x) const { return leaf_for(x).value; }
  std::size_t depth() const;
  bool operator==(const RegressionTree&) const = default;
};

using ClassScores = std::array<double, kNumClasses>;

ClassScores softmax(const ClassScores& scores) noexcept;

struct GradHess {
  ClassScores grad{};
  ClassScores hess{};
};

// Per-class first and (diagonal) second derivatives of the softmax
// log-loss with respect to the raw scores.
GradHess softmax_grad_hess(const ClassScores& scores, int label) noexcept;
double softmax_log_loss(const ClassScores& scores, int label) noexcept;

struct FeatureMatrix {
  std::vector<SparseVector> rows;
  std::size_t n_features = 0;
};

struct BoostedEnsemble {
  ClassScores base_scores{};
  double learning_rate = 0.1;
  std::vector<std::array<RegressionTree, kNumClasses>> rounds;

  ClassScores raw_scores(const SparseVector& x) const;
  ClassScores predict_proba(const SparseVector& x) const;
  std::size_t tree_count() const noexcept { return rounds.size() * kNumClasses; }
  bool operator==(const BoostedEnsemble&) const = default;
};

struct TrainReport {
  // Mean training log-loss: entry 0 before any round, entry r after round r.
  std::vector<double> log_loss;
  double training_accuracy = 0.0;
};

// Log of class frequencies; a class absent from `labels` gets log(0.5 / n).
ClassScores class_prior_scores(std::span<const int> labels);

// Fits one regression tree to per-row gradient/hessian statistics, using
// exact greedy splits over the rows' nonzero values with all implicit
// zeros forming one bucket. `features` lists candidate split features.
RegressionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                                   std::span<const std::uint32_t> features, const GbdtConfig& cfg);

BoostedEnsemble fit_ensemble(const FeatureMatrix& x, std::span<const int> labels, const GbdtConfig& cfg,
                             TrainReport* report = nullptr);

}  // namespace fednlp
