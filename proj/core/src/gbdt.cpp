#include "fednlp/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "fednlp/errors.hpp"
#include "fednlp/random.hpp"

namespace fednlp {

void GbdtConfig::validate() const {
  if (n_rounds == 0) throw InvalidArgument("n_rounds must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InvalidArgument("learning_rate must lie in (0, 1]");
  if (max_depth == 0) throw InvalidArgument("max_depth must be positive");
  if (min_leaf_samples == 0) throw InvalidArgument("min_leaf_samples must be positive");
  if (!(l2_leaf_reg >= 0.0) || !std::isfinite(l2_leaf_reg)) throw InvalidArgument("l2_leaf_reg must be >= 0");
  if (!(feature_subsample > 0.0 && feature_subsample <= 1.0)) {
    throw InvalidArgument("feature_subsample must lie in (0, 1]");
  }
}

const TreeNode& RegressionTree::leaf_for(const SparseVector& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x.at(static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left : n.right);
  }
  return nodes[i];
}

std::size_t RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

ClassScores softmax(const ClassScores& scores) noexcept {
  const double top = *std::max_element(scores.begin(), scores.end());
  ClassScores p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    p[k] = std::exp(scores[k] - top);
    sum += p[k];
  }
  // Keep every probability strictly positive; the floor is far below the
  // 1e-9 sum tolerance.
  double floored = 0.0;
  for (auto& v : p) {
    v = std::max(v / sum, std::numeric_limits<double>::min());
    floored += v;
  }
  for (auto& v : p) v /= floored;
  return p;
}

GradHess softmax_grad_hess(const ClassScores& scores, int label) noexcept {
  const auto p = softmax(scores);
  GradHess gh;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double y = static_cast<int>(k) == label ? 1.0 : 0.0;
    gh.grad[k] = p[k] - y;
    gh.hess[k] = std::max(p[k] * (1.0 - p[k]), 1e-16);
  }
  return gh;
}

double softmax_log_loss(const ClassScores& scores, int label) noexcept {
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - top);
  return std::log(sum) + top - scores[static_cast<std::size_t>(label)];
}

ClassScores class_prior_scores(std::span<const int> labels) {
  std::array<double, kNumClasses> counts{};
  for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
  const double n = static_cast<double>(labels.size());
  ClassScores base{};
  for (std::size_t k = 0; k < kNumClasses; ++k) base[k] = std::log((counts[k] > 0 ? counts[k] : 0.5) / n);
  return base;
}

ClassScores BoostedEnsemble::raw_scores(const SparseVector& x) const {
  ClassScores s = base_scores;
  for (const auto& round : rounds) {
    for (std::size_t k = 0; k < kNumClasses; ++k) s[k] += learning_rate * round[k].predict(x);
  }
  return s;
}

ClassScores BoostedEnsemble::predict_proba(const SparseVector& x) const { return softmax(raw_scores(x)); }

namespace {

struct ColumnEntry {
  std::uint32_t row;
  double value;
};

// Per-feature nonzero entries sorted by ascending value, then row.
class ColumnIndex {
 public:
  explicit ColumnIndex(const FeatureMatrix& x) : columns_(x.n_features) {
    for (std::uint32_t r = 0; r < x.rows.size(); ++r) {
      const auto& row = x.rows[r];
      for (std::size_t j = 0; j < row.nnz(); ++j) {
        if (row.indices[j] >= x.n_features) throw InvalidArgument("feature index exceeds matrix width");
        if (!(row.values[j] > 0.0)) throw InvalidArgument("stored feature values must be positive");
        columns_[row.indices[j]].push_back({r, row.values[j]});
      }
    }
    for (auto& col : columns_) {
      std::sort(col.begin(), col.end(), [](const ColumnEntry& a, const ColumnEntry& b) {
        return a.value != b.value ? a.value < b.value : a.row < b.row;
      });
    }
  }

  const std::vector<ColumnEntry>& column(std::uint32_t f) const { return columns_[f]; }

 private:
  std::vector<std::vector<ColumnEntry>> columns_;
};

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

constexpr double kMinSplitGain = 1e-12;

double score_term(double g, double h, double lambda) { return g * g / (h + lambda); }

RegressionTree grow_tree(const FeatureMatrix& x, const ColumnIndex& columns, std::span<const double> grad,
                         std::span<const double> hess, std::span<const std::uint32_t> features,
                         const GbdtConfig& cfg) {
  const std::size_t n = x.rows.size();
  const double lambda = cfg.l2_leaf_reg;
  RegressionTree tree;
  std::vector<NodeStats> stats(1);
  for (std::size_t i = 0; i < n; ++i) {
    stats[0].g += grad[i];
    stats[0].h += hess[i];
  }
  stats[0].count = n;
  tree.nodes.resize(1);

  std::vector<std::int32_t> node_of(n, 0);
  std::vector<std::int32_t> frontier = {0};

  for (std::size_t depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    // slot_of[node] indexes the per-level accumulators for splittable nodes.
    std::vector<std::int32_t> slot_of(tree.nodes.size(), -1);
    std::vector<std::int32_t> slots;
    for (auto node : frontier) {
      if (stats[static_cast<std::size_t>(node)].count >= 2 * cfg.min_leaf_samples) {
        slot_of[static_cast<std::size_t>(node)] = static_cast<std::int32_t>(slots.size());
        slots.push_back(node);
      }
    }
    if (slots.empty()) break;

    std::vector<SplitCandidate> best(slots.size());
    std::vector<NodeStats> nonzero(slots.size());
    std::vector<NodeStats> left(slots.size());
    std::vector<double> last_value(slots.size());

    for (auto f : features) {
      const auto& col = columns.column(f);
      if (col.empty()) continue;
      std::fill(nonzero.begin(), nonzero.end(), NodeStats{});
      for (const auto& e : col) {
        const auto s = slot_of[static_cast<std::size_t>(node_of[e.row])];
        if (s < 0) continue;
        auto& acc = nonzero[static_cast<std::size_t>(s)];
        acc.g += grad[e.row];
        acc.h += hess[e.row];
        ++acc.count;
      }
      for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& total = stats[static_cast<std::size_t>(slots[s])];
        left[s] = {total.g - nonzero[s].g, total.h - nonzero[s].h, total.count - nonzero[s].count};
        last_value[s] = 0.0;
      }
      for (const auto& e : col) {
        const auto si = slot_of[static_cast<std::size_t>(node_of[e.row])];
        if (si < 0) continue;
        const auto s = static_cast<std::size_t>(si);
        if (e.value > last_value[s] && left[s].count >= cfg.min_leaf_samples) {
          const auto& total = stats[static_cast<std::size_t>(slots[s])];
          const std::size_t right_count = total.count - left[s].count;
          if (right_count >= cfg.min_leaf_samples) {
            const double gr = total.g - left[s].g;
            const double hr = total.h - left[s].h;
            const double gain = score_term(left[s].g, left[s].h, lambda) + score_term(gr, hr, lambda) -
                                score_term(total.g, total.h, lambda);
            if (gain > best[s].gain + kMinSplitGain) {
              best[s] = {gain, static_cast<std::int32_t>(f), 0.5 * (last_value[s] + e.value)};
            }
          }
        }
        left[s].g += grad[e.row];
        left[s].h += hess[e.row];
        ++left[s].count;
        last_value[s] = e.value;
      }
    }

    std::vector<std::int32_t> next;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (best[s].feature < 0) continue;
      const auto node = static_cast<std::size_t>(slots[s]);
      const auto l = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes[node].feature = best[s].feature;
      tree.nodes[node].threshold = best[s].threshold;
      tree.nodes[node].left = l;
      tree.nodes[node].right = l + 1;
      tree.nodes.resize(tree.nodes.size() + 2);
      stats.resize(tree.nodes.size());
      next.push_back(l);
      next.push_back(l + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& parent = tree.nodes[static_cast<std::size_t>(node_of[i])];
      if (parent.is_leaf()) continue;
      const double v = x.rows[i].at(static_cast<std::uint32_t>(parent.feature));
      node_of[i] = v <= parent.threshold ? parent.left : parent.right;
      auto& st = stats[static_cast<std::size_t>(node_of[i])];
      st.g += grad[i];
      st.h += hess[i];
      ++st.count;
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].is_leaf()) tree.nodes[i].value = -stats[i].g / (stats[i].h + lambda);
  }
  return tree;
}

std::vector<std::uint32_t> sample_features(std::size_t n_features, double fraction, std::uint64_t seed) {
  std::vector<std::uint32_t> all(n_features);
  std::iota(all.begin(), all.end(), 0u);
  if (fraction >= 1.0 || n_features <= 1) return all;
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_features))));
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n_features - i));
    std::swap(all[i], all[j]);
  }
  all.resize(keep);
  std::sort(all.begin(), all.end());
  return all;
}

double mean_loss(const std::vector<ClassScores>& scores, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) total += softmax_log_loss(scores[i], labels[i]);
  return total / static_cast<double>(scores.size());
}

}  // namespace

RegressionTree fit_regression_tree(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                                   std::span<const std::uint32_t> features, const GbdtConfig& cfg) {
  cfg.validate();
  if (grad.size() != x.rows.size() || hess.size() != x.rows.size()) {
    throw InvalidArgument("gradient statistics must match the row count");
  }
  const ColumnIndex columns(x);
  return grow_tree(x, columns, grad, hess, features, cfg);
}

BoostedEnsemble fit_ensemble(const FeatureMatrix& x, std::span<const int> labels, const GbdtConfig& cfg,
                             TrainReport* report) {
  cfg.validate();
  const std::size_t n = x.rows.size();
  if (labels.size() != n) throw InvalidArgument("label count must match the row count");
  if (n == 0) throw EmptyCorpus();
  for (int y : labels) {
    if (y < 0 || y >= static_cast<int>(kNumClasses)) throw InvalidArgument("label out of range");
  }

  const ColumnIndex columns(x);
  BoostedEnsemble model;
  model.base_scores = class_prior_scores(labels);
  model.learning_rate = cfg.learning_rate;
  model.rounds.reserve(cfg.n_rounds);

  std::vector<ClassScores> scores(n, model.base_scores);
  if (report) {
    report->log_loss.clear();
    report->log_loss.push_back(mean_loss(scores, labels));
  }

  std::array<std::vector<double>, kNumClasses> grad, hess;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    grad[k].resize(n);
    hess[k].resize(n);
  }

  for (std::size_t round = 0; round < cfg.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = softmax_grad_hess(scores[i], labels[i]);
      for (std::size_t k = 0; k < kNumClasses; ++k) {
        grad[k][i] = gh.grad[k];
        hess[k][i] = gh.hess[k];
      }
    }
    // The three class trees only read shared state, so growing them
    // concurrently gives the same trees as growing them in sequence.
    std::array<std::future<RegressionTree>, kNumClasses> pending;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      pending[k] = std::async(std::launch::async, [&, k] {
        const auto features = sample_features(x.n_features, cfg.feature_subsample, derive_seed(cfg.seed, round, k));
        return grow_tree(x, columns, grad[k], hess[k], features, cfg);
      });
    }
    std::array<RegressionTree, kNumClasses> trees;
    for (std::size_t k = 0; k < kNumClasses; ++k) trees[k] = pending[k].get();

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kNumClasses; ++k) scores[i][k] += cfg.learning_rate * trees[k].predict(x.rows[i]);
    }
    model.rounds.push_back(std::move(trees));
    if (report) report->log_loss.push_back(mean_loss(scores, labels));
  }

  if (report) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = scores[i];
      const auto best = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
      if (best == labels[i]) ++correct;
    }
    report->training_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  }
  return model;
}

}  // namespace fednlp
