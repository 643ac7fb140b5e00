#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "fednlp/classifier.hpp"
#include "fednlp/errors.hpp"
#include "fednlp/gbdt.hpp"
#include "fednlp/text.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fednlp;

namespace {

long double loss_ld(const ClassScores& f, int label) {
  long double z = 0.0L;
  for (double v : f) z += std::exp(static_cast<long double>(v));
  return std::log(z) - static_cast<long double>(f[static_cast<std::size_t>(label)]);
}

// Richardson-extrapolated central differences of the reference loss.
double fd_grad(ClassScores f, int label, std::size_t k) {
  auto d = [&](double h) {
    ClassScores a = f, b = f;
    a[k] += h;
    b[k] -= h;
    return static_cast<double>((loss_ld(a, label) - loss_ld(b, label)) / (2.0L * h));
  };
  return (4.0 * d(5e-4) - d(1e-3)) / 3.0;
}

double fd_hess(ClassScores f, int label, std::size_t k) {
  auto d = [&](double h) {
    ClassScores a = f, b = f;
    a[k] += h;
    b[k] -= h;
    return static_cast<double>((loss_ld(a, label) - 2.0L * loss_ld(f, label) + loss_ld(b, label)) /
                               (static_cast<long double>(h) * h));
  };
  return (4.0 * d(5e-3) - d(1e-2)) / 3.0;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

SparseVector dense_row(const std::vector<double>& v) {
  SparseVector x;
  x.dim = v.size();
  for (std::uint32_t j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) {
      x.indices.push_back(j);
      x.values.push_back(v[j]);
    }
  }
  return x;
}

struct BruteSplit {
  double gain = 0.0;
  bool split = false;
};

// Every feature, every midpoint between distinct column values (zeros included).
BruteSplit brute_best_split(const std::vector<std::vector<double>>& x, const std::vector<double>& g,
                            const std::vector<double>& h, double lambda, std::size_t min_leaf) {
  const double G = std::accumulate(g.begin(), g.end(), 0.0);
  const double H = std::accumulate(h.begin(), h.end(), 0.0);
  BruteSplit best;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::vector<double> vals;
    for (const auto& row : x) vals.push_back(row[f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t t = 0; t + 1 < vals.size(); ++t) {
      const double thr = 0.5 * (vals[t] + vals[t + 1]);
      double gl = 0, hl = 0;
      std::size_t nl = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i][f] <= thr) {
          gl += g[i];
          hl += h[i];
          ++nl;
        }
      }
      if (nl < min_leaf || x.size() - nl < min_leaf) continue;
      const double gr = G - gl, hr = H - hl;
      const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - G * G / (H + lambda);
      if (gain > best.gain) best = {gain, true};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("softmax is a strictly positive distribution") {
  gen::Source src(5);
  for (int t = 0; t < 10000; ++t) {
    ClassScores f{src.real(-50, 50), src.real(-50, 50), src.real(-50, 50)};
    if (t % 10 == 0) f[src.below(3)] += 2000.0;
    const auto p = softmax(f);
    double sum = 0.0;
    for (double v : p) {
      REQUIRE(v > 0.0);
      REQUIRE(v <= 1.0);
      sum += v;
    }
    REQUIRE(std::abs(sum - 1.0) < 1e-9);
  }
  const auto u = softmax({0.0, 0.0, 0.0});
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("gradient and hessian match finite differences") {
  gen::Source src(11);
  double worst = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const ClassScores f{src.real(-3, 3), src.real(-3, 3), src.real(-3, 3)};
    const int label = static_cast<int>(src.below(3));
    const auto gh = softmax_grad_hess(f, label);
    for (std::size_t k = 0; k < 3; ++k) {
      worst = std::max(worst, rel_err(gh.grad[k], fd_grad(f, label, k)));
      worst = std::max(worst, rel_err(gh.hess[k], fd_hess(f, label, k)));
    }
    REQUIRE(std::abs(softmax_log_loss(f, label) - static_cast<double>(loss_ld(f, label))) < 1e-12);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("class priors") {
  const std::vector<int> labels = {0, 1, 1, 1};
  const auto b = class_prior_scores(labels);
  CHECK(b[0] == doctest::Approx(std::log(0.25)));
  CHECK(b[1] == doctest::Approx(std::log(0.75)));
  CHECK(b[2] == doctest::Approx(std::log(0.5 / 4.0)));
}

TEST_CASE("depth-1 trees match the brute-force split and closed-form leaves") {
  gen::Source src(2024);
  const double lambda = 1.0;
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = src.range(2, 8), p = src.range(1, 4);
    std::vector<std::vector<double>> dense(n, std::vector<double>(p, 0.0));
    for (auto& row : dense) {
      for (auto& v : row) v = src.coin(0.5) ? std::round(src.real(0.1, 1.0) * 8.0) / 8.0 : 0.0;
    }
    std::vector<double> g(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = src.real(-1.0, 1.0);
      h[i] = src.real(0.01, 0.25);
    }
    FeatureMatrix x;
    x.n_features = p;
    for (const auto& row : dense) x.rows.push_back(dense_row(row));
    std::vector<std::uint32_t> features(p);
    std::iota(features.begin(), features.end(), 0u);
    GbdtConfig cfg;
    cfg.max_depth = 1;
    cfg.min_leaf_samples = 1;
    cfg.l2_leaf_reg = lambda;
    const auto tree = fit_regression_tree(x, g, h, features, cfg);
    const auto brute = brute_best_split(dense, g, h, lambda, 1);

    // Leaf value of every row is -G/(H + lambda) over its side.
    std::vector<std::ptrdiff_t> side(n);  // leaf node index of each row
    for (std::size_t i = 0; i < n; ++i) side[i] = &tree.leaf_for(x.rows[i]) - tree.nodes.data();
    if (tree.nodes.size() == 1) {
      REQUIRE_FALSE((brute.split && brute.gain > 1e-9));
    } else {
      REQUIRE(tree.nodes.size() == 3);
      double G[2] = {0, 0}, H[2] = {0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        G[side[i] - 1] += g[i];
        H[side[i] - 1] += h[i];
      }
      const double GT = G[0] + G[1], HT = H[0] + H[1];
      const double gain = G[0] * G[0] / (H[0] + lambda) + G[1] * G[1] / (H[1] + lambda) - GT * GT / (HT + lambda);
      REQUIRE(brute.split);
      REQUIRE(std::abs(gain - brute.gain) < 1e-9);
      REQUIRE(std::abs(tree.nodes[1].value - (-G[0] / (H[0] + lambda))) < 1e-12);
      REQUIRE(std::abs(tree.nodes[2].value - (-G[1] / (H[1] + lambda))) < 1e-12);
    }
    if (tree.nodes.size() == 1) {
      const double G = std::accumulate(g.begin(), g.end(), 0.0), H = std::accumulate(h.begin(), h.end(), 0.0);
      REQUIRE(std::abs(tree.nodes[0].value - (-G / (H + lambda))) < 1e-12);
    }
  }
}

TEST_CASE("single-round ensemble leaves equal closed form at the prior") {
  gen::Source src(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = src.range(3, 8), p = src.range(1, 4);
    FeatureMatrix x;
    x.n_features = p;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(p);
      for (auto& v : row) v = src.coin(0.5) ? src.real(0.1, 1.0) : 0.0;
      x.rows.push_back(dense_row(row));
      labels[i] = static_cast<int>(src.below(3));
    }
    GbdtConfig cfg;
    cfg.n_rounds = 1;
    cfg.max_depth = 1;
    cfg.min_leaf_samples = 1;
    cfg.feature_subsample = 1.0;
    const auto model = fit_ensemble(x, labels, cfg);
    REQUIRE(model.rounds.size() == 1);

    // Reference statistics at the class-prior scores.
    std::array<double, 3> counts{};
    for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
    std::array<double, 3> f{};
    for (std::size_t k = 0; k < 3; ++k) f[k] = std::log((counts[k] > 0 ? counts[k] : 0.5) / double(n));
    double z = 0.0;
    for (double v : f) z += std::exp(v);
    for (std::size_t k = 0; k < 3; ++k) {
      const double pk = std::exp(f[k]) / z;
      const auto& tree = model.rounds[0][k];
      std::map<const TreeNode*, std::pair<double, double>> acc;
      for (std::size_t i = 0; i < n; ++i) {
        auto& a = acc[&tree.leaf_for(x.rows[i])];
        a.first += pk - (labels[i] == int(k) ? 1.0 : 0.0);
        a.second += pk * (1.0 - pk);
      }
      for (const auto& [leaf, gh] : acc) REQUIRE(std::abs(leaf->value - (-gh.first / (gh.second + 1.0))) < 1e-12);
    }
  }
}

TEST_CASE("training loss never increases on the synthetic corpus") {
  GbdtConfig cfg;  // 100 rounds
  TrainReport report;
  const auto model = train(gen::synthetic_corpus().docs, cfg, {}, &report);
  REQUIRE(report.log_loss.size() == 101);
  for (std::size_t r = 1; r < report.log_loss.size(); ++r) CHECK(report.log_loss[r] <= report.log_loss[r - 1]);
  CHECK(report.log_loss.back() < 0.1 * report.log_loss.front());
  CHECK(model.ensemble().tree_count() == 300);

  for (const auto& round : model.ensemble().rounds) {
    for (const auto& tree : round) {
      CHECK(tree.depth() <= cfg.max_depth);
      for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
          CHECK(std::isfinite(node.value));
        } else {
          CHECK(static_cast<std::size_t>(node.feature) < model.tfidf().size());
        }
      }
    }
  }
}

TEST_CASE("min_leaf_samples is respected") {
  const auto& docs = gen::synthetic_corpus().docs;
  GbdtConfig cfg;
  cfg.n_rounds = 5;
  cfg.min_leaf_samples = 40;
  const auto model = train(docs, cfg);
  std::vector<std::string> empty;
  for (const auto& round : model.ensemble().rounds) {
    for (const auto& tree : round) {
      std::map<const TreeNode*, std::size_t> hits;
      for (const auto& d : docs) ++hits[&tree.leaf_for(model.tfidf().transform(tokenize(d.body)))];
      for (const auto& [leaf, count] : hits) CHECK(count >= 40);
    }
  }
}

TEST_CASE("config validation") {
  GbdtConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.learning_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.feature_subsample = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.max_depth = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.min_leaf_samples = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.l2_leaf_reg = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
