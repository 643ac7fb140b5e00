#include "fednlp/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"

namespace fednlp {

void SentenceGraph::set_weight(std::size_t i, std::size_t j, double w) {
  if (i >= n_ || j >= n_) throw IndexOutOfRange("sentence index out of range");
  if (i == j) throw InvalidArgument("sentence graph has no self-loops");
  if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("edge weights must be finite and nonnegative");
  weights_[i * n_ + j] = w;
  weights_[j * n_ + i] = w;
}

SentenceGraph build_graph(const TokenizedDoc& doc, const WordList& stopwords) {
  const auto n = doc.sentences.size();
  SentenceGraph g(n);
  std::vector<std::vector<std::string_view>> distinct(n);
  std::vector<std::size_t> length(n, 0);
  std::vector<bool> active(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t p = doc.sentences[s].begin; p < doc.sentences[s].end; ++p) {
      const auto& t = doc.tokens[p];
      if (stopwords.contains(t)) continue;
      ++length[s];
      distinct[s].push_back(t);
    }
    std::sort(distinct[s].begin(), distinct[s].end());
    distinct[s].erase(std::unique(distinct[s].begin(), distinct[s].end()), distinct[s].end());
    active[s] = length[s] >= 2;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!active[j]) continue;
      const double denom = std::log(static_cast<double>(length[i])) + std::log(static_cast<double>(length[j]));
      if (denom <= 0.0) continue;
      std::size_t shared = 0;
      auto a = distinct[i].begin(), b = distinct[j].begin();
      while (a != distinct[i].end() && b != distinct[j].end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++shared;
          ++a;
          ++b;
        }
      }
      if (shared > 0) g.set_weight(i, j, static_cast<double>(shared) / denom);
    }
  }
  g.set_active(std::move(active));
  return g;
}

PageRankResult pagerank(const SentenceGraph& g, const PageRankOptions& options) {
  const auto n = g.size();
  if (n == 0) throw InvalidArgument("pagerank needs at least one node");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) throw InvalidArgument("damping must lie in [0, 1)");

  std::vector<std::size_t> nodes;
  const auto& mask = g.active();
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.empty() || mask[i]) nodes.push_back(i);
  }
  PageRankResult result;
  result.scores.assign(n, 0.0);
  if (nodes.empty()) {
    std::fill(result.scores.begin(), result.scores.end(), 1.0 / static_cast<double>(n));
    return result;
  }

  const auto m = nodes.size();
  const double d = options.damping;
  std::vector<double> out_weight(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) out_weight[a] += g.weight(nodes[a], nodes[b]);
  }

  // The iteration contracts by d in L1, so the distance to the fixed point is
  // at most d / (1 - d) times the last change. Stop once that bound is under
  // the tolerance, which also implies the change itself is.
  const double stop_change = options.tolerance * (1.0 - d) / std::max(d, 1e-12);
  std::vector<double> s(m, 1.0 / static_cast<double>(m)), next(m);
  result.converged = false;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    double dangling = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      if (out_weight[a] <= 0.0) dangling += s[a];
    }
    const double base = (1.0 - d) / static_cast<double>(m) + d * dangling / static_cast<double>(m);
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double inflow = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (out_weight[j] > 0.0) inflow += g.weight(nodes[j], nodes[i]) / out_weight[j] * s[j];
      }
      next[i] = base + d * inflow;
      change += std::abs(next[i] - s[i]);
    }
    s.swap(next);
    result.iterations = it + 1;
    if (change < std::min(options.tolerance, stop_change)) {
      result.converged = true;
      break;
    }
  }
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  for (std::size_t a = 0; a < m; ++a) result.scores[nodes[a]] = s[a] / total;
  return result;
}

std::size_t default_summary_length(std::size_t sentence_count) noexcept {
  return std::max<std::size_t>(3, sentence_count / 10);
}

Summary summarize(const TokenizedDoc& doc, std::size_t n_sentences, const WordList& stopwords,
                  const PageRankOptions& options) {
  if (n_sentences == 0) throw InvalidArgument("n_sentences must be positive");
  Summary summary;
  const auto n = doc.sentences.size();
  if (n == 0) return summary;

  const auto ranked = pagerank(build_graph(doc, stopwords), options);
  summary.scores = ranked.scores;
  summary.converged = ranked.converged;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return summary.scores[a] > summary.scores[b]; });
  order.resize(std::min(n_sentences, n));
  std::sort(order.begin(), order.end());
  summary.selected = order;

  for (auto s : summary.selected) {
    if (!summary.text.empty()) summary.text += ' ';
    if (s < doc.sentence_text.size()) {
      summary.text += doc.sentence_text[s];
    } else {
      for (std::size_t p = doc.sentences[s].begin; p < doc.sentences[s].end; ++p) {
        if (p > doc.sentences[s].begin) summary.text += ' ';
        summary.text += doc.tokens[p];
      }
    }
  }
  return summary;
}

void to_json(nlohmann::json& j, const Summary& s) {
  j = {{"selected", s.selected}, {"text", s.text}, {"scores", s.scores}};
}

}  // namespace fednlp
