#include "fednlp/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "fednlp/errors.hpp"

namespace fednlp {

double SparseVector::at(std::uint32_t index) const noexcept {
  auto it = std::lower_bound(indices.begin(), indices.end(), index);
  if (it == indices.end() || *it != index) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

double SparseVector::norm() const noexcept {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double TfidfModel::smoothed_idf(std::size_t n_docs, std::size_t doc_freq) noexcept {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(doc_freq))) + 1.0;
}

TfidfModel TfidfModel::fit(std::span<const std::vector<std::string>> docs, const TfidfParams& params) {
  if (docs.empty()) throw EmptyCorpus();
  if (params.min_df == 0) throw InvalidArgument("min_df must be >= 1");
  if (params.max_features && *params.max_features == 0) throw InvalidArgument("max_features must be >= 1");

  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> distinct(doc.begin(), doc.end());
    for (auto term : distinct) ++df[std::string(term)];
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, n] : df) {
    if (n >= params.min_df) kept.emplace_back(term, n);
  }
  if (params.max_features && kept.size() > *params.max_features) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    kept.resize(*params.max_features);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::string> terms;
  std::vector<std::size_t> freq;
  terms.reserve(kept.size());
  freq.reserve(kept.size());
  for (auto& [term, n] : kept) {
    terms.push_back(std::move(term));
    freq.push_back(n);
  }
  return from_parts(std::move(terms), std::move(freq), docs.size(), params);
}

TfidfModel TfidfModel::from_parts(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
                                  std::size_t n_docs, TfidfParams params) {
  if (terms.size() != doc_freq.size()) throw InvalidArgument("terms and doc_freq differ in length");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0 && !(terms[i - 1] < terms[i])) throw InvalidArgument("vocabulary must be strictly ascending");
    if (doc_freq[i] == 0 || doc_freq[i] > n_docs) throw InvalidArgument("doc_freq out of range for " + terms[i]);
  }
  TfidfModel m;
  m.terms_ = std::move(terms);
  m.doc_freq_ = std::move(doc_freq);
  m.n_docs_ = n_docs;
  m.params_ = params;
  m.idf_.resize(m.terms_.size());
  for (std::size_t i = 0; i < m.terms_.size(); ++i) m.idf_[i] = smoothed_idf(n_docs, m.doc_freq_[i]);
  m.build_index();
  return m;
}

void TfidfModel::build_index() {
  index_.clear();
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

std::optional<std::uint32_t> TfidfModel::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector TfidfModel::transform(std::span<const std::string> tokens) const {
  std::unordered_map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    if (auto idx = index_of(t)) counts[*idx] += 1.0;
  }
  std::vector<std::pair<std::uint32_t, double>> entries;
  entries.reserve(counts.size());
  for (auto [idx, tf] : counts) entries.emplace_back(idx, tf * idf_[idx]);
  return make_unit_vector(std::move(entries), terms_.size());
}

SparseVector make_unit_vector(std::vector<std::pair<std::uint32_t, double>> entries, std::size_t dim) {
  std::sort(entries.begin(), entries.end());
  SparseVector v;
  v.dim = dim;
  double sq = 0.0;
  for (const auto& e : entries) sq += e.second * e.second;
  if (sq <= 0.0) return v;
  const double inv = 1.0 / std::sqrt(sq);
  v.indices.reserve(entries.size());
  v.values.reserve(entries.size());
  for (const auto& [idx, w] : entries) {
    v.indices.push_back(idx);
    v.values.push_back(w * inv);
  }
  return v;
}

}  // namespace fednlp
