#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fednlp {

struct SparseVector {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;
  std::size_t dim = 0;

  std::size_t nnz() const noexcept { return indices.size(); }
  // Value at `index`, 0 when absent.
  double at(std::uint32_t index) const noexcept;
  double norm() const noexcept;

  bool operator==(const SparseVector&) const = default;
};

struct TfidfParams {
  std::size_t min_df = 2;
  std::optional<std::size_t> max_features = 20000;
};

class TfidfModel {
 public:
  TfidfModel() = default;

  // Throws EmptyCorpus for no documents, InvalidArgument for min_df == 0.
  static TfidfModel fit(std::span<const std::vector<std::string>> docs, const TfidfParams& params = {});

  // Rebuilds a model from persisted fields; validates invariants.
  static TfidfModel from_parts(std::vector<std::string> terms, std::vector<std::size_t> doc_freq, std::size_t n_docs,
                               TfidfParams params);

  // Raw-count tf times idf, L2-normalized; out-of-vocabulary tokens ignored.
  SparseVector transform(std::span<const std::string> tokens) const;

  std::optional<std::uint32_t> index_of(std::string_view term) const;

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::size_t>& doc_freq() const noexcept { return doc_freq_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  std::size_t n_docs() const noexcept { return n_docs_; }
  const TfidfParams& params() const noexcept { return params_; }

  static double smoothed_idf(std::size_t n_docs, std::size_t doc_freq) noexcept;

 private:
  void build_index();

  std::vector<std::string> terms_;  // ascending; position = feature index
  std::vector<std::size_t> doc_freq_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::size_t n_docs_ = 0;
  TfidfParams params_;
};

// Normalizes (index, weight) pairs with arbitrary order and duplicate-free
// indices into a unit SparseVector.
SparseVector make_unit_vector(std::vector<std::pair<std::uint32_t, double>> entries, std::size_t dim);

}  // namespace fednlp
