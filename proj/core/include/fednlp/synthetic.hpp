#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fednlp/corpus.hpp"

namespace fednlp {

// Planted-cue corpus generator with a known ground truth.
//
// Each document mixes neutral filler sentences with cue tokens unique to its
// class (e.g. "hawkish-token" for Raise). A `cue_noise` fraction of documents
// also carries cues from one other class, always fewer than the true cues, so
// the label stays a function of the text. `label_flip` reassigns that
// fraction of labels to a different class without touching the text.
struct SyntheticSpec {
  std::size_t n_docs = 600;
  double cue_noise = 0.2;
  double label_flip = 0.0;
  std::uint64_t seed = 7;
  std::array<double, kNumClasses> class_weights = {0.3, 0.4, 0.3};
};

struct SyntheticCorpus {
  std::vector<Document> docs;
  FfrSeries ffr;
};

SyntheticCorpus make_synthetic(const SyntheticSpec& spec);

// Cue vocabulary per class, indexed by class_index().
const std::array<std::vector<std::string_view>, kNumClasses>& planted_cues();

}  // namespace fednlp
