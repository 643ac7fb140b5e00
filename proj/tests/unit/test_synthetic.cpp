#include <doctest.h>

#include <algorithm>
#include <array>
#include <set>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/synthetic.hpp"
#include "fednlp/text.hpp"

using namespace fednlp;

namespace {

std::array<std::size_t, kNumClasses> cue_counts(const Document& d) {
  std::array<std::size_t, kNumClasses> n{};
  for (const auto& t : tokenize(d.body)) {
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      const auto& pool = planted_cues()[k];
      if (std::find(pool.begin(), pool.end(), t) != pool.end()) ++n[k];
    }
  }
  return n;
}

int text_class(const Document& d) {
  const auto n = cue_counts(d);
  return static_cast<int>(std::max_element(n.begin(), n.end()) - n.begin());
}

}  // namespace

TEST_CASE("default corpus shape") {
  const auto c = make_synthetic({});
  REQUIRE(c.docs.size() == 600);
  std::set<std::string> ids;
  std::array<std::size_t, kNumClasses> per_class{};
  std::size_t noisy = 0;
  for (const auto& d : c.docs) {
    ids.insert(d.id);
    REQUIRE(d.label);
    ++per_class[static_cast<std::size_t>(class_index(*d.label))];
    const auto n = cue_counts(d);
    // The label is always recoverable from the text: true cues strictly win.
    const auto own = n[static_cast<std::size_t>(class_index(*d.label))];
    std::size_t others = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      if (k != static_cast<std::size_t>(class_index(*d.label))) {
        CHECK(n[k] < own);
        others += n[k];
      }
    }
    noisy += others > 0;
    CHECK(own >= 3);
    CHECK(split_sentences(d.body).sentences.size() >= 6);
  }
  CHECK(ids.size() == 600);
  CHECK(std::abs(static_cast<double>(noisy) / 600.0 - 0.2) < 0.06);
  CHECK(std::abs(static_cast<double>(per_class[0]) / 600.0 - 0.3) < 0.06);
  CHECK(std::abs(static_cast<double>(per_class[1]) / 600.0 - 0.4) < 0.06);
  CHECK(std::abs(static_cast<double>(per_class[2]) / 600.0 - 0.3) < 0.06);
}

TEST_CASE("corpus survives validation and round trip") {
  const auto c = make_synthetic({.n_docs = 50});
  const auto back = parse_corpus(corpus_to_json(c.docs));
  REQUIRE(back.size() == c.docs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == c.docs[i].id);
    CHECK(back[i].body == c.docs[i].body);
    CHECK(back[i].label == c.docs[i].label);
    CHECK(back[i].date == c.docs[i].date);
  }
  nlohmann::json ffr = c.ffr;
  const auto series = parse_ffr(ffr);
  REQUIRE(series.points.size() == c.ffr.points.size());
  for (std::size_t i = 1; i < series.points.size(); ++i) CHECK(series.points[i - 1].date < series.points[i].date);
  for (const auto& p : series.points) CHECK(p.lower_bound >= 0.0);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto a = make_synthetic({.n_docs = 100});
  const auto b = make_synthetic({.n_docs = 100});
  CHECK(corpus_to_json(a.docs) == corpus_to_json(b.docs));
  SyntheticSpec other;
  other.n_docs = 100;
  other.seed = 8;
  CHECK(corpus_to_json(make_synthetic(other).docs) != corpus_to_json(a.docs));
}

TEST_CASE("label flips leave the text alone") {
  SyntheticSpec clean, flipped;
  clean.n_docs = flipped.n_docs = 1000;
  flipped.label_flip = 0.3;
  const auto a = make_synthetic(clean);
  const auto b = make_synthetic(flipped);
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < b.docs.size(); ++i) {
    CHECK(class_index(*a.docs[i].label) == text_class(a.docs[i]));
    disagree += class_index(*b.docs[i].label) != text_class(b.docs[i]);
  }
  CHECK(std::abs(static_cast<double>(disagree) / 1000.0 - 0.3) < 0.05);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(make_synthetic({.n_docs = 5, .cue_noise = 1.5}), InvalidArgument);
  CHECK_THROWS_AS(make_synthetic({.n_docs = 5, .cue_noise = 0.2, .label_flip = -0.1}), InvalidArgument);
  CHECK(make_synthetic({.n_docs = 0}).docs.empty());
}
