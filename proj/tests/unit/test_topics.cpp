#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/topics.hpp"
#include "generators.hpp"

using namespace fednlp;

namespace {

// Prefix ('a' or 'b') shared by all top-10 terms of topic t, or 0.
char planted_prefix(const TopicModel& m, std::size_t t) {
  const auto terms = topic_terms(m, t, 10);
  const char p = terms.front().first.front();
  for (const auto& [term, prob] : terms) {
    if (term.front() != p) return 0;
  }
  return p;
}

void check_rows(const std::vector<std::vector<double>>& rows) {
  for (const auto& row : rows) {
    double sum = 0.0;
    for (double v : row) {
      REQUIRE(v >= 0.0);
      sum += v;
    }
    REQUIRE(std::abs(sum - 1.0) < 1e-9);
  }
}

LdaConfig quick(std::uint64_t seed) {
  LdaConfig cfg;
  cfg.k = 2;
  cfg.seed = seed;
  cfg.n_iterations = 300;
  cfg.burn_in = 100;
  return cfg;
}

}  // namespace

TEST_CASE("planted vocabularies are recovered") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    gen::Source src(seed);
    const auto docs = gen::planted_topics(src);
    const auto m = fit_lda(docs, quick(seed));
    const char p0 = planted_prefix(m, 0), p1 = planted_prefix(m, 1);
    CHECK(p0 != 0);
    CHECK(p1 != 0);
    CHECK(p0 != p1);
    // Each document sits in the topic of its vocabulary. With alpha = 25 the
    // smoothed mixture of a pure 60-token document is at most 85 / 110.
    const std::size_t a_topic = p0 == 'a' ? 0 : 1;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const double own = m.doc_topic[d][d % 2 ? 1 - a_topic : a_topic];
      CHECK(own > 0.75);
      CHECK(own <= 85.0 / 110.0 + 1e-12);
    }
  }
}

TEST_CASE("single repeated word") {
  std::vector<TokenizedDoc> docs(6);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    docs[d].doc_id = "d" + std::to_string(d);
    docs[d].tokens.assign(25, "rate");
  }
  const auto m = fit_lda(docs, quick(3));
  REQUIRE(m.vocabulary == std::vector<std::string>{"rate"});
  for (const auto& row : m.topic_word) CHECK(row[0] >= 0.99);
}

TEST_CASE("fit preconditions") {
  gen::Source src(1);
  auto docs = gen::planted_topics(src, 4);
  auto cfg = quick(1);
  cfg.k = 5;
  CHECK_THROWS_AS(fit_lda(docs, cfg), DegenerateCorpus);
  cfg = quick(1);
  cfg.min_term_count = 1000;
  CHECK_THROWS_AS(fit_lda(docs, cfg), DegenerateCorpus);
  cfg = quick(1);
  cfg.burn_in = cfg.n_iterations;
  CHECK_THROWS_AS(fit_lda(docs, cfg), InvalidArgument);
  cfg = quick(1);
  cfg.k = 1;
  CHECK_THROWS_AS(fit_lda(docs, cfg), InvalidArgument);

  // Stopwords and rare terms never enter the vocabulary.
  docs = gen::planted_topics(src, 10);
  for (auto& d : docs) {
    d.tokens.push_back("the");
    d.tokens.push_back("the");
  }
  docs[0].tokens.push_back("rareword");
  const auto m = fit_lda(docs, quick(1), WordList{"the"});
  CHECK_FALSE(m.word_index("the"));
  CHECK_FALSE(m.word_index("rareword"));
  CHECK(m.word_index("a0"));
}

TEST_CASE("estimates are deterministic and order invariant") {
  gen::Source src(8);
  auto docs = gen::planted_topics(src, 30, 15, 40);
  const auto a = fit_lda(docs, quick(5));
  const auto b = fit_lda(docs, quick(5));
  CHECK(a.topic_word == b.topic_word);
  CHECK(a.doc_topic == b.doc_topic);
  CHECK(a.log_likelihood_trace == b.log_likelihood_trace);

  std::shuffle(docs.begin(), docs.end(), src.engine());
  const auto c = fit_lda(docs, quick(5));
  CHECK(c.topic_word == a.topic_word);
  std::map<std::string, std::vector<double>> by_id;
  for (std::size_t d = 0; d < a.doc_ids.size(); ++d) by_id[a.doc_ids[d]] = a.doc_topic[d];
  for (std::size_t d = 0; d < c.doc_ids.size(); ++d) {
    CHECK(c.doc_ids[d] == docs[d].doc_id);
    CHECK(c.doc_topic[d] == by_id[c.doc_ids[d]]);
  }
  CHECK(fit_lda(docs, quick(6)).log_likelihood_trace != a.log_likelihood_trace);
}

TEST_CASE("distributions and count conservation") {
  gen::Source src(12);
  auto docs = gen::planted_topics(src, 20, 10, 30);
  // Uneven lengths and some tokens the filter removes.
  for (std::size_t d = 0; d < docs.size(); ++d) docs[d].tokens.resize(10 + d);
  docs[3].tokens.push_back("once");
  LdaConfig cfg = quick(2);
  cfg.k = 3;
  std::size_t sweeps = 0, expected_tokens = 0;
  for (const auto& d : docs) expected_tokens += d.tokens.size();
  --expected_tokens;  // "once"
  const auto m = fit_lda(docs, cfg, {}, [&](const GibbsCounts& c) {
    check_count_conservation(c);
    const auto total = std::accumulate(c.topic_total.begin(), c.topic_total.end(), std::size_t{0});
    REQUIRE(total == expected_tokens);
    for (std::size_t d = 0; d < c.doc_topic.size(); ++d) {
      const auto n = std::accumulate(c.doc_topic[d].begin(), c.doc_topic[d].end(), std::size_t{0});
      REQUIRE(n == c.doc_length[d]);
    }
    for (std::size_t t = 0; t < c.k; ++t) {
      std::size_t words = 0;
      for (std::size_t w = 0; w < c.vocabulary_size; ++w) words += c.topic_word[t * c.vocabulary_size + w];
      REQUIRE(words == c.topic_total[t]);
    }
    REQUIRE(c.iteration == sweeps);
    ++sweeps;
  });
  CHECK(sweeps == cfg.n_iterations);
  CHECK(m.log_likelihood_trace.size() == cfg.n_iterations);
  CHECK(m.topic_word.size() == 3);
  CHECK(m.doc_topic.size() == docs.size());
  check_rows(m.topic_word);
  check_rows(m.doc_topic);
  CHECK(std::is_sorted(m.vocabulary.begin(), m.vocabulary.end()));
}

TEST_CASE("check_count_conservation rejects broken counts") {
  const std::vector<std::vector<std::uint32_t>> doc_topic = {{2, 1}};
  const std::vector<std::uint32_t> topic_word = {2, 0, 0, 1};
  const std::vector<std::uint32_t> topic_total = {2, 1};
  std::vector<std::size_t> doc_length = {3};
  GibbsCounts c{2, 2, doc_topic, topic_word, topic_total, doc_length, 0};
  CHECK_NOTHROW(check_count_conservation(c));
  doc_length[0] = 4;
  CHECK_THROWS(check_count_conservation(c));
  doc_length[0] = 3;
  const std::vector<std::uint32_t> bad_words = {1, 0, 0, 1};
  c.topic_word = bad_words;
  CHECK_THROWS(check_count_conservation(c));
}

TEST_CASE("log likelihood improves over the chain") {
  gen::Source src(21);
  const auto docs = gen::planted_topics(src);
  LdaConfig cfg;
  cfg.k = 2;
  const auto m = fit_lda(docs, cfg);
  const auto& ll = m.log_likelihood_trace;
  REQUIRE(ll.size() == 1000);
  const double first = std::accumulate(ll.begin(), ll.begin() + 100, 0.0) / 100.0;
  const double last = std::accumulate(ll.end() - 100, ll.end(), 0.0) / 100.0;
  CHECK(last >= first);
}

TEST_CASE("topic_terms ordering") {
  TopicModel m;
  m.k = 2;
  m.vocabulary = {"buy", "cut", "job", "rate"};
  m.topic_word = {{0.1, 0.3, 0.1, 0.5}, {0.25, 0.25, 0.25, 0.25}};
  using Terms = std::vector<std::pair<std::string, double>>;
  CHECK(topic_terms(m, 0, 3) == Terms{{"rate", 0.5}, {"cut", 0.3}, {"buy", 0.1}});
  CHECK(topic_terms(m, 0, 10).size() == 4);
  CHECK(topic_terms(m, 1, 2) == Terms{{"buy", 0.25}, {"cut", 0.25}});
  CHECK_THROWS_AS(topic_terms(m, 2, 3), IndexOutOfRange);
}

TEST_CASE("JSON view and artifact round trip") {
  gen::Source src(4);
  const auto docs = gen::planted_topics(src, 12, 10, 30);
  const auto m = fit_lda(docs, quick(4));

  const auto view = topics_view(m, 5);
  CHECK(view["k"] == 2);
  REQUIRE(view["topics"].size() == 2);
  CHECK(view["topics"][1]["id"] == 1);
  CHECK(view["topics"][0]["terms"].size() == 5);
  CHECK(view["topics"][0]["terms"][0]["term"] == topic_terms(m, 0, 1)[0].first);
  REQUIRE(view["doc_topics"].size() == docs.size());
  CHECK(view["doc_topics"][0]["doc_id"] == "doc0");
  CHECK(view["doc_topics"][0]["mixture"].get<std::vector<double>>() == m.doc_topic[0]);
  CHECK(topics_view(m)["topics"][0]["terms"].size() == std::min(kTopicViewTerms, m.vocabulary.size()));

  const auto path = std::filesystem::temp_directory_path() / "fednlp_test_topics.json";
  save_topic_model(m, path);
  const auto back = load_topic_model(path);
  std::filesystem::remove(path);
  CHECK(back.k == m.k);
  CHECK(back.vocabulary == m.vocabulary);
  CHECK(back.topic_word == m.topic_word);
  CHECK(back.doc_topic == m.doc_topic);
  CHECK(back.doc_ids == m.doc_ids);
  CHECK(topics_view(back).dump() == topics_view(m).dump());

  auto broken = topic_model_to_json(m);
  broken["model"]["vocabulary"] = {"z", "a"};
  CHECK_THROWS_AS(topic_model_from_json(broken), SchemaError);
  CHECK_THROWS_AS(load_topic_model("/nonexistent/topics.json"), IoError);
}

TEST_CASE("inference on unseen text") {
  gen::Source src(10);
  const auto docs = gen::planted_topics(src);
  const auto m = fit_lda(docs, quick(10));
  const std::size_t a_topic = planted_prefix(m, 0) == 'a' ? 0 : 1;

  const std::vector<std::string> a_text = {"a1", "a3", "a5", "a7", "a1", "a9", "unknown"};
  const auto mix = infer_topics(m, a_text);
  REQUIRE(mix.size() == 2);
  CHECK(std::abs(mix[0] + mix[1] - 1.0) < 1e-9);
  CHECK(mix[a_topic] > 0.5);
  CHECK(infer_topics(m, a_text) == mix);

  // Nothing in the vocabulary: the prior alone.
  const auto none = infer_topics(m, std::vector<std::string>{"zzz"});
  CHECK(std::abs(none[0] - 0.5) < 1e-12);
  CHECK(std::abs(none[1] - 0.5) < 1e-12);
}
