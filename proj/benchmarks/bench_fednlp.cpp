#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "fednlp/classifier.hpp"
#include "fednlp/explain.hpp"
#include "fednlp/sentiment.hpp"
#include "fednlp/summarize.hpp"
#include "fednlp/synthetic.hpp"
#include "fednlp/text.hpp"
#include "fednlp/topics.hpp"

using namespace fednlp;

namespace {

const SyntheticCorpus& corpus() {
  static const SyntheticCorpus c = make_synthetic({});
  return c;
}

const GbdtModel& model() {
  static const GbdtModel m = train(corpus().docs, GbdtConfig{});
  return m;
}

// Concatenated synthetic bodies, about n_words long.
std::string long_text(std::size_t n_words) {
  std::string text;
  std::size_t words = 0;
  for (std::size_t i = 0; words < n_words; i = (i + 1) % corpus().docs.size()) {
    text += corpus().docs[i].body;
    text += ' ';
    words += tokenize(corpus().docs[i].body).size();
  }
  return text;
}

void BM_Tokenize(benchmark::State& state) {
  const auto text = long_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(1000)->Arg(5000);

void BM_Segment(benchmark::State& state) {
  const auto text = long_text(5000);
  const SentenceSplitter splitter;
  for (auto _ : state) benchmark::DoNotOptimize(splitter.segment("d", text));
}
BENCHMARK(BM_Segment);

void BM_TfidfTransform(benchmark::State& state) {
  const auto tokens = tokenize(long_text(static_cast<std::size_t>(state.range(0))));
  const auto& tfidf = model().tfidf();
  for (auto _ : state) benchmark::DoNotOptimize(tfidf.transform(tokens));
}
BENCHMARK(BM_TfidfTransform)->Arg(200)->Arg(5000);

void BM_Predict(benchmark::State& state) {
  const auto tokens = tokenize(corpus().docs[0].body);
  const auto& m = model();
  for (auto _ : state) benchmark::DoNotOptimize(m.predict_tokens(tokens));
}
BENCHMARK(BM_Predict);

void BM_Sentiment(benchmark::State& state) {
  const auto tokens = tokenize(long_text(5000));
  for (auto _ : state) benchmark::DoNotOptimize(score_document(tokens, default_financial_lexicon()));
}
BENCHMARK(BM_Sentiment);

void BM_Explain(benchmark::State& state) {
  const auto doc = SentenceSplitter().segment("d", long_text(static_cast<std::size_t>(state.range(0))));
  ExplainConfig cfg;
  cfg.n_samples = 1000;
  const auto& m = model();
  for (auto _ : state) benchmark::DoNotOptimize(explain(m, doc, cfg));
}
BENCHMARK(BM_Explain)->Arg(200)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Summarize(benchmark::State& state) {
  const auto doc = SentenceSplitter().segment("d", long_text(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(summarize(doc, default_summary_length(doc.sentences.size())));
}
BENCHMARK(BM_Summarize)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_LdaFit(benchmark::State& state) {
  const SentenceSplitter splitter;
  std::vector<TokenizedDoc> docs;
  for (std::size_t i = 0; i < 200; ++i) docs.push_back(splitter.segment(corpus().docs[i].id, corpus().docs[i].body));
  LdaConfig cfg;
  cfg.k = static_cast<std::size_t>(state.range(0));
  cfg.n_iterations = 100;
  cfg.burn_in = 50;
  for (auto _ : state) benchmark::DoNotOptimize(fit_lda(docs, cfg, default_stopwords()));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.n_iterations));  // sweeps
}
BENCHMARK(BM_LdaFit)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
