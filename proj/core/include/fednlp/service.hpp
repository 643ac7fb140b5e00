#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fednlp/classifier.hpp"
#include "fednlp/corpus.hpp"
#include "fednlp/explain.hpp"
#include "fednlp/sentiment.hpp"
#include "fednlp/text.hpp"
#include "fednlp/topics.hpp"

namespace fednlp {

// ---------------------------------------------------------------------------
// File-backed store

struct StoredDocument {
  Document doc;
  // {term_stats, sentiment: {generic, financial}, summary, prediction, explanation};
  // prediction and explanation are null when ingest ran without a model.
  nlohmann::json precomputed;
};

struct Store {
  std::vector<StoredDocument> documents;
  FfrSeries ffr;
};

inline constexpr int kStoreFormatVersion = 1;

nlohmann::json store_to_json(const Store& store);
Store store_from_json(const nlohmann::json& j);
void save_store(const Store& store, const std::filesystem::path& path);
Store load_store(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Analysis engine

enum class Task { stats, sentiment, summary, topics_assign, predict, explain };

inline constexpr Task kAllTasks[] = {Task::stats,         Task::sentiment, Task::summary,
                                     Task::topics_assign, Task::predict,   Task::explain};

std::string_view to_string(Task t) noexcept;
std::optional<Task> parse_task(std::string_view s) noexcept;

struct EngineConfig {
  ExplainConfig explain;
  std::uint64_t seed = 42;  // topic inference on ad-hoc text
  std::size_t topic_inference_iterations = 100;
  std::size_t wordcloud_terms = kDefaultWordcloudTerms;
  std::size_t max_text_chars = 200000;
};

struct EngineResources {
  std::optional<GbdtModel> model;
  std::optional<TopicModel> topics;
  Lexicon generic = default_generic_lexicon();
  Lexicon financial = default_financial_lexicon();
  WordList stopwords = default_stopwords();
  WordList abbreviations = default_abbreviations();
};

// Immutable after construction; every method is safe to call concurrently.
class Engine {
 public:
  Engine(Store store, EngineResources resources, EngineConfig config = {});

  const Store& store() const noexcept { return store_; }
  const EngineConfig& config() const noexcept { return config_; }
  const EngineResources& resources() const noexcept { return resources_; }

  TokenizedDoc segment(std::string doc_id, std::string_view text) const;

  // Result object for one task; throws on failure (e.g. no model loaded).
  nlohmann::json run_task(Task task, const TokenizedDoc& doc) const;

  // Analytics stored with each corpus document at ingest time.
  nlohmann::json precompute(const Document& doc) const;

  const StoredDocument* find_document(std::string_view id) const;

  // {id, title, author, category, date, word_count, financial_polarity}
  nlohmann::json summary_view(std::size_t index) const;
  // {id, body, precomputed}; missing analytics are computed on the fly.
  nlohmann::json extension_view(const StoredDocument& doc) const;

  const SentimentSeries* sentiment_series_for(std::string_view author) const;
  std::optional<std::string> model_version() const;

 private:
  Store store_;
  EngineResources resources_;
  EngineConfig config_;
  SentenceSplitter splitter_;
  struct ListingInfo {
    std::size_t word_count = 0;
    double financial_polarity = 0.0;
  };

  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<ListingInfo> listing_;
  std::map<std::string, SentimentSeries, std::less<>> series_;
  std::optional<std::string> model_version_;
};

// Precomputed analytics for every document of a corpus.
Store build_store(const Engine& engine, std::vector<Document> docs, FfrSeries ffr);

// ---------------------------------------------------------------------------
// HTTP surface

struct HttpRequest {
  std::string method;
  std::string path;
  std::multimap<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

// POST /api/nlp/analyze body handler. Per-task timing is reported in the
// Server-Timing header, and in the body under "timing" only when the request
// sets "timing": true, so default responses are byte-stable.
HttpResponse handle_analyze(const Engine& engine, std::string_view body);

// Dispatches every route; transport-independent.
HttpResponse route(const Engine& engine, const HttpRequest& request);

struct ServeConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::optional<std::filesystem::path> static_dir;  // served under /
};

// Blocks until the server stops. Returns false if the port cannot be bound.
bool serve(const Engine& engine, const ServeConfig& config);

}  // namespace fednlp
