#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fednlp/classifier.hpp"
#include "fednlp/corpus.hpp"
#include "fednlp/explain.hpp"
#include "fednlp/features.hpp"
#include "fednlp/gbdt.hpp"
#include "fednlp/service.hpp"
#include "fednlp/topics.hpp"

namespace fednlp {

struct SplitPolicy {
  enum class Kind { chronological, random };
  Kind kind = Kind::chronological;
  std::uint64_t seed = 42;  // random splits only
  double test_fraction = 0.2;

  void validate() const;
};

struct PipelinePaths {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> ffr;
  std::optional<std::filesystem::path> lexicon_generic;
  std::optional<std::filesystem::path> lexicon_financial;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> abbreviations;
  std::optional<std::filesystem::path> model;   // default <output_dir>/model.bin
  std::optional<std::filesystem::path> topics;  // default <output_dir>/topics.json
  std::filesystem::path output_dir = ".";
};

struct PipelineConfig {
  PipelinePaths paths;
  TfidfParams tfidf;
  GbdtConfig gbdt;
  LdaConfig lda;
  ExplainConfig explain;
  SplitPolicy split;
  std::uint64_t seed = 42;  // ad-hoc analyze requests
  int port = 8080;

  void validate() const;
  std::filesystem::path model_path() const;
  std::filesystem::path topics_path() const;
};

// Unknown keys are rejected so that typos do not silently fall back to
// defaults. Relative paths resolve against `base_dir`.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

inline constexpr const char* kStoreFile = "store.json";
inline constexpr const char* kModelFile = "model.bin";
inline constexpr const char* kTopicsFile = "topics.json";
inline constexpr const char* kEvalFile = "eval.json";
inline constexpr const char* kTrainReportFile = "train_report.json";

struct CorpusSplit {
  std::vector<Document> train;
  std::vector<Document> test;
};

// Labeled documents only. Chronological: the latest test_fraction by
// (date, id) are held out. Random: a seeded shuffle of the id-sorted set.
// At least one document lands on each side.
CorpusSplit split_corpus(std::span<const Document> docs, const SplitPolicy& policy);

// Lexicons, stopwords and abbreviations from the configured paths, falling
// back to the bundled defaults.
EngineResources load_resources(const PipelineConfig& cfg);
EngineConfig engine_config(const PipelineConfig& cfg);

nlohmann::json train_report_json(const TrainReport& report, const GbdtConfig& cfg, std::size_t n_train,
                                 std::size_t n_test);

}  // namespace fednlp
