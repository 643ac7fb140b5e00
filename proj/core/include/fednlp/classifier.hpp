#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fednlp/corpus.hpp"
#include "fednlp/features.hpp"
#include "fednlp/gbdt.hpp"

namespace fednlp {

struct Prediction {
  ClassScores probs{};
  RateDecision label = RateDecision::Maintain;
};

// Argmax with ties resolved to the lowest class index.
Prediction make_prediction(const ClassScores& probs) noexcept;

class GbdtModel {
 public:
  GbdtModel() = default;
  GbdtModel(GbdtConfig config, TfidfModel tfidf, BoostedEnsemble ensemble)
      : config_(config), tfidf_(std::move(tfidf)), ensemble_(std::move(ensemble)) {}

  const GbdtConfig& config() const noexcept { return config_; }
  const TfidfModel& tfidf() const noexcept { return tfidf_; }
  const BoostedEnsemble& ensemble() const noexcept { return ensemble_; }

  // Throws EmptyDocument when `tokens` is empty.
  Prediction predict_tokens(std::span<const std::string> tokens) const;
  Prediction predict_vector(const SparseVector& x) const;
  Prediction predict_proba(const Document& doc) const;

 private:
  GbdtConfig config_;
  TfidfModel tfidf_;
  BoostedEnsemble ensemble_;
};

// Documents are ordered by id before fitting, so the result does not
// depend on input order. Throws InsufficientLabels (unlabeled document or
// fewer than two classes) and DegenerateCorpus (empty vocabulary).
GbdtModel train(std::span<const Document> docs, const GbdtConfig& cfg, const TfidfParams& tfidf_params = {},
                TrainReport* report = nullptr);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, kNumClasses> per_class{};
  double weighted_f1 = 0.0;
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [truth][predicted]
  std::size_t total = 0;
};

EvalReport evaluate_predictions(std::span<const RateDecision> truth, std::span<const RateDecision> predicted);
EvalReport evaluate(const GbdtModel& model, std::span<const Document> docs);

void to_json(nlohmann::json& j, const Prediction& p);
void to_json(nlohmann::json& j, const EvalReport& r);
void to_json(nlohmann::json& j, const GbdtConfig& c);
void from_json(const nlohmann::json& j, GbdtConfig& c);

// Fixed-width text table with the same four-decimal values as the JSON view.
std::string format_eval_table(const EvalReport& r);

// Binary model artifact: u32 format version, magic, u64 payload length,
// payload, u64 FNV-1a checksum of the payload. All integers little-endian.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const GbdtModel& model);
GbdtModel deserialize_model(std::string_view bytes);
void save_model(const GbdtModel& model, const std::filesystem::path& path);
GbdtModel load_model(const std::filesystem::path& path);

// Stable identifier for a model's content, e.g. "1-3f9a...".
std::string model_version_tag(const GbdtModel& model);

}  // namespace fednlp
