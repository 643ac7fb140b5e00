#include "fednlp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/random.hpp"

namespace fednlp {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& detail) {
  throw InvalidArgument("config key \"" + key + "\": " + detail);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key, "wrong type");
  }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (it->is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v, where);
  out = v;
}

void read_path(const json& j, const char* key, std::optional<std::filesystem::path>& out,
               const std::filesystem::path& base) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  if (!it->is_string()) config_error(std::string("paths.") + key, "expected a string");
  std::filesystem::path p = it->get<std::string>();
  out = p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void SplitPolicy::validate() const {
  if (!(test_fraction > 0.0 && test_fraction <= 0.5)) throw InvalidArgument("test_fraction must lie in (0, 0.5]");
}

void PipelineConfig::validate() const {
  gbdt.validate();
  lda.validate();
  explain.validate();
  split.validate();
  if (port < 0 || port > 65535) throw InvalidArgument("port must lie in [0, 65535]");
}

std::filesystem::path PipelineConfig::model_path() const { return paths.model.value_or(paths.output_dir / kModelFile); }

std::filesystem::path PipelineConfig::topics_path() const {
  return paths.topics.value_or(paths.output_dir / kTopicsFile);
}

PipelineConfig parse_pipeline_config(const json& j, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  check_keys(j, "", {"paths", "tfidf", "gbdt", "lda", "explain", "split", "seed", "port"});

  if (auto it = j.find("paths"); it != j.end()) {
    const json& p = *it;
    check_keys(p, "paths",
               {"corpus", "ffr", "lexicon_generic", "lexicon_financial", "stopwords", "abbreviations", "model",
                "topics", "output_dir"});
    read_path(p, "corpus", cfg.paths.corpus, base_dir);
    read_path(p, "ffr", cfg.paths.ffr, base_dir);
    read_path(p, "lexicon_generic", cfg.paths.lexicon_generic, base_dir);
    read_path(p, "lexicon_financial", cfg.paths.lexicon_financial, base_dir);
    read_path(p, "stopwords", cfg.paths.stopwords, base_dir);
    read_path(p, "abbreviations", cfg.paths.abbreviations, base_dir);
    read_path(p, "model", cfg.paths.model, base_dir);
    read_path(p, "topics", cfg.paths.topics, base_dir);
    std::optional<std::filesystem::path> out;
    read_path(p, "output_dir", out, base_dir);
    if (out) cfg.paths.output_dir = *out;
  }
  if (auto it = j.find("tfidf"); it != j.end()) {
    check_keys(*it, "tfidf", {"min_df", "max_features"});
    read(*it, "min_df", cfg.tfidf.min_df, "tfidf");
    read_optional(*it, "max_features", cfg.tfidf.max_features, "tfidf");
  }
  if (auto it = j.find("gbdt"); it != j.end()) {
    check_keys(*it, "gbdt",
               {"n_rounds", "learning_rate", "max_depth", "min_leaf_samples", "l2_leaf_reg", "feature_subsample",
                "seed"});
    try {
      cfg.gbdt = it->get<GbdtConfig>();
    } catch (const json::exception&) {
      config_error("gbdt", "wrong type");
    }
  }
  if (auto it = j.find("lda"); it != j.end()) {
    const json& l = *it;
    check_keys(l, "lda", {"k", "alpha", "beta", "n_iterations", "burn_in", "sample_lag", "min_term_count", "seed"});
    read(l, "k", cfg.lda.k, "lda");
    read_optional(l, "alpha", cfg.lda.alpha, "lda");
    read(l, "beta", cfg.lda.beta, "lda");
    read(l, "n_iterations", cfg.lda.n_iterations, "lda");
    read(l, "burn_in", cfg.lda.burn_in, "lda");
    read(l, "sample_lag", cfg.lda.sample_lag, "lda");
    read(l, "min_term_count", cfg.lda.min_term_count, "lda");
    read(l, "seed", cfg.lda.seed, "lda");
  }
  if (auto it = j.find("explain"); it != j.end()) {
    const json& e = *it;
    check_keys(e, "explain", {"n_samples", "kernel_width", "ridge_lambda", "top_k", "seed", "exhaustive_max_tokens"});
    read(e, "n_samples", cfg.explain.n_samples, "explain");
    read_optional(e, "kernel_width", cfg.explain.kernel_width, "explain");
    read(e, "ridge_lambda", cfg.explain.ridge_lambda, "explain");
    read(e, "top_k", cfg.explain.top_k, "explain");
    read(e, "seed", cfg.explain.seed, "explain");
    read(e, "exhaustive_max_tokens", cfg.explain.exhaustive_max_tokens, "explain");
  }
  if (auto it = j.find("split"); it != j.end()) {
    const json& s = *it;
    check_keys(s, "split", {"policy", "seed", "test_fraction"});
    std::string policy = "chronological";
    read(s, "policy", policy, "split");
    if (policy == "chronological") {
      cfg.split.kind = SplitPolicy::Kind::chronological;
    } else if (policy == "random") {
      cfg.split.kind = SplitPolicy::Kind::random;
    } else {
      config_error("split.policy", "expected \"chronological\" or \"random\"");
    }
    read(s, "seed", cfg.split.seed, "split");
    read(s, "test_fraction", cfg.split.test_fraction, "split");
  }
  read(j, "seed", cfg.seed, "");
  read(j, "port", cfg.port, "");
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_json_file(path), path.parent_path());
}

CorpusSplit split_corpus(std::span<const Document> docs, const SplitPolicy& policy) {
  policy.validate();
  std::vector<Document> labeled;
  for (const auto& d : docs) {
    if (d.label) labeled.push_back(d);
  }
  if (labeled.size() < 2) throw InsufficientLabels("a train/test split needs at least two labeled documents");

  if (policy.kind == SplitPolicy::Kind::chronological) {
    std::stable_sort(labeled.begin(), labeled.end(), [](const Document& a, const Document& b) {
      if (a.date != b.date) return a.date < b.date;
      return a.id < b.id;
    });
  } else {
    std::sort(labeled.begin(), labeled.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
    Rng rng(derive_seed(policy.seed, 0x5917));
    for (std::size_t i = labeled.size(); i > 1; --i) std::swap(labeled[i - 1], labeled[rng.below(i)]);
  }

  const auto n = labeled.size();
  auto n_test = static_cast<std::size_t>(std::llround(policy.test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  CorpusSplit split;
  split.train.assign(std::make_move_iterator(labeled.begin()),
                     std::make_move_iterator(labeled.end() - static_cast<std::ptrdiff_t>(n_test)));
  split.test.assign(std::make_move_iterator(labeled.end() - static_cast<std::ptrdiff_t>(n_test)),
                    std::make_move_iterator(labeled.end()));
  return split;
}

EngineResources load_resources(const PipelineConfig& cfg) {
  EngineResources r;
  if (cfg.paths.lexicon_generic) r.generic = load_lexicon(*cfg.paths.lexicon_generic, "generic");
  if (cfg.paths.lexicon_financial) r.financial = load_lexicon(*cfg.paths.lexicon_financial, "financial");
  if (cfg.paths.stopwords) r.stopwords = load_word_list(*cfg.paths.stopwords);
  if (cfg.paths.abbreviations) r.abbreviations = load_word_list(*cfg.paths.abbreviations);
  return r;
}

EngineConfig engine_config(const PipelineConfig& cfg) {
  EngineConfig e;
  e.explain = cfg.explain;
  e.seed = cfg.seed;
  return e;
}

json train_report_json(const TrainReport& report, const GbdtConfig& cfg, std::size_t n_train, std::size_t n_test) {
  return json{{"config", cfg},
              {"n_train", n_train},
              {"n_test", n_test},
              {"training_accuracy", report.training_accuracy},
              {"log_loss", report.log_loss}};
}

}  // namespace fednlp
