// fednlp: pipeline driver (ingest, train, evaluate, topics, serve, analyze).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fednlp/classifier.hpp"
#include "fednlp/corpus.hpp"
#include "fednlp/errors.hpp"
#include "fednlp/pipeline.hpp"
#include "fednlp/service.hpp"
#include "fednlp/synthetic.hpp"
#include "fednlp/topics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fednlp;

namespace {

struct Overrides {
  std::string config;
  std::string output_dir;
  std::string corpus;
  std::string ffr;
  std::string model;
  std::string topics;
  std::string lexicon_generic;
  std::string lexicon_financial;
  std::optional<std::uint64_t> seed;
  std::optional<int> port;
  std::optional<double> test_fraction;
  std::string split;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Pipeline config (JSON)");
  cmd->add_option("--output-dir", o.output_dir, "Directory for artifacts");
  cmd->add_option("--corpus", o.corpus, "Corpus JSON (or store.json for serve)");
  cmd->add_option("--model", o.model, "Model artifact");
  cmd->add_option("--topics", o.topics, "Topic model artifact");
  cmd->add_option("--lexicon-generic", o.lexicon_generic, "Generic sentiment lexicon CSV");
  cmd->add_option("--lexicon-financial", o.lexicon_financial, "Financial sentiment lexicon CSV");
  cmd->add_option("--seed", o.seed, "Seed for ad-hoc analysis");
}

void add_split(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--split", o.split, "chronological or random")->check(CLI::IsMember({"chronological", "random"}));
  cmd->add_option("--test-fraction", o.test_fraction, "Held-out fraction in (0, 0.5]");
}

// Explicit model/topics paths must load; defaults are used only if present.
struct Resolved {
  PipelineConfig cfg;
  bool model_explicit = false;
  bool topics_explicit = false;
};

Resolved resolve(const Overrides& o) {
  Resolved r;
  if (!o.config.empty()) r.cfg = load_pipeline_config(o.config);
  auto& p = r.cfg.paths;
  r.model_explicit = p.model.has_value() || !o.model.empty();
  r.topics_explicit = p.topics.has_value() || !o.topics.empty();
  if (!o.output_dir.empty()) p.output_dir = o.output_dir;
  if (!o.corpus.empty()) p.corpus = o.corpus;
  if (!o.ffr.empty()) p.ffr = o.ffr;
  if (!o.model.empty()) p.model = o.model;
  if (!o.topics.empty()) p.topics = o.topics;
  if (!o.lexicon_generic.empty()) p.lexicon_generic = o.lexicon_generic;
  if (!o.lexicon_financial.empty()) p.lexicon_financial = o.lexicon_financial;
  if (o.seed) r.cfg.seed = *o.seed;
  if (o.port) r.cfg.port = *o.port;
  if (o.test_fraction) r.cfg.split.test_fraction = *o.test_fraction;
  if (o.split == "random") r.cfg.split.kind = SplitPolicy::Kind::random;
  if (o.split == "chronological") r.cfg.split.kind = SplitPolicy::Kind::chronological;
  r.cfg.validate();
  return r;
}

const fs::path& require_corpus(const PipelineConfig& cfg) {
  if (!cfg.paths.corpus) throw InvalidArgument("no corpus given (use --corpus or paths.corpus)");
  return *cfg.paths.corpus;
}

std::optional<GbdtModel> maybe_model(const Resolved& r) {
  const auto path = r.cfg.model_path();
  if (!r.model_explicit && !fs::exists(path)) return std::nullopt;
  return load_model(path);
}

std::optional<TopicModel> maybe_topics(const Resolved& r) {
  const auto path = r.cfg.topics_path();
  if (!r.topics_explicit && !fs::exists(path)) return std::nullopt;
  return load_topic_model(path);
}

void ensure_output_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.paths.output_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.paths.output_dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

int cmd_make_synthetic(const Overrides& o, const SyntheticSpec& spec) {
  auto r = resolve(o);
  ensure_output_dir(r.cfg);
  const auto corpus = make_synthetic(spec);
  const auto dir = r.cfg.paths.output_dir;
  save_corpus(dir / "corpus.json", corpus.docs);
  write_json(dir / "ffr.json", corpus.ffr);
  std::cout << "wrote " << corpus.docs.size() << " documents to " << (dir / "corpus.json").string() << "\n";
  return 0;
}

int cmd_ingest(const Overrides& o) {
  auto r = resolve(o);
  auto docs = load_corpus(require_corpus(r.cfg));
  FfrSeries ffr;
  if (r.cfg.paths.ffr) ffr = load_ffr(*r.cfg.paths.ffr);
  EngineResources res = load_resources(r.cfg);
  res.model = maybe_model(r);
  const Engine engine(Store{}, std::move(res), engine_config(r.cfg));
  const auto store = build_store(engine, std::move(docs), std::move(ffr));
  ensure_output_dir(r.cfg);
  const auto path = r.cfg.paths.output_dir / kStoreFile;
  save_store(store, path);
  std::cout << "wrote " << store.documents.size() << " documents to " << path.string() << "\n";
  return 0;
}

int cmd_train(const Overrides& o) {
  auto r = resolve(o);
  const auto docs = load_corpus(require_corpus(r.cfg));
  const auto split = split_corpus(docs, r.cfg.split);
  TrainReport report;
  const auto model = train(split.train, r.cfg.gbdt, r.cfg.tfidf, &report);
  ensure_output_dir(r.cfg);
  save_model(model, r.cfg.model_path());
  write_json(r.cfg.paths.output_dir / kTrainReportFile,
             train_report_json(report, r.cfg.gbdt, split.train.size(), split.test.size()));
  std::cout << "trained on " << split.train.size() << " documents, training accuracy "
            << report.training_accuracy << "; model " << r.cfg.model_path().string() << "\n";
  return 0;
}

int cmd_evaluate(const Overrides& o) {
  auto r = resolve(o);
  const auto model = load_model(r.cfg.model_path());
  const auto docs = load_corpus(require_corpus(r.cfg));
  const auto split = split_corpus(docs, r.cfg.split);
  const auto report = evaluate(model, split.test);
  ensure_output_dir(r.cfg);
  write_json(r.cfg.paths.output_dir / kEvalFile, report);
  std::cout << format_eval_table(report);
  return 0;
}

int cmd_topics(const Overrides& o, std::optional<std::size_t> k, std::optional<std::size_t> iterations) {
  auto r = resolve(o);
  if (k) r.cfg.lda.k = *k;
  if (iterations) {
    r.cfg.lda.n_iterations = *iterations;
    r.cfg.lda.burn_in = std::min(r.cfg.lda.burn_in, *iterations / 2);
  }
  r.cfg.lda.validate();
  const auto docs = load_corpus(require_corpus(r.cfg));
  const EngineResources res = load_resources(r.cfg);
  const SentenceSplitter splitter(res.abbreviations);
  std::vector<TokenizedDoc> tokenized;
  tokenized.reserve(docs.size());
  for (const auto& d : docs) tokenized.push_back(splitter.segment(d.id, d.body));
  const auto model = fit_lda(tokenized, r.cfg.lda, res.stopwords);
  ensure_output_dir(r.cfg);
  save_topic_model(model, r.cfg.topics_path());
  std::cout << "fitted " << model.k << " topics over " << model.vocabulary.size() << " terms; wrote "
            << r.cfg.topics_path().string() << "\n";
  return 0;
}

int cmd_serve(Overrides o, const std::string& host, const std::string& static_dir) {
  auto r = resolve(o);
  Store store = load_store(require_corpus(r.cfg));
  if (r.cfg.paths.ffr) store.ffr = load_ffr(*r.cfg.paths.ffr);
  EngineResources res = load_resources(r.cfg);
  r.model_explicit = true;  // serving requires a model
  res.model = maybe_model(r);
  res.topics = maybe_topics(r);
  const Engine engine(std::move(store), std::move(res), engine_config(r.cfg));
  ServeConfig sc;
  sc.host = host;
  sc.port = r.cfg.port;
  if (!static_dir.empty()) sc.static_dir = static_dir;
  std::cerr << "fednlp: serving " << engine.store().documents.size() << " documents on " << host << ":" << sc.port
            << "\n";
  if (!serve(engine, sc)) throw IoError("cannot listen on " + host + ":" + std::to_string(sc.port));
  return 0;
}

int cmd_analyze(const Overrides& o, std::string text, const std::string& text_file, const std::string& tasks,
                bool timing) {
  auto r = resolve(o);
  if (!text_file.empty()) text = read_file(text_file);
  EngineResources res = load_resources(r.cfg);
  res.model = maybe_model(r);
  res.topics = maybe_topics(r);
  const Engine engine(Store{}, std::move(res), engine_config(r.cfg));

  json task_list = json::array();
  std::stringstream ss(tasks);
  for (std::string t; std::getline(ss, t, ',');) {
    if (!t.empty()) task_list.push_back(t);
  }
  json req{{"text", text}, {"tasks", task_list}};
  if (timing) req["timing"] = true;
  const auto resp = handle_analyze(engine, req.dump());
  if (resp.status != 200) throw InvalidArgument(json::parse(resp.body).value("error", resp.body));
  std::cout << json::parse(resp.body).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Central-bank communication analytics pipeline"};
  app.require_subcommand(1);

  Overrides o;

  auto* synth = app.add_subcommand("make-synthetic", "Write a planted-cue corpus and FFR series");
  add_common(synth, o);
  SyntheticSpec spec;
  synth->add_option("--n-docs", spec.n_docs, "Number of documents");
  synth->add_option("--cue-noise", spec.cue_noise, "Fraction of documents with distractor cues");
  synth->add_option("--label-flip", spec.label_flip, "Fraction of labels reassigned");
  synth->add_option("--corpus-seed", spec.seed, "Generator seed");

  auto* ingest = app.add_subcommand("ingest", "Build store.json with precomputed analytics");
  add_common(ingest, o);
  ingest->add_option("--ffr", o.ffr, "FFR series JSON");

  auto* train_cmd = app.add_subcommand("train", "Train the classifier on the training split");
  add_common(train_cmd, o);
  add_split(train_cmd, o);

  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate the model on the held-out split");
  add_common(eval_cmd, o);
  add_split(eval_cmd, o);

  auto* topics_cmd = app.add_subcommand("topics", "Fit the topic model");
  add_common(topics_cmd, o);
  std::optional<std::size_t> k, iterations;
  topics_cmd->add_option("--k", k, "Number of topics");
  topics_cmd->add_option("--iterations", iterations, "Gibbs sweeps");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  add_common(serve_cmd, o);
  serve_cmd->add_option("--ffr", o.ffr, "FFR series JSON overriding the store's");
  serve_cmd->add_option("--port", o.port, "Port (default 8080)");
  std::string host = "0.0.0.0";
  std::string static_dir;
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--static-dir", static_dir, "Static files served under /");

  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze ad-hoc text and print the response JSON");
  add_common(analyze_cmd, o);
  std::string text, text_file;
  std::string tasks = "stats,sentiment,summary,topics_assign,predict,explain";
  bool timing = false;
  auto* text_opt = analyze_cmd->add_option("--text", text, "Text to analyze");
  analyze_cmd->add_option("--text-file", text_file, "Read the text from a file")->excludes(text_opt);
  analyze_cmd->add_option("--tasks", tasks, "Comma-separated tasks");
  analyze_cmd->add_flag("--timing", timing, "Include per-task timing in the output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_make_synthetic(o, spec);
    if (*ingest) return cmd_ingest(o);
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_evaluate(o);
    if (*topics_cmd) return cmd_topics(o, k, iterations);
    if (*serve_cmd) return cmd_serve(o, host, static_dir);
    if (*analyze_cmd) return cmd_analyze(o, text, text_file, tasks, timing);
  } catch (const std::exception& e) {
    std::cerr << "fednlp: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
