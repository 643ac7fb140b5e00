#include <algorithm>
#include <string>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/service.hpp"
#include "fednlp/summarize.hpp"

namespace fednlp {

using nlohmann::json;

namespace {

constexpr std::string_view kTaskNames[] = {"stats", "sentiment", "summary", "topics_assign", "predict", "explain"};

json sentiment_json(std::span<const std::string> tokens, const Lexicon& lex) {
  if (tokens.empty()) return SentimentScore{};
  return score_document(tokens, lex);
}

// Explanation plus the text of each highlighted sentence.
json explanation_json(const Explanation& e, const TokenizedDoc& doc) {
  json j = e;
  auto& sentences = j["sentences"];
  for (std::size_t s = 0; s < sentences.size() && s < doc.sentence_text.size(); ++s) {
    sentences[s]["text"] = doc.sentence_text[s];
  }
  return j;
}

}  // namespace

std::string_view to_string(Task t) noexcept { return kTaskNames[static_cast<std::size_t>(t)]; }

std::optional<Task> parse_task(std::string_view s) noexcept {
  for (Task t : kAllTasks) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

Engine::Engine(Store store, EngineResources resources, EngineConfig config)
    : store_(std::move(store)),
      resources_(std::move(resources)),
      config_(std::move(config)),
      splitter_(resources_.abbreviations) {
  config_.explain.validate();
  if (resources_.model) model_version_ = model_version_tag(*resources_.model);

  listing_.reserve(store_.documents.size());
  std::vector<Document> docs;
  docs.reserve(store_.documents.size());
  for (std::size_t i = 0; i < store_.documents.size(); ++i) {
    const auto& sd = store_.documents[i];
    if (!by_id_.emplace(sd.doc.id, i).second) throw InvalidArgument("duplicate document id \"" + sd.doc.id + "\"");
    const auto tokens = tokenize(sd.doc.body);
    ListingInfo info;
    info.word_count = tokens.size();
    const json* pre = sd.precomputed.is_object() ? &sd.precomputed : nullptr;
    if (pre && pre->contains("sentiment") && (*pre)["sentiment"].contains("financial")) {
      info.financial_polarity = (*pre)["sentiment"]["financial"].value("polarity", 0.0);
    } else if (!tokens.empty()) {
      info.financial_polarity = score_document(tokens, resources_.financial).polarity;
    }
    listing_.push_back(info);
    docs.push_back(sd.doc);
  }

  std::vector<std::string> authors;
  for (const auto& d : docs) authors.push_back(d.author);
  std::sort(authors.begin(), authors.end());
  authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
  for (const auto& a : authors) series_.emplace(a, sentiment_series(docs, a, resources_.financial));
}

TokenizedDoc Engine::segment(std::string doc_id, std::string_view text) const {
  return splitter_.segment(std::move(doc_id), text);
}

json Engine::run_task(Task task, const TokenizedDoc& doc) const {
  switch (task) {
    case Task::stats:
      return term_stats(doc, resources_.stopwords, config_.wordcloud_terms);
    case Task::sentiment:
      if (doc.tokens.empty()) throw EmptyDocument();
      return json{{"generic", score_document(doc.tokens, resources_.generic)},
                  {"financial", score_document(doc.tokens, resources_.financial)}};
    case Task::summary:
      return summarize(doc, default_summary_length(doc.sentences.size()), resources_.stopwords);
    case Task::topics_assign: {
      if (!resources_.topics) throw Error("no topic model loaded");
      if (doc.tokens.empty()) throw EmptyDocument();
      const auto mixture =
          infer_topics(*resources_.topics, doc.tokens, config_.topic_inference_iterations, config_.seed);
      const auto top = static_cast<std::size_t>(std::max_element(mixture.begin(), mixture.end()) - mixture.begin());
      return json{{"mixture", mixture}, {"top_topic", top}};
    }
    case Task::predict:
      if (!resources_.model) throw Error("no model loaded");
      return resources_.model->predict_tokens(doc.tokens);
    case Task::explain: {
      if (!resources_.model) throw Error("no model loaded");
      const auto target = resources_.model->predict_tokens(doc.tokens).label;
      return explanation_json(explain(*resources_.model, doc, target, config_.explain), doc);
    }
  }
  throw InvalidArgument("unknown task");
}

json Engine::precompute(const Document& doc) const {
  const auto td = segment(doc.id, doc.body);
  json pre;
  pre["term_stats"] = run_task(Task::stats, td);
  pre["sentiment"] = {{"generic", sentiment_json(td.tokens, resources_.generic)},
                      {"financial", sentiment_json(td.tokens, resources_.financial)}};
  pre["summary"] = run_task(Task::summary, td);
  if (resources_.model && !td.tokens.empty()) {
    pre["prediction"] = run_task(Task::predict, td);
    pre["explanation"] = run_task(Task::explain, td);
  } else {
    pre["prediction"] = nullptr;
    pre["explanation"] = nullptr;
  }
  return pre;
}

const StoredDocument* Engine::find_document(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &store_.documents[it->second];
}

json Engine::summary_view(std::size_t index) const {
  const auto& d = store_.documents.at(index).doc;
  const auto& info = listing_.at(index);
  return json{{"id", d.id},
              {"title", d.title},
              {"author", d.author},
              {"category", std::string(to_string(d.category))},
              {"date", format_date(d.date)},
              {"word_count", info.word_count},
              {"financial_polarity", info.financial_polarity}};
}

json Engine::extension_view(const StoredDocument& sd) const {
  json pre = sd.precomputed.is_object() ? sd.precomputed : precompute(sd.doc);
  // Stores ingested without a model get predictions from the loaded one.
  if (resources_.model && pre.value("prediction", json()).is_null()) {
    const auto td = segment(sd.doc.id, sd.doc.body);
    if (!td.tokens.empty()) {
      pre["prediction"] = run_task(Task::predict, td);
      pre["explanation"] = run_task(Task::explain, td);
    }
  }
  return json{{"id", sd.doc.id}, {"body", sd.doc.body}, {"precomputed", std::move(pre)}};
}

const SentimentSeries* Engine::sentiment_series_for(std::string_view author) const {
  auto it = series_.find(author);
  return it == series_.end() ? nullptr : &it->second;
}

std::optional<std::string> Engine::model_version() const { return model_version_; }

Store build_store(const Engine& engine, std::vector<Document> docs, FfrSeries ffr) {
  Store store;
  store.ffr = std::move(ffr);
  store.documents.reserve(docs.size());
  for (auto& d : docs) {
    json pre = engine.precompute(d);
    store.documents.push_back({std::move(d), std::move(pre)});
  }
  return store;
}

}  // namespace fednlp
