#pragma once

// Shape checks for the service's JSON responses. Each returns an empty
// string when the value conforms, otherwise the path of the first problem.

#include <cmath>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

namespace schema {

using nlohmann::json;

namespace detail {

// kNumber accepts any JSON number; kCount any nonnegative integer.
inline bool matches(const json& v, json::value_t type) {
  switch (type) {
    case json::value_t::number_float:
      return v.is_number();
    case json::value_t::number_unsigned:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    default:
      return v.type() == type;
  }
}

// Member lookup that yields null instead of asserting on absent keys.
inline const json& get(const json& j, const std::string& key) {
  static const json null;
  if (!j.is_object()) return null;
  auto it = j.find(key);
  return it == j.end() ? null : *it;
}

inline std::string need(const json& j, const std::string& path, const char* key, json::value_t type) {
  if (!j.is_object()) return path + ": not an object";
  auto it = j.find(key);
  if (it == j.end()) return path + "." + key + ": missing";
  if (!matches(*it, type)) return path + "." + key + ": wrong type " + it->type_name();
  return {};
}

inline std::string unit_interval(const json& v, const std::string& path, double lo = 0.0) {
  if (!v.is_number()) return path + ": not a number";
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo - 1e-12 || x > 1.0 + 1e-12) return path + ": out of range";
  return {};
}

}  // namespace detail

#define SCHEMA_TRY(expr)              \
  do {                                \
    if (auto e_ = (expr); !e_.empty()) return e_; \
  } while (0)

constexpr auto kString = json::value_t::string;
constexpr auto kNumber = json::value_t::number_float;
constexpr auto kCount = json::value_t::number_unsigned;
constexpr auto kArray = json::value_t::array;
constexpr auto kObject = json::value_t::object;
constexpr auto kBool = json::value_t::boolean;

inline std::string health(const json& j) {
  SCHEMA_TRY(detail::need(j, "health", "status", kString));
  if (!j.contains("model_version") || !(detail::get(j, "model_version").is_string() || detail::get(j, "model_version").is_null())) {
    return "health.model_version: must be string or null";
  }
  return {};
}

inline std::string authors(const json& j) {
  if (!j.is_array()) return "authors: not an array";
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = "authors[" + std::to_string(i) + "]";
    SCHEMA_TRY(detail::need(j[i], p, "name", kString));
    SCHEMA_TRY(detail::need(j[i], p, "doc_count", kCount));
  }
  return {};
}

inline std::string document_summary(const json& j, const std::string& p) {
  for (const char* k : {"id", "title", "author", "category", "date"}) SCHEMA_TRY(detail::need(j, p, k, kString));
  SCHEMA_TRY(detail::need(j, p, "word_count", kCount));
  SCHEMA_TRY(detail::need(j, p, "financial_polarity", kNumber));
  SCHEMA_TRY(detail::unit_interval(detail::get(j, "financial_polarity"), p + ".financial_polarity", -1.0));
  if (j.contains("body")) return p + ".body: listing must not carry bodies";
  return {};
}

inline std::string documents(const json& j) {
  if (!j.is_array()) return "documents: not an array";
  for (std::size_t i = 0; i < j.size(); ++i) SCHEMA_TRY(document_summary(j[i], "documents[" + std::to_string(i) + "]"));
  return {};
}

inline std::string sentiment_score(const json& j, const std::string& p) {
  SCHEMA_TRY(detail::need(j, p, "polarity", kNumber));
  SCHEMA_TRY(detail::need(j, p, "subjectivity", kNumber));
  SCHEMA_TRY(detail::need(j, p, "category_counts", kObject));
  SCHEMA_TRY(detail::need(j, p, "token_count", kCount));
  SCHEMA_TRY(detail::unit_interval(detail::get(j, "polarity"), p + ".polarity", -1.0));
  SCHEMA_TRY(detail::unit_interval(detail::get(j, "subjectivity"), p + ".subjectivity"));
  return {};
}

inline std::string term_stats(const json& j, const std::string& p) {
  SCHEMA_TRY(detail::need(j, p, "word_count", kCount));
  SCHEMA_TRY(detail::need(j, p, "sentence_count", kCount));
  SCHEMA_TRY(detail::need(j, p, "top_terms", kArray));
  for (const auto& t : detail::get(j, "top_terms")) {
    SCHEMA_TRY(detail::need(t, p + ".top_terms[]", "term", kString));
    SCHEMA_TRY(detail::need(t, p + ".top_terms[]", "count", kCount));
  }
  return {};
}

inline std::string summary(const json& j, const std::string& p) {
  SCHEMA_TRY(detail::need(j, p, "selected", kArray));
  SCHEMA_TRY(detail::need(j, p, "text", kString));
  SCHEMA_TRY(detail::need(j, p, "scores", kArray));
  return {};
}

inline std::string prediction(const json& j, const std::string& p) {
  SCHEMA_TRY(detail::need(j, p, "label", kString));
  SCHEMA_TRY(detail::need(j, p, "probs", kObject));
  double sum = 0.0;
  for (const char* k : {"lower", "maintain", "raise"}) {
    SCHEMA_TRY(detail::need(detail::get(j, "probs"), p + ".probs", k, kNumber));
    SCHEMA_TRY(detail::unit_interval(detail::get(detail::get(j, "probs"), k), p + ".probs." + k));
    sum += detail::get(detail::get(j, "probs"), k).get<double>();
  }
  if (std::abs(sum - 1.0) > 1e-9) return p + ".probs: does not sum to 1";
  return {};
}

inline std::string explanation(const json& j, const std::string& p) {
  SCHEMA_TRY(detail::need(j, p, "class", kString));
  SCHEMA_TRY(detail::need(j, p, "intercept", kNumber));
  SCHEMA_TRY(detail::need(j, p, "r2", kNumber));
  SCHEMA_TRY(detail::need(j, p, "features", kArray));
  SCHEMA_TRY(detail::need(j, p, "sentences", kArray));
  for (const auto& f : detail::get(j, "features")) {
    SCHEMA_TRY(detail::need(f, p + ".features[]", "token", kString));
    SCHEMA_TRY(detail::need(f, p + ".features[]", "weight", kNumber));
  }
  for (const auto& s : detail::get(j, "sentences")) {
    SCHEMA_TRY(detail::need(s, p + ".sentences[]", "index", kCount));
    SCHEMA_TRY(detail::unit_interval(detail::get(s, "intensity"), p + ".sentences[].intensity"));
  }
  return {};
}

inline std::string precomputed(const json& j, const std::string& p) {
  SCHEMA_TRY(term_stats(detail::get(j, "term_stats"), p + ".term_stats"));
  SCHEMA_TRY(detail::need(j, p, "sentiment", kObject));
  SCHEMA_TRY(sentiment_score(detail::get(detail::get(j, "sentiment"), "generic"), p + ".sentiment.generic"));
  SCHEMA_TRY(sentiment_score(detail::get(detail::get(j, "sentiment"), "financial"), p + ".sentiment.financial"));
  SCHEMA_TRY(summary(detail::get(j, "summary"), p + ".summary"));
  if (!j.contains("prediction") || !j.contains("explanation")) return p + ": prediction/explanation keys missing";
  if (!detail::get(j, "prediction").is_null()) SCHEMA_TRY(prediction(detail::get(j, "prediction"), p + ".prediction"));
  if (!detail::get(j, "explanation").is_null()) SCHEMA_TRY(explanation(detail::get(j, "explanation"), p + ".explanation"));
  return {};
}

inline std::string extension(const json& j) {
  SCHEMA_TRY(detail::need(j, "extension", "id", kString));
  SCHEMA_TRY(detail::need(j, "extension", "body", kString));
  SCHEMA_TRY(detail::need(j, "extension", "precomputed", kObject));
  return precomputed(detail::get(j, "precomputed"), "extension.precomputed");
}

inline std::string ffr(const json& j) {
  SCHEMA_TRY(detail::need(j, "ffr", "points", kArray));
  for (const auto& pt : detail::get(j, "points")) {
    SCHEMA_TRY(detail::need(pt, "ffr.points[]", "date", kString));
    SCHEMA_TRY(detail::need(pt, "ffr.points[]", "lower_bound", kNumber));
    SCHEMA_TRY(detail::need(pt, "ffr.points[]", "decision", kString));
  }
  return {};
}

inline std::string sentiment_series(const json& j) {
  SCHEMA_TRY(detail::need(j, "series", "author", kString));
  SCHEMA_TRY(detail::need(j, "series", "points", kArray));
  for (const auto& pt : detail::get(j, "points")) {
    SCHEMA_TRY(detail::need(pt, "series.points[]", "date", kString));
    SCHEMA_TRY(detail::need(pt, "series.points[]", "doc_id", kString));
    SCHEMA_TRY(detail::unit_interval(detail::get(pt, "polarity"), "series.points[].polarity", -1.0));
  }
  return {};
}

inline std::string topics(const json& j) {
  SCHEMA_TRY(detail::need(j, "topics", "k", kCount));
  SCHEMA_TRY(detail::need(j, "topics", "topics", kArray));
  SCHEMA_TRY(detail::need(j, "topics", "doc_topics", kArray));
  const auto k = detail::get(j, "k").get<std::size_t>();
  if (detail::get(j, "topics").size() != k) return "topics.topics: expected k entries";
  for (const auto& t : detail::get(j, "topics")) {
    SCHEMA_TRY(detail::need(t, "topics.topics[]", "id", kCount));
    SCHEMA_TRY(detail::need(t, "topics.topics[]", "terms", kArray));
    for (const auto& term : detail::get(t, "terms")) {
      SCHEMA_TRY(detail::need(term, "topics.topics[].terms[]", "term", kString));
      SCHEMA_TRY(detail::unit_interval(detail::get(term, "p"), "topics.topics[].terms[].p"));
    }
  }
  for (const auto& d : detail::get(j, "doc_topics")) {
    SCHEMA_TRY(detail::need(d, "topics.doc_topics[]", "doc_id", kString));
    SCHEMA_TRY(detail::need(d, "topics.doc_topics[]", "mixture", kArray));
    if (detail::get(d, "mixture").size() != k) return "topics.doc_topics[].mixture: expected k entries";
  }
  return {};
}

inline std::string error(const json& j) { return detail::need(j, "error", "error", kString); }

// Analyze response for the given task names; task errors are allowed.
inline std::string analyze(const json& j, std::initializer_list<const char*> tasks) {
  if (!j.is_object()) return "analyze: not an object";
  for (const char* t : tasks) {
    const std::string p = std::string("analyze.") + t;
    if (!j.contains(t)) return p + ": missing";
    const auto& r = detail::get(j, t);
    if (r.is_object() && r.contains("error")) {
      SCHEMA_TRY(error(r));
      continue;
    }
    const std::string name = t;
    if (name == "stats") {
      SCHEMA_TRY(term_stats(r, p));
    } else if (name == "sentiment") {
      SCHEMA_TRY(sentiment_score(detail::get(r, "generic"), p + ".generic"));
      SCHEMA_TRY(sentiment_score(detail::get(r, "financial"), p + ".financial"));
    } else if (name == "summary") {
      SCHEMA_TRY(summary(r, p));
    } else if (name == "topics_assign") {
      SCHEMA_TRY(detail::need(r, p, "mixture", kArray));
      SCHEMA_TRY(detail::need(r, p, "top_topic", kCount));
    } else if (name == "predict") {
      SCHEMA_TRY(prediction(r, p));
    } else if (name == "explain") {
      SCHEMA_TRY(explanation(r, p));
    }
  }
  return {};
}

#undef SCHEMA_TRY

}  // namespace schema
