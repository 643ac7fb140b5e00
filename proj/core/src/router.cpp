#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/service.hpp"

namespace fednlp {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

HttpResponse error_response(int status, std::string message) {
  return json_response(status, json{{"error", std::move(message)}});
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

// Empty values count as absent.
std::optional<std::string> query_param(const HttpRequest& req, const std::string& key) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

struct TaskOutcome {
  json result;
  double millis = 0.0;
};

TaskOutcome run_timed(const Engine& engine, Task task, const TokenizedDoc& doc) {
  const auto start = std::chrono::steady_clock::now();
  TaskOutcome out;
  try {
    out.result = engine.run_task(task, doc);
  } catch (const std::exception& e) {
    out.result = json{{"error", e.what()}};
  }
  out.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

HttpResponse list_documents(const Engine& engine, const HttpRequest& req) {
  const auto author = query_param(req, "author");
  std::optional<Category> category;
  if (auto c = query_param(req, "category")) {
    category = parse_category(*c);
    if (!category) return error_response(400, "unknown category \"" + *c + "\"");
  }
  std::optional<Date> from, to;
  if (auto f = query_param(req, "from")) {
    from = parse_date(*f);
    if (!from) return error_response(400, "from is not a YYYY-MM-DD date: \"" + *f + "\"");
  }
  if (auto t = query_param(req, "to")) {
    to = parse_date(*t);
    if (!to) return error_response(400, "to is not a YYYY-MM-DD date: \"" + *t + "\"");
  }

  const auto& docs = engine.store().documents;
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i].doc;
    if (author && d.author != *author) continue;
    if (category && d.category != *category) continue;
    if (from && d.date < *from) continue;
    if (to && d.date > *to) continue;
    hits.push_back(i);
  }
  std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = docs[a].doc;
    const auto& db = docs[b].doc;
    if (da.date != db.date) return da.date > db.date;
    return da.id < db.id;
  });
  json out = json::array();
  for (std::size_t i : hits) out.push_back(engine.summary_view(i));
  return json_response(200, out);
}

HttpResponse list_authors(const Engine& engine) {
  std::map<std::string, std::size_t> counts;
  for (const auto& sd : engine.store().documents) ++counts[sd.doc.author];
  json out = json::array();
  for (const auto& [name, n] : counts) out.push_back({{"name", name}, {"doc_count", n}});
  return json_response(200, out);
}

}  // namespace

HttpResponse handle_analyze(const Engine& engine, std::string_view body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error&) {
    return error_response(400, "request body is not valid JSON");
  }
  if (!req.is_object()) return error_response(400, "request body must be a JSON object");

  auto text_it = req.find("text");
  if (text_it == req.end() || !text_it->is_string()) return error_response(400, "text must be a string");
  const auto& text = text_it->get_ref<const std::string&>();
  if (utf8_length(text) > engine.config().max_text_chars) {
    return error_response(413, "text exceeds " + std::to_string(engine.config().max_text_chars) + " characters");
  }
  if (is_blank(text)) return error_response(400, "text is empty");

  auto tasks_it = req.find("tasks");
  if (tasks_it == req.end() || !tasks_it->is_array() || tasks_it->empty()) {
    return error_response(400, "tasks must be a nonempty array");
  }
  std::vector<Task> tasks;
  for (const auto& t : *tasks_it) {
    if (!t.is_string()) return error_response(400, "task names must be strings");
    auto task = parse_task(t.get_ref<const std::string&>());
    if (!task) return error_response(400, "unknown task \"" + t.get<std::string>() + "\"");
    if (std::find(tasks.begin(), tasks.end(), *task) == tasks.end()) tasks.push_back(*task);
  }
  bool include_timing = false;
  if (auto it = req.find("timing"); it != req.end()) {
    if (!it->is_boolean()) return error_response(400, "timing must be a boolean");
    include_timing = it->get<bool>();
  }

  const TokenizedDoc doc = engine.segment("request", text);
  std::vector<std::future<TaskOutcome>> pending;
  pending.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto policy = i + 1 == tasks.size() ? std::launch::deferred : std::launch::async;
    pending.push_back(std::async(policy, run_timed, std::cref(engine), tasks[i], std::cref(doc)));
  }

  json out = json::object();
  json timing = json::object();
  std::string server_timing;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto outcome = pending[i].get();
    const std::string name(to_string(tasks[i]));
    out[name] = std::move(outcome.result);
    timing[name] = outcome.millis;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s;dur=%.3f", name.c_str(), outcome.millis);
    if (!server_timing.empty()) server_timing += ", ";
    server_timing += buf;
  }
  if (include_timing) out["timing"] = std::move(timing);

  HttpResponse r = json_response(200, out);
  r.headers.emplace_back("Server-Timing", server_timing);
  return r;
}

HttpResponse route(const Engine& engine, const HttpRequest& req) {
  const std::string_view path = req.path;
  const bool get = req.method == "GET" || req.method == "HEAD";

  if (path == "/api/nlp/analyze") {
    if (req.method != "POST") return error_response(405, "use POST for /api/nlp/analyze");
    return handle_analyze(engine, req.body);
  }
  if (!path.starts_with("/api/")) return error_response(404, "no route for " + req.path);
  if (!get) return error_response(405, "method " + req.method + " not allowed for " + req.path);

  if (path == "/api/health") {
    const auto version = engine.model_version();
    return json_response(200, json{{"status", "ok"}, {"model_version", version ? json(*version) : json(nullptr)}});
  }
  if (path == "/api/authors") return list_authors(engine);
  if (path == "/api/documents") return list_documents(engine, req);
  if (path.starts_with("/api/documents/") && path.ends_with("/extension")) {
    constexpr std::size_t prefix = std::string_view("/api/documents/").size();
    constexpr std::size_t suffix = std::string_view("/extension").size();
    if (path.size() > prefix + suffix) {
      const auto id = path.substr(prefix, path.size() - prefix - suffix);
      const auto* doc = engine.find_document(id);
      if (!doc) return error_response(404, "unknown document \"" + std::string(id) + "\"");
      try {
        return json_response(200, engine.extension_view(*doc));
      } catch (const std::exception& e) {
        return error_response(500, e.what());
      }
    }
  }
  if (path == "/api/ffr") return json_response(200, json{{"points", engine.store().ffr}});
  if (path == "/api/sentiment-series") {
    const auto author = query_param(req, "author");
    if (!author) return error_response(400, "author query parameter is required");
    const auto* series = engine.sentiment_series_for(*author);
    if (!series) return error_response(404, "unknown author \"" + *author + "\"");
    return json_response(200, *series);
  }
  if (path == "/api/topics") {
    if (!engine.resources().topics) return error_response(404, "no topic model loaded");
    return json_response(200, topics_view(*engine.resources().topics));
  }
  return error_response(404, "no route for " + req.path);
}

}  // namespace fednlp
