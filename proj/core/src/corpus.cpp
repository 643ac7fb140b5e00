#include "fednlp/corpus.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"

namespace fednlp {

using nlohmann::json;

RateDecision decision_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumClasses)) {
    throw IndexOutOfRange("class index " + std::to_string(index) + " out of range");
  }
  return static_cast<RateDecision>(index);
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::speech: return "speech";
    case Category::minutes: return "minutes";
    case Category::transcript: return "transcript";
    case Category::press_release: return "press_release";
  }
  return "speech";
}

std::string_view to_string(RateDecision d) noexcept {
  switch (d) {
    case RateDecision::Lower: return "lower";
    case RateDecision::Maintain: return "maintain";
    case RateDecision::Raise: return "raise";
  }
  return "maintain";
}

std::optional<Category> parse_category(std::string_view s) noexcept {
  for (auto c : {Category::speech, Category::minutes, Category::transcript, Category::press_release}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<RateDecision> parse_decision(std::string_view s) noexcept {
  for (auto d : kAllDecisions) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

std::optional<Date> parse_date(std::string_view s) noexcept {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto number = [&](std::size_t pos, std::size_t len, int& out) {
    const char* first = s.data() + pos;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
      if (*p < '0' || *p > '9') return false;
    }
    return std::from_chars(first, last, out).ec == std::errc{};
  };
  int y = 0, m = 0, d = 0;
  if (!number(0, 4, y) || !number(5, 2, m) || !number(8, 2, d)) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(0, "<file>", path.string() + " is not valid JSON: " + e.what());
  }
}

namespace {

const std::string& require_string(const json& rec, std::size_t index, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end()) throw SchemaError(index, field, "missing");
  if (!it->is_string()) throw SchemaError(index, field, "expected a string");
  return it->get_ref<const std::string&>();
}

Document parse_document(const json& rec, std::size_t index) {
  if (!rec.is_object()) throw SchemaError(index, "<record>", "expected an object");
  Document doc;
  doc.id = require_string(rec, index, "id");
  if (doc.id.empty()) throw SchemaError(index, "id", "must be nonempty");
  doc.title = require_string(rec, index, "title");
  doc.author = require_string(rec, index, "author");
  const auto& cat = require_string(rec, index, "category");
  auto category = parse_category(cat);
  if (!category) throw SchemaError(index, "category", "unknown category \"" + cat + "\"");
  doc.category = *category;
  const auto& date = require_string(rec, index, "date");
  auto parsed = parse_date(date);
  if (!parsed) throw SchemaError(index, "date", "not an ISO-8601 calendar date: \"" + date + "\"");
  doc.date = *parsed;
  doc.source_url = require_string(rec, index, "source_url");
  doc.body = require_string(rec, index, "body");
  if (auto it = rec.find("label"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(index, "label", "expected a string or null");
    auto label = parse_decision(it->get_ref<const std::string&>());
    if (!label) {
      throw SchemaError(index, "label", "expected lower|maintain|raise|null, got \"" +
                                            it->get_ref<const std::string&>() + "\"");
    }
    doc.label = *label;
  }
  return doc;
}

}  // namespace

std::vector<Document> parse_corpus(const json& root) {
  if (!root.is_array()) throw SchemaError(0, "<root>", "corpus must be a JSON array");
  std::vector<Document> docs;
  docs.reserve(root.size());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < root.size(); ++i) {
    Document doc = parse_document(root[i], i);
    if (!seen.insert(doc.id).second) throw SchemaError(i, "id", "duplicate id \"" + doc.id + "\"");
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_json_file(path));
}

void to_json(json& j, const Document& d) {
  j = json{{"id", d.id},
           {"title", d.title},
           {"author", d.author},
           {"category", std::string(to_string(d.category))},
           {"date", format_date(d.date)},
           {"source_url", d.source_url},
           {"body", d.body},
           {"label", d.label ? json(std::string(to_string(*d.label))) : json(nullptr)}};
}

json corpus_to_json(std::span<const Document> docs) {
  json arr = json::array();
  for (const auto& d : docs) arr.push_back(d);
  return arr;
}

void save_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  write_file(path, corpus_to_json(docs).dump(2) + "\n");
}

FfrSeries parse_ffr(const json& root) {
  if (!root.is_array()) throw SchemaError(0, "<root>", "FFR series must be a JSON array");
  FfrSeries series;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& rec = root[i];
    if (!rec.is_object()) throw SchemaError(i, "<record>", "expected an object");
    FfrPoint p;
    const auto& date = require_string(rec, i, "date");
    auto parsed = parse_date(date);
    if (!parsed) throw SchemaError(i, "date", "not an ISO-8601 calendar date: \"" + date + "\"");
    p.date = *parsed;
    auto lb = rec.find("lower_bound");
    if (lb == rec.end()) throw SchemaError(i, "lower_bound", "missing");
    if (!lb->is_number()) throw SchemaError(i, "lower_bound", "expected a number");
    p.lower_bound = lb->get<double>();
    if (!(p.lower_bound >= 0.0 && p.lower_bound <= 25.0)) {
      throw SchemaError(i, "lower_bound", "rate must lie in [0, 25] percent");
    }
    const auto& dec = require_string(rec, i, "decision");
    auto decision = parse_decision(dec);
    if (!decision) throw SchemaError(i, "decision", "unknown decision \"" + dec + "\"");
    p.decision = *decision;
    if (!series.points.empty() && !(series.points.back().date < p.date)) {
      throw SchemaError(i, "date", "dates must be strictly increasing");
    }
    series.points.push_back(p);
  }
  return series;
}

FfrSeries load_ffr(const std::filesystem::path& path) { return parse_ffr(read_json_file(path)); }

void to_json(json& j, const FfrSeries& s) {
  j = json::array();
  for (const auto& p : s.points) {
    j.push_back({{"date", format_date(p.date)},
                 {"lower_bound", p.lower_bound},
                 {"decision", std::string(to_string(p.decision))}});
  }
}

}  // namespace fednlp
