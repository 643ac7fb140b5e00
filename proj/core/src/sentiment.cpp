#include "fednlp/sentiment.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "fednlp/errors.hpp"
#include "fednlp/resources.hpp"
#include "fednlp/text.hpp"

namespace fednlp {

namespace {

constexpr std::array<std::string_view, kNumSentimentCategories> kCategoryNames = {
    "positive", "negative", "uncertainty", "litigious", "strong_modal", "weak_modal", "constraining"};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::string_view to_string(SentimentCategory c) noexcept { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<SentimentCategory> parse_sentiment_category(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == s) return static_cast<SentimentCategory>(i);
  }
  return std::nullopt;
}

void Lexicon::add(std::string_view term, SentimentCategory category) {
  entries_[to_lower(term)].insert(category);
}

const CategorySet* Lexicon::find(std::string_view term) const {
  // Heterogeneous lookup needs a transparent hash; terms are short.
  auto it = entries_.find(std::string(term));
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon parse_lexicon(std::string_view csv, std::string name) {
  Lexicon lex(std::move(name));
  const bool generic = lex.name() == "generic";
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    std::string_view line = trim(csv.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!header_seen && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "term,category") throw SchemaError(line_no, "<header>", "expected header \"term,category\"");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw SchemaError(line_no, "category", "missing column");
    const auto term = unquote(line.substr(0, comma));
    const auto cat_name = unquote(line.substr(comma + 1));
    if (term.empty()) throw SchemaError(line_no, "term", "empty term");
    auto cat = parse_sentiment_category(cat_name);
    if (!cat) throw SchemaError(line_no, "category", "unknown category \"" + std::string(cat_name) + "\"");
    if (generic && *cat != SentimentCategory::positive && *cat != SentimentCategory::negative) {
      throw SchemaError(line_no, "category", "generic lexicon allows only positive and negative");
    }
    lex.add(term, *cat);
  }
  if (!header_seen) throw SchemaError(1, "<header>", "expected header \"term,category\"");
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string name) {
  return parse_lexicon(read_file(path), std::move(name));
}

const Lexicon& default_generic_lexicon() {
  static const Lexicon lex = parse_lexicon(resources::lexicon_generic_csv(), "generic");
  return lex;
}

const Lexicon& default_financial_lexicon() {
  static const Lexicon lex = parse_lexicon(resources::lexicon_financial_csv(), "financial");
  return lex;
}

SentimentScore score_document(std::span<const std::string> tokens, const Lexicon& lex) {
  if (tokens.empty()) throw EmptyDocument();
  SentimentScore score;
  score.token_count = tokens.size();
  std::size_t hits = 0;
  for (const auto& token : tokens) {
    const CategorySet* cats = lex.find(token);
    if (cats == nullptr || cats->empty()) continue;
    ++hits;
    for (std::size_t c = 0; c < kNumSentimentCategories; ++c) {
      if (cats->contains(static_cast<SentimentCategory>(c))) ++score.category_counts[c];
    }
  }
  const auto p = static_cast<double>(score.count(SentimentCategory::positive));
  const auto n = static_cast<double>(score.count(SentimentCategory::negative));
  score.polarity = (p + n) > 0 ? (p - n) / (p + n) : 0.0;
  score.subjectivity = std::clamp(static_cast<double>(hits) / static_cast<double>(score.token_count), 0.0, 1.0);
  return score;
}

SentimentSeries sentiment_series(std::span<const Document> docs, std::string_view author, const Lexicon& lex) {
  SentimentSeries series;
  series.author = std::string(author);
  for (const auto& doc : docs) {
    if (doc.author != author) continue;
    const auto tokens = tokenize(doc.body);
    const double polarity = tokens.empty() ? 0.0 : score_document(tokens, lex).polarity;
    series.points.push_back({doc.date, doc.id, polarity});
  }
  std::stable_sort(series.points.begin(), series.points.end(), [](const auto& a, const auto& b) {
    return a.date != b.date ? a.date < b.date : a.doc_id < b.doc_id;
  });
  return series;
}

void to_json(nlohmann::json& j, const SentimentScore& s) {
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumSentimentCategories; ++c) counts[std::string(kCategoryNames[c])] = s.category_counts[c];
  j = {{"polarity", s.polarity},
       {"subjectivity", s.subjectivity},
       {"category_counts", counts},
       {"token_count", s.token_count}};
}

void to_json(nlohmann::json& j, const SentimentSeries& s) {
  auto points = nlohmann::json::array();
  for (const auto& p : s.points) {
    points.push_back({{"date", format_date(p.date)}, {"doc_id", p.doc_id}, {"polarity", p.polarity}});
  }
  j = {{"author", s.author}, {"points", points}};
}

}  // namespace fednlp
