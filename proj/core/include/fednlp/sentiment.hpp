#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fednlp/corpus.hpp"

namespace fednlp {

enum class SentimentCategory : std::uint8_t {
  positive,
  negative,
  uncertainty,
  litigious,
  strong_modal,
  weak_modal,
  constraining,
};

inline constexpr std::size_t kNumSentimentCategories = 7;

std::string_view to_string(SentimentCategory c) noexcept;
std::optional<SentimentCategory> parse_sentiment_category(std::string_view s) noexcept;

// Bit set over SentimentCategory.
class CategorySet {
 public:
  constexpr CategorySet() = default;

  constexpr void insert(SentimentCategory c) noexcept { bits_ |= bit(c); }
  constexpr bool contains(SentimentCategory c) const noexcept { return (bits_ & bit(c)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  bool operator==(const CategorySet&) const = default;

 private:
  static constexpr std::uint8_t bit(SentimentCategory c) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c));
  }
  std::uint8_t bits_ = 0;
};

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // Adds (term, category); the term is lowercased. Duplicates collapse.
  void add(std::string_view term, SentimentCategory category);

  const CategorySet* find(std::string_view term) const;
  const std::unordered_map<std::string, CategorySet>& entries() const noexcept { return entries_; }

 private:
  std::string name_;
  std::unordered_map<std::string, CategorySet> entries_;
};

// CSV with header "term,category". A lexicon named "generic" may only use
// the positive and negative categories.
Lexicon parse_lexicon(std::string_view csv, std::string name);
Lexicon load_lexicon(const std::filesystem::path& path, std::string name);

const Lexicon& default_generic_lexicon();
const Lexicon& default_financial_lexicon();

struct SentimentScore {
  double polarity = 0.0;      // (P - N) / (P + N), 0 when both are 0
  double subjectivity = 0.0;  // tokens matching any category / token_count
  std::array<std::size_t, kNumSentimentCategories> category_counts{};
  std::size_t token_count = 0;

  std::size_t count(SentimentCategory c) const noexcept {
    return category_counts[static_cast<std::size_t>(c)];
  }
};

// Throws EmptyDocument on an empty token list.
SentimentScore score_document(std::span<const std::string> tokens, const Lexicon& lex);

struct SentimentPoint {
  Date date{};
  std::string doc_id;
  double polarity = 0.0;
};

struct SentimentSeries {
  std::string author;
  std::vector<SentimentPoint> points;  // by date, then id
};

SentimentSeries sentiment_series(std::span<const Document> docs, std::string_view author, const Lexicon& lex);

void to_json(nlohmann::json& j, const SentimentScore& s);
void to_json(nlohmann::json& j, const SentimentSeries& s);

}  // namespace fednlp
