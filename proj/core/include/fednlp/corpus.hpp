#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fednlp {

enum class Category { speech, minutes, transcript, press_release };

// Integer encoding is part of the model I/O contract.
enum class RateDecision : int { Lower = 0, Maintain = 1, Raise = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<RateDecision, kNumClasses> kAllDecisions = {
    RateDecision::Lower, RateDecision::Maintain, RateDecision::Raise};

constexpr int class_index(RateDecision d) noexcept { return static_cast<int>(d); }
RateDecision decision_from_index(int index);

std::string_view to_string(Category c) noexcept;
std::string_view to_string(RateDecision d) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;
std::optional<RateDecision> parse_decision(std::string_view s) noexcept;

using Date = std::chrono::year_month_day;

// Strict YYYY-MM-DD. Returns nullopt for anything else, including
// impossible calendar dates.
std::optional<Date> parse_date(std::string_view s) noexcept;
std::string format_date(const Date& d);

struct Document {
  std::string id;
  std::string title;
  std::string author;
  Category category = Category::speech;
  Date date{};
  std::string source_url;
  std::string body;
  std::optional<RateDecision> label;

  bool operator==(const Document&) const = default;
};

// Decodes a corpus JSON array. Rejects the whole input on the first bad
// record with a SchemaError naming its index and field.
std::vector<Document> parse_corpus(const nlohmann::json& root);
std::vector<Document> load_corpus(const std::filesystem::path& path);

nlohmann::json corpus_to_json(std::span<const Document> docs);
void save_corpus(const std::filesystem::path& path, std::span<const Document> docs);

void to_json(nlohmann::json& j, const Document& d);

struct FfrPoint {
  Date date{};
  double lower_bound = 0.0;  // percent
  RateDecision decision = RateDecision::Maintain;

  bool operator==(const FfrPoint&) const = default;
};

struct FfrSeries {
  std::vector<FfrPoint> points;  // strictly increasing dates
};

FfrSeries parse_ffr(const nlohmann::json& root);
FfrSeries load_ffr(const std::filesystem::path& path);
void to_json(nlohmann::json& j, const FfrSeries& s);

// Reads a whole file; throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace fednlp
