#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fednlp {

// Half-open [begin, end) range of token indices.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const SentenceSpan&) const = default;
};

struct TokenizedDoc {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<SentenceSpan> sentences;
  // Original text of each sentence, whitespace-trimmed; parallel to `sentences`.
  std::vector<std::string> sentence_text;
};

// A token with its byte range in the source text.
struct TokenSpan {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Lowercased tokens: maximal runs of Unicode letters/digits, where an
// apostrophe or hyphen is kept only between two letters/digits.
std::vector<std::string> tokenize(std::string_view text);
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);

// Unicode simple lowercase of a UTF-8 string.
std::string to_lower(std::string_view text);

// Counts code points; invalid bytes count as one each.
std::size_t utf8_length(std::string_view text) noexcept;

using WordList = std::unordered_set<std::string>;

// One entry per line; entries trimmed and lowercased, blank lines skipped.
WordList parse_word_list(std::string_view contents);
WordList load_word_list(const std::filesystem::path& path);

const WordList& default_stopwords();
const WordList& default_abbreviations();

class SentenceSplitter {
 public:
  SentenceSplitter();
  explicit SentenceSplitter(WordList abbreviations);

  // Sentence boundary byte offsets: each is the position just past a
  // sentence-terminating punctuation run.
  std::vector<std::size_t> boundaries(std::string_view text) const;

  TokenizedDoc segment(std::string doc_id, std::string_view text) const;

 private:
  bool is_abbreviation(std::string_view text, std::size_t period_pos) const;

  WordList abbreviations_;
};

// Tokens plus sentence spans using the default abbreviation list.
TokenizedDoc split_sentences(std::string_view text);

struct TermStats {
  std::size_t word_count = 0;
  std::size_t sentence_count = 0;
  std::vector<std::pair<std::string, std::size_t>> top_terms;
};

inline constexpr std::size_t kDefaultWordcloudTerms = 50;

// Top-k non-stopword terms by frequency, ties by ascending term.
TermStats term_stats(const TokenizedDoc& doc, const WordList& stopwords, std::size_t k);

void to_json(nlohmann::json& j, const TermStats& s);

}  // namespace fednlp
