#include "fednlp/text.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "fednlp/corpus.hpp"
#include "fednlp/resources.hpp"

namespace fednlp {

namespace {

bool is_word_char(UChar32 c) { return c >= 0 && (u_isalpha(c) || u_isdigit(c)); }

// Characters kept inside a token when flanked by word characters. Curly
// apostrophes and Unicode hyphens fold to their ASCII forms.
char joiner_form(UChar32 c) {
  switch (c) {
    case 0x27:
    case 0x2019: return '\'';
    case 0x2D:
    case 0x2010:
    case 0x2011: return '-';
    default: return 0;
  }
}

bool is_space(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

bool is_sentence_terminal(UChar32 c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(UChar32 c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == 0x2019 || c == 0x201D || c == 0xBB;
}

bool is_opener(UChar32 c) {
  return c == '"' || c == '\'' || c == '(' || c == '[' || c == 0x2018 || c == 0x201C || c == 0xAB;
}

void append_utf8(std::string& out, UChar32 c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, c, err);
  if (!err) out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

// Sequential code point reader over a UTF-8 buffer.
struct Utf8Cursor {
  explicit Utf8Cursor(std::string_view text)
      : data(reinterpret_cast<const uint8_t*>(text.data())), len(static_cast<int32_t>(text.size())) {}

  bool done() const { return pos >= len; }

  UChar32 next() {
    UChar32 c = 0;
    U8_NEXT(data, pos, len, c);
    return c;
  }

  UChar32 peek() const {
    int32_t p = pos;
    UChar32 c = 0;
    U8_NEXT(data, p, len, c);
    return c;
  }

  const uint8_t* data;
  int32_t len;
  int32_t pos = 0;
};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<TokenSpan> tokenize_with_offsets(std::string_view text) {
  std::vector<TokenSpan> out;
  Utf8Cursor cur(text);
  std::string token;
  std::size_t start = 0;
  bool in_token = false;
  while (!cur.done()) {
    const auto here = static_cast<std::size_t>(cur.pos);
    const UChar32 c = cur.next();
    if (is_word_char(c)) {
      if (!in_token) {
        in_token = true;
        start = here;
        token.clear();
      }
      append_utf8(token, u_tolower(c));
      continue;
    }
    if (in_token) {
      if (char j = joiner_form(c); j != 0 && !cur.done() && is_word_char(cur.peek())) {
        token.push_back(j);
        continue;
      }
      out.push_back({token, start, here});
      in_token = false;
    }
  }
  if (in_token) out.push_back({token, start, text.size()});
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  auto spans = tokenize_with_offsets(text);
  std::vector<std::string> tokens;
  tokens.reserve(spans.size());
  for (auto& s : spans) tokens.push_back(std::move(s.text));
  return tokens;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  Utf8Cursor cur(text);
  while (!cur.done()) {
    const int32_t before = cur.pos;
    const UChar32 c = cur.next();
    if (c < 0) {
      out.append(text.substr(static_cast<std::size_t>(before), static_cast<std::size_t>(cur.pos - before)));
    } else {
      append_utf8(out, u_tolower(c));
    }
  }
  return out;
}

std::size_t utf8_length(std::string_view text) noexcept {
  std::size_t n = 0;
  Utf8Cursor cur(text);
  while (!cur.done()) {
    cur.next();
    ++n;
  }
  return n;
}

WordList parse_word_list(std::string_view contents) {
  WordList words;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    auto line = trim(contents.substr(pos, nl - pos));
    if (!line.empty()) words.insert(to_lower(line));
    pos = nl + 1;
  }
  return words;
}

WordList load_word_list(const std::filesystem::path& path) { return parse_word_list(read_file(path)); }

const WordList& default_stopwords() {
  static const WordList words = parse_word_list(resources::stopwords_en());
  return words;
}

const WordList& default_abbreviations() {
  static const WordList words = parse_word_list(resources::abbreviations_en());
  return words;
}

SentenceSplitter::SentenceSplitter() : abbreviations_(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(WordList abbreviations) : abbreviations_(std::move(abbreviations)) {}

bool SentenceSplitter::is_abbreviation(std::string_view text, std::size_t period_pos) const {
  std::size_t begin = period_pos;
  while (begin > 0) {
    const char ch = text[begin - 1];
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') break;
    --begin;
  }
  std::string_view chunk = text.substr(begin, period_pos + 1 - begin);
  while (!chunk.empty() && (chunk.front() == '(' || chunk.front() == '"' || chunk.front() == '\'' ||
                            chunk.front() == '[')) {
    chunk.remove_prefix(1);
  }
  return abbreviations_.contains(to_lower(chunk));
}

std::vector<std::size_t> SentenceSplitter::boundaries(std::string_view text) const {
  std::vector<std::size_t> out;
  Utf8Cursor cur(text);
  while (!cur.done()) {
    const auto here = static_cast<std::size_t>(cur.pos);
    const UChar32 c = cur.next();
    if (!is_sentence_terminal(c)) continue;

    std::size_t run_length = 1;
    while (!cur.done() && is_sentence_terminal(cur.peek())) {
      cur.next();
      ++run_length;
    }
    while (!cur.done() && is_closer(cur.peek())) cur.next();
    const auto boundary = static_cast<std::size_t>(cur.pos);

    Utf8Cursor look = cur;
    bool saw_space = false;
    while (!look.done() && is_space(look.peek())) {
      look.next();
      saw_space = true;
    }
    bool ends_sentence = false;
    if (look.done()) {
      ends_sentence = true;
    } else if (saw_space) {
      while (!look.done() && is_opener(look.peek())) look.next();
      if (!look.done()) {
        const UChar32 n = look.peek();
        ends_sentence = n >= 0 && (u_isupper(n) || u_istitle(n));
      }
    }
    if (ends_sentence && c == '.' && run_length == 1 && is_abbreviation(text, here)) ends_sentence = false;
    if (ends_sentence) out.push_back(boundary);
  }
  return out;
}

TokenizedDoc SentenceSplitter::segment(std::string doc_id, std::string_view text) const {
  TokenizedDoc doc;
  doc.doc_id = std::move(doc_id);
  auto spans = tokenize_with_offsets(text);
  const auto bounds = boundaries(text);

  std::size_t group_begin_byte = 0;
  std::size_t bi = 0;
  std::size_t sentence_start = 0;
  auto close_sentence = [&](std::size_t token_end, std::size_t byte_end) {
    if (token_end > sentence_start) {
      doc.sentences.push_back({sentence_start, token_end});
      doc.sentence_text.emplace_back(trim(text.substr(group_begin_byte, byte_end - group_begin_byte)));
      sentence_start = token_end;
    }
  };
  for (std::size_t t = 0; t < spans.size(); ++t) {
    while (bi < bounds.size() && bounds[bi] <= spans[t].begin) {
      close_sentence(t, bounds[bi]);
      group_begin_byte = bounds[bi];
      ++bi;
    }
  }
  close_sentence(spans.size(), bi < bounds.size() ? bounds[bi] : text.size());

  doc.tokens.reserve(spans.size());
  for (auto& s : spans) doc.tokens.push_back(std::move(s.text));
  return doc;
}

TokenizedDoc split_sentences(std::string_view text) {
  static const SentenceSplitter splitter;
  return splitter.segment("", text);
}

TermStats term_stats(const TokenizedDoc& doc, const WordList& stopwords, std::size_t k) {
  TermStats stats;
  stats.word_count = doc.tokens.size();
  stats.sentence_count = doc.sentences.size();
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& t : doc.tokens) {
    if (!stopwords.contains(t)) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> terms;
  terms.reserve(counts.size());
  for (const auto& [term, n] : counts) terms.emplace_back(std::string(term), n);
  const auto keep = std::min(k, terms.size());
  auto by_rank = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  std::partial_sort(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(keep), terms.end(), by_rank);
  terms.resize(keep);
  stats.top_terms = std::move(terms);
  return stats;
}

void to_json(nlohmann::json& j, const TermStats& s) {
  auto terms = nlohmann::json::array();
  for (const auto& [term, n] : s.top_terms) terms.push_back({{"term", term}, {"count", n}});
  j = {{"word_count", s.word_count}, {"sentence_count", s.sentence_count}, {"top_terms", terms}};
}

}  // namespace fednlp
