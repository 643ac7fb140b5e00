#include <doctest.h>

#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fednlp/text.hpp"
#include "generators.hpp"

using namespace fednlp;
using Tokens = std::vector<std::string>;

namespace {

std::string join(const Tokens& t) {
  std::string s;
  for (const auto& x : t) {
    if (!s.empty()) s += ' ';
    s += x;
  }
  return s;
}

// Random text from words, punctuation and whitespace, including multi-byte
// characters and joiners in awkward positions.
std::string random_text(gen::Source& s) {
  static const std::vector<std::string> pieces = {
      "rate", "Fed",  "U.S.", "Mr.", "10-year", "don't", "’s",  " ",   "  ",  "\n", "\t", ".",  "!",
      "?",    ",",    "-",    "'",   "(",       ")",     "\"",  "Zürich", "Ωmega", "ß", "2.5%", "—", "…"};
  std::string out;
  const auto n = s.range(0, 40);
  for (std::size_t i = 0; i < n; ++i) out += pieces[s.below(pieces.size())];
  return out;
}

}  // namespace

TEST_CASE("tokenize examples") {
  CHECK(tokenize("The Fed raised rates.") == Tokens{"the", "fed", "raised", "rates"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("10-year T-note, 2.5%") == Tokens{"10-year", "t-note", "2", "5"});
}

TEST_CASE("tokenize keeps only internal joiners") {
  CHECK(tokenize("don't -lead trail- 'quoted' a--b") == Tokens{"don't", "lead", "trail", "quoted", "a", "b"});
  CHECK(tokenize("Fed’s") == Tokens{"fed's"});
  CHECK(tokenize("co‐operate") == Tokens{"co-operate"});
  CHECK(tokenize("ZÜRICH Straße") == Tokens{"zürich", "straße"});
  CHECK(tokenize("rates—which rose") == Tokens{"rates", "which", "rose"});
  CHECK(tokenize("日本 銀行") == Tokens{"日本", "銀行"});
}

TEST_CASE("token offsets point into the source") {
  const std::string text = "  Mr. Powell's 2-day trip.";
  for (const auto& span : tokenize_with_offsets(text)) {
    CHECK(to_lower(text.substr(span.begin, span.end - span.begin)) == span.text);
  }
}

TEST_CASE("split_sentences examples") {
  CHECK(split_sentences("Rates rose. Markets fell.").sentences.size() == 2);
  CHECK(split_sentences("Mr. Powell spoke.").sentences.size() == 1);
  const auto doc = split_sentences("no terminal punctuation here at all");
  REQUIRE(doc.sentences.size() == 1);
  CHECK(doc.sentences[0] == SentenceSpan{0, doc.tokens.size()});
}

TEST_CASE("sentence boundary rules") {
  CHECK(split_sentences("The U.S. economy grew. Inflation fell.").sentences.size() == 2);
  CHECK(split_sentences("Prices rose 2.5 percent. Wages did too.").sentences.size() == 2);
  CHECK(split_sentences("Is it over? Yes! It is.").sentences.size() == 3);
  CHECK(split_sentences("He said \"rates rose.\" Then he left.").sentences.size() == 2);
  CHECK(split_sentences("it ended. then lowercase continues").sentences.size() == 1);
  CHECK(split_sentences("Wait... What happened?").sentences.size() == 2);
  CHECK(split_sentences("").sentences.empty());
  CHECK(split_sentences("...").sentences.empty());

  const auto doc = split_sentences("  Rates rose.   Markets fell!  ");
  REQUIRE(doc.sentence_text.size() == 2);
  CHECK(doc.sentence_text[0] == "Rates rose.");
  CHECK(doc.sentence_text[1] == "Markets fell!");

  SentenceSplitter custom(parse_word_list("approx.\n"));
  CHECK(custom.segment("", "It was approx. Ten units.").sentences.size() == 1);
  CHECK(custom.segment("", "Mr. Powell spoke.").sentences.size() == 2);
}

TEST_CASE("term_stats examples") {
  TokenizedDoc doc;
  doc.tokens = {"rate", "rate", "cut"};
  doc.sentences = {{0, 3}};
  auto s = term_stats(doc, {}, 2);
  CHECK(s.word_count == 3);
  CHECK(s.sentence_count == 1);
  CHECK(s.top_terms == std::vector<std::pair<std::string, std::size_t>>{{"rate", 2}, {"cut", 1}});

  doc.tokens = {"the", "the"};
  doc.sentences = {{0, 2}};
  CHECK(term_stats(doc, {"the"}, 5).top_terms.empty());

  doc.tokens = {"cut", "buy"};
  s = term_stats(doc, {}, 5);
  REQUIRE(s.top_terms.size() == 2);
  CHECK(s.top_terms[0].first == "buy");
}

TEST_CASE("term stats JSON layout") {
  const auto doc = split_sentences("Rates rose. Markets fell.");
  const nlohmann::json j = term_stats(doc, default_stopwords(), 50);
  CHECK(j["word_count"] == 4);
  CHECK(j["sentence_count"] == 2);
  CHECK(j["top_terms"][0] == nlohmann::json{{"term", "fell"}, {"count", 1}});
}

TEST_CASE("bundled word lists") {
  CHECK(default_stopwords().size() == 179);
  CHECK(default_stopwords().contains("the"));
  CHECK(default_stopwords().contains("don't"));
  CHECK(default_abbreviations().contains("u.s."));
  CHECK(default_abbreviations().contains("mr."));
  CHECK(default_abbreviations().contains("inc."));
}

TEST_CASE("utf8 length counts code points") {
  CHECK(utf8_length("") == 0);
  CHECK(utf8_length("abc") == 3);
  CHECK(utf8_length("Zürich") == 6);
  CHECK(utf8_length("日本") == 2);
  CHECK(utf8_length("\xff\xfe") == 2);
}

TEST_CASE("tokenizer and splitter properties on random text") {
  gen::Source src(20240611);
  const auto& stop = default_stopwords();
  for (int trial = 0; trial < 2000; ++trial) {
    const auto text = random_text(src);
    const auto tokens = tokenize(text);
    for (const auto& t : tokens) {
      CHECK_FALSE(t.empty());
      CHECK(t.find_first_of(" \t\n\r") == std::string::npos);
    }
    // Idempotent on its own joined output, invariant under outer whitespace.
    CHECK(tokenize(join(tokens)) == tokens);
    CHECK(tokenize("  \n" + text + "\t ") == tokens);

    const auto doc = split_sentences(text);
    CHECK(doc.tokens == tokens);
    CHECK(doc.sentence_text.size() == doc.sentences.size());
    Tokens rebuilt;
    std::size_t expect_begin = 0;
    for (const auto& span : doc.sentences) {
      CHECK(span.begin == expect_begin);
      CHECK(span.end > span.begin);
      for (auto p = span.begin; p < span.end; ++p) rebuilt.push_back(doc.tokens[p]);
      expect_begin = span.end;
    }
    CHECK(rebuilt == tokens);

    const auto stats = term_stats(doc, stop, 1000000);
    std::size_t stop_hits = 0;
    for (const auto& t : tokens) stop_hits += stop.contains(t) ? 1 : 0;
    const auto sum = std::accumulate(stats.top_terms.begin(), stats.top_terms.end(), std::size_t{0},
                                     [](std::size_t a, const auto& p) { return a + p.second; });
    CHECK(sum == stats.word_count - stop_hits);
    for (const auto& [term, n] : stats.top_terms) CHECK_FALSE(stop.contains(term));
  }
}
