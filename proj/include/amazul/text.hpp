#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace amazul::text {

/// Case-folded tokens in text order. Never contains empty strings.
using TokenStream = std::vector<std::string>;

/// A token together with the byte range it came from in the source text.
struct Token {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Splits on any code point that is neither a letter, a digit nor a combining
/// mark, then applies Unicode simple case folding. Diacritics are kept.
TokenStream tokenize(std::string_view text);
std::vector<Token> tokenize_with_spans(std::string_view text);

/// Case-folds a whole string (used for lexicon and schema lookups).
std::string fold_case(std::string_view text);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

struct Sentence {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Sentence boundaries are '.', '!' or '?' followed by whitespace or end of
/// text. Abbreviations are not special-cased.
std::vector<Sentence> split_sentences(std::string_view text);

/// Number of code points in a UTF-8 string.
std::size_t codepoint_count(std::string_view text);

/// Tokenizer plus an optional stopword filter; the one analysis chain shared
/// by indexing, querying and similarity.
class Analyzer {
  public:
    Analyzer() = default;
    explicit Analyzer(std::unordered_set<std::string> stopwords);

    TokenStream analyze(std::string_view text) const;
    bool is_stopword(const std::string& token) const { return m_stopwords.count(token) > 0; }

  private:
    std::unordered_set<std::string> m_stopwords;
};

}  // namespace amazul::text
