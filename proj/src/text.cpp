#include "amazul/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>

namespace amazul::text {

namespace {

bool is_word_char(UChar32 c)
{
    if (c < 0) {
        return false;
    }
    if (u_isalnum(c)) {
        return true;
    }
    auto type = u_charType(c);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

void append_folded(std::string& out, UChar32 c)
{
    UChar32 folded = u_foldCase(c, U_FOLD_CASE_DEFAULT);
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, folded);
    out.append(buf, static_cast<std::size_t>(len));
}

template <typename Visit>
void for_each_codepoint(std::string_view text, Visit&& visit)
{
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        int32_t start = i;
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        visit(c, static_cast<std::size_t>(start), static_cast<std::size_t>(i));
    }
}

}  // namespace

std::vector<Token> tokenize_with_spans(std::string_view text)
{
    std::vector<Token> tokens;
    Token current;
    bool open = false;
    for_each_codepoint(text, [&](UChar32 c, std::size_t begin, std::size_t end) {
        if (is_word_char(c)) {
            if (!open) {
                current = Token{{}, begin, begin};
                open = true;
            }
            append_folded(current.text, c);
            current.end = end;
        } else if (open) {
            tokens.push_back(std::move(current));
            open = false;
        }
    });
    if (open) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

TokenStream tokenize(std::string_view text)
{
    TokenStream out;
    for (auto& tok : tokenize_with_spans(text)) {
        out.push_back(std::move(tok.text));
    }
    return out;
}

std::string fold_case(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for_each_codepoint(text, [&](UChar32 c, std::size_t begin, std::size_t end) {
        if (c < 0) {
            out.append(text.substr(begin, end - begin));
        } else {
            append_folded(out, c);
        }
    });
    return out;
}

std::string normalize_whitespace(std::string_view text)
{
    std::string out;
    bool pending_space = false;
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(ch);
    }
    return out;
}

std::vector<Sentence> split_sentences(std::string_view text)
{
    std::vector<Sentence> sentences;
    auto is_space = [](char ch) {
        return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    };
    auto emit = [&](std::size_t begin, std::size_t end) {
        while (begin < end && is_space(text[begin])) {
            ++begin;
        }
        while (end > begin && is_space(text[end - 1])) {
            --end;
        }
        if (end > begin) {
            sentences.push_back(Sentence{std::string(text.substr(begin, end - begin)), begin, end});
        }
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (ch != '.' && ch != '!' && ch != '?') {
            continue;
        }
        // Absorb runs such as "?!" or "...".
        std::size_t j = i + 1;
        while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) {
            ++j;
        }
        if (j == text.size() || is_space(text[j])) {
            emit(start, j);
            start = j;
        }
        i = j - 1;
    }
    emit(start, text.size());
    return sentences;
}

std::size_t codepoint_count(std::string_view text)
{
    std::size_t n = 0;
    for (unsigned char ch : text) {
        if ((ch & 0xC0) != 0x80) {
            ++n;
        }
    }
    return n;
}

Analyzer::Analyzer(std::unordered_set<std::string> stopwords) : m_stopwords(std::move(stopwords)) {}

TokenStream Analyzer::analyze(std::string_view text) const
{
    TokenStream tokens = tokenize(text);
    if (m_stopwords.empty()) {
        return tokens;
    }
    std::erase_if(tokens, [&](const std::string& t) { return m_stopwords.count(t) > 0; });
    return tokens;
}

}  // namespace amazul::text
