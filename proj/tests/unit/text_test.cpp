#include <doctest.h>

#include "amazul/text.hpp"

using namespace amazul::text;

TEST_CASE("tokenize strips punctuation, folds case and keeps diacritics")
{
    CHECK(tokenize("Amazônia Azul!") == TokenStream{"amazônia", "azul"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("CO2 levels") == TokenStream{"co2", "levels"});
    CHECK(tokenize("ÁGUA, Salgada; MARÉ.") == TokenStream{"água", "salgada", "maré"});
    CHECK(tokenize("   ...  ").empty());
}

TEST_CASE("tokenize keeps combining marks inside a token")
{
    // "mare" followed by U+0301 COMBINING ACUTE ACCENT
    CHECK(tokenize("mare\xCC\x81 alta") == TokenStream{"mare\xCC\x81", "alta"});
}

TEST_CASE("token spans point back into the source text")
{
    std::string source = "Porto de Santos, SP";
    for (const auto& tok : tokenize_with_spans(source)) {
        CHECK(fold_case(source.substr(tok.begin, tok.end - tok.begin)) == tok.text);
    }
}

TEST_CASE("tokenize never yields empty tokens")
{
    for (const char* s : {"a--b", "!!x!!", "\xff\xfe broken", "x\ty\nz"}) {
        for (const auto& tok : tokenize(s)) {
            CHECK_FALSE(tok.empty());
        }
    }
}

TEST_CASE("split_sentences")
{
    auto s = split_sentences("The tide rises. Is it high? Yes!  Done");
    REQUIRE(s.size() == 4);
    CHECK(s[0].text == "The tide rises.");
    CHECK(s[1].text == "Is it high?");
    CHECK(s[2].text == "Yes!");
    CHECK(s[3].text == "Done");
    CHECK(split_sentences("Depth is 2.5 m. Next.").size() == 2);
    CHECK(split_sentences("  ").empty());
}

TEST_CASE("normalize_whitespace and codepoint_count")
{
    CHECK(normalize_whitespace("  the \t ocean\n ") == "the ocean");
    CHECK(codepoint_count("maré") == 4);
}

TEST_CASE("analyzer drops configured stopwords")
{
    Analyzer analyzer({"the", "of"});
    CHECK(analyzer.analyze("The depth of the basin") == TokenStream{"depth", "basin"});
    CHECK(Analyzer{}.analyze("The basin").size() == 2);
}
