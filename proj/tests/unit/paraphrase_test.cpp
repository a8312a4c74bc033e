#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "amazul/paraphrase.hpp"
#include "amazul/text.hpp"
#include "support/fixtures.hpp"

using namespace amazul;
using namespace amazul::paraphrase;
using amazul::testing::data_path;

namespace {

const SynonymLexicon& lexicon()
{
    static const SynonymLexicon l = SynonymLexicon::load(data_path("paraphrase/lexicon.tsv"));
    return l;
}

// Cartesian product over the substitutable positions, built from scratch on
// the token level; the source itself excluded.
std::set<std::vector<std::string>> closure_oracle(const std::vector<std::string>& tokens,
                                                  const std::vector<std::vector<std::string>>& options)
{
    std::set<std::vector<std::string>> out{{}};
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::set<std::vector<std::string>> next;
        for (const auto& prefix : out) {
            auto keep = prefix;
            keep.push_back(tokens[i]);
            next.insert(keep);
            for (const auto& o : options[i]) {
                auto swap = prefix;
                swap.push_back(o);
                next.insert(swap);
            }
        }
        out = std::move(next);
    }
    out.erase(tokens);
    return out;
}

}  // namespace

TEST_CASE("lexicon parsing and invariants")
{
    CHECK(lexicon().size() > 10);
    REQUIRE(lexicon().substitutes(Language::en, "ship"));
    CHECK(*lexicon().substitutes(Language::en, "ship") == std::vector<std::string>{"vessel", "boat"});
    CHECK(lexicon().substitutes(Language::pt, "ship") == nullptr);

    SynonymLexicon l;
    CHECK_THROWS_AS(l.add(Language::en, "sea", {"sea"}), InvalidArgument);
    CHECK_THROWS_AS(l.add(Language::en, "open sea", {"ocean"}), InvalidArgument);
    CHECK_THROWS_AS(l.add(Language::en, "sea", {"open ocean"}), InvalidArgument);
    CHECK_THROWS_AS(SynonymLexicon::parse("en\tsea\n"), ParseError);
    CHECK_THROWS_AS(SynonymLexicon::parse("xx\tsea\tocean\n"), ParseError);
    CHECK_NOTHROW(SynonymLexicon::parse("# c\nen\tSea\tOcean\tsea\n"));
}

TEST_CASE("generation examples")
{
    SynonymLexicon one;
    one.add(Language::en, "ship", {"vessel"});
    auto p = generate_paraphrases("The ship sails.", one, Language::en, 1, 0);
    REQUIRE(p.variants.size() == 1);
    CHECK(p.variants[0].text == "The vessel sails.");

    CHECK(generate_paraphrases("Nothing to swap here.", one, Language::en, 5, 0).variants.empty());
    CHECK_THROWS_AS(generate_paraphrases("x", SynonymLexicon{}, Language::en, 1, 0), InvalidArgument);

    // Capitalisation follows the replaced token.
    SynonymLexicon cap;
    cap.add(Language::pt, "área", {"região"});
    cap.add(Language::pt, "oceano", {"mar"});
    p = generate_paraphrases("Oceano e área.", cap, Language::pt, 10, 1);
    std::set<std::string> got;
    for (const auto& v : p.variants)
        got.insert(v.text);
    CHECK(got == std::set<std::string>{"Mar e área.", "Oceano e região.", "Mar e região."});
}

TEST_CASE("variants stay inside the substitution closure")
{
    std::string sentence = "Big ships protect the coast.";
    auto tokens = text::tokenize(sentence);
    std::vector<std::vector<std::string>> options;
    std::size_t substitutable = 0;
    for (const auto& t : tokens) {
        auto subs = lexicon().substitutes(Language::en, t);
        options.push_back(subs ? *subs : std::vector<std::string>{});
        substitutable += subs ? 1 : 0;
    }
    REQUIRE(substitutable == 4);
    auto oracle = closure_oracle(tokens, options);

    auto closure = substitution_closure(sentence, lexicon(), Language::en);
    std::set<std::vector<std::string>> closure_tokens;
    for (const auto& c : closure)
        closure_tokens.insert(text::tokenize(c));
    CHECK(closure_tokens == oracle);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto p = generate_paraphrases(sentence, lexicon(), Language::en, 8, seed);
        CHECK(p.variants.size() == 8);
        std::set<std::string> distinct;
        for (const auto& v : p.variants) {
            auto vt = text::tokenize(v.text);
            CHECK(oracle.count(vt) == 1);
            CHECK(vt.size() == tokens.size());
            CHECK(vt != tokens);
            CHECK(v.text != sentence);
            distinct.insert(v.text);
        }
        CHECK(distinct.size() == p.variants.size());
        auto again = generate_paraphrases(sentence, lexicon(), Language::en, 8, seed);
        for (std::size_t i = 0; i < p.variants.size(); ++i)
            CHECK(again.variants[i].text == p.variants[i].text);
    }
}

TEST_CASE("large closures are sampled")
{
    SynonymLexicon l;
    std::string sentence;
    for (int i = 0; i < 12; ++i) {
        auto w = "w" + std::to_string(i);
        l.add(Language::en, w, {w + "a", w + "b"});
        sentence += (i ? " " : "") + w;
    }
    auto p = generate_paraphrases(sentence, l, Language::en, 20, 3);
    CHECK(p.variants.size() == 20);
    std::set<std::string> distinct;
    for (const auto& v : p.variants) {
        CHECK(v.text != sentence);
        distinct.insert(v.text);
    }
    CHECK(distinct.size() == 20);
}

TEST_CASE("BLEU without brevity penalty")
{
    CHECK(bleu_no_bp("the blue amazon is vast", "the blue amazon is vast") == doctest::Approx(1.0));
    CHECK(bleu_no_bp("a b c d", "a b c x") == 0.0);
    CHECK(bleu_no_bp("x y z", "a b c") == 0.0);
    CHECK(bleu_no_bp("a", "a") == doctest::Approx(1.0));
    // Orders 1..3 all match fully; the candidate has no 4-grams.
    CHECK(bleu_no_bp("a b c", "a b c a b") == doctest::Approx(1.0));
    CHECK(bleu_no_bp("a b x c", "a b c", 2) == doctest::Approx(std::sqrt(3.0 / 4.0 * 1.0 / 3.0)));
    // Clipping: "the" counted at most twice.
    CHECK(bleu_no_bp("the the the", "the cat the", 1) == doctest::Approx(2.0 / 3.0));
    // No brevity penalty: a short exact fragment scores 1.
    CHECK(bleu_no_bp("blue amazon", "the blue amazon is vast") == doctest::Approx(1.0));
    CHECK_THROWS_AS(bleu_no_bp("", "a"), InvalidArgument);
    CHECK_THROWS_AS(bleu_no_bp("a", "!!"), InvalidArgument);

    for (const auto& x : {"one", "one two", "one two three four five", "Amazônia Azul é vasta."})
        CHECK(bleu_no_bp(x, x) == doctest::Approx(1.0));
}

TEST_CASE("cosine dissimilarity")
{
    CHECK(cosine_dissimilarity({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
    CHECK(cosine_dissimilarity({1, 0}, {0, 1}) == doctest::Approx(1.0));
    CHECK(std::abs(cosine_dissimilarity({1, 1}, {1, 0}) - (1 - 1 / std::sqrt(2.0))) < 1e-9);
    CHECK(cosine_dissimilarity({1, 0}, {-1, 0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(cosine_dissimilarity({0, 0}, {1, 0}), InvalidArgument);
    CHECK_THROWS_AS(cosine_dissimilarity({1, 0}, {1, 0, 0}), InvalidArgument);
}

TEST_CASE("evaluation harness reports both axes per variant")
{
    kg::Embeddings e;
    e.add("ship", {1, 0, 0});
    e.add("vessel", {0.9, 0.1, 0});
    e.add("boat", {0.5, 0.5, 0});
    e.add("sails", {0, 0, 1});
    auto p = generate_paraphrases("The ship sails.", lexicon(), Language::en, 5, 0);
    REQUIRE(p.variants.size() == 2);
    evaluate(p, e);
    for (const auto& v : p.variants) {
        REQUIRE(v.metrics.count("bleu_no_bp"));
        REQUIRE(v.metrics.count("cosine_dissimilarity"));
        CHECK(v.metrics.at("bleu_no_bp") >= 0.0);
        CHECK(v.metrics.at("bleu_no_bp") < 1.0);
        auto expect = cosine_dissimilarity(sentence_embedding(v.text, e), sentence_embedding(p.source, e));
        CHECK(v.metrics.at("cosine_dissimilarity") == doctest::Approx(expect));
    }
    CHECK(sentence_embedding("ship sails", e) == kg::Vector{0.5, 0, 0.5});
    CHECK_THROWS_AS(sentence_embedding("nothing known", e), InvalidArgument);
}
