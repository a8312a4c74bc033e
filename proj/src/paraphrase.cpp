#include "amazul/paraphrase.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "amazul/text.hpp"

namespace amazul::paraphrase {

namespace {

bool starts_upper(std::string_view s)
{
    if (s.empty())
        return false;
    std::int32_t i = 0;
    UChar32 c;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<std::int32_t>(s.size()), c);
    return c >= 0 && u_isupper(c);
}

std::string capitalize(std::string_view s)
{
    if (s.empty())
        return {};
    std::int32_t i = 0;
    UChar32 c;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<std::int32_t>(s.size()), c);
    if (c < 0)
        return std::string(s);
    UChar32 up = u_toupper(c);
    char buf[4];
    std::int32_t n = 0;
    UBool err = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, 4, up, err);
    if (err)
        return std::string(s);
    return std::string(buf, static_cast<std::size_t>(n)) + std::string(s.substr(static_cast<std::size_t>(i)));
}

struct Slot {
    text::Token token;
    const std::vector<std::string>* options;
};

std::vector<Slot> slots(std::string_view sentence, const SynonymLexicon& lexicon, Language lang)
{
    std::vector<Slot> out;
    for (auto& t : text::tokenize_with_spans(sentence))
        if (auto subs = lexicon.substitutes(lang, t.text))
            out.push_back({t, subs});
    return out;
}

// choice[i] == 0 keeps the original token, otherwise picks options[choice - 1].
std::string render(std::string_view sentence, const std::vector<Slot>& s, const std::vector<std::size_t>& choice)
{
    std::string out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += sentence.substr(pos, s[i].token.begin - pos);
        auto original = sentence.substr(s[i].token.begin, s[i].token.end - s[i].token.begin);
        if (choice[i] == 0) {
            out += original;
        } else {
            const auto& sub = (*s[i].options)[choice[i] - 1];
            out += starts_upper(original) ? capitalize(sub) : sub;
        }
        pos = s[i].token.end;
    }
    out += sentence.substr(pos);
    return out;
}

double closure_size(const std::vector<Slot>& s)
{
    double n = 1;
    for (const auto& x : s)
        n *= static_cast<double>(x.options->size() + 1);
    return n - 1;
}

std::vector<std::string> split_tabs(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, '\t'))
        out.push_back(text::normalize_whitespace(cur));
    return out;
}

}  // namespace

void SynonymLexicon::add(Language lang, std::string_view form, const std::vector<std::string>& substitutes)
{
    auto f = text::tokenize(form);
    if (f.size() != 1)
        throw InvalidArgument("lexicon form '" + std::string(form) + "' is not a single token");
    std::vector<std::string> subs;
    for (const auto& s : substitutes) {
        auto t = text::tokenize(s);
        if (t.size() != 1)
            throw InvalidArgument("substitute '" + s + "' is not a single token");
        if (t[0] == f[0])
            continue;
        if (std::find(subs.begin(), subs.end(), t[0]) == subs.end())
            subs.push_back(t[0]);
    }
    if (subs.empty())
        throw InvalidArgument("lexicon entry '" + f[0] + "' has no substitute other than itself");
    auto& entry = m_entries[{lang, f[0]}];
    for (auto& s : subs)
        if (std::find(entry.begin(), entry.end(), s) == entry.end())
            entry.push_back(std::move(s));
}

const std::vector<std::string>* SynonymLexicon::substitutes(Language lang, const std::string& folded_form) const
{
    auto it = m_entries.find({lang, folded_form});
    return it == m_entries.end() ? nullptr : &it->second;
}

SynonymLexicon SynonymLexicon::parse(std::string_view text)
{
    SynonymLexicon lex;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        auto fields = split_tabs(line);
        if (fields.size() < 3)
            throw ParseError(line_no, "expected lang, form and at least one substitute");
        try {
            lex.add(parse_language(fields[0]), fields[1], {fields.begin() + 2, fields.end()});
        } catch (const InvalidArgument& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return lex;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& file) { return parse(read_file(file)); }

std::vector<std::string> substitution_closure(std::string_view sentence, const SynonymLexicon& lexicon, Language lang)
{
    auto s = slots(sentence, lexicon, lang);
    if (s.empty())
        return {};
    if (closure_size(s) > 1e6)
        throw InvalidArgument("substitution closure too large to enumerate");
    std::set<std::string> out;
    std::vector<std::size_t> choice(s.size(), 0);
    while (true) {
        // Odometer increment.
        std::size_t i = 0;
        while (i < s.size() && ++choice[i] > s[i].options->size())
            choice[i++] = 0;
        if (i == s.size())
            break;
        out.insert(render(sentence, s, choice));
    }
    out.erase(std::string(sentence));
    return {out.begin(), out.end()};
}

ParaphraseSet generate_paraphrases(std::string_view sentence, const SynonymLexicon& lexicon, Language lang,
                                   std::size_t max_variants, std::uint64_t seed)
{
    if (lexicon.empty())
        throw InvalidArgument("empty lexicon");
    ParaphraseSet out;
    out.source = std::string(sentence);
    auto s = slots(sentence, lexicon, lang);
    if (s.empty() || max_variants == 0)
        return out;

    std::mt19937_64 rng(seed);
    std::set<std::string> seen{out.source};
    auto accept = [&](std::string v) {
        if (seen.insert(v).second)
            out.variants.push_back({std::move(v), {}});
    };

    if (closure_size(s) <= 4096) {
        auto all = substitution_closure(sentence, lexicon, lang);
        std::shuffle(all.begin(), all.end(), rng);
        for (auto& v : all) {
            if (out.variants.size() == max_variants)
                break;
            accept(std::move(v));
        }
        return out;
    }

    // Large closures: sample choices, forcing at least one swap.
    std::size_t attempts = 0;
    while (out.variants.size() < max_variants && attempts++ < 50 * max_variants) {
        std::vector<std::size_t> choice(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            choice[i] = std::uniform_int_distribution<std::size_t>(0, s[i].options->size())(rng);
        if (std::all_of(choice.begin(), choice.end(), [](std::size_t c) { return c == 0; })) {
            auto i = std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng);
            choice[i] = std::uniform_int_distribution<std::size_t>(1, s[i].options->size())(rng);
        }
        accept(render(sentence, s, choice));
    }
    return out;
}

double bleu_no_bp(std::string_view candidate, std::string_view reference, std::size_t max_n)
{
    auto c = text::tokenize(candidate);
    auto r = text::tokenize(reference);
    if (c.empty() || r.empty())
        throw InvalidArgument("BLEU needs non-empty candidate and reference");
    if (max_n == 0)
        throw InvalidArgument("max_n must be at least 1");

    auto ngrams = [](const std::vector<std::string>& t, std::size_t n) {
        std::map<std::vector<std::string>, std::size_t> out;
        for (std::size_t i = 0; i + n <= t.size(); ++i)
            ++out[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                           t.begin() + static_cast<std::ptrdiff_t>(i + n))];
        return out;
    };

    double log_sum = 0;
    std::size_t orders = 0;
    for (std::size_t n = 1; n <= max_n && n <= c.size(); ++n) {
        auto cn = ngrams(c, n);
        auto rn = ngrams(r, n);
        std::size_t matched = 0, total = 0;
        for (const auto& [g, count] : cn) {
            total += count;
            auto it = rn.find(g);
            if (it != rn.end())
                matched += std::min(count, it->second);
        }
        if (matched == 0)
            return 0.0;
        log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
        ++orders;
    }
    return std::exp(log_sum / static_cast<double>(orders));
}

double cosine_dissimilarity(const kg::Vector& a, const kg::Vector& b)
{
    if (a.size() != b.size())
        throw InvalidArgument("vector dimensions differ");
    auto zero = [](const kg::Vector& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); };
    if (a.empty() || zero(a) || zero(b))
        throw InvalidArgument("zero vector has no direction");
    return 1.0 - kg::cosine(a, b);
}

kg::Vector sentence_embedding(std::string_view sentence, const kg::Embeddings& embeddings)
{
    kg::Vector sum(embeddings.dimension(), 0.0);
    std::size_t n = 0;
    for (const auto& t : text::tokenize(sentence)) {
        if (const auto* v = embeddings.find(t)) {
            for (std::size_t i = 0; i < sum.size(); ++i)
                sum[i] += (*v)[i];
            ++n;
        }
    }
    if (n == 0)
        throw InvalidArgument("no token of the sentence has an embedding");
    for (auto& x : sum)
        x /= static_cast<double>(n);
    return sum;
}

void evaluate(ParaphraseSet& set, const kg::Embeddings& embeddings)
{
    std::optional<kg::Vector> src;
    try {
        src = sentence_embedding(set.source, embeddings);
    } catch (const InvalidArgument&) {
    }
    for (auto& v : set.variants) {
        v.metrics["bleu_no_bp"] = bleu_no_bp(v.text, set.source);
        if (!src)
            continue;
        try {
            v.metrics["cosine_dissimilarity"] = cosine_dissimilarity(sentence_embedding(v.text, embeddings), *src);
        } catch (const InvalidArgument&) {
        }
    }
}

}  // namespace amazul::paraphrase
