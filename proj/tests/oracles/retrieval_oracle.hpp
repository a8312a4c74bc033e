#pragma once

// Naive reference scorers. They rescan raw token lists for every query and
// share nothing with the inverted index beyond the tokenizer.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "amazul/text.hpp"

namespace amazul::oracle {

struct OracleDoc {
    std::string id;
    std::vector<std::string> tokens;
};

inline std::vector<OracleDoc> tokenize_all(const std::vector<std::pair<std::string, std::string>>& docs)
{
    std::vector<OracleDoc> out;
    for (const auto& [id, body] : docs) {
        out.push_back({id, text::tokenize(body)});
    }
    return out;
}

inline std::size_t count_in(const std::vector<std::string>& tokens, const std::string& term)
{
    std::size_t n = 0;
    for (const auto& t : tokens) {
        n += (t == term) ? 1 : 0;
    }
    return n;
}

struct OracleHit {
    std::string id;
    double score;
};

/// Full-scan Okapi BM25 with the nonnegative IDF form.
inline std::vector<OracleHit> naive_bm25(const std::vector<OracleDoc>& docs, const std::string& query, double k1 = 1.2,
                                         double b = 0.75)
{
    const double n = static_cast<double>(docs.size());
    double total_len = 0;
    for (const auto& d : docs) {
        total_len += static_cast<double>(d.tokens.size());
    }
    const double avg = total_len / n;
    auto q = text::tokenize(query);

    std::vector<OracleHit> hits;
    for (const auto& d : docs) {
        double score = 0;
        bool any = false;
        for (const auto& term : q) {
            std::size_t tf = count_in(d.tokens, term);
            if (tf == 0) {
                continue;
            }
            any = true;
            std::size_t df = 0;
            for (const auto& other : docs) {
                df += count_in(other.tokens, term) > 0 ? 1 : 0;
            }
            double idf = std::log((n - static_cast<double>(df) + 0.5) / (static_cast<double>(df) + 0.5) + 1.0);
            double len = static_cast<double>(d.tokens.size());
            score += idf * static_cast<double>(tf) * (k1 + 1.0) /
                     (static_cast<double>(tf) + k1 * (1.0 - b + b * len / avg));
        }
        if (any) {
            hits.push_back({d.id, score});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& c) {
        if (a.score != c.score) {
            return a.score > c.score;
        }
        return a.id < c.id;
    });
    return hits;
}

/// Smoothed TF-IDF cosine computed from raw token lists.
inline double naive_tfidf_cosine(const std::vector<OracleDoc>& docs, const std::string& a, const std::string& b)
{
    auto weights = [&](const std::string& text) {
        std::map<std::string, double> w;
        for (const auto& t : text::tokenize(text)) {
            w[t] += 1.0;
        }
        for (auto& [term, v] : w) {
            double df = 0;
            for (const auto& d : docs) {
                df += count_in(d.tokens, term) > 0 ? 1.0 : 0.0;
            }
            v *= std::log((static_cast<double>(docs.size()) + 1.0) / (df + 1.0)) + 1.0;
        }
        return w;
    };
    auto wa = weights(a);
    auto wb = weights(b);
    double dot = 0, na = 0, nb = 0;
    for (auto& [t, v] : wa) {
        na += v * v;
        if (wb.count(t)) {
            dot += v * wb[t];
        }
    }
    for (auto& [t, v] : wb) {
        nb += v * v;
    }
    if (na == 0 || nb == 0) {
        return 0;
    }
    return dot / std::sqrt(na * nb);
}

/// Random documents over a Zipf-ish vocabulary `w0..w{vocab-1}`.
inline std::vector<std::pair<std::string, std::string>> synthetic_corpus(std::size_t n_docs, std::size_t vocab,
                                                                         unsigned seed)
{
    std::mt19937 rng(seed);
    std::vector<double> weights(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
        weights[i] = 1.0 / static_cast<double>(i + 1);
    }
    std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
    std::uniform_int_distribution<int> length(1, 60);
    std::vector<std::pair<std::string, std::string>> docs;
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::string body;
        int len = length(rng);
        for (int i = 0; i < len; ++i) {
            body += "w" + std::to_string(word(rng)) + " ";
        }
        char id[16];
        std::snprintf(id, sizeof id, "d%04zu", d);
        docs.emplace_back(id, body);
    }
    return docs;
}

}  // namespace amazul::oracle
