#include "amazul/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace amazul::retrieval {

InvertedIndex InvertedIndex::build(std::span<const IndexInput> docs, text::Analyzer analyzer)
{
    if (docs.empty()) {
        throw InvalidArgument("cannot build an index over zero documents");
    }
    std::vector<const IndexInput*> ordered;
    ordered.reserve(docs.size());
    for (const auto& d : docs) {
        ordered.push_back(&d);
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->id == ordered[i - 1]->id) {
            throw InvalidArgument("duplicate document id '" + ordered[i]->id + "'");
        }
    }

    InvertedIndex index;
    index.m_analyzer = std::move(analyzer);
    std::size_t total = 0;
    for (std::uint32_t ordinal = 0; ordinal < ordered.size(); ++ordinal) {
        const auto* doc = ordered[ordinal];
        auto tokens = index.m_analyzer.analyze(doc->text);
        index.m_ids.push_back(doc->id);
        index.m_doc_lens.push_back(tokens.size());
        total += tokens.size();

        std::map<std::string, std::uint32_t> counts;
        for (auto& tok : tokens) {
            ++counts[tok];
        }
        // Ordinals are visited in increasing order, so every list stays sorted.
        for (auto& [term, tf] : counts) {
            index.m_postings[term].push_back(Posting{ordinal, tf});
        }
    }
    index.m_avg_doc_len = static_cast<double>(total) / static_cast<double>(ordered.size());
    return index;
}

std::optional<std::uint32_t> InvertedIndex::ordinal(const std::string& id) const
{
    auto it = std::lower_bound(m_ids.begin(), m_ids.end(), id);
    if (it == m_ids.end() || *it != id) {
        return std::nullopt;
    }
    return static_cast<std::uint32_t>(it - m_ids.begin());
}

std::span<const Posting> InvertedIndex::postings(const std::string& term) const
{
    auto it = m_postings.find(term);
    if (it == m_postings.end()) {
        return {};
    }
    return it->second;
}

double bm25_idf(std::size_t doc_count, std::size_t df)
{
    auto n = static_cast<double>(doc_count);
    auto d = static_cast<double>(df);
    return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

std::vector<ScoredDoc> bm25_search(const InvertedIndex& index, const RetrievalQuery& query, Bm25Params params)
{
    if (query.k == 0) {
        throw InvalidArgument("retrieval depth k must be at least 1");
    }
    auto terms = index.analyzer().analyze(query.text);
    std::vector<double> accumulator(index.doc_count(), 0.0);
    std::vector<bool> matched(index.doc_count(), false);
    const double avg = index.avg_doc_len();

    for (const auto& term : terms) {
        auto list = index.postings(term);
        if (list.empty()) {
            continue;
        }
        const double idf = bm25_idf(index.doc_count(), list.size());
        for (const auto& p : list) {
            const double tf = p.tf;
            const double norm = 1.0 - params.b + params.b * static_cast<double>(index.doc_len(p.doc)) / avg;
            accumulator[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
            matched[p.doc] = true;
        }
    }

    std::vector<std::uint32_t> hits;
    for (std::uint32_t d = 0; d < matched.size(); ++d) {
        if (matched[d]) {
            hits.push_back(d);
        }
    }
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (accumulator[a] != accumulator[b]) {
            return accumulator[a] > accumulator[b];
        }
        return a < b;
    };
    std::size_t keep = std::min(query.k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);

    std::vector<ScoredDoc> results;
    results.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        results.push_back(ScoredDoc{index.doc_id(hits[i]), accumulator[hits[i]]});
    }
    return results;
}

double tfidf_idf(const InvertedIndex& index, const std::string& term)
{
    auto n = static_cast<double>(index.doc_count());
    auto df = static_cast<double>(index.document_frequency(term));
    return std::log((n + 1.0) / (df + 1.0)) + 1.0;
}

SparseVector tfidf_vector(const InvertedIndex& index, std::string_view text)
{
    SparseVector counts;
    for (auto& tok : index.analyzer().analyze(text)) {
        counts[tok] += 1.0;
    }
    for (auto& [term, weight] : counts) {
        weight *= tfidf_idf(index, term);
    }
    return counts;
}

double cosine(const SparseVector& a, const SparseVector& b)
{
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [term, w] : a) {
        na += w * w;
        if (auto it = b.find(term); it != b.end()) {
            dot += w * it->second;
        }
    }
    for (const auto& [term, w] : b) {
        nb += w * w;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double tfidf_cosine(const InvertedIndex& index, std::string_view text_a, std::string_view text_b)
{
    return cosine(tfidf_vector(index, text_a), tfidf_vector(index, text_b));
}

Corpus::Corpus(std::vector<lake::Document> documents, InvertedIndex index)
    : m_documents(std::move(documents)), m_index(std::move(index))
{}

std::shared_ptr<const Corpus> Corpus::build(std::vector<lake::Document> documents, text::Analyzer analyzer)
{
    std::sort(documents.begin(), documents.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<IndexInput> inputs;
    inputs.reserve(documents.size());
    for (const auto& doc : documents) {
        inputs.push_back({doc.id, doc.body});
    }
    auto index = InvertedIndex::build(inputs, std::move(analyzer));
    return std::shared_ptr<const Corpus>(new Corpus(std::move(documents), std::move(index)));
}

const lake::Document& Corpus::document(const std::string& id) const
{
    auto it = std::lower_bound(m_documents.begin(), m_documents.end(), id,
                               [](const lake::Document& d, const std::string& key) { return d.id < key; });
    if (it == m_documents.end() || it->id != id) {
        throw NotFound("document '" + id + "' not found");
    }
    return *it;
}

}  // namespace amazul::retrieval
