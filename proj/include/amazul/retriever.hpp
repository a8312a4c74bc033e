#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amazul/datalake.hpp"
#include "amazul/text.hpp"

namespace amazul::retrieval {

/// Okapi BM25 free parameters.
struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc = 0;  ///< ordinal; ordinals follow ascending doc id
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

struct IndexInput {
    std::string id;
    std::string text;
};

/// Immutable inverted index. Documents are numbered in ascending id order so
/// posting lists sorted by ordinal are also sorted by id.
class InvertedIndex {
  public:
    /// Throws InvalidArgument on an empty input or duplicate ids.
    static InvertedIndex build(std::span<const IndexInput> docs, text::Analyzer analyzer = {});

    std::size_t doc_count() const { return m_ids.size(); }
    double avg_doc_len() const { return m_avg_doc_len; }
    std::size_t doc_len(std::uint32_t ordinal) const { return m_doc_lens[ordinal]; }
    const std::string& doc_id(std::uint32_t ordinal) const { return m_ids[ordinal]; }
    std::optional<std::uint32_t> ordinal(const std::string& id) const;

    /// Empty span when the term is not indexed.
    std::span<const Posting> postings(const std::string& term) const;
    std::size_t document_frequency(const std::string& term) const { return postings(term).size(); }
    std::size_t term_count() const { return m_postings.size(); }
    const std::unordered_map<std::string, std::vector<Posting>>& all_postings() const { return m_postings; }

    const text::Analyzer& analyzer() const { return m_analyzer; }

  private:
    std::vector<std::string> m_ids;
    std::vector<std::size_t> m_doc_lens;
    double m_avg_doc_len = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> m_postings;
    text::Analyzer m_analyzer;
};

struct RetrievalQuery {
    std::string text;
    std::size_t k = 5;
};

struct ScoredDoc {
    std::string id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// ln((N - df + 0.5) / (df + 0.5) + 1); never negative.
double bm25_idf(std::size_t doc_count, std::size_t df);

/// Top-k documents by Okapi BM25, score descending then id ascending.
/// Every query token contributes, so a repeated query term counts twice.
/// Documents matching no query term are left out. Throws on k == 0.
std::vector<ScoredDoc> bm25_search(const InvertedIndex& index, const RetrievalQuery& query, Bm25Params params = {});

using SparseVector = std::map<std::string, double>;

/// Smoothed IDF, ln((N + 1) / (df + 1)) + 1. Unseen terms get df = 0.
double tfidf_idf(const InvertedIndex& index, const std::string& term);

/// Raw term counts weighted by `tfidf_idf`.
SparseVector tfidf_vector(const InvertedIndex& index, std::string_view text);

double cosine(const SparseVector& a, const SparseVector& b);

/// Cosine of the TF-IDF vectors of two texts, in [0, 1]. 0 if either is empty.
double tfidf_cosine(const InvertedIndex& index, std::string_view text_a, std::string_view text_b);

/// Documents plus their index, published as one immutable snapshot.
class Corpus {
  public:
    static std::shared_ptr<const Corpus> build(std::vector<lake::Document> documents, text::Analyzer analyzer = {});

    const InvertedIndex& index() const { return m_index; }
    /// Sorted by id.
    const std::vector<lake::Document>& documents() const { return m_documents; }
    const lake::Document& document(const std::string& id) const;

  private:
    Corpus(std::vector<lake::Document> documents, InvertedIndex index);

    std::vector<lake::Document> m_documents;
    InvertedIndex m_index;
};

}  // namespace amazul::retrieval
