#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amazul/datalake.hpp"
#include "amazul/retriever.hpp"

namespace amazul::summary {

struct RankedSentence {
    std::string text;
    double score = 0.0;
    std::string doc_id;
    std::size_t sentence_index = 0;
    bool duplicate = false;  ///< same tokens as a higher-ranked sentence
};

/// Every sentence of every document scored by TF-IDF cosine to the title.
/// Score descending, ties by (doc id, sentence index).
std::vector<RankedSentence> rank_sentences(std::string_view title, std::span<const lake::Document> documents,
                                           const retrieval::InvertedIndex& index);

struct SummaryRequest {
    std::string title;
    std::vector<std::string> doc_ids;
    std::size_t L = 3;    ///< sentences to extract
    std::size_t n = 100;  ///< token cap
};

struct SentenceSource {
    std::string doc_id;
    std::size_t sentence_index = 0;
    lake::SourceRef source;
};

struct Summary {
    std::string title;
    std::string text;                       ///< extracted sentences only; the title is kept apart
    std::vector<RankedSentence> selected;   ///< top-L, before the token cap
    std::vector<SentenceSource> provenance; ///< sentences that made it into `text`
    std::size_t token_count = 0;
    bool hard_cut = false;  ///< the cap fell inside the first sentence
};

/// Top-L sentences joined in rank order, cut to n tokens at a sentence
/// boundary, or mid-sentence when not even the first sentence fits.
/// Throws InvalidArgument when L or n is 0.
Summary summarize(std::string_view title, std::span<const lake::Document> documents,
                  const retrieval::InvertedIndex& index, std::size_t L, std::size_t n);

/// Resolves ids against the corpus (NotFound on unknown ids) and uses its index.
Summary summarize(const SummaryRequest& request, const retrieval::Corpus& corpus);

}  // namespace amazul::summary
