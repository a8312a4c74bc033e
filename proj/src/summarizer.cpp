#include "amazul/summarizer.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "amazul/text.hpp"

namespace amazul::summary {

std::vector<RankedSentence> rank_sentences(std::string_view title, std::span<const lake::Document> documents,
                                           const retrieval::InvertedIndex& index)
{
    std::vector<RankedSentence> out;
    for (const auto& d : documents) {
        auto sentences = text::split_sentences(d.body);
        for (std::size_t i = 0; i < sentences.size(); ++i)
            out.push_back({sentences[i].text, retrieval::tfidf_cosine(index, title, sentences[i].text), d.id, i});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedSentence& a, const RankedSentence& b) {
        if (a.score != b.score)
            return a.score > b.score;
        if (a.doc_id != b.doc_id)
            return a.doc_id < b.doc_id;
        return a.sentence_index < b.sentence_index;
    });
    std::set<text::TokenStream> seen;
    for (auto& s : out)
        s.duplicate = !seen.insert(text::tokenize(s.text)).second;
    return out;
}

Summary summarize(std::string_view title, std::span<const lake::Document> documents,
                  const retrieval::InvertedIndex& index, std::size_t L, std::size_t n)
{
    if (L == 0 || n == 0)
        throw InvalidArgument("L and n must be at least 1");
    Summary out;
    out.title = std::string(title);
    auto ranked = rank_sentences(title, documents, index);
    ranked.resize(std::min(L, ranked.size()));
    out.selected = ranked;

    std::map<std::string, const lake::Document*> by_id;
    for (const auto& d : documents)
        by_id[d.id] = &d;
    auto add = [&](const RankedSentence& s, std::string_view text, std::size_t tokens) {
        if (!out.text.empty())
            out.text += ' ';
        out.text += text;
        out.token_count += tokens;
        out.provenance.push_back({s.doc_id, s.sentence_index, by_id.at(s.doc_id)->source});
    };

    for (const auto& s : ranked) {
        auto spans = text::tokenize_with_spans(s.text);
        if (out.token_count + spans.size() <= n) {
            add(s, s.text, spans.size());
            continue;
        }
        if (out.provenance.empty()) {
            // Not even the first sentence fits: cut it after its n-th token.
            add(s, std::string_view(s.text).substr(0, spans[n - 1].end), n);
            out.hard_cut = true;
        }
        break;
    }
    return out;
}

Summary summarize(const SummaryRequest& request, const retrieval::Corpus& corpus)
{
    std::vector<lake::Document> docs;
    for (const auto& id : request.doc_ids)
        docs.push_back(corpus.document(id));
    return summarize(request.title, docs, corpus.index(), request.L, request.n);
}

}  // namespace amazul::summary
