#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amazul/common.hpp"
#include "amazul/kg.hpp"

namespace amazul::paraphrase {

/// Single-token substitutes per (language, folded form).
///
/// File format, one entry per line, TAB separated: `lang form substitute...`.
class SynonymLexicon {
  public:
    /// Throws InvalidArgument for multi-token forms or substitutes, or an entry
    /// whose only substitute is the form itself.
    void add(Language lang, std::string_view form, const std::vector<std::string>& substitutes);

    /// nullptr when the folded token has no entry.
    const std::vector<std::string>* substitutes(Language lang, const std::string& folded_form) const;
    std::size_t size() const { return m_entries.size(); }
    bool empty() const { return m_entries.empty(); }

    static SynonymLexicon parse(std::string_view text);
    static SynonymLexicon load(const std::filesystem::path& file);

  private:
    std::map<std::pair<Language, std::string>, std::vector<std::string>> m_entries;
};

struct Variant {
    std::string text;
    std::map<std::string, double> metrics;
};

struct ParaphraseSet {
    std::string source;
    std::vector<Variant> variants;
};

/// Up to `max_variants` distinct sentences, each with at least one lexicon
/// token swapped. Punctuation and spacing are kept; a capitalised token gets
/// a capitalised substitute. Deterministic for a given seed.
ParaphraseSet generate_paraphrases(std::string_view sentence, const SynonymLexicon& lexicon, Language lang,
                                   std::size_t max_variants, std::uint64_t seed);

/// Every sentence reachable by substituting any non-empty subset of the
/// lexicon tokens. Used to bound what generation may return.
std::vector<std::string> substitution_closure(std::string_view sentence, const SynonymLexicon& lexicon, Language lang);

/// Geometric mean of clipped n-gram precisions for n = 1..max_n with no
/// brevity penalty and no smoothing. Orders for which the candidate has no
/// n-grams are skipped. Throws InvalidArgument when either side has no tokens.
double bleu_no_bp(std::string_view candidate, std::string_view reference, std::size_t max_n = 4);

/// 1 - cosine. Throws InvalidArgument on a zero vector or mismatched sizes.
double cosine_dissimilarity(const kg::Vector& a, const kg::Vector& b);

/// Mean of the token vectors that have an embedding. Throws InvalidArgument
/// when no token has one.
kg::Vector sentence_embedding(std::string_view sentence, const kg::Embeddings& embeddings);

/// Fills "bleu_no_bp" (variant against source) and, when both sentences can
/// be embedded, "cosine_dissimilarity".
void evaluate(ParaphraseSet& set, const kg::Embeddings& embeddings);

}  // namespace amazul::paraphrase
