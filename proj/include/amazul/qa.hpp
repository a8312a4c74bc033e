#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "amazul/datalake.hpp"
#include "amazul/retriever.hpp"

namespace amazul::qa {

struct QaConfig {
    std::size_t k = 5;
    double retrieval_threshold = 1.0;  ///< minimum top BM25 score
    double reader_threshold = 0.05;    ///< minimum sentence similarity
    int likert_threshold = 3;
    retrieval::Bm25Params bm25;
    std::string refusal_en = "Sorry, I could not find an answer to that in my sources.";
    std::string refusal_pt = "Desculpe, não encontrei uma resposta para isso nas minhas fontes.";

    const std::string& refusal(Language lang) const { return lang == Language::pt ? refusal_pt : refusal_en; }
};

struct Answer {
    std::string text;
    std::vector<lake::SourceRef> sources;
    std::vector<std::string> source_ids;
    double confidence = 0.0;
    bool triggered = false;
    std::vector<retrieval::ScoredDoc> retrieved;
};

/// The reader's pick: one sentence and where it came from.
struct Extraction {
    std::string sentence;
    std::string doc_id;
    std::size_t sentence_index = 0;
    double score = 0.0;
};

/// Sentence with the highest TF-IDF cosine to the question. Earlier documents
/// and earlier sentences win ties. nullopt when every sentence scores 0.
std::optional<Extraction> extract_answer(std::string_view question, std::span<const lake::Document> documents,
                                         const retrieval::InvertedIndex& index);

/// True iff the top retrieval score and the reader score clear their thresholds.
bool trigger_answerability(std::span<const double> retrieval_scores, std::optional<double> reader_score,
                           const QaConfig& config);

/// Retrieve k documents, read them, then decide whether to answer.
Answer answer_question(std::string_view question, const retrieval::Corpus& corpus, const QaConfig& config,
                       Language language = Language::en);

/// 1 iff rating >= threshold. Throws InvalidArgument outside 1..5.
int likert_to_binary(int rating, int threshold);

struct McSet {
    std::array<std::string, 5> alternatives;
    std::size_t correct_index = 0;
    std::array<std::string, 4> distractor_ids;
};

/// Target answer plus the answers of the four pool entries most similar to
/// the target's supporting text. The correct slot is a hash of the target id.
McSet build_mc_set(const lake::QASet& target, std::span<const lake::QASet> pool,
                   const retrieval::InvertedIndex& index, Language language = Language::en);

struct McChoice {
    std::size_t index = 0;
    std::vector<double> scores;
    bool low_confidence = false;
};

/// Picks the alternative most similar to the top-k retrieved context.
McChoice select_mc_answer(std::string_view question, std::span<const std::string> alternatives,
                          const retrieval::Corpus& corpus, const QaConfig& config);

// Metrics. Strings are normalised by the tokenizer (case fold, punctuation
// stripped) before comparison.
int exact_match(std::string_view prediction, std::string_view gold);
double token_f1(std::string_view prediction, std::string_view gold);
int recall_at_k(std::span<const retrieval::ScoredDoc> results, const std::string& gold_doc, std::size_t k);

enum class Task { mrc, ir, open_qa, answer_triggering, multiple_choice };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

struct BenchmarkReport {
    Task task = Task::mrc;
    std::map<std::string, double> metrics;
    std::size_t n_examples = 0;
};

nlohmann::json to_json(const BenchmarkReport& report);

/// Runs one task over a QA dataset. The retrieval corpus is the dataset's own
/// supporting texts, one document per QA set keyed by its id.
BenchmarkReport run_benchmark(Task task, std::span<const lake::QASet> dataset, const QaConfig& config,
                              Language language = Language::en);

}  // namespace amazul::qa
