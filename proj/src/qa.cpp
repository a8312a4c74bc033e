#include "amazul/qa.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

namespace amazul::qa {

using retrieval::Corpus;
using retrieval::InvertedIndex;
using retrieval::ScoredDoc;

std::optional<Extraction> extract_answer(std::string_view question, std::span<const lake::Document> documents,
                                         const InvertedIndex& index)
{
    if (documents.empty()) {
        throw InvalidArgument("extract_answer needs at least one document");
    }
    auto query = retrieval::tfidf_vector(index, question);
    std::optional<Extraction> best;
    for (const auto& doc : documents) {
        auto sentences = text::split_sentences(doc.body);
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            double score = retrieval::cosine(query, retrieval::tfidf_vector(index, sentences[i].text));
            if (score > 0.0 && (!best || score > best->score)) {
                best = Extraction{sentences[i].text, doc.id, i, score};
            }
        }
    }
    return best;
}

bool trigger_answerability(std::span<const double> retrieval_scores, std::optional<double> reader_score,
                           const QaConfig& config)
{
    if (retrieval_scores.empty() || !reader_score) {
        return false;
    }
    double top = *std::max_element(retrieval_scores.begin(), retrieval_scores.end());
    return top >= config.retrieval_threshold && *reader_score >= config.reader_threshold;
}

Answer answer_question(std::string_view question, const Corpus& corpus, const QaConfig& config, Language language)
{
    Answer answer;
    answer.retrieved = retrieval::bm25_search(corpus.index(), {std::string(question), config.k}, config.bm25);

    std::optional<Extraction> extraction;
    if (!answer.retrieved.empty()) {
        std::vector<lake::Document> docs;
        docs.reserve(answer.retrieved.size());
        for (const auto& hit : answer.retrieved) {
            docs.push_back(corpus.document(hit.id));
        }
        extraction = extract_answer(question, docs, corpus.index());
    }

    std::vector<double> scores;
    for (const auto& hit : answer.retrieved) {
        scores.push_back(hit.score);
    }
    std::optional<double> reader_score;
    if (extraction) {
        reader_score = extraction->score;
    }
    answer.triggered = trigger_answerability(scores, reader_score, config);
    if (!answer.triggered) {
        answer.text = config.refusal(language);
        answer.confidence = 0.0;
        return answer;
    }
    answer.text = extraction->sentence;
    answer.confidence = extraction->score;
    answer.sources.push_back(corpus.document(extraction->doc_id).source);
    answer.source_ids.push_back(extraction->doc_id);
    return answer;
}

int likert_to_binary(int rating, int threshold)
{
    if (rating < 1 || rating > 5) {
        throw InvalidArgument("Likert rating must be in 1..5, got " + std::to_string(rating));
    }
    return rating >= threshold ? 1 : 0;
}

namespace {

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace

McSet build_mc_set(const lake::QASet& target, std::span<const lake::QASet> pool, const InvertedIndex& index,
                   Language language)
{
    const auto& gold = target.answer(language);
    const auto gold_tokens = text::tokenize(gold);

    struct Candidate {
        const lake::QASet* qa;
        double score;
    };
    std::vector<Candidate> candidates;
    auto support = retrieval::tfidf_vector(index, target.supporting_text);
    for (const auto& qa : pool) {
        if (qa.id == target.id || text::tokenize(qa.answer(language)) == gold_tokens) {
            continue;
        }
        candidates.push_back({&qa, retrieval::cosine(retrieval::tfidf_vector(index, qa.answer(language)), support)});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.qa->id < b.qa->id;
    });

    std::vector<const lake::QASet*> chosen;
    std::set<text::TokenStream> used{gold_tokens};
    for (const auto& c : candidates) {
        if (chosen.size() == 4) {
            break;
        }
        if (used.insert(text::tokenize(c.qa->answer(language))).second) {
            chosen.push_back(c.qa);
        }
    }
    if (chosen.size() < 4) {
        throw InvalidArgument("pool for '" + target.id + "' has fewer than 4 usable distractors");
    }

    McSet set;
    set.correct_index = fnv1a(target.id) % 5;
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < 5; ++slot) {
        if (slot == set.correct_index) {
            set.alternatives[slot] = gold;
            continue;
        }
        set.alternatives[slot] = chosen[next]->answer(language);
        set.distractor_ids[next] = chosen[next]->id;
        ++next;
    }
    return set;
}

McChoice select_mc_answer(std::string_view question, std::span<const std::string> alternatives, const Corpus& corpus,
                          const QaConfig& config)
{
    if (alternatives.empty()) {
        throw InvalidArgument("select_mc_answer needs alternatives");
    }
    std::string context;
    for (const auto& hit : retrieval::bm25_search(corpus.index(), {std::string(question), config.k}, config.bm25)) {
        context += corpus.document(hit.id).body;
        context += '\n';
    }
    auto context_vec = retrieval::tfidf_vector(corpus.index(), context);
    McChoice choice;
    double best = 0.0;
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
        double score = retrieval::cosine(retrieval::tfidf_vector(corpus.index(), alternatives[i]), context_vec);
        choice.scores.push_back(score);
        if (score > best) {
            best = score;
            choice.index = i;
        }
    }
    choice.low_confidence = best == 0.0;
    return choice;
}

int exact_match(std::string_view prediction, std::string_view gold)
{
    return text::tokenize(prediction) == text::tokenize(gold) ? 1 : 0;
}

double token_f1(std::string_view prediction, std::string_view gold)
{
    auto pred = text::tokenize(prediction);
    auto ref = text::tokenize(gold);
    if (pred.empty() || ref.empty()) {
        return pred.empty() && ref.empty() ? 1.0 : 0.0;
    }
    std::map<std::string, int> remaining;
    for (const auto& t : ref) {
        ++remaining[t];
    }
    int overlap = 0;
    for (const auto& t : pred) {
        if (auto it = remaining.find(t); it != remaining.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) {
        return 0.0;
    }
    double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
    return 2.0 * precision * recall / (precision + recall);
}

int recall_at_k(std::span<const ScoredDoc> results, const std::string& gold_doc, std::size_t k)
{
    std::size_t limit = std::min(k, results.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (results[i].id == gold_doc) {
            return 1;
        }
    }
    return 0;
}

std::string_view to_string(Task task)
{
    switch (task) {
    case Task::mrc: return "mrc";
    case Task::ir: return "ir";
    case Task::open_qa: return "open-qa";
    case Task::answer_triggering: return "answer-triggering";
    case Task::multiple_choice: return "multiple-choice";
    }
    return "mrc";
}

Task parse_task(std::string_view text)
{
    for (auto t : {Task::mrc, Task::ir, Task::open_qa, Task::answer_triggering, Task::multiple_choice}) {
        if (to_string(t) == text) {
            return t;
        }
    }
    throw InvalidArgument("unknown task '" + std::string(text) +
                          "' (expected mrc, ir, open-qa, answer-triggering, multiple-choice)");
}

nlohmann::json to_json(const BenchmarkReport& report)
{
    return nlohmann::json{{"task", to_string(report.task)},
                          {"metrics", report.metrics},
                          {"n_examples", report.n_examples}};
}

namespace {

std::shared_ptr<const Corpus> corpus_from_dataset(std::span<const lake::QASet> dataset, Language language)
{
    std::vector<lake::Document> docs;
    for (const auto& qa : dataset) {
        if (qa.supporting_text.empty()) {
            continue;
        }
        lake::Document doc;
        doc.id = qa.id;
        doc.title = qa.id;
        doc.body = qa.supporting_text;
        doc.language = language;
        doc.kind = lake::DocumentKind::abstract;
        doc.source.origin_name = "dataset:" + qa.id;
        docs.push_back(std::move(doc));
    }
    if (docs.empty()) {
        throw InvalidArgument("dataset has no supporting texts");
    }
    return Corpus::build(std::move(docs));
}

}  // namespace

BenchmarkReport run_benchmark(Task task, std::span<const lake::QASet> dataset, const QaConfig& config,
                              Language language)
{
    BenchmarkReport report;
    report.task = task;
    auto corpus = corpus_from_dataset(dataset, language);

    switch (task) {
    case Task::mrc: {
        double em = 0, f1 = 0;
        for (const auto& qa : dataset) {
            if (qa.supporting_text.empty()) {
                continue;
            }
            std::array<lake::Document, 1> docs{corpus->document(qa.id)};
            auto pick = extract_answer(qa.question(language), docs, corpus->index());
            std::string prediction = pick ? pick->sentence : std::string{};
            em += exact_match(prediction, qa.answer(language));
            f1 += token_f1(prediction, qa.answer(language));
            ++report.n_examples;
        }
        double n = std::max<double>(1.0, static_cast<double>(report.n_examples));
        report.metrics = {{"exact_match", em / n}, {"f1", f1 / n}};
        break;
    }
    case Task::ir: {
        double hit1 = 0, hitk = 0, rr = 0;
        for (const auto& qa : dataset) {
            if (qa.supporting_text.empty()) {
                continue;
            }
            auto results = retrieval::bm25_search(corpus->index(), {qa.question(language), corpus->documents().size()},
                                                  config.bm25);
            hit1 += recall_at_k(results, qa.id, 1);
            hitk += recall_at_k(results, qa.id, config.k);
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (results[i].id == qa.id) {
                    rr += 1.0 / static_cast<double>(i + 1);
                    break;
                }
            }
            ++report.n_examples;
        }
        double n = std::max<double>(1.0, static_cast<double>(report.n_examples));
        report.metrics = {{"recall@1", hit1 / n}, {"recall@" + std::to_string(config.k), hitk / n}, {"mrr", rr / n}};
        break;
    }
    case Task::open_qa: {
        double em = 0, f1 = 0;
        for (const auto& qa : dataset) {
            auto answer = answer_question(qa.question(language), *corpus, config, language);
            std::string prediction = answer.triggered ? answer.text : std::string{};
            em += exact_match(prediction, qa.answer(language));
            f1 += token_f1(prediction, qa.answer(language));
            ++report.n_examples;
        }
        double n = std::max<double>(1.0, static_cast<double>(report.n_examples));
        report.metrics = {{"exact_match", em / n}, {"f1", f1 / n}};
        break;
    }
    case Task::answer_triggering: {
        double tp = 0, fp = 0, tn = 0, fn = 0;
        for (const auto& qa : dataset) {
            if (!qa.meaningfulness_likert) {
                continue;
            }
            int gold = likert_to_binary(*qa.meaningfulness_likert, config.likert_threshold);
            bool predicted = answer_question(qa.question(language), *corpus, config, language).triggered;
            if (predicted && gold == 1) {
                ++tp;
            } else if (predicted) {
                ++fp;
            } else if (gold == 1) {
                ++fn;
            } else {
                ++tn;
            }
            ++report.n_examples;
        }
        double n = std::max<double>(1.0, static_cast<double>(report.n_examples));
        double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        report.metrics = {{"accuracy", (tp + tn) / n}, {"precision", precision}, {"recall", recall}, {"f1", f1}};
        break;
    }
    case Task::multiple_choice: {
        double correct = 0;
        for (const auto& qa : dataset) {
            std::vector<std::string> alternatives;
            std::size_t gold = 0;
            if (qa.mc_alternatives) {
                alternatives = *qa.mc_alternatives;
                gold = static_cast<std::size_t>(qa.mc_correct_index.value_or(0));
            } else {
                auto set = build_mc_set(qa, dataset, corpus->index(), language);
                alternatives.assign(set.alternatives.begin(), set.alternatives.end());
                gold = set.correct_index;
            }
            auto choice = select_mc_answer(qa.question(language), alternatives, *corpus, config);
            correct += choice.index == gold ? 1.0 : 0.0;
            ++report.n_examples;
        }
        report.metrics = {{"accuracy", correct / std::max<double>(1.0, static_cast<double>(report.n_examples))}};
        break;
    }
    }
    return report;
}

}  // namespace amazul::qa
