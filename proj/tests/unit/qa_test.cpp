#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "amazul/qa.hpp"
#include "oracles/qa_oracle.hpp"
#include "support/fixtures.hpp"

using namespace amazul;
using namespace amazul::qa;
using amazul::testing::fixture_path;

namespace {

lake::Document make_doc(const std::string& id, const std::string& body)
{
    lake::Document d;
    d.id = id;
    d.body = body;
    d.source.origin_name = "src-" + id;
    return d;
}

struct Fixture {
    std::vector<lake::Document> docs = testing::read_documents(fixture_path("qa_corpus.jsonl"));
    std::shared_ptr<const retrieval::Corpus> corpus = retrieval::Corpus::build(docs);
    std::vector<oracle::OracleDoc> tokens = oracle::tokenize_all(testing::id_body_pairs(docs));
    std::vector<nlohmann::json> questions = testing::read_jsonl(fixture_path("qa_questions.jsonl"));

    /// QA sets for the answerable questions; supporting text is the source document.
    std::vector<lake::QASet> qa_sets() const
    {
        std::vector<lake::QASet> sets;
        int n = 0;
        for (const auto& q : questions) {
            if (!q["answerable"].get<bool>()) {
                continue;
            }
            lake::QASet qa;
            char id[16];
            std::snprintf(id, sizeof id, "q%02d", ++n);
            qa.id = id;
            qa.question_en = q["question"];
            qa.answer_en = q["gold"];
            for (const auto& d : docs) {
                if (d.body.find(qa.answer_en) != std::string::npos) {
                    qa.supporting_text = d.body;
                }
            }
            sets.push_back(qa);
        }
        return sets;
    }
};

}  // namespace

TEST_CASE("extract_answer picks the best sentence or signals no answer")
{
    std::vector<lake::Document> one{make_doc("a", "Whales migrate north.")};
    auto index = retrieval::InvertedIndex::build(std::vector<retrieval::IndexInput>{{"a", one[0].body}});
    auto pick = extract_answer("Where do whales go?", one, index);
    REQUIRE(pick);
    CHECK(pick->sentence == "Whales migrate north.");
    CHECK(pick->doc_id == "a");
    CHECK_FALSE(extract_answer("volcano eruption", one, index));
    CHECK_THROWS_AS(extract_answer("x", std::span<const lake::Document>{}, index), InvalidArgument);
}

TEST_CASE("extract_answer equals the exhaustive argmax on a 3x5 fixture")
{
    std::vector<lake::Document> docs{
        make_doc("d1", "Salt marshes flood daily. Herons hunt in shallow water. The marsh filters runoff. "
                       "Tidal creeks carry sediment. Crabs dig burrows in mud."),
        make_doc("d2", "Seagrass beds shelter juvenile fish. Manatees graze on seagrass. Light limits seagrass depth. "
                       "Storms uproot seagrass meadows. Turtles also feed on seagrass."),
        make_doc("d3", "Sandy beaches move with the seasons. Dunes protect the coast from storms. "
                       "Turtles nest on sandy beaches at night. Erosion removes sand from beaches. "
                       "Beach grass holds dunes in place."),
    };
    auto corpus = retrieval::Corpus::build(docs);
    auto tokens = oracle::tokenize_all(testing::id_body_pairs(docs));
    for (const char* q : {"Where do turtles nest?", "What do manatees graze on?", "What protects the coast?",
                          "What do crabs dig?", "What carries sediment in tidal creeks?", "storms seagrass"}) {
        auto got = extract_answer(q, docs, corpus->index());
        auto expected = oracle::argmax_sentence(tokens, docs, q);
        REQUIRE(got.has_value() == expected.has_value());
        CHECK(got->sentence == expected->sentence);
        CHECK(got->doc_id == expected->doc_id);
        CHECK(std::abs(got->score - expected->score) < 1e-9);
    }
}

TEST_CASE("answer_question on verbatim and unsupported questions")
{
    Fixture fx;
    QaConfig config;
    auto answer = answer_question("When did Petrobras discover the Tupi field?", *fx.corpus, config);
    CHECK(answer.triggered);
    CHECK(answer.text == "Petrobras discovered the Tupi field in 2006.");
    REQUIRE(answer.sources.size() == 1);
    CHECK(answer.source_ids[0] == "pre-salt");
    CHECK(answer.sources[0] == fx.corpus->document("pre-salt").source);
    CHECK(answer.confidence > 0.0);
    CHECK(answer.confidence <= 1.0);

    auto refusal = answer_question("Who painted the Mona Lisa?", *fx.corpus, config);
    CHECK_FALSE(refusal.triggered);
    CHECK(refusal.text == config.refusal_en);
    CHECK(refusal.sources.empty());
    CHECK(answer_question("Quem pintou Guernica?", *fx.corpus, config, Language::pt).text == config.refusal_pt);
}

TEST_CASE("answer_question matches the oracle over the 20-question fixture")
{
    Fixture fx;
    QaConfig config;
    for (const auto& q : fx.questions) {
        const std::string question = q["question"];
        auto answer = answer_question(question, *fx.corpus, config);
        if (!q["answerable"].get<bool>()) {
            CHECK_FALSE(answer.triggered);
            CHECK(answer.sources.empty());
            continue;
        }
        std::vector<lake::Document> retrieved;
        for (const auto& hit : answer.retrieved) {
            retrieved.push_back(fx.corpus->document(hit.id));
        }
        auto expected = oracle::argmax_sentence(fx.tokens, retrieved, question);
        REQUIRE(expected);
        CHECK(answer.triggered);
        CHECK(answer.text == expected->sentence);
        REQUIRE_FALSE(answer.source_ids.empty());
        CHECK(answer.source_ids[0] == expected->doc_id);
    }
}

TEST_CASE("answer_question is deterministic")
{
    Fixture fx;
    QaConfig config;
    auto first = answer_question("What is a major cause of mangrove loss?", *fx.corpus, config);
    for (int i = 0; i < 3; ++i) {
        auto again = answer_question("What is a major cause of mangrove loss?", *fx.corpus, config);
        CHECK(again.text == first.text);
        CHECK(again.source_ids == first.source_ids);
        CHECK(again.confidence == first.confidence);
    }
}

TEST_CASE("trigger_answerability")
{
    QaConfig config;
    CHECK_FALSE(trigger_answerability({}, 0.9, config));
    std::vector<double> high{50.0, 3.0};
    CHECK(trigger_answerability(high, 0.9, config));
    CHECK_FALSE(trigger_answerability(high, std::nullopt, config));
    CHECK_FALSE(trigger_answerability(high, 0.01, config));
    std::vector<double> low{0.4};
    CHECK_FALSE(trigger_answerability(low, 0.9, config));
    std::vector<double> boundary{1.0};
    CHECK(trigger_answerability(boundary, 0.05, config));
}

TEST_CASE("threshold sweep reproduces the oracle confusion matrix")
{
    Fixture fx;
    struct Confusion {
        int tp = 0, fp = 0, tn = 0, fn = 0;
        bool operator==(const Confusion&) const = default;
    };
    for (double theta_r : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        for (double theta_s : {0.0, 0.05, 0.2, 0.4, 0.6}) {
            QaConfig config;
            config.retrieval_threshold = theta_r;
            config.reader_threshold = theta_s;
            Confusion got, expected;
            for (const auto& q : fx.questions) {
                const std::string question = q["question"];
                bool label = q["answerable"];
                bool predicted = answer_question(question, *fx.corpus, config).triggered;

                auto hits = oracle::naive_bm25(fx.tokens, question);
                std::vector<lake::Document> top;
                for (std::size_t i = 0; i < std::min<std::size_t>(config.k, hits.size()); ++i) {
                    top.push_back(fx.corpus->document(hits[i].id));
                }
                auto pick = oracle::argmax_sentence(fx.tokens, top, question);
                bool oracle_says = !hits.empty() && hits[0].score >= theta_r && pick && pick->score >= theta_s;

                auto tally = [&](Confusion& c, bool p) {
                    if (p && label) {
                        ++c.tp;
                    } else if (p) {
                        ++c.fp;
                    } else if (label) {
                        ++c.fn;
                    } else {
                        ++c.tn;
                    }
                };
                tally(got, predicted);
                tally(expected, oracle_says);
            }
            CHECK(got == expected);
        }
    }
}

TEST_CASE("likert_to_binary")
{
    CHECK(likert_to_binary(5, 3) == 1);
    CHECK(likert_to_binary(2, 3) == 0);
    CHECK(likert_to_binary(3, 3) == 1);
    CHECK_THROWS_AS(likert_to_binary(0, 3), InvalidArgument);
    CHECK_THROWS_AS(likert_to_binary(6, 3), InvalidArgument);
}

TEST_CASE("build_mc_set with a forced pool")
{
    Fixture fx;
    auto sets = fx.qa_sets();
    std::vector<lake::QASet> pool(sets.begin() + 1, sets.begin() + 5);
    auto mc = build_mc_set(sets[0], pool, fx.corpus->index());
    CHECK(mc.alternatives.size() == 5);
    CHECK(mc.alternatives[mc.correct_index] == sets[0].answer_en);
    std::vector<std::string> ids(mc.distractor_ids.begin(), mc.distractor_ids.end());
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::string>{sets[1].id, sets[2].id, sets[3].id, sets[4].id});

    std::vector<lake::QASet> small(sets.begin() + 1, sets.begin() + 4);
    CHECK_THROWS_AS(build_mc_set(sets[0], small, fx.corpus->index()), InvalidArgument);
    // the target itself never counts as a distractor
    std::vector<lake::QASet> with_self(sets.begin(), sets.begin() + 4);
    CHECK_THROWS_AS(build_mc_set(sets[0], with_self, fx.corpus->index()), InvalidArgument);
}

TEST_CASE("build_mc_set picks the four most similar answers from a pool of 10")
{
    Fixture fx;
    auto sets = fx.qa_sets();
    for (std::size_t t = 0; t < 5; ++t) {
        const auto& target = sets[t];
        std::vector<lake::QASet> pool(sets.begin() + 10, sets.begin() + 20);
        auto mc = build_mc_set(target, pool, fx.corpus->index());

        std::vector<std::pair<double, std::string>> scored;
        for (const auto& qa : pool) {
            scored.emplace_back(-oracle::naive_tfidf_cosine(fx.tokens, qa.answer_en, target.supporting_text), qa.id);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (std::abs(a.first - b.first) > 1e-12) {
                return a.first < b.first;
            }
            return a.second < b.second;
        });
        std::vector<std::string> expected;
        for (int i = 0; i < 4; ++i) {
            expected.push_back(scored[static_cast<std::size_t>(i)].second);
        }
        std::vector<std::string> got(mc.distractor_ids.begin(), mc.distractor_ids.end());
        CHECK(got == expected);
        CHECK(std::count(mc.alternatives.begin(), mc.alternatives.end(), target.answer_en) == 1);
    }
}

TEST_CASE("select_mc_answer")
{
    Fixture fx;
    QaConfig config;
    std::vector<std::string> alts{"Glaciers", "Tupi field", "Penguins", "Deserts", "Volcanoes"};
    auto choice = select_mc_answer("When did Petrobras discover the Tupi field?", alts, *fx.corpus, config);
    CHECK(choice.index == 1);
    CHECK_FALSE(choice.low_confidence);

    std::vector<std::string> none{"zzz", "yyy", "xxx", "www", "vvv"};
    auto zero = select_mc_answer("Who painted the Mona Lisa?", none, *fx.corpus, config);
    CHECK(zero.index == 0);
    CHECK(zero.low_confidence);
}

TEST_CASE("select_mc_answer matches the oracle on 20 sets")
{
    Fixture fx;
    QaConfig config;
    auto sets = fx.qa_sets();
    REQUIRE(sets.size() == 20);
    for (const auto& target : sets) {
        auto mc = build_mc_set(target, sets, fx.corpus->index());
        auto choice = select_mc_answer(target.question_en, mc.alternatives, *fx.corpus, config);

        std::string context;
        auto hits = oracle::naive_bm25(fx.tokens, target.question_en);
        for (std::size_t i = 0; i < std::min<std::size_t>(config.k, hits.size()); ++i) {
            context += fx.corpus->document(hits[i].id).body + "\n";
        }
        std::size_t best = 0;
        double best_score = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            double s = oracle::naive_tfidf_cosine(fx.tokens, mc.alternatives[i], context);
            if (s > best_score + 1e-12) {
                best_score = s;
                best = i;
            }
        }
        CHECK(choice.index == best);
    }
}

TEST_CASE("metrics")
{
    CHECK(std::abs(token_f1("the blue amazon", "blue amazon") - 0.8) < 1e-9);
    CHECK(token_f1("blue amazon", "the blue amazon") == doctest::Approx(0.8));
    CHECK(token_f1("a a b", "a b b") == doctest::Approx(2.0 / 3.0));
    CHECK(token_f1("", "") == 1.0);
    CHECK(token_f1("x", "") == 0.0);
    CHECK(token_f1("x", "y") == 0.0);
    CHECK(exact_match("The Blue Amazon!", "the blue  amazon") == 1);
    CHECK(exact_match("blue", "amazon") == 0);

    std::vector<retrieval::ScoredDoc> results{{"a", 3}, {"b", 2}, {"c", 1}};
    CHECK(recall_at_k(results, "b", 2) == 1);
    CHECK(recall_at_k(results, "c", 2) == 0);
    CHECK(recall_at_k(results, "z", 3) == 0);
}

TEST_CASE("run_benchmark reports bounded metrics for every task")
{
    Fixture fx;
    auto sets = fx.qa_sets();
    for (std::size_t i = 0; i < sets.size(); ++i) {
        sets[i].meaningfulness_likert = static_cast<int>(1 + i % 5);
    }
    QaConfig config;
    for (auto task : {Task::mrc, Task::ir, Task::open_qa, Task::answer_triggering, Task::multiple_choice}) {
        auto report = run_benchmark(task, sets, config);
        CHECK(report.n_examples == 20);
        CHECK_FALSE(report.metrics.empty());
        for (const auto& [name, value] : report.metrics) {
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
        }
        auto j = to_json(report);
        CHECK(j["task"] == std::string(to_string(task)));
    }
    auto mrc = run_benchmark(Task::mrc, sets, config);
    CHECK(mrc.metrics["f1"] > 0.5);
    CHECK(parse_task("open-qa") == Task::open_qa);
    CHECK_THROWS_AS(parse_task("trivia"), InvalidArgument);
}
