#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "amazul/config.hpp"
#include "amazul/controller.hpp"
#include "amazul/kg.hpp"
#include "amazul/nl2sql.hpp"
#include "amazul/paraphrase.hpp"
#include "amazul/qa.hpp"
#include "amazul/reporter.hpp"
#include "amazul/retriever.hpp"
#include "amazul/summarizer.hpp"
#include "amazul/topics.hpp"

using namespace amazul;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int)
{
    g_stop = true;
}

struct Globals {
    std::string config_file;
    std::string lake_dir;
};

Config load_config(const Globals& g)
{
    Config config;
    std::string file = g.config_file;
    if (file.empty())
        if (const char* env = std::getenv("AMAZUL_CONFIG"); env && *env)
            file = env;
    if (file.empty() && fs::exists("data/config.json"))
        file = "data/config.json";
    if (!file.empty())
        config = Config::load(file);
    config.apply_env();
    if (!g.lake_dir.empty())
        config.lake = g.lake_dir;
    return config;
}

std::vector<lake::Document> read_corpus_file(const fs::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw NotFound("cannot open " + file.string());
    std::vector<lake::Document> docs;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError(n, "not valid JSON");
        docs.push_back(lake::document_from_json(j));
    }
    return docs;
}

std::shared_ptr<const retrieval::Corpus> lake_corpus(const Config& config)
{
    lake::DataLake lake(config.lake);
    auto docs = lake.list_documents();
    if (docs.empty())
        throw NotFound("the data lake at " + config.lake.string() + " holds no documents");
    return retrieval::Corpus::build(std::move(docs), config.analyzer());
}

void print_table(const nl2sql::ResultTable& result)
{
    for (std::size_t i = 0; i < result.columns.size(); ++i)
        std::cout << (i ? "\t" : "") << result.columns[i];
    std::cout << '\n';
    for (const auto& row : result.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            std::cout << (i ? "\t" : "") << nl2sql::value_to_string(row[i]);
        std::cout << '\n';
    }
}

// Sleeps in short steps so a signal ends the wait promptly.
void sleep_for(std::chrono::seconds d)
{
    auto until = std::chrono::steady_clock::now() + d;
    while (!g_stop && std::chrono::steady_clock::now() < until)
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

Timestamp now_or(const std::string& text)
{
    if (!text.empty())
        return parse_timestamp(text);
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Maritime knowledge service: data lake, retrieval, QA, NL2SQL, harvesting, reports and chat."};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_file, "Config file (default: $AMAZUL_CONFIG, then data/config.json)");
    app.add_option("--lake", g.lake_dir, "Data lake directory; overrides config and AMAZUL_LAKE");

    // lake
    auto* lake_cmd = app.add_subcommand("lake", "Ingest and list data lake records");
    lake_cmd->require_subcommand(1);
    std::string kind, file;
    auto* ingest = lake_cmd->add_subcommand("ingest", "Ingest a line-delimited file");
    ingest->add_option("--kind", kind,
                       "Document kind (wiki, report, article, abstract, news), wiki-entry, qa, or a stream "
                       "(tide, weather, vessel-traffic, news-headline)")
        ->required();
    ingest->add_option("file", file, "Input file")->required();
    auto* ls = lake_cmd->add_subcommand("ls", "List records of a kind");
    ls->add_option("--kind", kind, "Same kinds as ingest")->required();

    // index
    auto* index_cmd = app.add_subcommand("index", "BM25 index over the lake documents");
    index_cmd->require_subcommand(1);
    auto* index_build = index_cmd->add_subcommand("build", "Build the index and print its statistics");
    std::size_t k = 5;
    std::string query;
    auto* index_search = index_cmd->add_subcommand("search", "Rank documents for a query");
    index_search->add_option("--k", k, "Results to return")->check(CLI::PositiveNumber);
    index_search->add_option("query", query)->required();

    // qa
    auto* qa_cmd = app.add_subcommand("qa", "Question answering");
    qa_cmd->require_subcommand(1);
    std::string question, lang = "en";
    auto* qa_ask = qa_cmd->add_subcommand("ask", "Answer from the lake documents");
    qa_ask->add_option("question", question)->required();
    qa_ask->add_option("--lang", lang, "Answer language (pt or en)");
    std::string task, dataset;
    auto* qa_bench = qa_cmd->add_subcommand("bench", "Run a benchmark task over a QA dataset");
    qa_bench->add_option("--task", task, "mrc, ir, open-qa, answer-triggering or multiple-choice")->required();
    qa_bench->add_option("--dataset", dataset, "Line-delimited QA sets")->required();
    qa_bench->add_option("--lang", lang, "Question language (pt or en)");

    // nl2sql
    auto* sql_cmd = app.add_subcommand("nl2sql", "Natural language to SQL");
    sql_cmd->require_subcommand(1);
    auto* sql_ask = sql_cmd->add_subcommand("ask", "Translate, print the SQL, then the result table");
    sql_ask->add_option("question", question)->required();

    // harvest
    auto* harvest = app.add_subcommand("harvest", "Knowledge harvesting");
    harvest->require_subcommand(1);
    std::string in, out, embeddings_file;
    auto* kg_cmd = harvest->add_subcommand("kg", "Build a knowledge graph");
    kg_cmd->add_option("--in", in, "Corpus file")->required();
    kg_cmd->add_option("--out", out, "Graph file (line-delimited node, edge and bridge records)")->required();
    kg_cmd->add_option("--embeddings", embeddings_file, "Entity embeddings; co-occurrence vectors when absent");
    topics::NmtfOptions nmtf;
    std::size_t top = 10;
    std::string assignments = "topic_assignments.tsv", words = "topic_words.tsv";
    auto* topics_cmd = harvest->add_subcommand("topics", "Co-cluster documents and terms");
    topics_cmd->add_option("--k", nmtf.k, "Document clusters")->check(CLI::PositiveNumber);
    topics_cmd->add_option("--l", nmtf.l, "Term clusters")->check(CLI::PositiveNumber);
    topics_cmd->add_option("--iters", nmtf.max_iter, "Maximum iterations");
    topics_cmd->add_option("--seed", nmtf.seed, "Random seed");
    topics_cmd->add_option("--restarts", nmtf.restarts, "Independent restarts; the best objective wins");
    topics_cmd->add_option("--in", in, "Corpus file; the lake documents when absent");
    topics_cmd->add_option("--top", top, "Words per topic");
    topics_cmd->add_option("--assignments", assignments, "Output: doc id, topic");
    topics_cmd->add_option("--words", words, "Output: topic, top words");

    // summarize
    std::string title;
    std::size_t L = 3, n = 100;
    std::vector<std::string> ids;
    auto* sum_cmd = app.add_subcommand("summarize", "Extractive summary of lake documents");
    sum_cmd->add_option("--title", title)->required();
    sum_cmd->add_option("--L", L, "Sentences to extract")->check(CLI::PositiveNumber);
    sum_cmd->add_option("--n", n, "Token cap")->check(CLI::PositiveNumber);
    sum_cmd->add_option("ids", ids, "Document ids")->required();

    // paraphrase
    std::string sentence;
    std::size_t max_variants = 5;
    std::uint64_t seed = 0;
    auto* para_cmd = app.add_subcommand("paraphrase", "Lexical paraphrases with BLEU and cosine dissimilarity");
    para_cmd->add_option("sentence", sentence)->required();
    para_cmd->add_option("--max", max_variants, "Maximum variants");
    para_cmd->add_option("--seed", seed);
    para_cmd->add_option("--lang", lang, "pt or en");

    // report
    auto* report_cmd = app.add_subcommand("report", "Data-to-text bulletins");
    report_cmd->require_subcommand(1);
    std::string intent, now_text, every;
    bool dry_run = false;
    std::optional<std::uint64_t> report_seed;
    std::size_t count = 0;
    auto* report_run = report_cmd->add_subcommand("run", "Generate one bulletin and publish it");
    report_run->add_option("--intent", intent, "tide-bulletin, weather-bulletin, traffic-bulletin or news-digest")
        ->required();
    report_run->add_flag("--dry-run", dry_run, "Print without publishing");
    report_run->add_option("--now", now_text, "Reference time (UTC); the clock when absent");
    report_run->add_option("--seed", report_seed, "Template seed; config value when absent");
    auto* report_daemon = report_cmd->add_subcommand("daemon", "Publish bulletins on a schedule");
    report_daemon->add_option("--every", every, "Interval such as 15m or 1h")->required();
    report_daemon->add_option("--intent", intent, "One intent; all of them when absent");
    report_daemon->add_option("--count", count, "Stop after this many rounds; 0 runs until interrupted");
    report_daemon->add_flag("--dry-run", dry_run, "Print without publishing");
    report_daemon->add_option("--seed", report_seed, "Template seed; config value when absent");

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the chat controller");
    std::optional<std::uint16_t> line_port, http_port;
    serve_cmd->add_option("--port", line_port, "Line protocol port; config or AMAZUL_PORT when absent");
    serve_cmd->add_option("--http-port", http_port, "HTTP mirror port");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = load_config(g);

        if (ingest->parsed()) {
            lake::DataLake lake(config.lake);
            std::size_t stored = 0;
            if (kind == "wiki-entry")
                stored = lake.ingest_wiki(file);
            else if (kind == "qa")
                stored = lake.ingest_qa(file);
            else if (kind == "tide" || kind == "weather" || kind == "vessel-traffic" || kind == "news-headline")
                stored = lake.ingest_structured(file, lake::parse_stream(kind));
            else
                stored = lake.ingest_documents(file, lake::parse_document_kind(kind));
            std::cout << stored << '\n';
        } else if (ls->parsed()) {
            lake::DataLake lake(config.lake);
            if (kind == "wiki-entry") {
                for (const auto& e : lake.list_wiki())
                    std::cout << e.slug << '\t' << lake::to_string(e.axis) << '\t' << e.title << '\n';
            } else if (kind == "qa") {
                for (const auto& q : lake.list_qa())
                    std::cout << q.id << '\t' << q.question_en << '\n';
            } else if (kind == "tide" || kind == "weather" || kind == "vessel-traffic" || kind == "news-headline") {
                for (const auto& r : lake.all_structured(lake::parse_stream(kind)))
                    std::cout << r.station_or_region << '\t' << format_timestamp(r.observed_at) << '\n';
            } else {
                for (const auto& d : lake.list_documents(lake::parse_document_kind(kind)))
                    std::cout << d.id << '\t' << to_string(d.language) << '\t' << d.title << '\n';
            }
        } else if (index_build->parsed()) {
            auto corpus = lake_corpus(config);
            const auto& index = corpus->index();
            std::cout << "documents\t" << index.doc_count() << '\n'
                      << "terms\t" << index.all_postings().size() << '\n'
                      << "avg_doc_len\t" << index.avg_doc_len() << '\n';
        } else if (index_search->parsed()) {
            auto corpus = lake_corpus(config);
            auto hits = retrieval::bm25_search(corpus->index(), {query, k}, config.qa.bm25);
            for (std::size_t i = 0; i < hits.size(); ++i)
                std::cout << i + 1 << '\t' << hits[i].id << '\t' << std::setprecision(6) << hits[i].score << '\n';
        } else if (qa_ask->parsed()) {
            auto corpus = lake_corpus(config);
            auto answer = qa::answer_question(question, *corpus, config.qa, parse_language(lang));
            std::cout << answer.text << '\n';
            for (const auto& s : answer.sources)
                std::cout << "source\t" << s.origin_name << '\t' << s.origin_url_or_citation << '\n';
            return answer.triggered ? 0 : 3;
        } else if (qa_bench->parsed()) {
            auto data = lake::load_qa_file(dataset);
            auto report = qa::run_benchmark(qa::parse_task(task), data, config.qa, parse_language(lang));
            std::cout << qa::to_json(report).dump() << '\n';
        } else if (sql_ask->parsed()) {
            auto engine = nl2sql::Engine::load(config.nl2sql_dir);
            auto sql = engine.translate(question);
            std::cout << sql.text << '\n';
            print_table(engine.execute(sql));
        } else if (kg_cmd->parsed()) {
            auto docs = read_corpus_file(in);
            auto rules = kg::ExtractionRules::load(config.kg_rules);
            std::optional<kg::Embeddings> emb;
            if (!embeddings_file.empty())
                emb = kg::Embeddings::load(embeddings_file);
            auto graph = kg::build_knowledge_graph(docs, rules, config.kg, emb ? &*emb : nullptr);
            std::ofstream o(out);
            o << graph.to_jsonl();
            if (!o)
                throw Error("cannot write " + out);
            std::cout << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges, " << graph.bridges.size()
                      << " bridges\n";
        } else if (topics_cmd->parsed()) {
            std::vector<lake::Document> docs;
            if (in.empty())
                docs = lake::DataLake(config.lake).list_documents();
            else
                docs = read_corpus_file(in);
            auto matrix = topics::build_doc_term_matrix(docs, config.analyzer());
            auto model = topics::factorize(matrix, nmtf);
            std::ofstream a(assignments);
            for (const auto& [doc, topic] : topics::assign_topics(model))
                a << doc << '\t' << topic << '\n';
            std::ofstream w(words);
            for (std::size_t t = 0; t < nmtf.l; ++t) {
                w << t;
                for (const auto& word : topics::top_words(model, t, top))
                    w << '\t' << word;
                w << '\n';
            }
            if (!a || !w)
                throw Error("cannot write topic outputs");
            std::cout << "objective\t" << model.objective_trace.back() << "\titerations\t"
                      << model.objective_trace.size() << '\n';
        } else if (sum_cmd->parsed()) {
            auto corpus = lake_corpus(config);
            auto s = summary::summarize({title, ids, L, n}, *corpus);
            std::cout << s.text << '\n';
            for (const auto& p : s.provenance)
                std::cout << "source\t" << p.doc_id << '\t' << p.sentence_index << '\t' << p.source.origin_name
                          << '\n';
        } else if (para_cmd->parsed()) {
            auto lexicon = paraphrase::SynonymLexicon::load(config.paraphrase_lexicon);
            auto set = paraphrase::generate_paraphrases(sentence, lexicon, parse_language(lang), max_variants, seed);
            // Token vectors from co-occurrence over the lake documents.
            std::vector<std::string> vocab;
            for (const auto& t : text::tokenize(sentence))
                vocab.push_back(t);
            for (const auto& v : set.variants)
                for (const auto& t : text::tokenize(v.text))
                    vocab.push_back(t);
            std::sort(vocab.begin(), vocab.end());
            vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
            auto docs = lake::DataLake(config.lake).list_documents();
            paraphrase::evaluate(set, kg::cooccurrence_embeddings(docs, vocab, config.kg.window));
            for (const auto& v : set.variants) {
                std::cout << v.text;
                for (const auto* metric : {"bleu_no_bp", "cosine_dissimilarity"}) {
                    auto it = v.metrics.find(metric);
                    std::cout << '\t' << metric << '=';
                    if (it == v.metrics.end())
                        std::cout << "n/a";
                    else
                        std::cout << std::setprecision(4) << it->second;
                }
                std::cout << '\n';
            }
        } else if (report_run->parsed() || report_daemon->parsed()) {
            lake::DataLake lake(config.lake);
            auto lexicon = report::TemplateLexicon::load(config.reporter_lexicon);
            auto s = report_seed.value_or(config.reporter_seed);
            std::vector<report::Intent> intents;
            if (intent.empty())
                intents = {report::Intent::tide_bulletin, report::Intent::weather_bulletin,
                           report::Intent::traffic_bulletin, report::Intent::news_digest};
            else
                intents = {report::parse_intent(intent)};
            report::OutboxPublisher outbox(config.outbox);

            auto round = [&](Timestamp now, std::uint64_t round_seed) {
                for (auto i : intents) {
                    auto plan = report::run_report(lake, i, now, lexicon, round_seed, config.reporter);
                    if (!plan.realized) {
                        std::cerr << report::to_string(i) << ": nothing fresh to report\n";
                        continue;
                    }
                    std::cout << *plan.realized << '\n';
                    for (const auto& r : plan.dropped)
                        std::cerr << report::to_string(i) << ": dropped " << r.station_or_region
                                  << " to fit the length cap\n";
                    if (!dry_run)
                        std::cout << "receipt\t" << report::publish(plan, outbox).id << '\n';
                }
            };

            if (report_run->parsed()) {
                round(now_or(now_text), s);
            } else {
                std::signal(SIGINT, on_signal);
                std::signal(SIGTERM, on_signal);
                auto interval = parse_duration(every);
                for (std::size_t r = 0; !g_stop && (count == 0 || r < count); ++r) {
                    round(now_or(""), s + r);
                    std::cout.flush();
                    if (count == 0 || r + 1 < count)
                        sleep_for(interval);
                }
            }
        } else if (serve_cmd->parsed()) {
            if (line_port)
                config.line_port = *line_port;
            if (http_port)
                config.http_port = *http_port;
            lake::DataLake lake(config.lake);
            controller::ChatService service(controller::ChatService::build_snapshot(lake, config), &lake,
                                            config.locales);
            controller::LineServer line(service, config.host, config.line_port);
            controller::HttpServer http(service, config.host, config.http_port);
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            auto lp = line.start();
            auto hp = http.start();
            auto health = service.health();
            std::cout << "line protocol on " << config.host << ':' << lp << ", http on " << config.host << ':' << hp
                      << " (documents " << health.documents << ", tables " << health.tables << ")" << std::endl;
            while (!g_stop)
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            http.stop();
            line.stop();
        }
    } catch (const nl2sql::Untranslatable& e) {
        std::cerr << "untranslatable: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
