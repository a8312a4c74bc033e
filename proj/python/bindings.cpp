#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "amazul/config.hpp"
#include "amazul/controller.hpp"
#include "amazul/kg.hpp"
#include "amazul/nl2sql.hpp"
#include "amazul/paraphrase.hpp"
#include "amazul/qa.hpp"
#include "amazul/reporter.hpp"
#include "amazul/summarizer.hpp"
#include "amazul/topics.hpp"

namespace py = pybind11;
using namespace amazul;
using json = nlohmann::json;

namespace {

// Python objects cross the boundary as JSON text.
json to_json_value(const py::handle& obj)
{
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object from_json_value(const json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<lake::Document> documents_from(const py::iterable& docs)
{
    std::vector<lake::Document> out;
    for (auto d : docs)
        out.push_back(lake::document_from_json(to_json_value(d)));
    return out;
}

py::object value_to_py(const nl2sql::Value& v)
{
    if (auto i = std::get_if<std::int64_t>(&v))
        return py::int_(*i);
    if (auto d = std::get_if<double>(&v))
        return py::float_(*d);
    if (auto s = std::get_if<std::string>(&v))
        return py::str(*s);
    return py::none();
}

class PyCorpus {
  public:
    explicit PyCorpus(const py::iterable& docs) : m_corpus(retrieval::Corpus::build(documents_from(docs))) {}

    std::vector<std::pair<std::string, double>> search(const std::string& query, std::size_t k) const
    {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& hit : retrieval::bm25_search(m_corpus->index(), {query, k}))
            out.emplace_back(hit.id, hit.score);
        return out;
    }

    py::dict answer(const std::string& question, const std::string& lang) const
    {
        auto a = qa::answer_question(question, *m_corpus, qa::QaConfig{}, parse_language(lang));
        py::list sources;
        for (const auto& s : a.sources)
            sources.append(from_json_value(lake::to_json(s)));
        py::dict d;
        d["text"] = a.text;
        d["triggered"] = a.triggered;
        d["confidence"] = a.confidence;
        d["source_ids"] = a.source_ids;
        d["sources"] = sources;
        return d;
    }

    py::dict summarize(const std::string& title, const std::vector<std::string>& ids, std::size_t L,
                       std::size_t n) const
    {
        auto s = summary::summarize({title, ids, L, n}, *m_corpus);
        py::list provenance;
        for (const auto& p : s.provenance)
            provenance.append(py::make_tuple(p.doc_id, p.sentence_index));
        py::dict d;
        d["text"] = s.text;
        d["token_count"] = s.token_count;
        d["provenance"] = provenance;
        return d;
    }

    std::size_t size() const { return m_corpus->index().doc_count(); }

  private:
    std::shared_ptr<const retrieval::Corpus> m_corpus;
};

class PyChat {
  public:
    PyChat(const std::string& lake_dir, const std::string& config_file)
    {
        Config config = config_file.empty() ? Config{} : Config::load(config_file);
        config.lake = lake_dir;
        m_lake = std::make_unique<lake::DataLake>(config.lake);
        m_service = std::make_unique<controller::ChatService>(
            controller::ChatService::build_snapshot(*m_lake, config), m_lake.get(), config.locales);
    }

    py::object call(const py::dict& frame)
    {
        auto request = to_json_value(frame);
        json reply;
        {
            py::gil_scoped_release release;
            reply = controller::handle_frame(*m_service, request);
        }
        return from_json_value(reply);
    }

  private:
    std::unique_ptr<lake::DataLake> m_lake;
    std::unique_ptr<controller::ChatService> m_service;
};

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Native core: retrieval, QA, NL2SQL, knowledge graphs, co-clustering, reports and chat.";

    auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<NotFound>(m, "NotFound", error.ptr());
    py::register_exception<nl2sql::Untranslatable>(m, "Untranslatable", error.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", error.ptr());

    m.def("tokenize", [](const std::string& s) { return std::vector<std::string>(text::tokenize(s)); });
    m.def("split_sentences", [](const std::string& s) {
        std::vector<std::string> out;
        for (const auto& x : text::split_sentences(s))
            out.push_back(x.text);
        return out;
    });

    m.def("token_f1", [](const std::string& p, const std::string& g) { return qa::token_f1(p, g); });
    m.def("exact_match", [](const std::string& p, const std::string& g) { return qa::exact_match(p, g); });
    m.def("bleu_no_bp", [](const std::string& c, const std::string& r, std::size_t n) {
        return paraphrase::bleu_no_bp(c, r, n);
    }, py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4);
    m.def("cosine_dissimilarity", &paraphrase::cosine_dissimilarity);

    py::class_<PyCorpus>(m, "Corpus")
        .def(py::init<const py::iterable&>(), py::arg("documents"))
        .def("search", &PyCorpus::search, py::arg("query"), py::arg("k") = 5)
        .def("answer", &PyCorpus::answer, py::arg("question"), py::arg("lang") = "en")
        .def("summarize", &PyCorpus::summarize, py::arg("title"), py::arg("ids"), py::arg("L") = 3,
             py::arg("n") = 100)
        .def("__len__", &PyCorpus::size);

    py::class_<nl2sql::Engine>(m, "NL2SQL")
        .def(py::init([](const std::string& dir) { return nl2sql::Engine::load(dir); }), py::arg("resource_dir"))
        .def("classify", [](const nl2sql::Engine& e, const std::string& q) {
            return std::string(nl2sql::to_string(e.classify(q)));
        })
        .def("translate", [](const nl2sql::Engine& e, const std::string& q) { return e.translate(q).text; })
        .def("ask", [](const nl2sql::Engine& e, const std::string& q) {
            auto result = e.execute(e.translate(q));
            py::list rows;
            for (const auto& row : result.rows) {
                py::list r;
                for (const auto& v : row)
                    r.append(value_to_py(v));
                rows.append(py::tuple(r));
            }
            return py::make_tuple(result.columns, rows);
        });

    m.def("factorize", [](const Eigen::MatrixXd& X, std::size_t k, std::size_t l, std::size_t max_iter,
                          std::uint64_t seed) {
        topics::NmtfOptions o;
        o.k = k;
        o.l = l;
        o.max_iter = max_iter;
        o.seed = seed;
        auto model = topics::factorize(X, o);
        py::dict d;
        d["F"] = model.F;
        d["S"] = model.S;
        d["G"] = model.G;
        d["objective_trace"] = model.objective_trace;
        d["rows"] = topics::assign_rows(model.F);
        d["columns"] = topics::assign_rows(model.G);
        return d;
    }, py::arg("X"), py::arg("k") = 2, py::arg("l") = 2, py::arg("max_iter") = 200, py::arg("seed") = 0);

    m.def("build_knowledge_graph", [](const py::iterable& docs, const std::string& rules_file) {
        auto documents = documents_from(docs);
        auto graph = kg::build_knowledge_graph(documents, kg::ExtractionRules::load(rules_file), kg::KgConfig{});
        py::list records;
        std::istringstream in(graph.to_jsonl());
        for (std::string line; std::getline(in, line);)
            if (!line.empty())
                records.append(from_json_value(json::parse(line)));
        return records;
    }, py::arg("documents"), py::arg("rules_file"));

    m.def("generate_report", [](const py::iterable& records, const std::string& intent, const std::string& lexicon_file,
                                const std::string& now, std::uint64_t seed) -> py::object {
        std::vector<lake::StructuredRecord> all;
        for (auto r : records)
            all.push_back(lake::record_from_json(to_json_value(r)));
        auto i = report::parse_intent(intent);
        auto selected = report::select_content(all, i, parse_timestamp(now));
        if (selected.empty())
            return py::none();
        auto plan = report::generate_report(selected, i, report::TemplateLexicon::load(lexicon_file), seed);
        if (!plan.realized)
            return py::none();
        return py::str(*plan.realized);
    }, py::arg("records"), py::arg("intent"), py::arg("lexicon_file"), py::arg("now"), py::arg("seed") = 0);

    py::class_<PyChat>(m, "Chat")
        .def(py::init<const std::string&, const std::string&>(), py::arg("lake"), py::arg("config") = "")
        .def("call", &PyChat::call, py::arg("frame"));
}
