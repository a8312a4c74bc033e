#include "amazul/config.hpp"

#include <cstdlib>
#include <set>
#include <unordered_set>

namespace amazul {

using json = nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        throw InvalidArgument("config: '" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key))
            throw InvalidArgument("config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::uint16_t port(const json& v)
{
    auto p = v.get<long long>();
    if (p < 0 || p > 65535)
        throw InvalidArgument("config: port " + std::to_string(p) + " out of range");
    return static_cast<std::uint16_t>(p);
}

}  // namespace

Config Config::from_json(const json& j, const std::filesystem::path& base)
{
    check_keys(j, "",
               {"lake", "nl2sql", "kg_rules", "paraphrase_lexicon", "reporter_lexicon", "outbox", "host", "ports",
                "locales", "qa", "kg", "reporter", "stopwords"});
    Config c;
    c.lake = resolve(base, c.lake.string());
    c.nl2sql_dir = resolve(base, c.nl2sql_dir.string());
    c.kg_rules = resolve(base, c.kg_rules.string());
    c.paraphrase_lexicon = resolve(base, c.paraphrase_lexicon.string());
    c.reporter_lexicon = resolve(base, c.reporter_lexicon.string());
    c.outbox = resolve(base, c.outbox.string());
    try {
        if (j.contains("lake"))
            c.lake = resolve(base, j["lake"].get<std::string>());
        if (j.contains("nl2sql"))
            c.nl2sql_dir = resolve(base, j["nl2sql"].get<std::string>());
        if (j.contains("kg_rules"))
            c.kg_rules = resolve(base, j["kg_rules"].get<std::string>());
        if (j.contains("paraphrase_lexicon"))
            c.paraphrase_lexicon = resolve(base, j["paraphrase_lexicon"].get<std::string>());
        if (j.contains("reporter_lexicon"))
            c.reporter_lexicon = resolve(base, j["reporter_lexicon"].get<std::string>());
        if (j.contains("outbox"))
            c.outbox = resolve(base, j["outbox"].get<std::string>());
        if (j.contains("stopwords") && !j["stopwords"].is_null())
            c.stopwords = resolve(base, j["stopwords"].get<std::string>());
        if (j.contains("host"))
            c.host = j["host"].get<std::string>();
        if (j.contains("ports")) {
            const auto& p = j["ports"];
            check_keys(p, "ports", {"line", "http"});
            if (p.contains("line"))
                c.line_port = port(p["line"]);
            if (p.contains("http"))
                c.http_port = port(p["http"]);
        }
        if (j.contains("locales")) {
            c.locales = j["locales"].get<std::vector<std::string>>();
            if (c.locales.empty())
                throw InvalidArgument("config: 'locales' is empty");
            for (const auto& l : c.locales)
                if (!is_supported_language(l))
                    throw InvalidArgument("config: unsupported locale '" + l + "'");
        }
        if (j.contains("qa")) {
            const auto& q = j["qa"];
            check_keys(q, "qa", {"k", "retrieval_threshold", "reader_threshold", "likert_threshold", "bm25_k1",
                                 "bm25_b", "refusal_en", "refusal_pt"});
            if (q.contains("k"))
                c.qa.k = q["k"].get<std::size_t>();
            if (q.contains("retrieval_threshold"))
                c.qa.retrieval_threshold = q["retrieval_threshold"].get<double>();
            if (q.contains("reader_threshold"))
                c.qa.reader_threshold = q["reader_threshold"].get<double>();
            if (q.contains("likert_threshold"))
                c.qa.likert_threshold = q["likert_threshold"].get<int>();
            if (q.contains("bm25_k1"))
                c.qa.bm25.k1 = q["bm25_k1"].get<double>();
            if (q.contains("bm25_b"))
                c.qa.bm25.b = q["bm25_b"].get<double>();
            if (q.contains("refusal_en"))
                c.qa.refusal_en = q["refusal_en"].get<std::string>();
            if (q.contains("refusal_pt"))
                c.qa.refusal_pt = q["refusal_pt"].get<std::string>();
        }
        if (j.contains("kg")) {
            const auto& k = j["kg"];
            check_keys(k, "kg", {"tau_syn", "tau_link", "window"});
            if (k.contains("tau_syn"))
                c.kg.tau_syn = k["tau_syn"].get<double>();
            if (k.contains("tau_link"))
                c.kg.tau_link = k["tau_link"].get<double>();
            if (k.contains("window"))
                c.kg.window = k["window"].get<std::size_t>();
        }
        if (j.contains("reporter")) {
            const auto& r = j["reporter"];
            check_keys(r, "reporter", {"freshness", "seed"});
            if (r.contains("freshness")) {
                check_keys(r["freshness"], "reporter.freshness", {"tide", "weather", "vessel-traffic", "news-headline"});
                for (const auto& [stream, d] : r["freshness"].items())
                    c.reporter.freshness[lake::parse_stream(stream)] = parse_duration(d.get<std::string>());
            }
            if (r.contains("seed"))
                c.reporter_seed = r["seed"].get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    return c;
}

Config Config::load(const std::filesystem::path& file)
{
    auto j = json::parse(read_file(file.string()), nullptr, false);
    if (j.is_discarded())
        throw InvalidArgument("config: '" + file.string() + "' is not valid JSON");
    return from_json(j, file.parent_path());
}

text::Analyzer Config::analyzer() const
{
    if (!stopwords)
        return {};
    std::unordered_set<std::string> words;
    for (const auto& token : text::tokenize(read_file(stopwords->string())))
        words.insert(token);
    return text::Analyzer(std::move(words));
}

void Config::apply_env()
{
    if (const char* p = std::getenv("AMAZUL_PORT"); p && *p) {
        char* end = nullptr;
        long v = std::strtol(p, &end, 10);
        if (*end != '\0' || v < 0 || v > 65535)
            throw InvalidArgument(std::string("AMAZUL_PORT '") + p + "' is not a port");
        line_port = static_cast<std::uint16_t>(v);
    }
    if (const char* l = std::getenv("AMAZUL_LAKE"); l && *l)
        lake = l;
}

}  // namespace amazul
