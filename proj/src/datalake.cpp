#include "amazul/datalake.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>

namespace amazul::lake {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// enums

std::string_view to_string(DocumentKind kind)
{
    switch (kind) {
    case DocumentKind::wiki: return "wiki";
    case DocumentKind::report: return "report";
    case DocumentKind::article: return "article";
    case DocumentKind::abstract: return "abstract";
    case DocumentKind::news: return "news";
    }
    return "article";
}

DocumentKind parse_document_kind(std::string_view text)
{
    for (auto kind : {DocumentKind::wiki, DocumentKind::report, DocumentKind::article, DocumentKind::abstract,
                      DocumentKind::news}) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw InvalidArgument("unknown document kind '" + std::string(text) + "'");
}

std::string_view to_string(WikiAxis axis)
{
    switch (axis) {
    case WikiAxis::socio_environmental: return "socio-environmental";
    case WikiAxis::biodiversity: return "biodiversity";
    case WikiAxis::physicochemical: return "physicochemical";
    case WikiAxis::legislation_and_governance: return "legislation-and-governance";
    }
    return "biodiversity";
}

WikiAxis parse_wiki_axis(std::string_view text)
{
    for (auto axis : {WikiAxis::socio_environmental, WikiAxis::biodiversity, WikiAxis::physicochemical,
                      WikiAxis::legislation_and_governance}) {
        if (to_string(axis) == text) {
            return axis;
        }
    }
    throw InvalidArgument("unknown wiki axis '" + std::string(text) + "'");
}

std::string_view to_string(Stream stream)
{
    switch (stream) {
    case Stream::tide: return "tide";
    case Stream::weather: return "weather";
    case Stream::vessel_traffic: return "vessel-traffic";
    case Stream::news_headline: return "news-headline";
    }
    return "tide";
}

Stream parse_stream(std::string_view text)
{
    for (auto s : {Stream::tide, Stream::weather, Stream::vessel_traffic, Stream::news_headline}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw InvalidArgument("unknown stream '" + std::string(text) + "'");
}

std::string scalar_to_string(const Scalar& value)
{
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
        return std::to_string(*i);
    }
    if (const auto* d = std::get_if<double>(&value)) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *d);
        return std::string(buf, ptr);
    }
    return std::get<std::string>(value);
}

StreamSchemas default_stream_schemas()
{
    return {
        {Stream::tide, {{"height_m", FieldType::number, "m", true}, {"event", FieldType::text, "", false}}},
        {Stream::weather,
         {{"wind_kt", FieldType::number, "kt", true},
          {"wave_m", FieldType::number, "m", true},
          {"condition", FieldType::text, "", false}}},
        {Stream::vessel_traffic,
         {{"arrivals", FieldType::integer, "", true},
          {"departures", FieldType::integer, "", true},
          {"anchored", FieldType::integer, "", false}}},
        {Stream::news_headline, {{"headline", FieldType::text, "", true}, {"outlet", FieldType::text, "", true}}},
    };
}

void validate_record(const StructuredRecord& record, const StreamSchemas& schemas)
{
    auto it = schemas.find(record.stream);
    if (it == schemas.end()) {
        throw SchemaError("stream", "no schema declared for stream " + std::string(to_string(record.stream)));
    }
    if (record.station_or_region.empty()) {
        throw SchemaError("station_or_region", "field 'station_or_region' is empty");
    }
    const auto& fields = it->second;
    for (const auto& spec : fields) {
        auto value = record.payload.find(spec.name);
        if (value == record.payload.end()) {
            if (spec.required) {
                throw SchemaError(spec.name, "missing field '" + spec.name + "'");
            }
            continue;
        }
        bool ok = false;
        switch (spec.type) {
        case FieldType::number:
            ok = !std::holds_alternative<std::string>(value->second);
            break;
        case FieldType::integer:
            ok = std::holds_alternative<std::int64_t>(value->second);
            break;
        case FieldType::text:
            ok = std::holds_alternative<std::string>(value->second);
            break;
        }
        if (!ok) {
            throw SchemaError(spec.name, "field '" + spec.name + "' has the wrong type");
        }
    }
    for (const auto& [name, value] : record.payload) {
        bool declared = std::any_of(fields.begin(), fields.end(), [&](const FieldSpec& f) { return f.name == name; });
        if (!declared) {
            throw SchemaError(name, "field '" + name + "' is not declared for stream " +
                                        std::string(to_string(record.stream)));
        }
    }
}

// ---------------------------------------------------------------------------
// JSON codecs

namespace {

const json& require(const json& j, const char* key)
{
    if (!j.is_object()) {
        throw InvalidArgument("record is not an object");
    }
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        throw InvalidArgument(std::string("missing field '") + key + "'");
    }
    return *it;
}

std::string require_string(const json& j, const char* key)
{
    const auto& v = require(j, key);
    if (!v.is_string()) {
        throw InvalidArgument(std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return {};
    }
    if (!it->is_string()) {
        throw InvalidArgument(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

}  // namespace

json to_json(const SourceRef& ref)
{
    return json{{"origin_name", ref.origin_name},
                {"origin_url_or_citation", ref.origin_url_or_citation},
                {"retrieved_at", format_timestamp(ref.retrieved_at)}};
}

SourceRef source_from_json(const json& j)
{
    SourceRef ref;
    ref.origin_name = require_string(j, "origin_name");
    if (ref.origin_name.empty()) {
        throw InvalidArgument("source.origin_name is empty");
    }
    ref.origin_url_or_citation = optional_string(j, "origin_url_or_citation");
    auto retrieved = optional_string(j, "retrieved_at");
    if (!retrieved.empty()) {
        ref.retrieved_at = parse_timestamp(retrieved);
    }
    return ref;
}

json to_json(const Document& doc)
{
    return json{{"id", doc.id},
                {"title", doc.title},
                {"body", doc.body},
                {"language", to_string(doc.language)},
                {"kind", to_string(doc.kind)},
                {"source", to_json(doc.source)}};
}

Document document_from_json(const json& j)
{
    Document doc;
    doc.id = require_string(j, "id");
    if (doc.id.empty()) {
        throw InvalidArgument("field 'id' is empty");
    }
    doc.title = optional_string(j, "title");
    doc.body = require_string(j, "body");
    if (doc.body.empty()) {
        throw InvalidArgument("field 'body' is empty");
    }
    doc.language = parse_language(require_string(j, "language"));
    doc.source = source_from_json(require(j, "source"));
    auto kind = optional_string(j, "kind");
    if (!kind.empty()) {
        doc.kind = parse_document_kind(kind);
    }
    return doc;
}

json to_json(const WikiEntry& entry)
{
    return json{{"slug", entry.slug}, {"title", entry.title}, {"axis", to_string(entry.axis)}, {"body", entry.body}};
}

WikiEntry wiki_from_json(const json& j)
{
    WikiEntry entry;
    entry.slug = require_string(j, "slug");
    if (entry.slug.empty()) {
        throw InvalidArgument("field 'slug' is empty");
    }
    entry.title = optional_string(j, "title");
    entry.axis = parse_wiki_axis(require_string(j, "axis"));
    entry.body = require_string(j, "body");
    return entry;
}

json to_json(const QASet& qa)
{
    json j{{"id", qa.id},
           {"question_pt", qa.question_pt},
           {"question_en", qa.question_en},
           {"answer_pt", qa.answer_pt},
           {"answer_en", qa.answer_en},
           {"supporting_text", qa.supporting_text},
           {"paraphrases", qa.paraphrases}};
    if (qa.meaningfulness_likert) {
        j["meaningfulness_likert"] = *qa.meaningfulness_likert;
    }
    if (qa.mc_alternatives) {
        j["mc_alternatives"] = *qa.mc_alternatives;
        j["mc_correct_index"] = qa.mc_correct_index.value_or(0);
    }
    return j;
}

QASet qa_from_json(const json& j)
{
    QASet qa;
    qa.id = require_string(j, "id");
    if (qa.id.empty()) {
        throw InvalidArgument("field 'id' is empty");
    }
    qa.question_pt = optional_string(j, "question_pt");
    qa.question_en = optional_string(j, "question_en");
    qa.answer_pt = optional_string(j, "answer_pt");
    qa.answer_en = optional_string(j, "answer_en");
    qa.supporting_text = optional_string(j, "supporting_text");
    if (qa.question_pt.empty() && qa.question_en.empty()) {
        throw InvalidArgument("QA set has no question");
    }
    if (auto it = j.find("paraphrases"); it != j.end() && !it->is_null()) {
        qa.paraphrases = it->get<std::vector<std::string>>();
    }
    if (auto it = j.find("meaningfulness_likert"); it != j.end() && !it->is_null()) {
        int rating = it->get<int>();
        if (rating < 1 || rating > 5) {
            throw InvalidArgument("meaningfulness_likert must be in 1..5");
        }
        qa.meaningfulness_likert = rating;
    }
    if (auto it = j.find("mc_alternatives"); it != j.end() && !it->is_null()) {
        auto alts = it->get<std::vector<std::string>>();
        if (alts.size() != 5) {
            throw InvalidArgument("mc_alternatives must have exactly 5 entries");
        }
        int index = require(j, "mc_correct_index").get<int>();
        if (index < 0 || index > 4) {
            throw InvalidArgument("mc_correct_index must be in 0..4");
        }
        const auto& chosen = alts[static_cast<std::size_t>(index)];
        if (chosen != qa.answer_en && chosen != qa.answer_pt) {
            throw InvalidArgument("mc_correct_index does not address the true answer");
        }
        qa.mc_alternatives = std::move(alts);
        qa.mc_correct_index = index;
    }
    return qa;
}

json to_json(const StructuredRecord& record)
{
    json payload = json::object();
    for (const auto& [name, value] : record.payload) {
        std::visit([&](const auto& v) { payload[name] = v; }, value);
    }
    return json{{"stream", to_string(record.stream)},
                {"station_or_region", record.station_or_region},
                {"observed_at", format_timestamp(record.observed_at)},
                {"payload", payload}};
}

StructuredRecord record_from_json(const json& j)
{
    StructuredRecord record;
    auto stream = optional_string(j, "stream");
    if (!stream.empty()) {
        record.stream = parse_stream(stream);
    }
    record.station_or_region = require_string(j, "station_or_region");
    record.observed_at = parse_timestamp(require_string(j, "observed_at"));
    const auto& payload = require(j, "payload");
    if (!payload.is_object()) {
        throw InvalidArgument("field 'payload' must be an object");
    }
    for (const auto& [name, value] : payload.items()) {
        if (value.is_number_integer()) {
            record.payload[name] = value.get<std::int64_t>();
        } else if (value.is_number()) {
            record.payload[name] = value.get<double>();
        } else if (value.is_string()) {
            record.payload[name] = value.get<std::string>();
        } else {
            throw SchemaError(name, "field '" + name + "' is not a scalar");
        }
    }
    return record;
}

// ---------------------------------------------------------------------------
// storage

namespace {

struct Line {
    std::size_t number;
    std::string raw;
    json value;
};

std::vector<Line> read_lines(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw NotFound("cannot open " + file.string());
    }
    std::vector<Line> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (!raw.empty() && raw.back() == '\r') {
            raw.pop_back();
        }
        if (raw.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw ParseError(number, std::string("malformed record: ") + e.what());
        }
        lines.push_back({number, std::move(raw), std::move(value)});
    }
    return lines;
}

template <typename Decode>
auto decode_line(const Line& line, Decode&& decode)
{
    try {
        return decode(line.value);
    } catch (const SchemaError&) {
        throw;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(line.number, e.what());
    }
}

std::string collection_for(DocumentKind kind)
{
    return "documents/" + std::string(to_string(kind));
}

std::string collection_for(Stream stream)
{
    return "structured/" + std::string(to_string(stream));
}

const char* const kWikiCollection = "wiki/entries";
const char* const kQaCollection = "qa/sets";

std::string structured_key(const StructuredRecord& r)
{
    return std::string(to_string(r.stream)) + "/" + r.station_or_region + "/" + format_timestamp(r.observed_at);
}

void write_atomically(const fs::path& target, const std::string& content)
{
    fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

}  // namespace

struct DataLake::State {
    struct Entry {
        std::string id;
        std::string raw;
    };

    std::map<std::string, Document> documents;
    std::map<std::string, WikiEntry> wiki;
    std::map<std::string, QASet> qa;
    std::map<Stream, std::vector<StructuredRecord>> structured;
    std::map<std::string, std::size_t> structured_keys;
    /// collection name -> records in file order
    std::map<std::string, std::vector<Entry>> collections;
};

DataLake::DataLake(fs::path root, StreamSchemas schemas) : m_root(std::move(root)), m_schemas(std::move(schemas))
{
    fs::create_directories(m_root);
    load();
}

DataLake::~DataLake() = default;

std::shared_ptr<const DataLake::State> DataLake::snapshot() const
{
    std::lock_guard lock(m_snapshot_mutex);
    return m_state;
}

void DataLake::load()
{
    auto state = std::make_shared<State>();
    auto load_collection = [&](const std::string& name, const std::function<std::string(const Line&)>& add) {
        fs::path file = m_root / (name + ".jsonl");
        if (!fs::exists(file)) {
            return;
        }
        for (const auto& line : read_lines(file)) {
            std::string id = add(line);
            state->collections[name].push_back({id, line.raw});
        }
    };
    for (auto kind : {DocumentKind::wiki, DocumentKind::report, DocumentKind::article, DocumentKind::abstract,
                      DocumentKind::news}) {
        load_collection(collection_for(kind), [&](const Line& line) {
            auto doc = decode_line(line, document_from_json);
            doc.kind = kind;
            state->documents[doc.id] = doc;
            return doc.id;
        });
    }
    load_collection(kWikiCollection, [&](const Line& line) {
        auto entry = decode_line(line, wiki_from_json);
        state->wiki[entry.slug] = entry;
        return entry.slug;
    });
    load_collection(kQaCollection, [&](const Line& line) {
        auto qa = decode_line(line, qa_from_json);
        state->qa[qa.id] = qa;
        return qa.id;
    });
    for (auto stream : {Stream::tide, Stream::weather, Stream::vessel_traffic, Stream::news_headline}) {
        load_collection(collection_for(stream), [&](const Line& line) {
            auto record = decode_line(line, record_from_json);
            record.stream = stream;
            auto key = structured_key(record);
            state->structured_keys[key] = 0;
            state->structured[stream].push_back(record);
            return key;
        });
    }
    m_state = std::move(state);
}

void DataLake::commit(std::shared_ptr<const State> next, const std::vector<std::string>& dirty)
{
    for (const auto& name : dirty) {
        std::string content;
        auto it = next->collections.find(name);
        if (it != next->collections.end()) {
            for (const auto& entry : it->second) {
                content += entry.raw;
                content += '\n';
            }
        }
        write_atomically(m_root / (name + ".jsonl"), content);
    }
    if (!dirty.empty()) {
        std::string manifest;
        for (const auto& [name, entries] : next->collections) {
            std::uint64_t offset = 0;
            for (const auto& entry : entries) {
                json line{{"id", entry.id}, {"collection", name}, {"offset", offset}, {"length", entry.raw.size()}};
                manifest += line.dump();
                manifest += '\n';
                offset += entry.raw.size() + 1;
            }
        }
        write_atomically(m_root / "manifest.jsonl", manifest);
    }
    std::lock_guard lock(m_snapshot_mutex);
    m_state = std::move(next);
}

std::size_t DataLake::ingest_documents(const fs::path& file, DocumentKind kind)
{
    auto lines = read_lines(file);
    std::lock_guard writer(m_write_mutex);
    auto current = snapshot();
    auto next = std::make_shared<State>(*current);
    std::set<std::string> seen;
    bool changed = false;
    for (const auto& line : lines) {
        auto doc = decode_line(line, document_from_json);
        if (auto it = line.value.find("kind"); it != line.value.end() && doc.kind != kind) {
            throw ParseError(line.number, "record kind '" + std::string(to_string(doc.kind)) +
                                              "' does not match --kind " + std::string(to_string(kind)));
        }
        doc.kind = kind;
        if (!seen.insert(doc.id).second) {
            throw ParseError(line.number, "duplicate id '" + doc.id + "' in batch");
        }
        if (auto existing = next->documents.find(doc.id); existing != next->documents.end()) {
            if (existing->second == doc) {
                continue;
            }
            throw ParseError(line.number, "id '" + doc.id + "' already stored with different content");
        }
        next->documents[doc.id] = doc;
        next->collections[collection_for(kind)].push_back({doc.id, line.raw});
        changed = true;
    }
    std::vector<std::string> dirty;
    if (changed) {
        dirty.push_back(collection_for(kind));
    }
    commit(std::move(next), dirty);
    return lines.size();
}

Document DataLake::get_document(const std::string& id) const
{
    auto state = snapshot();
    auto it = state->documents.find(id);
    if (it == state->documents.end()) {
        throw NotFound("document '" + id + "' not found");
    }
    return it->second;
}

std::vector<Document> DataLake::list_documents(std::optional<DocumentKind> kind, std::optional<Language> language) const
{
    auto state = snapshot();
    std::vector<Document> out;
    for (const auto& [id, doc] : state->documents) {
        if ((kind && doc.kind != *kind) || (language && doc.language != *language)) {
            continue;
        }
        out.push_back(doc);
    }
    return out;
}

std::size_t DataLake::ingest_wiki(const fs::path& file)
{
    auto lines = read_lines(file);
    std::lock_guard writer(m_write_mutex);
    auto next = std::make_shared<State>(*snapshot());
    std::set<std::string> seen;
    bool changed = false;
    for (const auto& line : lines) {
        auto entry = decode_line(line, wiki_from_json);
        if (!seen.insert(entry.slug).second) {
            throw ParseError(line.number, "duplicate slug '" + entry.slug + "' in batch");
        }
        if (auto existing = next->wiki.find(entry.slug); existing != next->wiki.end()) {
            if (existing->second == entry) {
                continue;
            }
            throw ParseError(line.number, "slug '" + entry.slug + "' already stored with different content");
        }
        next->wiki[entry.slug] = entry;
        next->collections[kWikiCollection].push_back({entry.slug, line.raw});
        changed = true;
    }
    commit(std::move(next), changed ? std::vector<std::string>{kWikiCollection} : std::vector<std::string>{});
    return lines.size();
}

WikiEntry DataLake::get_wiki(const std::string& slug) const
{
    auto state = snapshot();
    auto it = state->wiki.find(slug);
    if (it == state->wiki.end()) {
        throw NotFound("wiki entry '" + slug + "' not found");
    }
    return it->second;
}

std::vector<WikiEntry> DataLake::list_wiki(std::optional<WikiAxis> axis) const
{
    auto state = snapshot();
    std::vector<WikiEntry> out;
    for (const auto& [slug, entry] : state->wiki) {
        if (!axis || entry.axis == *axis) {
            out.push_back(entry);
        }
    }
    return out;
}

std::size_t DataLake::ingest_qa(const fs::path& file)
{
    auto lines = read_lines(file);
    std::lock_guard writer(m_write_mutex);
    auto next = std::make_shared<State>(*snapshot());
    std::set<std::string> seen;
    bool changed = false;
    for (const auto& line : lines) {
        auto qa = decode_line(line, qa_from_json);
        if (!seen.insert(qa.id).second) {
            throw ParseError(line.number, "duplicate id '" + qa.id + "' in batch");
        }
        if (auto existing = next->qa.find(qa.id); existing != next->qa.end()) {
            if (existing->second == qa) {
                continue;
            }
            throw ParseError(line.number, "id '" + qa.id + "' already stored with different content");
        }
        next->qa[qa.id] = qa;
        next->collections[kQaCollection].push_back({qa.id, line.raw});
        changed = true;
    }
    commit(std::move(next), changed ? std::vector<std::string>{kQaCollection} : std::vector<std::string>{});
    return lines.size();
}

QASet DataLake::get_qa(const std::string& id) const
{
    auto state = snapshot();
    auto it = state->qa.find(id);
    if (it == state->qa.end()) {
        throw NotFound("QA set '" + id + "' not found");
    }
    return it->second;
}

std::vector<QASet> DataLake::list_qa() const
{
    auto state = snapshot();
    std::vector<QASet> out;
    for (const auto& [id, qa] : state->qa) {
        out.push_back(qa);
    }
    return out;
}

std::size_t DataLake::ingest_structured(const fs::path& file, Stream stream)
{
    auto lines = read_lines(file);
    std::lock_guard writer(m_write_mutex);
    auto next = std::make_shared<State>(*snapshot());
    std::set<std::string> seen;
    bool changed = false;
    const auto name = collection_for(stream);
    for (const auto& line : lines) {
        auto record = decode_line(line, record_from_json);
        if (line.value.contains("stream") && record.stream != stream) {
            throw ParseError(line.number, "record stream does not match " + std::string(to_string(stream)));
        }
        record.stream = stream;
        validate_record(record, m_schemas);
        auto key = structured_key(record);
        if (!seen.insert(key).second) {
            throw ParseError(line.number, "duplicate record '" + key + "' in batch");
        }
        auto& records = next->structured[stream];
        if (next->structured_keys.count(key) > 0) {
            auto same = std::find(records.begin(), records.end(), record);
            if (same != records.end()) {
                continue;
            }
            throw ParseError(line.number, "record '" + key + "' already stored with different content");
        }
        next->structured_keys[key] = 0;
        records.push_back(record);
        next->collections[name].push_back({key, line.raw});
        changed = true;
    }
    if (changed) {
        // Keep both views ordered by observation time; ties keep arrival order.
        auto& records = next->structured[stream];
        std::stable_sort(records.begin(), records.end(),
                         [](const auto& a, const auto& b) { return a.observed_at < b.observed_at; });
        auto& entries = next->collections[name];
        std::map<std::string, std::size_t> rank;
        for (std::size_t i = 0; i < records.size(); ++i) {
            rank[structured_key(records[i])] = i;
        }
        std::sort(entries.begin(), entries.end(),
                  [&](const auto& a, const auto& b) { return rank[a.id] < rank[b.id]; });
    }
    commit(std::move(next), changed ? std::vector<std::string>{name} : std::vector<std::string>{});
    return lines.size();
}

std::vector<StructuredRecord> DataLake::query_structured(Stream stream, Timestamp from, Timestamp to) const
{
    auto state = snapshot();
    std::vector<StructuredRecord> out;
    auto it = state->structured.find(stream);
    if (it == state->structured.end()) {
        return out;
    }
    for (const auto& record : it->second) {
        if (record.observed_at >= from && record.observed_at <= to) {
            out.push_back(record);
        }
    }
    return out;
}

std::vector<StructuredRecord> DataLake::all_structured(Stream stream) const
{
    auto state = snapshot();
    auto it = state->structured.find(stream);
    return it == state->structured.end() ? std::vector<StructuredRecord>{} : it->second;
}

std::vector<ManifestEntry> DataLake::manifest() const
{
    auto state = snapshot();
    std::vector<ManifestEntry> out;
    for (const auto& [name, entries] : state->collections) {
        std::uint64_t offset = 0;
        for (const auto& entry : entries) {
            out.push_back({entry.id, name, offset, entry.raw.size()});
            offset += entry.raw.size() + 1;
        }
    }
    return out;
}

std::vector<QASet> load_qa_file(const fs::path& file)
{
    std::vector<QASet> out;
    std::set<std::string> seen;
    for (const auto& line : read_lines(file)) {
        auto qa = decode_line(line, qa_from_json);
        if (!seen.insert(qa.id).second) {
            throw ParseError(line.number, "duplicate id '" + qa.id + "'");
        }
        out.push_back(std::move(qa));
    }
    return out;
}

}  // namespace amazul::lake
