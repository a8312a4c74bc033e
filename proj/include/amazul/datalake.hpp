#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "amazul/common.hpp"

namespace amazul::lake {

/// Attribution for a piece of content.
struct SourceRef {
    std::string origin_name;
    std::string origin_url_or_citation;
    Timestamp retrieved_at{};

    bool operator==(const SourceRef&) const = default;
};

enum class DocumentKind { wiki, report, article, abstract, news };

std::string_view to_string(DocumentKind kind);
DocumentKind parse_document_kind(std::string_view text);

struct Document {
    std::string id;
    std::string title;
    std::string body;
    Language language = Language::en;
    SourceRef source;
    DocumentKind kind = DocumentKind::article;

    bool operator==(const Document&) const = default;
};

enum class WikiAxis { socio_environmental, biodiversity, physicochemical, legislation_and_governance };

std::string_view to_string(WikiAxis axis);
WikiAxis parse_wiki_axis(std::string_view text);

struct WikiEntry {
    std::string slug;
    std::string title;
    WikiAxis axis = WikiAxis::biodiversity;
    std::string body;

    bool operator==(const WikiEntry&) const = default;
};

struct QASet {
    std::string id;
    std::string question_pt;
    std::string question_en;
    std::string answer_pt;
    std::string answer_en;
    std::string supporting_text;
    std::vector<std::string> paraphrases;
    std::optional<int> meaningfulness_likert;
    std::optional<std::vector<std::string>> mc_alternatives;
    std::optional<int> mc_correct_index;

    const std::string& question(Language lang) const { return lang == Language::pt ? question_pt : question_en; }
    const std::string& answer(Language lang) const { return lang == Language::pt ? answer_pt : answer_en; }

    bool operator==(const QASet&) const = default;
};

enum class Stream { tide, weather, vessel_traffic, news_headline };

std::string_view to_string(Stream stream);
Stream parse_stream(std::string_view text);

/// Payload scalar. Integers and reals keep their JSON type.
using Scalar = std::variant<std::int64_t, double, std::string>;

/// Verbatim textual form of a scalar: shortest round-trip for reals.
std::string scalar_to_string(const Scalar& value);

struct StructuredRecord {
    Stream stream = Stream::tide;
    std::string station_or_region;
    Timestamp observed_at{};
    std::map<std::string, Scalar> payload;

    bool operator==(const StructuredRecord&) const = default;
};

enum class FieldType { number, integer, text };

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::number;
    std::string unit;
    bool required = true;
};

using StreamSchemas = std::map<Stream, std::vector<FieldSpec>>;

StreamSchemas default_stream_schemas();

/// Throws SchemaError naming the first offending field.
void validate_record(const StructuredRecord& record, const StreamSchemas& schemas);

// JSON codecs for the line-delimited record formats. Decoders throw
// InvalidArgument describing the first problem found.
nlohmann::json to_json(const SourceRef& ref);
nlohmann::json to_json(const Document& doc);
nlohmann::json to_json(const WikiEntry& entry);
nlohmann::json to_json(const QASet& qa);
nlohmann::json to_json(const StructuredRecord& record);
SourceRef source_from_json(const nlohmann::json& j);
Document document_from_json(const nlohmann::json& j);
WikiEntry wiki_from_json(const nlohmann::json& j);
QASet qa_from_json(const nlohmann::json& j);
StructuredRecord record_from_json(const nlohmann::json& j);

/// Reads a line-delimited QA dataset without storing it.
std::vector<QASet> load_qa_file(const std::filesystem::path& file);

/// One line of the manifest: where a record lives on disk.
struct ManifestEntry {
    std::string id;
    std::string collection;
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
};

/// Directory-backed store. Every collection is a line-delimited file holding
/// the records exactly as they were ingested; `manifest.jsonl` maps ids to
/// byte ranges. Readers always observe a complete batch: each ingest builds a
/// new snapshot and publishes it in one step.
class DataLake {
  public:
    explicit DataLake(std::filesystem::path root, StreamSchemas schemas = default_stream_schemas());
    ~DataLake();
    DataLake(const DataLake&) = delete;
    DataLake& operator=(const DataLake&) = delete;

    const std::filesystem::path& root() const { return m_root; }

    std::size_t ingest_documents(const std::filesystem::path& file, DocumentKind kind);
    Document get_document(const std::string& id) const;
    /// Ordered by id.
    std::vector<Document> list_documents(std::optional<DocumentKind> kind = std::nullopt,
                                         std::optional<Language> language = std::nullopt) const;

    std::size_t ingest_wiki(const std::filesystem::path& file);
    WikiEntry get_wiki(const std::string& slug) const;
    std::vector<WikiEntry> list_wiki(std::optional<WikiAxis> axis = std::nullopt) const;

    std::size_t ingest_qa(const std::filesystem::path& file);
    QASet get_qa(const std::string& id) const;
    std::vector<QASet> list_qa() const;

    std::size_t ingest_structured(const std::filesystem::path& file, Stream stream);
    /// Records with from <= observed_at <= to, oldest first.
    std::vector<StructuredRecord> query_structured(Stream stream, Timestamp from, Timestamp to) const;
    std::vector<StructuredRecord> all_structured(Stream stream) const;

    std::vector<ManifestEntry> manifest() const;
    const StreamSchemas& schemas() const { return m_schemas; }

    struct State;

  private:
    std::shared_ptr<const State> snapshot() const;
    void commit(std::shared_ptr<const State> next, const std::vector<std::string>& dirty);
    void load();

    std::filesystem::path m_root;
    StreamSchemas m_schemas;
    mutable std::mutex m_snapshot_mutex;
    std::mutex m_write_mutex;
    std::shared_ptr<const State> m_state;
};

}  // namespace amazul::lake
