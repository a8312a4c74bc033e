#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amazul/datalake.hpp"

namespace amazul::report {

enum class Intent { tide_bulletin, weather_bulletin, traffic_bulletin, news_digest };

std::string_view to_string(Intent intent);
Intent parse_intent(std::string_view text);
lake::Stream stream_of(Intent intent);

inline constexpr std::size_t kMaxChars = 280;

/// One fact to verbalize. Slots hold display strings; numeric payload values
/// are kept in their shortest round-trip form.
struct MessageSpec {
    std::string type;
    std::string entity;  ///< station or region the message is about
    std::map<std::string, std::string> slots;
    std::size_t record = 0;  ///< index into ReportPlan::selected
};

/// Message types per intent in discourse order, with the slots each provides.
/// The entity slot takes a referring expression; every other slot is filled
/// verbatim, with `time` as HH:MM UTC.
struct MessageType {
    std::string name;
    std::string entity_slot;  ///< `station`, or `region` for news
    std::vector<std::string> slots;
    std::vector<std::string> required_fields;  ///< message is skipped when any is absent
};
const std::vector<MessageType>& message_types(Intent intent);

class TemplateLexicon {
  public:
    /// Throws InvalidArgument for unknown message types or slots a message cannot fill.
    void add_template(const std::string& type, std::string text);
    void add_referring_form(const std::string& entity, std::string first, std::string subsequent);

    const std::vector<std::string>* templates(const std::string& type) const;
    /// (first-mention, subsequent) forms; the entity itself when not listed.
    std::pair<std::string, std::string> referring_forms(const std::string& entity) const;
    /// Message types of `intent` without a template.
    std::vector<std::string> missing(Intent intent) const;

    /// Lines `<type> | <template>` and `refer | <entity> | <first> | <subsequent>`;
    /// `#` comments.
    static TemplateLexicon parse(std::string_view text);
    static TemplateLexicon load(const std::filesystem::path& file);

  private:
    std::map<std::string, std::vector<std::string>> m_templates;
    std::map<std::string, std::pair<std::string, std::string>> m_refer;
};

struct ReportConfig {
    std::map<lake::Stream, std::chrono::seconds> freshness;  ///< default 24h when a stream is absent
    std::chrono::seconds window(lake::Stream stream) const;
};

/// Most recent record per station within the freshness window ending at
/// `now`, sorted by station. Ties on time go to the later input record.
std::vector<lake::StructuredRecord> select_content(std::span<const lake::StructuredRecord> records, Intent intent,
                                                   Timestamp now, const ReportConfig& config = {});

struct ReportPlan {
    Intent intent = Intent::tide_bulletin;
    std::uint64_t seed = 0;
    std::vector<lake::StructuredRecord> selected;  ///< records the realized text covers
    std::vector<lake::StructuredRecord> dropped;   ///< removed to honour the length cap
    std::vector<MessageSpec> ordered_messages;
    std::vector<std::string> sentences;  ///< realized, one per entity, before the cap
    std::optional<std::string> realized;

    nlohmann::json provenance() const;
};

/// Discourse ordering, text structuring, lexicalization, referring
/// expressions and realization. Sentences are dropped from the end until the
/// text fits the cap; their records move to `dropped`. Throws InvalidArgument
/// on an empty selection and NotFound naming a message type without templates.
ReportPlan generate_report(std::span<const lake::StructuredRecord> selection, Intent intent,
                           const TemplateLexicon& lexicon, std::uint64_t seed);

/// Numeric payload values of `record` that the intent verbalizes.
std::vector<std::string> numeric_values(const lake::StructuredRecord& record, Intent intent);

struct Receipt {
    std::uint64_t id = 0;
    Timestamp published_at{};
};

class Publisher {
  public:
    virtual ~Publisher() = default;
    virtual Receipt post(const std::string& text, const nlohmann::json& provenance) = 0;
};

/// Appends one JSON line per post. Ids continue from the last line of an
/// existing file. Safe to share between threads.
class OutboxPublisher : public Publisher {
  public:
    using Clock = std::function<Timestamp()>;

    explicit OutboxPublisher(std::filesystem::path file, Clock clock = {});
    Receipt post(const std::string& text, const nlohmann::json& provenance) override;
    const std::filesystem::path& file() const { return m_file; }

  private:
    std::filesystem::path m_file;
    Clock m_clock;
    std::mutex m_mutex;
    std::uint64_t m_next = 1;
};

/// Throws InvalidArgument when the plan has no text or exceeds the cap.
Receipt publish(const ReportPlan& plan, Publisher& publisher);

/// Select and generate from the lake's stream for `intent`. The plan has no
/// realized text when nothing is fresh.
ReportPlan run_report(const lake::DataLake& lake, Intent intent, Timestamp now, const TemplateLexicon& lexicon,
                      std::uint64_t seed, const ReportConfig& config = {});

}  // namespace amazul::report
