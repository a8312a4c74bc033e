#include "amazul/reporter.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "amazul/text.hpp"

namespace amazul::report {

using json = nlohmann::json;
using lake::StructuredRecord;

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

/// Slot names in `{name}` markers; throws on an unterminated marker.
std::vector<std::string> slots_of(std::string_view tmpl)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{')
            continue;
        auto close = tmpl.find('}', i);
        if (close == std::string_view::npos)
            throw InvalidArgument("unterminated slot in template '" + std::string(tmpl) + "'");
        out.emplace_back(tmpl.substr(i + 1, close - i - 1));
        i = close;
    }
    return out;
}

const MessageType* find_type(const std::string& name)
{
    for (auto intent : {Intent::tide_bulletin, Intent::weather_bulletin, Intent::traffic_bulletin, Intent::news_digest})
        for (const auto& t : message_types(intent))
            if (t.name == name)
                return &t;
    return nullptr;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string hhmm(Timestamp ts)
{
    return format_timestamp(ts).substr(11, 5);
}

std::string capitalize(std::string s)
{
    std::int32_t i = 0;
    UChar32 c = 0;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<std::int32_t>(s.size()), c);
    if (c < 0)
        return s;
    UChar32 up = u_toupper(c);
    if (up == c)
        return s;
    char buf[4];
    std::int32_t n = 0;
    UBool err = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, 4, up, err);
    if (err)
        return s;
    return std::string(buf, static_cast<std::size_t>(n)) + s.substr(static_cast<std::size_t>(i));
}

bool terminal(char c)
{
    return c == '.' || c == '!' || c == '?';
}

std::string strip_punct(std::string s)
{
    while (!s.empty() && (terminal(s.back()) || s.back() == ',' || s.back() == ';' || s.back() == ' '))
        s.pop_back();
    return s;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

std::string_view to_string(Intent intent)
{
    switch (intent) {
    case Intent::tide_bulletin: return "tide-bulletin";
    case Intent::weather_bulletin: return "weather-bulletin";
    case Intent::traffic_bulletin: return "traffic-bulletin";
    case Intent::news_digest: return "news-digest";
    }
    return "?";
}

Intent parse_intent(std::string_view text)
{
    for (auto i : {Intent::tide_bulletin, Intent::weather_bulletin, Intent::traffic_bulletin, Intent::news_digest})
        if (to_string(i) == text)
            return i;
    throw InvalidArgument("unknown intent '" + std::string(text) + "'");
}

lake::Stream stream_of(Intent intent)
{
    switch (intent) {
    case Intent::tide_bulletin: return lake::Stream::tide;
    case Intent::weather_bulletin: return lake::Stream::weather;
    case Intent::traffic_bulletin: return lake::Stream::vessel_traffic;
    case Intent::news_digest: return lake::Stream::news_headline;
    }
    return lake::Stream::tide;
}

const std::vector<MessageType>& message_types(Intent intent)
{
    static const std::vector<MessageType> tide{
        {"tide-height", "station", {"station", "height_m", "time"}, {"height_m"}},
        {"tide-event", "station", {"station", "event", "time"}, {"event"}},
    };
    static const std::vector<MessageType> weather{
        {"weather-wind", "station", {"station", "wind_kt", "time"}, {"wind_kt"}},
        {"weather-wave", "station", {"station", "wave_m", "time"}, {"wave_m"}},
        {"weather-condition", "station", {"station", "condition", "time"}, {"condition"}},
    };
    static const std::vector<MessageType> traffic{
        {"traffic-movements", "station", {"station", "arrivals", "departures", "time"}, {"arrivals", "departures"}},
        {"traffic-anchored", "station", {"station", "anchored", "time"}, {"anchored"}},
    };
    static const std::vector<MessageType> news{
        {"news-item", "region", {"region", "headline", "outlet", "time"}, {"headline", "outlet"}},
    };
    switch (intent) {
    case Intent::tide_bulletin: return tide;
    case Intent::weather_bulletin: return weather;
    case Intent::traffic_bulletin: return traffic;
    case Intent::news_digest: return news;
    }
    return tide;
}

// ---------------------------------------------------------------------------
// lexicon

void TemplateLexicon::add_template(const std::string& type, std::string text)
{
    const auto* mt = find_type(type);
    if (!mt)
        throw InvalidArgument("unknown message type '" + type + "'");
    if (trim(text).empty())
        throw InvalidArgument("empty template for message type '" + type + "'");
    for (const auto& slot : slots_of(text))
        if (std::find(mt->slots.begin(), mt->slots.end(), slot) == mt->slots.end())
            throw InvalidArgument("message type '" + type + "' cannot fill slot {" + slot + "}");
    m_templates[type].push_back(std::move(text));
}

void TemplateLexicon::add_referring_form(const std::string& entity, std::string first, std::string subsequent)
{
    if (entity.empty() || first.empty() || subsequent.empty())
        throw InvalidArgument("referring forms must be non-empty");
    m_refer[entity] = {std::move(first), std::move(subsequent)};
}

const std::vector<std::string>* TemplateLexicon::templates(const std::string& type) const
{
    auto it = m_templates.find(type);
    return it == m_templates.end() ? nullptr : &it->second;
}

std::pair<std::string, std::string> TemplateLexicon::referring_forms(const std::string& entity) const
{
    auto it = m_refer.find(entity);
    if (it == m_refer.end())
        return {entity, entity};
    return it->second;
}

std::vector<std::string> TemplateLexicon::missing(Intent intent) const
{
    std::vector<std::string> out;
    for (const auto& t : message_types(intent))
        if (!templates(t.name))
            out.push_back(t.name);
    return out;
}

TemplateLexicon TemplateLexicon::parse(std::string_view text)
{
    TemplateLexicon lex;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        ++line_no;
        auto line = trim(text.substr(start, end - start));
        start = end + 1;
        if (line.empty() || line[0] == '#')
            continue;
        auto bar = line.find('|');
        if (bar == std::string::npos)
            throw ParseError(line_no, "expected '<type> | <template>'");
        auto head = trim(std::string_view(line).substr(0, bar));
        try {
            if (head == "refer") {
                auto parts = split(std::string_view(line).substr(bar + 1), '|');
                if (parts.size() != 3)
                    throw InvalidArgument("expected 'refer | <entity> | <first> | <subsequent>'");
                lex.add_referring_form(parts[0], parts[1], parts[2]);
            } else {
                lex.add_template(head, trim(std::string_view(line).substr(bar + 1)));
            }
        } catch (const InvalidArgument& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return lex;
}

TemplateLexicon TemplateLexicon::load(const std::filesystem::path& file)
{
    return parse(read_file(file.string()));
}

// ---------------------------------------------------------------------------
// content selection

std::chrono::seconds ReportConfig::window(lake::Stream stream) const
{
    auto it = freshness.find(stream);
    return it == freshness.end() ? std::chrono::hours(24) : it->second;
}

std::vector<StructuredRecord> select_content(std::span<const StructuredRecord> records, Intent intent, Timestamp now,
                                             const ReportConfig& config)
{
    auto stream = stream_of(intent);
    auto from = now - config.window(stream);
    std::map<std::string, const StructuredRecord*> latest;
    for (const auto& r : records) {
        if (r.stream != stream || r.observed_at < from || r.observed_at > now)
            continue;
        auto& slot = latest[r.station_or_region];
        if (!slot || r.observed_at >= slot->observed_at)
            slot = &r;
    }
    std::vector<StructuredRecord> out;
    for (const auto& [_, r] : latest)
        out.push_back(*r);
    return out;
}

// ---------------------------------------------------------------------------
// generation

std::vector<std::string> numeric_values(const StructuredRecord& record, Intent intent)
{
    std::set<std::string> fields;
    for (const auto& t : message_types(intent))
        fields.insert(t.slots.begin(), t.slots.end());
    std::vector<std::string> out;
    for (const auto& [name, value] : record.payload)
        if (fields.count(name) && !std::holds_alternative<std::string>(value))
            out.push_back(lake::scalar_to_string(value));
    return out;
}

json ReportPlan::provenance() const
{
    json records = json::array();
    for (const auto& r : selected)
        records.push_back({{"stream", std::string(lake::to_string(r.stream))},
                           {"station_or_region", r.station_or_region},
                           {"observed_at", format_timestamp(r.observed_at)}});
    return {{"intent", std::string(to_string(intent))}, {"seed", seed}, {"records", records}};
}

ReportPlan generate_report(std::span<const StructuredRecord> selection, Intent intent, const TemplateLexicon& lexicon,
                           std::uint64_t seed)
{
    if (selection.empty())
        throw InvalidArgument("empty selection");
    const auto& types = message_types(intent);

    // Discourse ordering: entities in name order, then records by time, then
    // message types in the intent's fixed order.
    std::vector<std::size_t> order(selection.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto &x = selection[a], &y = selection[b];
        if (x.station_or_region != y.station_or_region)
            return x.station_or_region < y.station_or_region;
        return x.observed_at < y.observed_at;
    });

    struct Group {
        std::string entity;
        std::vector<std::size_t> records;  // indices into selection
        std::vector<MessageSpec> messages;
    };
    std::vector<Group> groups;
    for (auto idx : order) {
        const auto& r = selection[idx];
        if (groups.empty() || groups.back().entity != r.station_or_region)
            groups.push_back({r.station_or_region, {}, {}});
        auto& g = groups.back();
        g.records.push_back(idx);
        for (const auto& t : types) {
            bool ok = std::all_of(t.required_fields.begin(), t.required_fields.end(),
                                  [&](const std::string& f) { return r.payload.count(f) > 0; });
            if (!ok)
                continue;
            MessageSpec m{t.name, r.station_or_region, {}, idx};
            for (const auto& slot : t.slots) {
                if (slot == t.entity_slot)
                    continue;
                if (slot == "time")
                    m.slots[slot] = hhmm(r.observed_at);
                else if (auto it = r.payload.find(slot); it != r.payload.end())
                    m.slots[slot] = lake::scalar_to_string(it->second);
            }
            g.messages.push_back(std::move(m));
        }
    }

    // Lexicalization, referring expressions and slot filling, one sentence
    // per entity group.
    std::map<std::string, std::size_t> mentions;
    std::vector<std::string> sentences;
    std::size_t position = 0;
    for (const auto& g : groups) {
        std::vector<std::string> clauses;
        for (const auto& m : g.messages) {
            const auto* variants = lexicon.templates(m.type);
            if (!variants || variants->empty())
                throw NotFound("no template for message type '" + m.type + "'");
            std::uint64_t pick = splitmix64(seed ^ splitmix64(position++)) % variants->size();
            const auto& tmpl = (*variants)[pick];
            const auto* mt = find_type(m.type);
            auto forms = lexicon.referring_forms(m.entity);

            std::string out;
            for (std::size_t i = 0; i < tmpl.size(); ++i) {
                if (tmpl[i] != '{') {
                    out += tmpl[i];
                    continue;
                }
                auto close = tmpl.find('}', i);
                auto slot = tmpl.substr(i + 1, close - i - 1);
                i = close;
                if (slot == mt->entity_slot) {
                    out += mentions[m.entity]++ == 0 ? forms.first : forms.second;
                } else if (auto it = m.slots.find(slot); it != m.slots.end()) {
                    out += it->second;
                } else {
                    throw InvalidArgument("slot {" + slot + "} has no value in message '" + m.type + "'");
                }
            }
            clauses.push_back(trim(out));
        }
        if (clauses.empty()) {
            sentences.emplace_back();
            continue;
        }
        for (std::size_t i = 0; i + 1 < clauses.size(); ++i)
            clauses[i] = strip_punct(clauses[i]);
        auto sentence = capitalize(join(clauses, ", "));
        while (!sentence.empty() && (sentence.back() == ',' || sentence.back() == ';' || sentence.back() == ' '))
            sentence.pop_back();
        if (sentence.empty() || !terminal(sentence.back()))
            sentence += '.';
        sentences.push_back(std::move(sentence));
    }

    // Realization under the cap: drop whole sentences from the end.
    std::size_t keep = groups.size();
    auto realize = [&](std::size_t n) {
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < n; ++i)
            if (!sentences[i].empty())
                parts.push_back(sentences[i]);
        return join(parts, " ");
    };
    while (keep > 0 && text::codepoint_count(realize(keep)) > kMaxChars)
        --keep;

    ReportPlan plan;
    plan.intent = intent;
    plan.seed = seed;
    plan.sentences = sentences;
    std::map<std::size_t, std::size_t> remap;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        bool kept = gi < keep && !sentences[gi].empty();
        for (auto idx : groups[gi].records) {
            if (kept) {
                remap[idx] = plan.selected.size();
                plan.selected.push_back(selection[idx]);
            } else {
                plan.dropped.push_back(selection[idx]);
            }
        }
        if (kept)
            for (auto m : groups[gi].messages) {
                m.record = remap.at(m.record);
                plan.ordered_messages.push_back(std::move(m));
            }
    }
    auto text = realize(keep);
    if (!text.empty())
        plan.realized = std::move(text);
    return plan;
}

// ---------------------------------------------------------------------------
// publication

OutboxPublisher::OutboxPublisher(std::filesystem::path file, Clock clock)
    : m_file(std::move(file)), m_clock(std::move(clock))
{
    if (!m_clock)
        m_clock = [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
    std::ifstream in(m_file);
    std::string line, last;
    while (std::getline(in, line))
        if (!trim(line).empty())
            last = line;
    if (!last.empty()) {
        auto j = json::parse(last, nullptr, false);
        if (j.is_discarded() || !j.contains("receipt_id") || !j["receipt_id"].is_number_unsigned())
            throw InvalidArgument("outbox '" + m_file.string() + "' has a malformed last line");
        m_next = j["receipt_id"].get<std::uint64_t>() + 1;
    }
}

Receipt OutboxPublisher::post(const std::string& text, const json& provenance)
{
    std::lock_guard lock(m_mutex);
    Receipt r{m_next, m_clock()};
    json line{{"receipt_id", r.id},
              {"timestamp", format_timestamp(r.published_at)},
              {"text", text},
              {"provenance", provenance}};
    if (m_file.has_parent_path())
        std::filesystem::create_directories(m_file.parent_path());
    std::ofstream out(m_file, std::ios::app);
    out << line.dump() << '\n';
    out.flush();
    if (!out)
        throw Error("cannot append to outbox '" + m_file.string() + "'");
    ++m_next;
    return r;
}

Receipt publish(const ReportPlan& plan, Publisher& publisher)
{
    if (!plan.realized)
        throw InvalidArgument("plan has no realized text");
    auto n = text::codepoint_count(*plan.realized);
    if (n > kMaxChars)
        throw InvalidArgument("realized text has " + std::to_string(n) + " characters; the cap is " +
                              std::to_string(kMaxChars));
    return publisher.post(*plan.realized, plan.provenance());
}

ReportPlan run_report(const lake::DataLake& lake, Intent intent, Timestamp now, const TemplateLexicon& lexicon,
                      std::uint64_t seed, const ReportConfig& config)
{
    auto records = lake.all_structured(stream_of(intent));
    auto selection = select_content(records, intent, now, config);
    if (selection.empty()) {
        ReportPlan plan;
        plan.intent = intent;
        plan.seed = seed;
        return plan;
    }
    return generate_report(selection, intent, lexicon, seed);
}

}  // namespace amazul::report
