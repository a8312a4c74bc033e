#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "amazul/reporter.hpp"
#include "amazul/text.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace amazul;
using namespace amazul::report;
using lake::Stream;
using lake::StructuredRecord;
using amazul::testing::fixture_path;

namespace {

const Timestamp kNow = parse_timestamp("2026-03-10T18:00:00Z");

std::vector<StructuredRecord> fixture_records()
{
    std::vector<StructuredRecord> out;
    for (const auto& j : testing::read_jsonl(fixture_path("reporter/records.jsonl")))
        out.push_back(lake::record_from_json(j));
    return out;
}

TemplateLexicon fixture_lexicon()
{
    return TemplateLexicon::load(fixture_path("reporter/lexicon.txt"));
}

StructuredRecord tide(const std::string& station, const std::string& at, double height,
                      std::optional<std::string> event = std::nullopt)
{
    StructuredRecord r{Stream::tide, station, parse_timestamp(at), {{"height_m", height}}};
    if (event)
        r.payload["event"] = *event;
    return r;
}

// True when `value` occurs in `text` as a whole number, not as part of a
// longer one.
bool appears_verbatim(const std::string& text, const std::string& value)
{
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    for (auto pos = text.find(value); pos != std::string::npos; pos = text.find(value, pos + 1)) {
        bool left = pos == 0 || !(digit(text[pos - 1]) || text[pos - 1] == '.' || text[pos - 1] == '-');
        auto end = pos + value.size();
        bool right = end == text.size() ||
                     !(digit(text[end]) || (text[end] == '.' && end + 1 < text.size() && digit(text[end + 1])));
        if (left && right)
            return true;
    }
    return false;
}

std::string key(const StructuredRecord& r)
{
    return r.station_or_region + "@" + format_timestamp(r.observed_at);
}

}  // namespace

TEST_CASE("intent names round-trip")
{
    for (auto i : {Intent::tide_bulletin, Intent::weather_bulletin, Intent::traffic_bulletin, Intent::news_digest})
        CHECK(parse_intent(to_string(i)) == i);
    CHECK_THROWS_AS(parse_intent("fishing-watch"), InvalidArgument);
    CHECK(stream_of(Intent::traffic_bulletin) == Stream::vessel_traffic);
}

TEST_CASE("lexicon parsing")
{
    auto lex = TemplateLexicon::parse("# c\n"
                                      "tide-height | {station}: {height_m} m\n"
                                      "tide-height | {height_m} m at {station}\n"
                                      "refer | Santos | the port of Santos | Santos\n");
    REQUIRE(lex.templates("tide-height"));
    CHECK(lex.templates("tide-height")->size() == 2);
    CHECK(lex.templates("tide-event") == nullptr);
    CHECK(lex.missing(Intent::tide_bulletin) == std::vector<std::string>{"tide-event"});
    CHECK(lex.referring_forms("Santos") == std::pair<std::string, std::string>{"the port of Santos", "Santos"});
    CHECK(lex.referring_forms("Itajaí") == std::pair<std::string, std::string>{"Itajaí", "Itajaí"});

    auto line_of = [](const std::string& text) {
        try {
            TemplateLexicon::parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("tide-height | ok {station}\nfishing-watch | {x}\n") == 2);
    CHECK(line_of("tide-height | {station} {wind_kt}\n") == 1);  // slot the message cannot fill
    CHECK(line_of("tide-height | {station\n") == 1);
    CHECK(line_of("\nrefer | Santos | only one\n") == 2);
    CHECK(line_of("no separator\n") == 1);
    CHECK(line_of("tide-height |   \n") == 1);
}

TEST_CASE("shipped lexicon covers every intent")
{
    auto lex = TemplateLexicon::load(testing::data_path("reporter/lexicon.txt"));
    for (auto i : {Intent::tide_bulletin, Intent::weather_bulletin, Intent::traffic_bulletin, Intent::news_digest})
        CHECK(lex.missing(i).empty());
}

TEST_CASE("select_content examples")
{
    SUBCASE("recency")
    {
        std::vector<StructuredRecord> rs{tide("Santos", "2026-03-10T08:00:00Z", 1.0),
                                         tide("Santos", "2026-03-10T12:00:00Z", 2.0)};
        auto sel = select_content(rs, Intent::tide_bulletin, kNow);
        REQUIRE(sel.size() == 1);
        CHECK(sel[0].observed_at == parse_timestamp("2026-03-10T12:00:00Z"));
        // Input order does not matter.
        std::reverse(rs.begin(), rs.end());
        CHECK(select_content(rs, Intent::tide_bulletin, kNow)[0].observed_at == sel[0].observed_at);
    }
    SUBCASE("stale records give an empty selection")
    {
        std::vector<StructuredRecord> rs{tide("Santos", "2026-03-08T08:00:00Z", 1.0),
                                         tide("Rio Grande", "2026-03-09T17:59:59Z", 1.0)};
        CHECK(select_content(rs, Intent::tide_bulletin, kNow).empty());
        // The window edge is inclusive.
        rs.push_back(tide("Rio Grande", "2026-03-09T18:00:00Z", 1.0));
        CHECK(select_content(rs, Intent::tide_bulletin, kNow).size() == 1);
    }
    SUBCASE("configured window")
    {
        std::vector<StructuredRecord> rs{tide("Santos", "2026-03-10T15:00:00Z", 1.0)};
        ReportConfig config;
        config.freshness[Stream::tide] = std::chrono::hours(2);
        CHECK(select_content(rs, Intent::tide_bulletin, kNow, config).empty());
        config.freshness[Stream::tide] = std::chrono::hours(3);
        CHECK(select_content(rs, Intent::tide_bulletin, kNow, config).size() == 1);
    }
    SUBCASE("mixed-station fixture")
    {
        auto records = fixture_records();
        // Applied by hand: Cananéia is 56h old, the 08:00 Santos reading is
        // superseded, the other streams are ignored.
        std::vector<std::string> tide_expected{"Ilha Fiscal@2026-03-10T12:30:00Z", "Paranaguá@2026-03-10T16:45:00Z",
                                               "Santos@2026-03-10T14:00:00Z"};
        // Paranaguá is 31h old.
        std::vector<std::string> weather_expected{"Rio Grande@2026-03-10T17:00:00Z", "Santos@2026-03-10T15:00:00Z"};
        // Rio Grande lies after `now`.
        std::vector<std::string> traffic_expected{"Paranaguá@2026-03-10T17:00:00Z", "Santos@2026-03-10T17:30:00Z"};
        auto keys = [&](Intent i) {
            std::vector<std::string> out;
            for (const auto& r : select_content(records, i, kNow))
                out.push_back(key(r));
            return out;
        };
        CHECK(keys(Intent::tide_bulletin) == tide_expected);
        CHECK(keys(Intent::weather_bulletin) == weather_expected);
        CHECK(keys(Intent::traffic_bulletin) == traffic_expected);
        CHECK(keys(Intent::news_digest).size() == 3);
    }
}

TEST_CASE("generate_report examples")
{
    SUBCASE("single record, single template")
    {
        auto lex = TemplateLexicon::parse("tide-height | Tide at {station}: {height_m} m at {time}.\n");
        std::vector<StructuredRecord> sel{tide("Santos", "2026-03-10T14:00:00Z", 2.1)};
        auto plan = generate_report(sel, Intent::tide_bulletin, lex, 0);
        REQUIRE(plan.realized);
        CHECK(*plan.realized == "Tide at Santos: 2.1 m at 14:00.");
        REQUIRE(plan.ordered_messages.size() == 1);
        CHECK(plan.ordered_messages[0].type == "tide-height");
        CHECK(plan.ordered_messages[0].slots.at("height_m") == "2.1");
        CHECK(plan.dropped.empty());
    }
    SUBCASE("second mention uses the short form")
    {
        auto lex = TemplateLexicon::parse("tide-height | {station} at {height_m} m\n"
                                          "tide-event | {event} due at {station}\n"
                                          "refer | Santos | the port of Santos | Santos\n");
        std::vector<StructuredRecord> sel{tide("Santos", "2026-03-10T14:00:00Z", 2.1, "high water")};
        auto plan = generate_report(sel, Intent::tide_bulletin, lex, 3);
        CHECK(*plan.realized == "The port of Santos at 2.1 m, high water due at Santos.");
    }
    SUBCASE("missing template names the message type")
    {
        auto lex = TemplateLexicon::parse("tide-height | {station} at {height_m} m\n");
        std::vector<StructuredRecord> sel{tide("Santos", "2026-03-10T14:00:00Z", 2.1, "high water")};
        try {
            generate_report(sel, Intent::tide_bulletin, lex, 0);
            FAIL("expected NotFound");
        } catch (const NotFound& e) {
            CHECK(std::string(e.what()).find("tide-event") != std::string::npos);
        }
        // Optional messages only need templates when the field is present.
        sel[0].payload.erase("event");
        CHECK(generate_report(sel, Intent::tide_bulletin, lex, 0).realized == "Santos at 2.1 m.");
    }
    SUBCASE("empty selection")
    {
        CHECK_THROWS_AS(generate_report({}, Intent::tide_bulletin, fixture_lexicon(), 0), InvalidArgument);
    }
    SUBCASE("casing and punctuation")
    {
        auto lex = TemplateLexicon::parse("tide-height | élan at {station} {height_m}!\n"
                                          "tide-event | {event};\n");
        std::vector<StructuredRecord> sel{tide("Rio", "2026-03-10T14:00:00Z", 1, "ebb")};
        CHECK(*generate_report(sel, Intent::tide_bulletin, lex, 0).realized == "Élan at Rio 1, ebb.");
    }
}

TEST_CASE("golden bulletins")
{
    auto records = fixture_records();
    auto lex = fixture_lexicon();
    for (auto intent : {Intent::tide_bulletin, Intent::weather_bulletin, Intent::traffic_bulletin}) {
        CAPTURE(to_string(intent));
        auto sel = select_content(records, intent, kNow);
        auto plan = generate_report(sel, intent, lex, 7);
        REQUIRE(plan.realized);
        auto golden = read_file(fixture_path("reporter/" + std::string(to_string(intent)) + ".golden"));
        CHECK(*plan.realized == golden);
        CHECK(plan.dropped.empty());
    }
}

TEST_CASE("discourse order follows entity then message type")
{
    auto records = fixture_records();
    auto lex = fixture_lexicon();
    auto plan = generate_report(select_content(records, Intent::weather_bulletin, kNow), Intent::weather_bulletin,
                                lex, 1);
    std::vector<std::string> types;
    for (const auto& m : plan.ordered_messages)
        types.push_back(m.entity + ":" + m.type);
    CHECK(types == std::vector<std::string>{"Rio Grande:weather-wind", "Rio Grande:weather-wave",
                                            "Santos:weather-wind", "Santos:weather-wave",
                                            "Santos:weather-condition"});
}

TEST_CASE("overflow drops trailing sentences")
{
    auto lex = TemplateLexicon::parse("news-item | {region}: {headline} ({outlet})\n");
    std::vector<StructuredRecord> sel;
    for (char c = 'A'; c <= 'E'; ++c)
        sel.push_back({Stream::news_headline,
                       std::string("Region ") + c,
                       kNow,
                       {{"headline", std::string(70, 'x')}, {"outlet", std::string("Outlet")}}});
    auto plan = generate_report(sel, Intent::news_digest, lex, 0);
    REQUIRE(plan.realized);
    // Each sentence is 90 characters; three fit with separators (272).
    CHECK(text::codepoint_count(*plan.realized) == 272);
    CHECK(plan.selected.size() == 3);
    REQUIRE(plan.dropped.size() == 2);
    CHECK(plan.dropped[0].station_or_region == "Region D");
    CHECK(plan.sentences.size() == 5);
    for (const auto& m : plan.ordered_messages)
        CHECK(m.record < plan.selected.size());

    // A lone sentence over the cap leaves nothing to publish.
    sel.resize(1);
    sel[0].payload["headline"] = std::string(300, 'y');
    auto none = generate_report(sel, Intent::news_digest, lex, 0);
    CHECK_FALSE(none.realized);
    CHECK(none.selected.empty());
    CHECK(none.dropped.size() == 1);
}

TEST_CASE("randomized record sets keep fidelity and the cap")
{
    auto lex = fixture_lexicon();
    std::mt19937_64 rng(20260310);
    const std::vector<std::string> stations{"Santos", "Paranaguá", "Rio Grande", "Ilha Fiscal", "Cananéia",
                                            "Itajaí", "São Francisco do Sul", "Vitória", "Suape", "Pecém"};
    const std::vector<std::string> words{"strong", "calm", "surge", "ebb", "fog", "clear", "rain", "spring tide"};
    std::uniform_int_distribution<int> n_records(1, 9), minute(0, 24 * 60), count(0, 60), decimals(0, 3), coin(0, 1);
    std::uniform_real_distribution<double> real(0.0, 40.0);
    auto number = [&]() -> lake::Scalar {
        double scale = std::pow(10.0, decimals(rng));
        return std::round(real(rng) * scale) / scale;
    };
    auto word = [&] { return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)]; };

    std::size_t with_drops = 0;
    for (int set = 0; set < 50; ++set) {
        CAPTURE(set);
        auto intent = static_cast<Intent>(set % 3);  // the intents with numeric payloads
        auto shuffled = stations;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::vector<StructuredRecord> sel;
        int n = n_records(rng);
        for (int i = 0; i < n; ++i) {
            StructuredRecord r{stream_of(intent), shuffled[static_cast<std::size_t>(i)],
                               kNow - std::chrono::minutes(minute(rng)), {}};
            switch (intent) {
            case Intent::tide_bulletin:
                r.payload["height_m"] = number();
                if (coin(rng))
                    r.payload["event"] = word();
                break;
            case Intent::weather_bulletin:
                r.payload["wind_kt"] = number();
                r.payload["wave_m"] = number();
                if (coin(rng))
                    r.payload["condition"] = word();
                break;
            default:
                r.payload["arrivals"] = std::int64_t{count(rng)};
                r.payload["departures"] = std::int64_t{count(rng)};
                if (coin(rng))
                    r.payload["anchored"] = std::int64_t{count(rng)};
            }
            sel.push_back(std::move(r));
        }

        auto plan = generate_report(sel, intent, lex, static_cast<std::uint64_t>(set));
        REQUIRE(plan.realized);
        const auto& out = *plan.realized;
        CHECK(text::codepoint_count(out) <= kMaxChars);
        CHECK(generate_report(sel, intent, lex, static_cast<std::uint64_t>(set)).realized == plan.realized);

        // Nothing is lost: every input record is either covered or dropped.
        std::multiset<std::string> in, covered;
        for (const auto& r : sel)
            in.insert(key(r));
        for (const auto& r : plan.selected)
            covered.insert(key(r));
        for (const auto& r : plan.dropped)
            covered.insert(key(r));
        CHECK(in == covered);
        if (!plan.dropped.empty())
            ++with_drops;

        // Fidelity over the covered records.
        for (const auto& r : plan.selected) {
            for (const auto& [field, value] : r.payload) {
                if (std::holds_alternative<std::string>(value))
                    continue;
                auto v = lake::scalar_to_string(value);
                CAPTURE(out);
                CAPTURE(v);
                CHECK(appears_verbatim(out, v));
            }
        }
        auto expected_numeric = 0u;
        for (const auto& r : plan.selected)
            expected_numeric += static_cast<unsigned>(numeric_values(r, intent).size());
        auto payload_numeric = 0u;
        for (const auto& r : plan.selected)
            for (const auto& [_, value] : r.payload)
                payload_numeric += !std::holds_alternative<std::string>(value);
        CHECK(expected_numeric == payload_numeric);
    }
    // The generator must actually exercise the overflow rule.
    CHECK(with_drops > 0);
}

TEST_CASE("seeds vary the realization")
{
    auto lex = fixture_lexicon();
    std::vector<StructuredRecord> sel{tide("Santos", "2026-03-10T14:00:00Z", 2.1)};
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        seen.insert(*generate_report(sel, Intent::tide_bulletin, lex, seed).realized);
    CHECK(seen.size() >= 2);

    auto one = TemplateLexicon::parse("tide-height | {station} {height_m}\n");
    seen.clear();
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        seen.insert(*generate_report(sel, Intent::tide_bulletin, one, seed).realized);
    CHECK(seen.size() == 1);
}

namespace {

ReportPlan realized_plan(std::string text)
{
    ReportPlan plan;
    plan.selected.push_back(tide("Santos", "2026-03-10T14:00:00Z", 2.1));
    plan.realized = std::move(text);
    return plan;
}

}  // namespace

TEST_CASE("outbox publisher")
{
    testing::TempDir tmp;
    auto file = tmp.path() / "out" / "outbox.jsonl";
    Timestamp clock = kNow;
    OutboxPublisher pub(file, [&] { return clock; });

    SUBCASE("sequential publishes")
    {
        std::vector<std::uint64_t> ids;
        for (const auto* t : {"first", "second", "third"}) {
            ids.push_back(publish(realized_plan(t), pub).id);
            clock += std::chrono::seconds(1);
        }
        CHECK(ids == std::vector<std::uint64_t>{1, 2, 3});
        auto lines = testing::read_jsonl(file.string());
        REQUIRE(lines.size() == 3);
        CHECK(lines[0]["text"] == "first");
        CHECK(lines[2]["text"] == "third");
        CHECK(lines[2]["receipt_id"] == 3);
        CHECK(lines[1]["timestamp"] == "2026-03-10T18:00:01Z");
        CHECK(lines[0]["provenance"]["records"][0]["station_or_region"] == "Santos");

        // A new publisher resumes the id sequence.
        OutboxPublisher again(file);
        CHECK(publish(realized_plan("fourth"), again).id == 4);
    }
    SUBCASE("rejections")
    {
        CHECK_THROWS_AS(publish(realized_plan(std::string(281, 'a')), pub), InvalidArgument);
        CHECK(publish(realized_plan(std::string(280, 'a')), pub).id == 1);
        // 280 characters, more bytes.
        std::string accented;
        for (int i = 0; i < 280; ++i)
            accented += "é";
        CHECK(publish(realized_plan(accented), pub).id == 2);
        ReportPlan empty;
        CHECK_THROWS_AS(publish(empty, pub), InvalidArgument);
        CHECK(testing::read_jsonl(file.string()).size() == 2);
    }
    SUBCASE("concurrent posts stay ordered")
    {
        std::vector<std::thread> threads;
        for (int t = 0; t < 8; ++t)
            threads.emplace_back([&pub] {
                for (int i = 0; i < 25; ++i)
                    pub.post("x", nlohmann::json::object());
            });
        for (auto& t : threads)
            t.join();
        auto lines = testing::read_jsonl(file.string());
        REQUIRE(lines.size() == 200);
        for (std::size_t i = 0; i < lines.size(); ++i)
            CHECK(lines[i]["receipt_id"] == i + 1);
    }
    SUBCASE("malformed outbox")
    {
        auto bad = tmp.write("bad.jsonl", "not json\n");
        CHECK_THROWS_AS(OutboxPublisher{bad}, InvalidArgument);
    }
}

TEST_CASE("run_report reads the lake")
{
    testing::TempDir tmp;
    lake::DataLake lake(tmp.path() / "lake");
    std::map<Stream, std::string> files;
    for (const auto& j : testing::read_jsonl(fixture_path("reporter/records.jsonl")))
        files[lake::parse_stream(j["stream"].get<std::string>())] += j.dump() + "\n";
    for (const auto& [stream, content] : files)
        lake.ingest_structured(tmp.write(std::string(lake::to_string(stream)) + ".jsonl", content), stream);

    auto lex = fixture_lexicon();
    auto plan = run_report(lake, Intent::tide_bulletin, kNow, lex, 7);
    REQUIRE(plan.realized);
    CHECK(*plan.realized == read_file(fixture_path("reporter/tide-bulletin.golden")));

    auto later = run_report(lake, Intent::tide_bulletin, kNow + std::chrono::hours(72), lex, 7);
    CHECK_FALSE(later.realized);
    CHECK(later.selected.empty());
}
