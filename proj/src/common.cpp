#include "amazul/common.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace amazul {

std::string_view to_string(Language lang)
{
    return lang == Language::pt ? "pt" : "en";
}

bool is_supported_language(std::string_view tag)
{
    return tag == "pt" || tag == "en";
}

Language parse_language(std::string_view tag)
{
    if (tag == "pt") {
        return Language::pt;
    }
    if (tag == "en") {
        return Language::en;
    }
    throw InvalidArgument("unsupported language '" + std::string(tag) + "' (supported: pt, en)");
}

namespace {

int parse_int(std::string_view text, std::string_view full)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InvalidArgument("bad timestamp '" + std::string(full) + "'");
    }
    return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text)
{
    using namespace std::chrono;
    // YYYY-MM-DDTHH:MM[:SS][Z]
    if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ')
        || text[13] != ':') {
        throw InvalidArgument("bad timestamp '" + std::string(text) + "'");
    }
    std::string_view rest = text.substr(16);
    int sec = 0;
    if (!rest.empty() && rest.front() == ':') {
        if (rest.size() < 3) {
            throw InvalidArgument("bad timestamp '" + std::string(text) + "'");
        }
        sec = parse_int(rest.substr(1, 2), text);
        rest.remove_prefix(3);
    }
    if (rest == "Z") {
        rest.remove_prefix(1);
    }
    if (!rest.empty()) {
        throw InvalidArgument("bad timestamp '" + std::string(text) + "'");
    }
    int y = parse_int(text.substr(0, 4), text);
    int mo = parse_int(text.substr(5, 2), text);
    int d = parse_int(text.substr(8, 2), text);
    int h = parse_int(text.substr(11, 2), text);
    int mi = parse_int(text.substr(14, 2), text);
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) {
        throw InvalidArgument("bad timestamp '" + std::string(text) + "'");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

std::string format_timestamp(Timestamp ts)
{
    using namespace std::chrono;
    auto day_point = floor<days>(ts);
    year_month_day ymd{day_point};
    hh_mm_ss hms{ts - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::chrono::seconds parse_duration(std::string_view text)
{
    if (text.size() < 2) {
        throw InvalidArgument("bad duration '" + std::string(text) + "'");
    }
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size() - 1, value);
    if (ec != std::errc() || ptr != text.data() + text.size() - 1 || value <= 0) {
        throw InvalidArgument("bad duration '" + std::string(text) + "'");
    }
    switch (text.back()) {
    case 's': return std::chrono::seconds{value};
    case 'm': return std::chrono::minutes{value};
    case 'h': return std::chrono::hours{value};
    case 'd': return std::chrono::hours{24 * value};
    default: throw InvalidArgument("bad duration unit in '" + std::string(text) + "'");
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFound("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace amazul
