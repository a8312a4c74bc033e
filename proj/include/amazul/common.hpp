#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace amazul {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotFound : public Error {
  public:
    using Error::Error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Malformed input line; `line()` is 1-based.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), m_line(line)
    {}
    std::size_t line() const noexcept { return m_line; }

  private:
    std::size_t m_line;
};

/// Record does not match its declared schema; `field()` names the offending field.
class SchemaError : public Error {
  public:
    SchemaError(std::string field, const std::string& what)
        : Error(what), m_field(std::move(field))
    {}
    const std::string& field() const noexcept { return m_field; }

  private:
    std::string m_field;
};

enum class Language { pt, en };

std::string_view to_string(Language lang);
Language parse_language(std::string_view tag);
bool is_supported_language(std::string_view tag);

using Timestamp = std::chrono::sys_seconds;

/// Accepts `YYYY-MM-DDTHH:MM:SSZ` (the `Z` and seconds are optional, a space
/// may replace `T`). Always UTC.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Parses durations such as `90s`, `15m`, `24h`, `2d`.
std::chrono::seconds parse_duration(std::string_view text);

std::string read_file(const std::string& path);

}  // namespace amazul
