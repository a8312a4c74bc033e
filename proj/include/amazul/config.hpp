#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amazul/kg.hpp"
#include "amazul/qa.hpp"
#include "amazul/reporter.hpp"

namespace amazul {

/// Runtime settings. Relative paths are resolved against the directory of
/// the file they were read from.
struct Config {
    std::filesystem::path lake = "lake";
    std::filesystem::path nl2sql_dir = "nl2sql";
    std::filesystem::path kg_rules = "kg/rules.txt";
    std::filesystem::path paraphrase_lexicon = "paraphrase/lexicon.tsv";
    std::filesystem::path reporter_lexicon = "reporter/lexicon.txt";
    std::filesystem::path outbox = "outbox.jsonl";
    std::optional<std::filesystem::path> stopwords;  ///< one word per line; none by default
    std::string host = "127.0.0.1";
    std::uint16_t line_port = 7070;
    std::uint16_t http_port = 8080;
    std::vector<std::string> locales{"pt", "en"};
    qa::QaConfig qa;
    kg::KgConfig kg;
    report::ReportConfig reporter;
    std::uint64_t reporter_seed = 0;

    /// Unknown keys are rejected so typos do not pass silently.
    static Config from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
    static Config load(const std::filesystem::path& file);

    /// Analyzer with the configured stopwords, folded like tokens.
    text::Analyzer analyzer() const;

    /// AMAZUL_PORT overrides the line-protocol port, AMAZUL_LAKE the lake path.
    void apply_env();
};

}  // namespace amazul
