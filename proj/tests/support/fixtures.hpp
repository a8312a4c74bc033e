#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amazul/datalake.hpp"

namespace amazul::testing {

inline std::string fixture_path(const std::string& name)
{
    return std::string(AMAZUL_FIXTURE_DIR) + "/" + name;
}

inline std::string data_path(const std::string& name)
{
    return std::string(AMAZUL_DATA_DIR) + "/" + name;
}

inline std::vector<nlohmann::json> read_jsonl(const std::string& path)
{
    std::ifstream in(path);
    std::vector<nlohmann::json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(nlohmann::json::parse(line));
        }
    }
    return out;
}

inline std::vector<lake::Document> read_documents(const std::string& path)
{
    std::vector<lake::Document> docs;
    for (const auto& j : read_jsonl(path)) {
        docs.push_back(lake::document_from_json(j));
    }
    return docs;
}

inline std::vector<std::pair<std::string, std::string>> id_body_pairs(const std::vector<lake::Document>& docs)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& d : docs) {
        out.emplace_back(d.id, d.body);
    }
    return out;
}

}  // namespace amazul::testing
