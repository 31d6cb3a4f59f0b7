#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairsynth/schema.hpp"

namespace fairsynth::test {

// Schema with attributes named as given and categories "c0","c1",... unless
// category labels are passed explicitly.
inline SchemaPtr toy_schema(const std::vector<std::pair<std::string, int>>& attrs,
                            std::optional<std::string> label = std::nullopt) {
    std::vector<Attribute> list;
    for (const auto& [name, card] : attrs) {
        Attribute a;
        a.name = name;
        for (int c = 0; c < card; ++c) a.categories.push_back("c" + std::to_string(c));
        list.push_back(std::move(a));
    }
    return std::make_shared<const Schema>(std::move(list), std::move(label));
}

inline DataTable make_table(SchemaPtr schema, const std::vector<std::string>& attr_names,
                            const std::vector<std::vector<int>>& rows) {
    std::vector<std::uint32_t> ids;
    for (const auto& name : attr_names)
        ids.push_back(static_cast<std::uint32_t>(schema->index_of(name)));
    DataTable table(schema, ids);
    std::vector<std::uint16_t> row(ids.size());
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) row[c] = static_cast<std::uint16_t>(r[c]);
        table.append_row(row);
    }
    return table;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("fairsynth_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace fairsynth::test
