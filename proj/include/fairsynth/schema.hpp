#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fairsynth {

struct Attribute {
    std::string name;
    std::vector<std::string> categories;  // ordered; index = category id
    bool is_protected = false;
};

/// The coordinate system shared by every table and model: an ordered list of
/// categorical attributes. Immutable after construction.
class Schema {
public:
    Schema(std::vector<Attribute> attributes, std::optional<std::string> label_attribute);

    std::size_t size() const { return attributes_.size(); }
    const Attribute& attribute(std::size_t i) const { return attributes_[i]; }
    const std::vector<Attribute>& attributes() const { return attributes_; }
    std::size_t cardinality(std::size_t i) const { return attributes_[i].categories.size(); }

    bool has_attribute(const std::string& name) const;
    std::size_t index_of(const std::string& name) const;  // throws on unknown name
    std::size_t category_index(std::size_t attr, const std::string& label) const;

    const std::optional<std::string>& label_attribute() const { return label_; }
    std::vector<std::string> protected_attributes() const;

    bool operator==(const Schema& other) const;

private:
    std::vector<Attribute> attributes_;
    std::optional<std::string> label_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

/// Rows of category indices over a declared subset of schema attributes.
/// attr_ids() gives the schema position of each column.
class DataTable {
public:
    DataTable(SchemaPtr schema, std::vector<std::uint32_t> attr_ids);

    const SchemaPtr& schema() const { return schema_; }
    const std::vector<std::uint32_t>& attr_ids() const { return attr_ids_; }
    std::size_t width() const { return attr_ids_.size(); }
    std::size_t n_rows() const { return width() == 0 ? 0 : cells_.size() / width(); }

    std::uint16_t at(std::size_t row, std::size_t col) const { return cells_[row * width() + col]; }
    std::span<const std::uint16_t> row(std::size_t r) const {
        return {cells_.data() + r * width(), width()};
    }

    void reserve_rows(std::size_t n) { cells_.reserve(n * width()); }
    void append_row(std::span<const std::uint16_t> values);

    // Column position of a schema attribute within this table; throws if absent.
    std::size_t column_of(const std::string& attr_name) const;
    bool has_column(const std::string& attr_name) const;

    // Extract one column as a vector of category indices.
    std::vector<std::uint16_t> column(const std::string& attr_name) const;

    DataTable select_rows(std::span<const std::uint32_t> row_indices) const;

    bool operator==(const DataTable& other) const;

private:
    SchemaPtr schema_;
    std::vector<std::uint32_t> attr_ids_;
    std::vector<std::uint16_t> cells_;
};

// Canonical dump format: CSV, header = attribute names, cells = category labels.
void write_canonical_csv(const DataTable& table, const std::string& path);
DataTable read_canonical_csv(const std::string& path, SchemaPtr schema);

// Schema JSON round-trip lives in serialize.cpp; declared here for the CLI.
void write_schema_json(const Schema& schema, const std::string& path);
SchemaPtr read_schema_json(const std::string& path);

}  // namespace fairsynth
