#include "fairsynth/schema.hpp"

#include <algorithm>
#include <unordered_set>

#include "fairsynth/csv.hpp"
#include "fairsynth/error.hpp"

namespace fairsynth {

Schema::Schema(std::vector<Attribute> attributes, std::optional<std::string> label_attribute)
    : attributes_(std::move(attributes)), label_(std::move(label_attribute)) {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        const auto& attr = attributes_[i];
        if (attr.categories.empty())
            throw usage_error("attribute '" + attr.name + "' has no categories");
        std::unordered_set<std::string> seen;
        for (const auto& c : attr.categories)
            if (!seen.insert(c).second)
                throw usage_error("attribute '" + attr.name + "' has duplicate category '" + c + "'");
        if (!by_name_.emplace(attr.name, i).second)
            throw usage_error("duplicate attribute name '" + attr.name + "'");
    }
    if (label_) {
        auto it = by_name_.find(*label_);
        if (it == by_name_.end())
            throw usage_error("label attribute '" + *label_ + "' not in schema");
        if (attributes_[it->second].categories.size() != 2)
            throw usage_error("label attribute '" + *label_ + "' must have exactly 2 categories");
    }
}

bool Schema::has_attribute(const std::string& name) const { return by_name_.count(name) > 0; }

std::size_t Schema::index_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw usage_error("unknown attribute '" + name + "'");
    return it->second;
}

std::size_t Schema::category_index(std::size_t attr, const std::string& label) const {
    const auto& cats = attributes_[attr].categories;
    auto it = std::find(cats.begin(), cats.end(), label);
    if (it == cats.end())
        throw usage_error("unknown category '" + label + "' for attribute '" +
                          attributes_[attr].name + "'");
    return static_cast<std::size_t>(it - cats.begin());
}

std::vector<std::string> Schema::protected_attributes() const {
    std::vector<std::string> out;
    for (const auto& a : attributes_)
        if (a.is_protected) out.push_back(a.name);
    return out;
}

bool Schema::operator==(const Schema& other) const {
    if (label_ != other.label_ || attributes_.size() != other.attributes_.size()) return false;
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        const auto& a = attributes_[i];
        const auto& b = other.attributes_[i];
        if (a.name != b.name || a.categories != b.categories || a.is_protected != b.is_protected)
            return false;
    }
    return true;
}

DataTable::DataTable(SchemaPtr schema, std::vector<std::uint32_t> attr_ids)
    : schema_(std::move(schema)), attr_ids_(std::move(attr_ids)) {
    if (!schema_) throw usage_error("DataTable requires a schema");
    std::unordered_set<std::uint32_t> seen;
    for (auto id : attr_ids_) {
        if (id >= schema_->size()) throw usage_error("attribute id out of range");
        if (!seen.insert(id).second) throw usage_error("duplicate attribute id in DataTable");
    }
}

void DataTable::append_row(std::span<const std::uint16_t> values) {
    if (values.size() != width()) throw usage_error("row width mismatch");
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (values[c] >= schema_->cardinality(attr_ids_[c]))
            throw usage_error("category index out of range for attribute '" +
                              schema_->attribute(attr_ids_[c]).name + "'");
    }
    cells_.insert(cells_.end(), values.begin(), values.end());
}

std::size_t DataTable::column_of(const std::string& attr_name) const {
    const std::uint32_t id = static_cast<std::uint32_t>(schema_->index_of(attr_name));
    for (std::size_t c = 0; c < attr_ids_.size(); ++c)
        if (attr_ids_[c] == id) return c;
    throw usage_error("attribute '" + attr_name + "' not present in this table");
}

bool DataTable::has_column(const std::string& attr_name) const {
    if (!schema_->has_attribute(attr_name)) return false;
    const std::uint32_t id = static_cast<std::uint32_t>(schema_->index_of(attr_name));
    return std::find(attr_ids_.begin(), attr_ids_.end(), id) != attr_ids_.end();
}

std::vector<std::uint16_t> DataTable::column(const std::string& attr_name) const {
    const std::size_t c = column_of(attr_name);
    std::vector<std::uint16_t> out(n_rows());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
    return out;
}

DataTable DataTable::select_rows(std::span<const std::uint32_t> row_indices) const {
    DataTable out(schema_, attr_ids_);
    out.reserve_rows(row_indices.size());
    for (auto r : row_indices) out.append_row(row(r));
    return out;
}

bool DataTable::operator==(const DataTable& other) const {
    return *schema_ == *other.schema_ && attr_ids_ == other.attr_ids_ && cells_ == other.cells_;
}

void write_canonical_csv(const DataTable& table, const std::string& path) {
    CsvData data;
    const auto& schema = *table.schema();
    for (auto id : table.attr_ids()) data.header.push_back(schema.attribute(id).name);
    data.rows.reserve(table.n_rows());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::vector<std::string> row(table.width());
        for (std::size_t c = 0; c < table.width(); ++c)
            row[c] = schema.attribute(table.attr_ids()[c]).categories[table.at(r, c)];
        data.rows.push_back(std::move(row));
    }
    write_csv(path, data);
}

DataTable read_canonical_csv(const std::string& path, SchemaPtr schema) {
    const CsvData data = read_csv(path);
    std::vector<std::uint32_t> attr_ids;
    for (const auto& name : data.header)
        attr_ids.push_back(static_cast<std::uint32_t>(schema->index_of(name)));

    DataTable table(schema, attr_ids);
    table.reserve_rows(data.rows.size());
    std::vector<std::uint16_t> row(attr_ids.size());
    for (const auto& raw : data.rows) {
        for (std::size_t c = 0; c < attr_ids.size(); ++c)
            row[c] = static_cast<std::uint16_t>(schema->category_index(attr_ids[c], raw[c]));
        table.append_row(row);
    }
    return table;
}

}  // namespace fairsynth
