#include "fairsynth/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>

#include <json.hpp>

#include "fairsynth/csv.hpp"
#include "fairsynth/error.hpp"

namespace fairsynth {

namespace {

using nlohmann::json;

std::optional<double> parse_number(const std::string& s) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && *begin == ' ') ++begin;
    while (end > begin && *(end - 1) == ' ') --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

BinRule parse_bin(const json& j) {
    BinRule rule;
    rule.label = j.at("label").get<std::string>();
    if (j.contains("upper")) rule.upper = j.at("upper").get<double>();
    if (j.contains("upper_inclusive")) rule.upper_inclusive = j.at("upper_inclusive").get<bool>();
    return rule;
}

}  // namespace

DiscretizationConfig read_discretization_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open discretization config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(path + ": invalid JSON: " + e.what());
    }

    DiscretizationConfig config;
    for (const auto& pt : j.value("pre_transforms", json::array())) {
        PreTransform t;
        t.op = pt.at("op").get<std::string>();
        if (t.op == "filter_values") {
            t.column = pt.at("column").get<std::string>();
            t.keep = pt.at("keep").get<std::vector<std::string>>();
        } else if (t.op == "filter_range") {
            t.column = pt.at("column").get<std::string>();
            t.min = pt.at("min").get<double>();
            t.max = pt.at("max").get<double>();
        } else if (t.op == "sum_columns") {
            t.inputs = pt.at("inputs").get<std::vector<std::string>>();
            t.output = pt.at("output").get<std::string>();
        } else if (t.op == "copy_column") {
            t.column = pt.at("input").get<std::string>();
            t.output = pt.at("output").get<std::string>();
        } else {
            throw usage_error(path + ": unknown pre_transform op '" + t.op + "'");
        }
        config.pre_transforms.push_back(std::move(t));
    }

    for (const auto& col : j.at("columns")) {
        ColumnRule rule;
        rule.source = col.at("source").get<std::string>();
        rule.name = col.value("name", rule.source);
        int kinds = 0;
        if (col.value("passthrough", false)) {
            rule.passthrough = true;
            ++kinds;
        }
        if (col.contains("bins")) {
            for (const auto& b : col.at("bins")) rule.bins.push_back(parse_bin(b));
            ++kinds;
        }
        if (col.contains("merge")) {
            MergeRule merge;
            for (const auto& [k, v] : col.at("merge").at("map").items())
                merge.map[k] = v.get<std::string>();
            if (col.at("merge").contains("default"))
                merge.fallback = col.at("merge").at("default").get<std::string>();
            rule.merge = std::move(merge);
            ++kinds;
        }
        if (kinds != 1)
            throw usage_error(path + ": column '" + rule.source +
                              "' must declare exactly one of passthrough/bins/merge");
        if (!rule.bins.empty()) {
            if (rule.bins.back().upper)
                throw usage_error(path + ": last bin of '" + rule.source +
                                  "' must be the catch-all (no upper)");
            double prev = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i + 1 < rule.bins.size(); ++i) {
                if (!rule.bins[i].upper)
                    throw usage_error(path + ": non-final bin of '" + rule.source +
                                      "' missing upper bound");
                if (*rule.bins[i].upper <= prev)
                    throw usage_error(path + ": bin thresholds of '" + rule.source +
                                      "' must be strictly increasing");
                prev = *rule.bins[i].upper;
            }
        }
        config.columns.push_back(std::move(rule));
    }

    if (j.contains("label")) config.label = j.at("label").get<std::string>();
    if (j.contains("protected"))
        config.protected_attrs = j.at("protected").get<std::vector<std::string>>();
    if (j.contains("null_tokens"))
        config.null_tokens = j.at("null_tokens").get<std::vector<std::string>>();
    return config;
}

namespace {

struct WorkingData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw usage_error("column '" + name + "' not found in CSV");
        return static_cast<std::size_t>(it - header.begin());
    }
};

void apply_pre_transform(WorkingData& data, const PreTransform& t) {
    if (t.op == "filter_values") {
        const std::size_t c = data.col(t.column);
        const std::set<std::string> keep(t.keep.begin(), t.keep.end());
        std::erase_if(data.rows,
                      [&](const std::vector<std::string>& row) { return !keep.count(row[c]); });
    } else if (t.op == "filter_range") {
        const std::size_t c = data.col(t.column);
        std::erase_if(data.rows, [&](const std::vector<std::string>& row) {
            const auto v = parse_number(row[c]);
            return !v || *v < t.min || *v > t.max;
        });
    } else if (t.op == "sum_columns") {
        std::vector<std::size_t> cols;
        for (const auto& name : t.inputs) cols.push_back(data.col(name));
        data.header.push_back(t.output);
        for (auto& row : data.rows) {
            double sum = 0.0;
            for (auto c : cols) {
                const auto v = parse_number(row[c]);
                if (!v) throw usage_error("sum_columns: non-numeric cell in '" + t.output + "'");
                sum += *v;
            }
            // integer-valued sums print without decimals
            if (sum == static_cast<double>(static_cast<long long>(sum)))
                row.push_back(std::to_string(static_cast<long long>(sum)));
            else
                row.push_back(std::to_string(sum));
        }
    } else if (t.op == "copy_column") {
        const std::size_t c = data.col(t.column);
        data.header.push_back(t.output);
        for (auto& row : data.rows) row.push_back(row[c]);
    }
}

std::string apply_bins(const ColumnRule& rule, const std::string& raw) {
    const auto v = parse_number(raw);
    if (!v)
        throw usage_error("column '" + rule.source + "': cannot bin non-numeric value '" + raw +
                          "'");
    for (const auto& bin : rule.bins) {
        if (!bin.upper) return bin.label;
        if (bin.upper_inclusive ? (*v <= *bin.upper) : (*v < *bin.upper)) return bin.label;
    }
    return rule.bins.back().label;  // unreachable: last bin is catch-all
}

std::string apply_merge(const ColumnRule& rule, const std::string& raw) {
    auto it = rule.merge->map.find(raw);
    if (it != rule.merge->map.end()) return it->second;
    if (rule.merge->fallback) return *rule.merge->fallback;
    throw usage_error("column '" + rule.source + "': value '" + raw +
                      "' has no merge rule and no catch-all");
}

}  // namespace

std::pair<SchemaPtr, DataTable> load_csv(const std::string& path,
                                         const DiscretizationConfig& config) {
    const CsvData csv = read_csv(path);

    WorkingData data{csv.header, csv.rows};
    for (const auto& t : config.pre_transforms) apply_pre_transform(data, t);

    const std::set<std::string> null_tokens(config.null_tokens.begin(), config.null_tokens.end());
    std::vector<std::size_t> source_cols;
    for (const auto& rule : config.columns) source_cols.push_back(data.col(rule.source));

    // Transform retained cells to category labels; drop rows with nulls.
    const std::size_t n_cols = config.columns.size();
    std::vector<std::vector<std::string>> labeled;
    labeled.reserve(data.rows.size());
    std::size_t dropped = 0;
    for (const auto& raw_row : data.rows) {
        bool has_null = false;
        for (auto c : source_cols) {
            std::string cell = raw_row[c];
            // trim surrounding spaces (UCI files pad after commas)
            const auto b = cell.find_first_not_of(' ');
            const auto e = cell.find_last_not_of(' ');
            cell = (b == std::string::npos) ? "" : cell.substr(b, e - b + 1);
            if (null_tokens.count(cell)) {
                has_null = true;
                break;
            }
        }
        if (has_null) {
            ++dropped;
            continue;
        }
        std::vector<std::string> out(n_cols);
        for (std::size_t i = 0; i < n_cols; ++i) {
            const auto& rule = config.columns[i];
            std::string cell = raw_row[source_cols[i]];
            const auto b = cell.find_first_not_of(' ');
            const auto e = cell.find_last_not_of(' ');
            cell = (b == std::string::npos) ? "" : cell.substr(b, e - b + 1);
            if (rule.passthrough)
                out[i] = cell;
            else if (!rule.bins.empty())
                out[i] = apply_bins(rule, cell);
            else
                out[i] = apply_merge(rule, cell);
        }
        labeled.push_back(std::move(out));
    }

    // Category sets: declared labels plus observed values, sorted.
    std::vector<Attribute> attrs(n_cols);
    for (std::size_t i = 0; i < n_cols; ++i) {
        const auto& rule = config.columns[i];
        std::set<std::string> cats;
        if (!rule.bins.empty())
            for (const auto& b : rule.bins) cats.insert(b.label);
        if (rule.merge) {
            for (const auto& [_, v] : rule.merge->map) cats.insert(v);
            if (rule.merge->fallback) cats.insert(*rule.merge->fallback);
        }
        for (const auto& row : labeled) cats.insert(row[i]);
        attrs[i].name = rule.name;
        attrs[i].categories.assign(cats.begin(), cats.end());
        attrs[i].is_protected = std::find(config.protected_attrs.begin(),
                                          config.protected_attrs.end(),
                                          rule.name) != config.protected_attrs.end();
    }

    auto schema = std::make_shared<const Schema>(std::move(attrs), config.label);
    std::vector<std::uint32_t> ids(n_cols);
    for (std::size_t i = 0; i < n_cols; ++i) ids[i] = static_cast<std::uint32_t>(i);

    DataTable table(schema, ids);
    table.reserve_rows(labeled.size());
    std::vector<std::uint16_t> row(n_cols);
    for (const auto& cells : labeled) {
        for (std::size_t i = 0; i < n_cols; ++i)
            row[i] = static_cast<std::uint16_t>(schema->category_index(i, cells[i]));
        table.append_row(row);
    }

    std::cerr << "loaded " << path << ": " << table.n_rows() << " rows, " << n_cols
              << " attributes (" << dropped << " rows dropped for nulls)\n";
    return {schema, std::move(table)};
}

}  // namespace fairsynth
