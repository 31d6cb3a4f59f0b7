#include "fairsynth/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "fairsynth/error.hpp"
#include "fairsynth/rng.hpp"

namespace fairsynth {

void SeparationSpec::validate(const Schema& schema) const {
    const std::set<std::string> internal(internal_attrs.begin(), internal_attrs.end());
    const std::set<std::string> external(external_attrs.begin(), external_attrs.end());
    const std::set<std::string> overlap(overlap_attrs.begin(), overlap_attrs.end());

    if (overlap.empty()) throw usage_error("separation: overlap must be non-empty");
    for (const auto& name : internal)
        if (!schema.has_attribute(name))
            throw usage_error("separation: unknown internal attribute '" + name + "'");
    for (const auto& name : external)
        if (!schema.has_attribute(name))
            throw usage_error("separation: unknown external attribute '" + name + "'");

    std::set<std::string> expected_overlap;
    std::set_intersection(internal.begin(), internal.end(), external.begin(), external.end(),
                          std::inserter(expected_overlap, expected_overlap.begin()));
    if (expected_overlap != overlap)
        throw usage_error("separation: overlap must equal internal ∩ external");

    std::set<std::string> unioned;
    std::set_union(internal.begin(), internal.end(), external.begin(), external.end(),
                   std::inserter(unioned, unioned.begin()));
    if (unioned.size() != schema.size())
        throw usage_error("separation: internal ∪ external must cover the full schema");

    if (schema.label_attribute() && !internal.count(*schema.label_attribute()))
        throw usage_error("separation: label attribute must be internal");
    for (const auto& name : schema.protected_attributes())
        if (!external.count(name) || internal.count(name))
            throw usage_error("separation: protected attribute '" + name +
                              "' must be external-only");
}

SeparationSpec read_separation_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open separation spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path + ": invalid JSON: " + e.what());
    }
    SeparationSpec spec;
    spec.internal_attrs = j.at("internal").get<std::vector<std::string>>();
    spec.external_attrs = j.at("external").get<std::vector<std::string>>();
    spec.overlap_attrs = j.at("overlap").get<std::vector<std::string>>();
    return spec;
}

std::pair<DataTable, DataTable> holdout_split(const DataTable& table, double test_fraction,
                                              std::uint64_t seed) {
    if (table.n_rows() == 0) throw usage_error("holdout_split: empty table");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw usage_error("holdout_split: test_fraction must be in (0, 1)");

    const std::size_t n = table.n_rows();
    const std::size_t n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    const std::span<const std::uint32_t> train_idx(order.data(), n - n_test);
    const std::span<const std::uint32_t> test_idx(order.data() + (n - n_test), n_test);
    auto result = std::make_pair(table.select_rows(train_idx), table.select_rows(test_idx));
    std::cerr << "holdout_split: " << result.first.n_rows() << " train / "
              << result.second.n_rows() << " test rows\n";
    return result;
}

namespace {

DataTable project(const DataTable& table, const std::vector<std::string>& attrs) {
    const auto& schema = *table.schema();
    // keep schema order regardless of the spec's listing order
    std::vector<std::uint32_t> ids;
    for (const auto& name : attrs) ids.push_back(static_cast<std::uint32_t>(schema.index_of(name)));
    std::sort(ids.begin(), ids.end());

    std::vector<std::size_t> cols;
    for (auto id : ids) cols.push_back(table.column_of(schema.attribute(id).name));

    DataTable out(table.schema(), ids);
    out.reserve_rows(table.n_rows());
    std::vector<std::uint16_t> row(ids.size());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) row[c] = table.at(r, cols[c]);
        out.append_row(row);
    }
    return out;
}

}  // namespace

std::pair<DataTable, DataTable> separate_columns(const DataTable& table,
                                                 const SeparationSpec& spec) {
    spec.validate(*table.schema());
    return {project(table, spec.internal_attrs), project(table, spec.external_attrs)};
}

}  // namespace fairsynth
