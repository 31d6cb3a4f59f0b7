#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairsynth/schema.hpp"

namespace fairsynth {

/// Column separation into overlapping "internal" and "external" datasets.
/// internal ∪ external = schema, internal ∩ external = overlap (non-empty),
/// label in internal, every protected attribute external-only.
struct SeparationSpec {
    std::vector<std::string> internal_attrs;
    std::vector<std::string> external_attrs;
    std::vector<std::string> overlap_attrs;

    void validate(const Schema& schema) const;
};

SeparationSpec read_separation_spec(const std::string& path);

/// Seeded uniform shuffle, then split. Test gets round(test_fraction * N)
/// rows; both outputs keep the shuffled order.
std::pair<DataTable, DataTable> holdout_split(const DataTable& table, double test_fraction,
                                              std::uint64_t seed);

std::pair<DataTable, DataTable> separate_columns(const DataTable& table,
                                                 const SeparationSpec& spec);

}  // namespace fairsynth
