#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairsynth/schema.hpp"

namespace fairsynth {

/// One ordered bin: value goes to the first bin whose upper bound admits it;
/// the final bin must leave `upper` unset (catch-all).
struct BinRule {
    std::string label;
    std::optional<double> upper;
    bool upper_inclusive = false;
};

/// Value relabeling; unmapped values fall to `fallback` when present,
/// otherwise they are an error.
struct MergeRule {
    std::map<std::string, std::string> map;
    std::optional<std::string> fallback;
};

struct ColumnRule {
    std::string source;  // raw CSV column (or a pre-transform output)
    std::string name;    // schema attribute name
    // exactly one of: passthrough / bins / merge
    bool passthrough = false;
    std::vector<BinRule> bins;
    std::optional<MergeRule> merge;
};

/// Row filters and derived columns applied before column rules.
/// ops: filter_values, filter_range, sum_columns, copy_column.
struct PreTransform {
    std::string op;
    std::string column;               // filter_*, copy_column input
    std::vector<std::string> keep;    // filter_values
    double min = 0.0, max = 0.0;      // filter_range (inclusive)
    std::vector<std::string> inputs;  // sum_columns
    std::string output;               // sum_columns, copy_column
};

struct DiscretizationConfig {
    std::vector<PreTransform> pre_transforms;
    std::vector<ColumnRule> columns;  // declaration order = schema attribute order
    std::optional<std::string> label;
    std::vector<std::string> protected_attrs;
    std::vector<std::string> null_tokens = {"", "?"};
};

DiscretizationConfig read_discretization_config(const std::string& path);

/// Ingest a raw CSV under a discretization config. Category sets come from the
/// config where declared (bin labels, merge targets) plus observed values for
/// passthrough columns, all sorted lexicographically. Rows with a null token
/// in any retained column are dropped.
std::pair<SchemaPtr, DataTable> load_csv(const std::string& path,
                                         const DiscretizationConfig& config);

}  // namespace fairsynth
