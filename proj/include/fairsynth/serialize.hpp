#pragma once

#include <string>

#include <json.hpp>

#include "fairsynth/em.hpp"
#include "fairsynth/joint_model.hpp"
#include "fairsynth/metrics.hpp"
#include "fairsynth/schema.hpp"
#include "fairsynth/tree.hpp"

namespace fairsynth {

// ordered_json keeps key order stable so report bytes are reproducible
using Json = nlohmann::ordered_json;

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

Json schema_to_json(const Schema& schema);
SchemaPtr schema_from_json(const Json& j);

/// Self-describing model document; `meta` (seed, EM trace, ...) is carried
/// verbatim under "meta". Float64 values round-trip exactly.
Json model_to_json(const JointModel& model, const Json& meta = Json::object());
JointModel model_from_json(const Json& j);

Json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const Json& j);
Json forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const Json& j);

Json em_trace_to_json(const EmTrace& trace);

Json fidelity_to_json(const FidelityReport& report);
Json fairness_to_json(const FairnessReport& report);

}  // namespace fairsynth
