#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairsynth/schema.hpp"

namespace fairsynth {

struct TreeConfig {
    std::size_t max_depth = 12;
    std::size_t min_samples_leaf = 5;
};

/// CART over category indices, binary label. Internal nodes split one
/// category against the rest; leaves carry class counts.
class DecisionTree {
public:
    struct Node {
        std::int32_t feature = -1;   // index into feature_attrs; -1 for leaf
        std::uint16_t category = 0;  // row[feature] == category goes left
        std::int32_t left = -1, right = -1;
        std::int16_t label = 0;                   // leaf prediction
        std::array<std::uint32_t, 2> counts{0, 0};  // leaf class counts
    };

    DecisionTree() = default;
    DecisionTree(std::vector<std::string> feature_attrs, std::string label_attr,
                 std::vector<Node> nodes);

    const std::vector<std::string>& feature_attrs() const { return feature_attrs_; }
    const std::string& label_attr() const { return label_attr_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    std::vector<std::uint8_t> predict(const DataTable& table) const;
    std::size_t depth() const;

private:
    std::vector<std::string> feature_attrs_;
    std::string label_attr_;
    std::vector<Node> nodes_;  // nodes_[0] is the root
};

enum class FeatureSubset { All, Sqrt };

struct ForestConfig {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    FeatureSubset feature_subset = FeatureSubset::Sqrt;
    TreeConfig tree;
    std::uint64_t seed = 0;
};

class RandomForest {
public:
    RandomForest() = default;
    explicit RandomForest(std::vector<DecisionTree> trees);

    const std::vector<DecisionTree>& trees() const { return trees_; }

    /// Majority vote; ties resolve to label index 0.
    std::vector<std::uint8_t> predict(const DataTable& table) const;

private:
    std::vector<DecisionTree> trees_;
};

/// Greedy Gini splits; the label must be binary and features must not
/// include it. Single-class data yields a depth-0 stump.
DecisionTree train_tree(const DataTable& train, const std::vector<std::string>& features,
                        const std::string& label, const TreeConfig& config = {});

/// Bagged trees with per-node feature subsampling (⌈√d⌉ under Sqrt).
/// Per-tree seeds derive from config.seed, so results do not depend on
/// thread scheduling.
RandomForest train_forest(const DataTable& train, const std::vector<std::string>& features,
                          const std::string& label, const ForestConfig& config = {});

}  // namespace fairsynth
