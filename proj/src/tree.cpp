#include "fairsynth/tree.hpp"

#include <algorithm>
#include <cmath>

#include "fairsynth/error.hpp"
#include "fairsynth/parallel.hpp"
#include "fairsynth/rng.hpp"

namespace fairsynth {

DecisionTree::DecisionTree(std::vector<std::string> feature_attrs, std::string label_attr,
                           std::vector<Node> nodes)
    : feature_attrs_(std::move(feature_attrs)),
      label_attr_(std::move(label_attr)),
      nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw usage_error("DecisionTree: empty node list");
}

std::vector<std::uint8_t> DecisionTree::predict(const DataTable& table) const {
    std::vector<std::size_t> cols;
    for (const auto& name : feature_attrs_) cols.push_back(table.column_of(name));

    std::vector<std::uint8_t> out(table.n_rows());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::size_t node = 0;
        while (nodes_[node].feature >= 0) {
            const auto& n = nodes_[node];
            const std::uint16_t v = table.at(r, cols[static_cast<std::size_t>(n.feature)]);
            node = static_cast<std::size_t>(v == n.category ? n.left : n.right);
        }
        out[r] = static_cast<std::uint8_t>(nodes_[node].label);
    }
    return out;
}

std::size_t DecisionTree::depth() const {
    // iterative DFS over the explicit child links
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
        auto [node, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (nodes_[node].feature >= 0) {
            stack.push_back({static_cast<std::size_t>(nodes_[node].left), d + 1});
            stack.push_back({static_cast<std::size_t>(nodes_[node].right), d + 1});
        }
    }
    return best;
}

namespace {

struct TrainContext {
    const DataTable* table;
    std::vector<std::size_t> feature_cols;   // table columns of features
    std::vector<std::size_t> feature_cards;  // cardinalities
    std::size_t label_col;
    TreeConfig config;
    FeatureSubset subset_mode = FeatureSubset::All;
    std::size_t subset_size = 0;
    Rng* rng = nullptr;  // only consulted when subset_mode == Sqrt
    std::vector<DecisionTree::Node> nodes;
};

double gini(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    const double p0 = n0 / n, p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

std::int32_t make_leaf(TrainContext& ctx, const std::vector<std::uint32_t>& rows) {
    std::array<std::uint32_t, 2> counts{0, 0};
    for (auto r : rows) counts[ctx.table->at(r, ctx.label_col)]++;
    DecisionTree::Node node;
    node.counts = counts;
    node.label = counts[1] > counts[0] ? 1 : 0;  // tie -> label 0
    ctx.nodes.push_back(node);
    return static_cast<std::int32_t>(ctx.nodes.size() - 1);
}

std::int32_t grow(TrainContext& ctx, const std::vector<std::uint32_t>& rows, std::size_t depth) {
    std::array<double, 2> totals{0.0, 0.0};
    for (auto r : rows) totals[ctx.table->at(r, ctx.label_col)] += 1.0;
    const double node_gini = gini(totals[0], totals[1]);

    if (depth >= ctx.config.max_depth || node_gini == 0.0 ||
        rows.size() < 2 * ctx.config.min_samples_leaf)
        return make_leaf(ctx, rows);

    // candidate features for this node
    std::vector<std::size_t> candidates(ctx.feature_cols.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    if (ctx.subset_mode == FeatureSubset::Sqrt && ctx.subset_size < candidates.size()) {
        // sample without replacement, then restore feature order
        for (std::size_t i = 0; i < ctx.subset_size; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(
                                          ctx.rng->uniform_int(candidates.size() - i));
            std::swap(candidates[i], candidates[j]);
        }
        candidates.resize(ctx.subset_size);
        std::sort(candidates.begin(), candidates.end());
    }

    // per-feature, per-category label counts
    double best_gain = 0.0;
    std::size_t best_feature = 0;
    std::uint16_t best_category = 0;
    const double n = static_cast<double>(rows.size());

    for (auto f : candidates) {
        const std::size_t card = ctx.feature_cards[f];
        std::vector<std::array<double, 2>> counts(card, {0.0, 0.0});
        for (auto r : rows)
            counts[ctx.table->at(r, ctx.feature_cols[f])][ctx.table->at(r, ctx.label_col)] += 1.0;

        for (std::size_t c = 0; c < card; ++c) {
            const double left0 = counts[c][0], left1 = counts[c][1];
            const double n_left = left0 + left1;
            const double n_right = n - n_left;
            if (n_left < ctx.config.min_samples_leaf || n_right < ctx.config.min_samples_leaf)
                continue;
            const double right0 = totals[0] - left0, right1 = totals[1] - left1;
            const double gain = node_gini - (n_left / n) * gini(left0, left1) -
                                (n_right / n) * gini(right0, right1);
            if (gain > best_gain + 1e-12) {
                best_gain = gain;
                best_feature = f;
                best_category = static_cast<std::uint16_t>(c);
            }
        }
    }

    if (best_gain <= 0.0) return make_leaf(ctx, rows);

    std::vector<std::uint32_t> left_rows, right_rows;
    for (auto r : rows) {
        if (ctx.table->at(r, ctx.feature_cols[best_feature]) == best_category)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }

    const std::int32_t self = static_cast<std::int32_t>(ctx.nodes.size());
    ctx.nodes.emplace_back();
    ctx.nodes[self].feature = static_cast<std::int32_t>(best_feature);
    ctx.nodes[self].category = best_category;
    const std::int32_t left = grow(ctx, left_rows, depth + 1);
    const std::int32_t right = grow(ctx, right_rows, depth + 1);
    ctx.nodes[self].left = left;
    ctx.nodes[self].right = right;
    return self;
}

DecisionTree train_tree_impl(const DataTable& train, const std::vector<std::string>& features,
                             const std::string& label, const TreeConfig& config,
                             FeatureSubset subset_mode, Rng* rng,
                             const std::vector<std::uint32_t>& rows) {
    const auto& schema = *train.schema();
    if (schema.cardinality(schema.index_of(label)) != 2)
        throw usage_error("train_tree: label '" + label + "' must be binary");
    for (const auto& f : features)
        if (f == label) throw usage_error("train_tree: label cannot be a feature");
    if (features.empty()) throw usage_error("train_tree: no features");
    if (rows.empty()) throw usage_error("train_tree: empty training data");

    TrainContext ctx;
    ctx.table = &train;
    ctx.label_col = train.column_of(label);
    for (const auto& f : features) {
        ctx.feature_cols.push_back(train.column_of(f));
        ctx.feature_cards.push_back(schema.cardinality(schema.index_of(f)));
    }
    ctx.config = config;
    ctx.subset_mode = subset_mode;
    ctx.subset_size = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(features.size()))));
    ctx.rng = rng;

    grow(ctx, rows, 0);
    return DecisionTree(features, label, std::move(ctx.nodes));
}

}  // namespace

DecisionTree train_tree(const DataTable& train, const std::vector<std::string>& features,
                        const std::string& label, const TreeConfig& config) {
    std::vector<std::uint32_t> rows(train.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    return train_tree_impl(train, features, label, config, FeatureSubset::All, nullptr, rows);
}

RandomForest::RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {
    if (trees_.empty()) throw usage_error("RandomForest: needs at least one tree");
}

std::vector<std::uint8_t> RandomForest::predict(const DataTable& table) const {
    std::vector<std::uint32_t> votes(table.n_rows(), 0);
    for (const auto& tree : trees_) {
        const auto pred = tree.predict(table);
        for (std::size_t r = 0; r < pred.size(); ++r) votes[r] += pred[r];
    }
    std::vector<std::uint8_t> out(table.n_rows());
    for (std::size_t r = 0; r < out.size(); ++r)
        out[r] = votes[r] * 2 > trees_.size() ? 1 : 0;  // tie -> 0
    return out;
}

RandomForest train_forest(const DataTable& train, const std::vector<std::string>& features,
                          const std::string& label, const ForestConfig& config) {
    if (config.n_trees < 1) throw usage_error("train_forest: n_trees must be >= 1");

    std::vector<DecisionTree> trees(config.n_trees);
    parallel_for(config.n_trees, [&](std::size_t t) {
        Rng rng(derive_seed(config.seed, "forest_tree", t));
        std::vector<std::uint32_t> rows(train.n_rows());
        if (config.bootstrap) {
            for (auto& r : rows)
                r = static_cast<std::uint32_t>(rng.uniform_int(train.n_rows()));
        } else {
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
        }
        trees[t] = train_tree_impl(train, features, label, config.tree, config.feature_subset,
                                   &rng, rows);
    });
    return RandomForest(std::move(trees));
}

}  // namespace fairsynth
