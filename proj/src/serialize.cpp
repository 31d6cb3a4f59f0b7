#include "fairsynth/serialize.hpp"

#include <cmath>
#include <fstream>

#include "fairsynth/error.hpp"

namespace fairsynth {

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open JSON file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path + ": invalid JSON: " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write JSON file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw io_error("error writing JSON file: " + path);
}

Json schema_to_json(const Schema& schema) {
    Json attrs = Json::array();
    for (const auto& a : schema.attributes()) {
        Json attr;
        attr["name"] = a.name;
        attr["categories"] = a.categories;
        if (a.is_protected) attr["protected"] = true;
        attrs.push_back(std::move(attr));
    }
    Json j;
    j["attributes"] = std::move(attrs);
    if (schema.label_attribute()) j["label"] = *schema.label_attribute();
    return j;
}

SchemaPtr schema_from_json(const Json& j) {
    std::vector<Attribute> attrs;
    for (const auto& a : j.at("attributes")) {
        Attribute attr;
        attr.name = a.at("name").get<std::string>();
        attr.categories = a.at("categories").get<std::vector<std::string>>();
        attr.is_protected = a.value("protected", false);
        attrs.push_back(std::move(attr));
    }
    std::optional<std::string> label;
    if (j.contains("label")) label = j.at("label").get<std::string>();
    return std::make_shared<const Schema>(std::move(attrs), std::move(label));
}

void write_schema_json(const Schema& schema, const std::string& path) {
    write_json_file(path, schema_to_json(schema));
}

SchemaPtr read_schema_json(const std::string& path) {
    return schema_from_json(read_json_file(path));
}

namespace {

Json freq_to_json(const FrequencyTable& t) {
    Json j;
    j["attrs"] = t.attr_names();
    j["cells"] = t.cells();
    return j;
}

FrequencyTable freq_from_json(const Json& j, const Schema& schema) {
    const auto names = j.at("attrs").get<std::vector<std::string>>();
    std::vector<std::size_t> cards;
    for (const auto& n : names) cards.push_back(schema.cardinality(schema.index_of(n)));
    return FrequencyTable(names, cards, j.at("cells").get<std::vector<double>>());
}

Json cond_to_json(const ConditionalTable& t) {
    Json j;
    j["given"] = t.given_names();
    j["target"] = t.target_names();
    j["cells"] = t.cells();
    return j;
}

ConditionalTable cond_from_json(const Json& j, const Schema& schema) {
    const auto given = j.at("given").get<std::vector<std::string>>();
    const auto target = j.at("target").get<std::vector<std::string>>();
    std::vector<std::size_t> g_cards, t_cards;
    for (const auto& n : given) g_cards.push_back(schema.cardinality(schema.index_of(n)));
    for (const auto& n : target) t_cards.push_back(schema.cardinality(schema.index_of(n)));
    return ConditionalTable::from_cells(given, g_cards, target, t_cards,
                                        j.at("cells").get<std::vector<double>>());
}

}  // namespace

Json model_to_json(const JointModel& model, const Json& meta) {
    Json j;
    j["format"] = "fairsynth-model";
    j["version"] = 1;
    j["variant"] = variant_name(model.variant());
    j["alpha"] = model.smoothing_alpha();
    j["schema"] = schema_to_json(*model.schema());

    Json payload;
    switch (model.variant()) {
        case ModelVariant::IndepOverlap: {
            const auto& p = model.payload<IndepOverlapPayload>();
            payload["overlap"] = p.overlap_attrs;
            payload["p_overlap"] = freq_to_json(p.p_overlap);
            payload["cond_internal"] = cond_to_json(p.cond_internal);
            payload["cond_external"] = cond_to_json(p.cond_external);
            break;
        }
        case ModelVariant::MarginalPreserve: {
            const auto& m = model.payload<MarginalPreservePayload>();
            payload["preserved"] = m.preserved == Side::Internal ? "internal" : "external";
            payload["overlap"] = m.overlap_attrs;
            payload["preserved_table"] = freq_to_json(m.preserved_table);
            payload["cond_other"] = cond_to_json(m.cond_other);
            break;
        }
        case ModelVariant::LatentNB: {
            const auto& l = model.payload<LatentNbPayload>();
            payload["k"] = l.k;
            payload["pi"] = l.pi;
            payload["cond"] = l.cond;
            break;
        }
        case ModelVariant::Independent: {
            const auto& ind = model.payload<IndependentPayload>();
            Json marginals = Json::array();
            for (const auto& m : ind.marginals) marginals.push_back(freq_to_json(m));
            payload["marginals"] = std::move(marginals);
            break;
        }
    }
    j["payload"] = std::move(payload);
    if (!meta.empty()) j["meta"] = meta;
    return j;
}

JointModel model_from_json(const Json& j) {
    if (j.value("format", "") != "fairsynth-model")
        throw io_error("not a fairsynth model document");
    SchemaPtr schema = schema_from_json(j.at("schema"));
    const ModelVariant variant = variant_from_name(j.at("variant").get<std::string>());
    const double alpha = j.at("alpha").get<double>();
    const Json& payload = j.at("payload");

    switch (variant) {
        case ModelVariant::IndepOverlap: {
            IndepOverlapPayload p;
            p.overlap_attrs = payload.at("overlap").get<std::vector<std::string>>();
            p.p_overlap = freq_from_json(payload.at("p_overlap"), *schema);
            p.cond_internal = cond_from_json(payload.at("cond_internal"), *schema);
            p.cond_external = cond_from_json(payload.at("cond_external"), *schema);
            return JointModel(schema, std::move(p), alpha);
        }
        case ModelVariant::MarginalPreserve: {
            MarginalPreservePayload m;
            m.preserved =
                payload.at("preserved").get<std::string>() == "internal" ? Side::Internal
                                                                         : Side::External;
            m.overlap_attrs = payload.at("overlap").get<std::vector<std::string>>();
            m.preserved_table = freq_from_json(payload.at("preserved_table"), *schema);
            m.cond_other = cond_from_json(payload.at("cond_other"), *schema);
            return JointModel(schema, std::move(m), alpha);
        }
        case ModelVariant::LatentNB: {
            LatentNbPayload l;
            l.k = payload.at("k").get<std::size_t>();
            l.pi = payload.at("pi").get<std::vector<double>>();
            l.cond = payload.at("cond").get<std::vector<std::vector<double>>>();
            return JointModel(schema, std::move(l), alpha);
        }
        case ModelVariant::Independent: {
            IndependentPayload ind;
            for (const auto& m : payload.at("marginals"))
                ind.marginals.push_back(freq_from_json(m, *schema));
            return JointModel(schema, std::move(ind), alpha);
        }
    }
    throw io_error("unknown model variant in document");
}

Json tree_to_json(const DecisionTree& tree) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes()) {
        Json node;
        if (n.feature >= 0) {
            node["f"] = n.feature;
            node["c"] = n.category;
            node["l"] = n.left;
            node["r"] = n.right;
        } else {
            node["label"] = n.label;
            node["counts"] = n.counts;
        }
        nodes.push_back(std::move(node));
    }
    Json j;
    j["format"] = "fairsynth-tree";
    j["version"] = 1;
    j["features"] = tree.feature_attrs();
    j["label"] = tree.label_attr();
    j["nodes"] = std::move(nodes);
    return j;
}

DecisionTree tree_from_json(const Json& j) {
    if (j.value("format", "") != "fairsynth-tree") throw io_error("not a fairsynth tree document");
    std::vector<DecisionTree::Node> nodes;
    for (const auto& n : j.at("nodes")) {
        DecisionTree::Node node;
        if (n.contains("f")) {
            node.feature = n.at("f").get<std::int32_t>();
            node.category = n.at("c").get<std::uint16_t>();
            node.left = n.at("l").get<std::int32_t>();
            node.right = n.at("r").get<std::int32_t>();
        } else {
            node.label = n.at("label").get<std::int16_t>();
            node.counts = n.at("counts").get<std::array<std::uint32_t, 2>>();
        }
        nodes.push_back(node);
    }
    return DecisionTree(j.at("features").get<std::vector<std::string>>(),
                        j.at("label").get<std::string>(), std::move(nodes));
}

Json forest_to_json(const RandomForest& forest) {
    Json j;
    j["format"] = "fairsynth-forest";
    j["version"] = 1;
    Json trees = Json::array();
    for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    return j;
}

RandomForest forest_from_json(const Json& j) {
    if (j.value("format", "") != "fairsynth-forest")
        throw io_error("not a fairsynth forest document");
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
    return RandomForest(std::move(trees));
}

Json em_trace_to_json(const EmTrace& trace) {
    Json j;
    j["log_likelihoods"] = trace.log_likelihoods;
    j["converged"] = trace.converged;
    j["best_restart"] = trace.best_restart;
    j["restart_final_lls"] = trace.restart_final_lls;
    return j;
}

Json fidelity_to_json(const FidelityReport& report) {
    Json j;
    Json tvd;
    for (std::size_t i = 0; i < report.attr_names.size(); ++i)
        tvd[report.attr_names[i]] = report.tvd_complement_per_attr[i];
    j["tvd_complement"] = std::move(tvd);
    j["tvd_complement_mean"] = report.tvd_complement_mean;

    Json cs = Json::array();
    for (std::size_t i = 0; i < report.pairs.size(); ++i) {
        Json entry;
        entry["a"] = report.pairs[i].first;
        entry["b"] = report.pairs[i].second;
        entry["cs"] = report.cs_per_pair[i];
        cs.push_back(std::move(entry));
    }
    j["contingency_similarity"] = std::move(cs);
    j["contingency_similarity_mean"] = report.cs_mean;
    j["dcc"] = report.dcc;
    if (report.discriminator) {
        Json d;
        d["mean_accuracy"] = report.discriminator->mean_accuracy;
        d["stddev"] = report.discriminator->stddev;
        d["per_seed"] = report.discriminator->per_seed;
        j["discriminator"] = std::move(d);
    }
    if (!report.kl_protected.empty()) j["kl_protected_outcome"] = report.kl_protected;
    return j;
}

namespace {

// NaN is not representable in JSON; degenerate points serialize as null.
Json finite_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

Json fairness_to_json(const FairnessReport& report) {
    Json j;
    j["n_boot"] = report.n_boot;
    Json metrics;
    for (const auto& [metric, by_attr] : report.metrics) {
        Json attrs;
        for (const auto& [attr, dist] : by_attr) {
            Json d;
            d["point"] = finite_or_null(dist.point);
            d["boot_mean"] = dist.boot_mean;
            d["boot_stddev"] = dist.boot_stddev;
            d["p2.5"] = dist.percentiles[0];
            d["p25"] = dist.percentiles[1];
            d["p50"] = dist.percentiles[2];
            d["p75"] = dist.percentiles[3];
            d["p97.5"] = dist.percentiles[4];
            d["skipped"] = dist.skipped;
            d["used"] = dist.used;
            attrs[attr] = std::move(d);
        }
        metrics[metric] = std::move(attrs);
    }
    j["metrics"] = std::move(metrics);
    return j;
}

}  // namespace fairsynth
