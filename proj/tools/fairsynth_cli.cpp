// Command-line front end. Subcommands are thin wrappers over the library:
//   ingest   raw CSV + discretization config -> canonical CSV + schema JSON
//   split    row holdout (--fraction) or column separation (--separation)
//   fit      fit a joint model from internal/external canonical CSVs
//   sample   draw synthetic rows from a model file
//   train    train the decision-tree classifier under audit
//   fidelity fidelity metrics between two canonical CSVs
//   fairness bootstrap fairness metrics of a classifier on a test CSV
//   audit    full experiment from a config file
//   report   render text tables from an audit report
// Exit codes: 1 usage, 2 I/O, 3 numeric failure.

#include <iostream>

#include <CLI11.hpp>

#include "fairsynth/em.hpp"
#include "fairsynth/error.hpp"
#include "fairsynth/ingest.hpp"
#include "fairsynth/metrics.hpp"
#include "fairsynth/pipeline.hpp"
#include "fairsynth/rng.hpp"
#include "fairsynth/sampling.hpp"
#include "fairsynth/serialize.hpp"
#include "fairsynth/split.hpp"
#include "fairsynth/tree.hpp"

namespace {

using namespace fairsynth;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 1;
        case ErrorKind::Io: return 2;
        case ErrorKind::Numeric: return 3;
    }
    return 1;
}

struct IngestArgs {
    std::string input, config, output, schema_out;
};

struct SplitArgs {
    std::string data, schema, separation;
    double fraction = 0.3;
    std::uint64_t seed = 0;
    std::string train_out, test_out, internal_out, external_out;
};

struct FitArgs {
    std::string method = "indep_overlap";
    std::string internal_csv, external_csv, schema;
    std::vector<std::string> overlap;
    double alpha = 0.5;
    std::size_t k = 20;
    double tol = 1e-6;
    std::size_t max_iters = 500, restarts = 5;
    std::uint64_t seed = 0;
    std::string out;
};

struct SampleArgs {
    std::string model, out;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string data, schema, label, out;
    std::vector<std::string> features;
    std::size_t max_depth = 12, min_samples_leaf = 5;
    bool forest = false;
    std::size_t n_trees = 100;
    std::uint64_t seed = 0;
};

struct FidelityArgs {
    std::string real, synth, schema, out;
    bool table = false;
    bool no_discriminator = false;
    std::size_t dm_trees = 100, dm_seeds = 5;
    std::uint64_t seed = 0;
};

struct FairnessArgs {
    std::string test, schema, tree, out;
    std::string label, positive;
    std::vector<std::string> group_specs;  // attr:privileged:unprivileged
    std::size_t n_boot = 1000;
    std::uint64_t seed = 0;
};

std::vector<GroupSpec> parse_groups(const std::vector<std::string>& specs) {
    std::vector<GroupSpec> out;
    for (const auto& s : specs) {
        const auto a = s.find(':');
        const auto b = s.find(':', a + 1);
        if (a == std::string::npos || b == std::string::npos)
            throw usage_error("group spec must be attr:privileged:unprivileged, got '" + s + "'");
        out.push_back({s.substr(0, a), s.substr(a + 1, b - a - 1), s.substr(b + 1)});
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"joint-distribution estimation, synthetic test data, and fairness auditing"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* cmd_ingest = app.add_subcommand("ingest", "discretize a raw CSV into canonical form");
    cmd_ingest->add_option("--input", ingest.input)->required();
    cmd_ingest->add_option("--config", ingest.config)->required();
    cmd_ingest->add_option("--output", ingest.output)->required();
    cmd_ingest->add_option("--schema-out", ingest.schema_out);

    SplitArgs split;
    auto* cmd_split = app.add_subcommand("split", "row holdout or column separation");
    cmd_split->add_option("--data", split.data)->required();
    cmd_split->add_option("--schema", split.schema)->required();
    cmd_split->add_option("--fraction", split.fraction);
    cmd_split->add_option("--seed", split.seed);
    cmd_split->add_option("--separation", split.separation);
    cmd_split->add_option("--train-out", split.train_out);
    cmd_split->add_option("--test-out", split.test_out);
    cmd_split->add_option("--internal-out", split.internal_out);
    cmd_split->add_option("--external-out", split.external_out);

    FitArgs fit;
    auto* cmd_fit = app.add_subcommand("fit", "fit a joint model from two overlapping datasets");
    cmd_fit->add_option("--method", fit.method)
        ->check(CLI::IsMember({"indep_overlap", "marginal_internal", "marginal_external",
                               "latent_nb", "independent"}));
    cmd_fit->add_option("--internal", fit.internal_csv)->required();
    cmd_fit->add_option("--external", fit.external_csv)->required();
    cmd_fit->add_option("--schema", fit.schema)->required();
    cmd_fit->add_option("--overlap", fit.overlap);
    cmd_fit->add_option("--alpha", fit.alpha);
    cmd_fit->add_option("--k", fit.k);
    cmd_fit->add_option("--tol", fit.tol);
    cmd_fit->add_option("--max-iters", fit.max_iters);
    cmd_fit->add_option("--restarts", fit.restarts);
    cmd_fit->add_option("--seed", fit.seed);
    cmd_fit->add_option("--out", fit.out)->required();

    SampleArgs sampling;
    auto* cmd_sample = app.add_subcommand("sample", "draw synthetic rows from a model");
    cmd_sample->add_option("--model", sampling.model)->required();
    cmd_sample->add_option("--n", sampling.n)->required();
    cmd_sample->add_option("--seed", sampling.seed);
    cmd_sample->add_option("--out", sampling.out)->required();

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "train the classifier under audit");
    cmd_train->add_option("--data", train.data)->required();
    cmd_train->add_option("--schema", train.schema)->required();
    cmd_train->add_option("--label", train.label)->required();
    cmd_train->add_option("--features", train.features)->required();
    cmd_train->add_option("--max-depth", train.max_depth);
    cmd_train->add_option("--min-samples-leaf", train.min_samples_leaf);
    cmd_train->add_flag("--forest", train.forest);
    cmd_train->add_option("--n-trees", train.n_trees);
    cmd_train->add_option("--seed", train.seed);
    cmd_train->add_option("--out", train.out)->required();

    FidelityArgs fidelity;
    auto* cmd_fidelity = app.add_subcommand("fidelity", "fidelity metrics real vs synthetic");
    cmd_fidelity->add_option("real", fidelity.real)->required();
    cmd_fidelity->add_option("synth", fidelity.synth)->required();
    cmd_fidelity->add_option("--schema", fidelity.schema)->required();
    cmd_fidelity->add_option("--out", fidelity.out);
    cmd_fidelity->add_flag("--table", fidelity.table);
    cmd_fidelity->add_flag("--no-discriminator", fidelity.no_discriminator);
    cmd_fidelity->add_option("--dm-trees", fidelity.dm_trees);
    cmd_fidelity->add_option("--dm-seeds", fidelity.dm_seeds);
    cmd_fidelity->add_option("--seed", fidelity.seed);

    FairnessArgs fairness;
    auto* cmd_fairness = app.add_subcommand("fairness", "bootstrap fairness metrics");
    cmd_fairness->add_option("--test", fairness.test)->required();
    cmd_fairness->add_option("--schema", fairness.schema)->required();
    cmd_fairness->add_option("--tree", fairness.tree)->required();
    cmd_fairness->add_option("--label", fairness.label)->required();
    cmd_fairness->add_option("--positive", fairness.positive)->required();
    cmd_fairness->add_option("--group", fairness.group_specs)->required();
    cmd_fairness->add_option("--bootstrap", fairness.n_boot);
    cmd_fairness->add_option("--seed", fairness.seed);
    cmd_fairness->add_option("--out", fairness.out);

    std::string audit_config, audit_out_dir;
    auto* cmd_audit = app.add_subcommand("audit", "run the full experiment pipeline");
    cmd_audit->add_option("--config", audit_config)->required();
    cmd_audit->add_option("--out", audit_out_dir, "override output directory");

    std::string report_path;
    bool report_table = false, report_csv = false;
    auto* cmd_report = app.add_subcommand("report", "render an audit report");
    cmd_report->add_option("--audit", report_path)->required();
    cmd_report->add_flag("--table", report_table);
    cmd_report->add_flag("--csv", report_csv);

    CLI11_PARSE(app, argc, argv);

    if (*cmd_ingest) {
        const auto config = read_discretization_config(ingest.config);
        auto [schema, table] = load_csv(ingest.input, config);
        write_canonical_csv(table, ingest.output);
        if (!ingest.schema_out.empty()) write_schema_json(*schema, ingest.schema_out);
        std::cout << "wrote " << table.n_rows() << " rows to " << ingest.output << "\n";
        return 0;
    }

    if (*cmd_split) {
        SchemaPtr schema = read_schema_json(split.schema);
        const DataTable data = read_canonical_csv(split.data, schema);
        if (!split.separation.empty()) {
            if (split.internal_out.empty() || split.external_out.empty())
                throw usage_error("split --separation needs --internal-out and --external-out");
            const SeparationSpec spec = read_separation_spec(split.separation);
            auto [internal, external] = separate_columns(data, spec);
            write_canonical_csv(internal, split.internal_out);
            write_canonical_csv(external, split.external_out);
        } else {
            if (split.train_out.empty() || split.test_out.empty())
                throw usage_error("split --fraction needs --train-out and --test-out");
            auto [train_t, test_t] = holdout_split(data, split.fraction, split.seed);
            write_canonical_csv(train_t, split.train_out);
            write_canonical_csv(test_t, split.test_out);
        }
        return 0;
    }

    if (*cmd_fit) {
        SchemaPtr schema = read_schema_json(fit.schema);
        const DataTable internal = read_canonical_csv(fit.internal_csv, schema);
        const DataTable external = read_canonical_csv(fit.external_csv, schema);

        std::vector<std::string> overlap = fit.overlap;
        if (overlap.empty()) {
            for (auto id : internal.attr_ids())
                if (external.has_column(schema->attribute(id).name))
                    overlap.push_back(schema->attribute(id).name);
        }

        Json meta;
        meta["seed"] = fit.seed;
        const FitOptions options{fit.alpha};
        if (fit.method == "latent_nb") {
            EmConfig em{fit.tol, fit.max_iters, fit.restarts, fit.seed};
            auto result = fit_latent_nb(internal, external, overlap, fit.k, em);
            meta["em"] = em_trace_to_json(result.trace);
            write_json_file(fit.out, model_to_json(result.model, meta));
            std::cout << "final log-likelihood " << result.trace.log_likelihoods.back() << " ("
                      << result.trace.log_likelihoods.size() << " iterations)\n";
        } else if (fit.method == "indep_overlap") {
            write_json_file(fit.out, model_to_json(fit_independence_given_overlap(
                                                       internal, external, overlap, options),
                                                   meta));
        } else if (fit.method == "marginal_internal") {
            write_json_file(fit.out,
                            model_to_json(fit_marginal_preservation(internal, external, overlap,
                                                                    Side::Internal, options),
                                          meta));
        } else if (fit.method == "marginal_external") {
            write_json_file(fit.out,
                            model_to_json(fit_marginal_preservation(internal, external, overlap,
                                                                    Side::External, options),
                                          meta));
        } else {
            write_json_file(fit.out, model_to_json(fit_independent(internal, external), meta));
        }
        return 0;
    }

    if (*cmd_sample) {
        const JointModel model = model_from_json(read_json_file(sampling.model));
        const DataTable synth = sample(model, sampling.n, sampling.seed);
        write_canonical_csv(synth, sampling.out);
        std::cout << "wrote " << synth.n_rows() << " rows to " << sampling.out << "\n";
        return 0;
    }

    if (*cmd_train) {
        SchemaPtr schema = read_schema_json(train.schema);
        const DataTable data = read_canonical_csv(train.data, schema);
        const TreeConfig tree_config{train.max_depth, train.min_samples_leaf};
        if (train.forest) {
            ForestConfig fc;
            fc.n_trees = train.n_trees;
            fc.tree = tree_config;
            fc.seed = train.seed;
            write_json_file(train.out, forest_to_json(train_forest(data, train.features,
                                                                   train.label, fc)));
        } else {
            write_json_file(train.out, tree_to_json(train_tree(data, train.features, train.label,
                                                               tree_config)));
        }
        return 0;
    }

    if (*cmd_fidelity) {
        SchemaPtr schema = read_schema_json(fidelity.schema);
        const DataTable real = read_canonical_csv(fidelity.real, schema);
        const DataTable synth = read_canonical_csv(fidelity.synth, schema);
        FidelityOptions options;
        options.run_discriminator = !fidelity.no_discriminator;
        options.forest.n_trees = fidelity.dm_trees;
        options.discriminator_seeds = fidelity.dm_seeds;
        options.seed = fidelity.seed;
        const FidelityReport report = fidelity_report(real, synth, options);
        const Json j = fidelity_to_json(report);
        if (!fidelity.out.empty()) write_json_file(fidelity.out, j);
        if (fidelity.table || fidelity.out.empty()) {
            std::cout << "1-TVD mean: " << report.tvd_complement_mean << "\n"
                      << "CS mean:    " << report.cs_mean << "\n";
            if (report.discriminator)
                std::cout << "DM:         " << report.discriminator->mean_accuracy << "\n";
            for (const auto& [attr, kl] : report.kl_protected)
                std::cout << "KL(" << attr << "): " << kl << "\n";
        }
        return 0;
    }

    if (*cmd_fairness) {
        SchemaPtr schema = read_schema_json(fairness.schema);
        const DataTable test = read_canonical_csv(fairness.test, schema);
        const DecisionTree tree = tree_from_json(read_json_file(fairness.tree));
        const auto pred = tree.predict(test);
        const FairnessReport report =
            bootstrap_fairness(test, pred, fairness.label, fairness.positive,
                               parse_groups(fairness.group_specs), fairness.n_boot, fairness.seed);
        const Json j = fairness_to_json(report);
        if (!fairness.out.empty())
            write_json_file(fairness.out, j);
        else
            std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (*cmd_audit) {
        ExperimentConfig config = read_experiment_config(audit_config);
        if (!audit_out_dir.empty()) config.output_dir = audit_out_dir;
        const AuditReport report = run_experiment(config);
        std::cout << render_audit_tables(report);
        std::size_t failures = 0;
        for (const auto& m : report.methods)
            if (!m.ok) ++failures;
        if (failures > 0)
            std::cout << failures << " method(s) failed; see report.json for details\n";
        return 0;
    }

    if (*cmd_report) {
        const Json j = read_json_file(report_path);
        if (j.value("format", "") != "fairsynth-audit")
            throw io_error(report_path + " is not an audit report");
        if (report_csv) {
            // re-render the flat CSV next to the report
            std::cout << "CSV output lives beside report.json as report.csv\n";
        }
        // rebuild a minimal report to reuse the table renderer
        std::cout << j.at("config").value("name", std::string{}) << "\n";
        for (const auto& m : j.at("methods")) {
            std::cout << "  " << m.at("method").get<std::string>();
            if (!m.at("ok").get<bool>()) {
                std::cout << "  FAILED: " << m.value("error", std::string{}) << "\n";
                continue;
            }
            const auto& f = m.at("fidelity");
            std::cout << "  1-TVD=" << f.at("tvd_complement_mean").get<double>()
                      << "  CS=" << f.at("contingency_similarity_mean").get<double>();
            if (f.contains("discriminator"))
                std::cout << "  DM=" << f.at("discriminator").at("mean_accuracy").get<double>();
            std::cout << "\n";
            if (report_table && m.contains("delta_vs_real")) {
                for (const auto& [metric, attrs] : m.at("delta_vs_real").items())
                    for (const auto& [attr, v] : attrs.items())
                        std::cout << "    |d " << metric << "(" << attr
                                  << ")| = " << v.get<double>() << "\n";
            }
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
