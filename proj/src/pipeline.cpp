#include "fairsynth/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fairsynth/error.hpp"
#include "fairsynth/ingest.hpp"
#include "fairsynth/rng.hpp"
#include "fairsynth/sampling.hpp"

namespace fairsynth {

namespace fs = std::filesystem;

std::string method_name(Method m) {
    switch (m) {
        case Method::IndepOverlap: return "indep_overlap";
        case Method::MarginalInternal: return "marginal_internal";
        case Method::MarginalExternal: return "marginal_external";
        case Method::LatentNB: return "latent_nb";
        case Method::Independent: return "independent";
    }
    throw usage_error("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "indep_overlap") return Method::IndepOverlap;
    if (name == "marginal_internal") return Method::MarginalInternal;
    if (name == "marginal_external") return Method::MarginalExternal;
    if (name == "latent_nb") return Method::LatentNB;
    if (name == "independent") return Method::Independent;
    throw usage_error("unknown method '" + name + "'");
}

ExperimentConfig read_experiment_config(const std::string& path) {
    const Json j = read_json_file(path);
    ExperimentConfig config;
    config.raw = j;
    config.name = j.at("name").get<std::string>();
    config.dataset_csv = j.at("dataset_csv").get<std::string>();
    config.discretization_path = j.at("discretization").get<std::string>();
    config.separation_path = j.at("separation").get<std::string>();
    for (const auto& m : j.at("methods")) config.methods.push_back(method_from_name(m));
    if (config.methods.empty()) throw usage_error(path + ": at least one method required");
    config.test_fraction = j.value("test_fraction", 0.3);
    config.alpha = j.value("alpha", 0.5);
    if (j.contains("em")) {
        const auto& em = j.at("em");
        config.em_k = em.value("k", std::size_t{20});
        config.em.tol = em.value("tol", 1e-6);
        config.em.max_iters = em.value("max_iters", std::size_t{500});
        config.em.restarts = em.value("restarts", std::size_t{5});
    }
    if (j.contains("classifier")) {
        const auto& c = j.at("classifier");
        config.classifier.max_depth = c.value("max_depth", std::size_t{12});
        config.classifier.min_samples_leaf = c.value("min_samples_leaf", std::size_t{5});
    }
    if (j.contains("discriminator")) {
        const auto& d = j.at("discriminator");
        config.discriminator_trees = d.value("n_trees", std::size_t{100});
        config.discriminator_seeds = d.value("seeds", std::size_t{5});
    }
    const auto& fair = j.at("fairness");
    config.positive_label = fair.at("positive_label").get<std::string>();
    for (const auto& g : fair.at("groups")) {
        GroupSpec spec;
        spec.attr = g.at("attr").get<std::string>();
        spec.privileged = g.at("privileged").get<std::string>();
        spec.unprivileged = g.at("unprivileged").get<std::string>();
        config.groups.push_back(std::move(spec));
    }
    config.bootstrap = j.value("bootstrap", std::size_t{1000});
    config.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("synthetic_size") && !j.at("synthetic_size").is_null())
        config.synthetic_size = j.at("synthetic_size").get<std::size_t>();
    config.output_dir = j.at("output_dir").get<std::string>();

    for (const auto& p : {config.dataset_csv, config.discretization_path,
                          config.separation_path}) {
        if (!fs::exists(p)) throw io_error(path + ": referenced file missing: " + p);
    }
    return config;
}

namespace {

JointModel fit_method(Method method, const DataTable& internal, const DataTable& external,
                      const std::vector<std::string>& overlap, const ExperimentConfig& config,
                      std::optional<EmTrace>& em_trace) {
    const FitOptions options{config.alpha};
    switch (method) {
        case Method::IndepOverlap:
            return fit_independence_given_overlap(internal, external, overlap, options);
        case Method::MarginalInternal:
            return fit_marginal_preservation(internal, external, overlap, Side::Internal,
                                             options);
        case Method::MarginalExternal:
            return fit_marginal_preservation(internal, external, overlap, Side::External,
                                             options);
        case Method::LatentNB: {
            EmConfig em = config.em;
            em.seed = derive_seed(config.seed, "em:" + method_name(method));
            auto result = fit_latent_nb(internal, external, overlap, config.em_k, em);
            em_trace = std::move(result.trace);
            return std::move(result.model);
        }
        case Method::Independent: return fit_independent(internal, external);
    }
    throw usage_error("unknown method");
}

std::map<std::string, std::map<std::string, double>> deltas(const FairnessReport& synth,
                                                            const FairnessReport& real) {
    std::map<std::string, std::map<std::string, double>> out;
    for (const auto& [metric, by_attr] : synth.metrics) {
        for (const auto& [attr, dist] : by_attr) {
            const auto& real_dist = real.metrics.at(metric).at(attr);
            out[metric][attr] = std::abs(dist.boot_mean - real_dist.boot_mean);
        }
    }
    return out;
}

}  // namespace

AuditReport run_experiment(const ExperimentConfig& config) {
    const auto disc = read_discretization_config(config.discretization_path);
    auto [schema, full] = load_csv(config.dataset_csv, disc);
    const SeparationSpec separation = read_separation_spec(config.separation_path);
    separation.validate(*schema);

    if (!schema->label_attribute())
        throw usage_error("audit requires a label attribute in the discretization config");
    const std::string label = *schema->label_attribute();

    // The audited classifier never sees protected attributes: they are
    // external-only by separation invariant, and the label is excluded here.
    std::vector<std::string> features;
    for (const auto& name : separation.internal_attrs)
        if (name != label) features.push_back(name);
    for (const auto& f : features)
        if (schema->attribute(schema->index_of(f)).is_protected)
            throw usage_error("audit: protected attribute '" + f + "' leaked into features");

    auto [train, test] = holdout_split(full, config.test_fraction,
                                       derive_seed(config.seed, "holdout"));
    auto [internal, external] = separate_columns(train, separation);

    const DecisionTree classifier = train_tree(internal, features, label, config.classifier);
    const auto pred_real = classifier.predict(test);

    AuditReport report;
    report.config_echo = config.raw;
    report.fairness_real =
        bootstrap_fairness(test, pred_real, label, config.positive_label, config.groups,
                           config.bootstrap, derive_seed(config.seed, "bootstrap_real"));

    fs::create_directories(config.output_dir);
    write_json_file(config.output_dir + "/real_fairness.json",
                    fairness_to_json(report.fairness_real));
    write_json_file(config.output_dir + "/classifier.json", tree_to_json(classifier));

    const std::size_t synth_n = config.synthetic_size.value_or(test.n_rows());

    for (const Method method : config.methods) {
        MethodResult result;
        result.method = method;
        const std::string dir = config.output_dir + "/" + method_name(method);
        try {
            fs::create_directories(dir);
            std::optional<EmTrace> em_trace;
            const JointModel model =
                fit_method(method, internal, external, separation.overlap_attrs, config,
                           em_trace);
            result.em_trace = em_trace;

            Json meta;
            meta["seed"] = config.seed;
            meta["method"] = method_name(method);
            if (em_trace) meta["em"] = em_trace_to_json(*em_trace);
            write_json_file(dir + "/model.json", model_to_json(model, meta));

            const DataTable synth =
                sample(model, synth_n, derive_seed(config.seed, "sample:" + method_name(method)));
            write_canonical_csv(synth, dir + "/synthetic.csv");

            FidelityOptions fidelity_options;
            fidelity_options.forest.n_trees = config.discriminator_trees;
            fidelity_options.discriminator_seeds = config.discriminator_seeds;
            fidelity_options.seed = derive_seed(config.seed, "dm:" + method_name(method));
            result.fidelity = fidelity_report(test, synth, fidelity_options);
            write_json_file(dir + "/fidelity.json", fidelity_to_json(result.fidelity));

            const auto pred_synth = classifier.predict(synth);
            result.fairness = bootstrap_fairness(
                synth, pred_synth, label, config.positive_label, config.groups, config.bootstrap,
                derive_seed(config.seed, "bootstrap_synth:" + method_name(method)));
            write_json_file(dir + "/fairness.json", fairness_to_json(result.fairness));

            result.delta_vs_real = deltas(result.fairness, report.fairness_real);
            result.ok = true;
        } catch (const std::exception& e) {
            result.ok = false;
            result.error = e.what();
            std::cerr << "method " << method_name(method) << " failed: " << e.what() << "\n";
        }
        report.methods.push_back(std::move(result));
    }

    write_json_file(config.output_dir + "/report.json", audit_to_json(report));
    write_audit_csv(report, config.output_dir + "/report.csv");
    return report;
}

Json audit_to_json(const AuditReport& report) {
    Json j;
    j["format"] = "fairsynth-audit";
    j["version"] = 1;
    j["config"] = report.config_echo;
    j["real_fairness"] = fairness_to_json(report.fairness_real);
    Json methods = Json::array();
    for (const auto& m : report.methods) {
        Json entry;
        entry["method"] = method_name(m.method);
        entry["ok"] = m.ok;
        if (!m.ok) {
            entry["error"] = m.error;
        } else {
            entry["fidelity"] = fidelity_to_json(m.fidelity);
            entry["fairness"] = fairness_to_json(m.fairness);
            entry["delta_vs_real"] = m.delta_vs_real;
            if (m.em_trace) entry["em"] = em_trace_to_json(*m.em_trace);
        }
        methods.push_back(std::move(entry));
    }
    j["methods"] = std::move(methods);
    return j;
}

namespace {

std::string fmt(double v, int precision = 6) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

}  // namespace

void write_audit_csv(const AuditReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write report CSV: " + path);
    out << "method,metric,attribute,value,boot_mean,boot_stddev,p2.5,p25,p50,p75,p97.5,skipped,"
           "delta_vs_real\n";

    auto fairness_rows = [&](const std::string& method, const FairnessReport& fr,
                             const MethodResult* mr) {
        for (const auto& [metric, by_attr] : fr.metrics) {
            for (const auto& [attr, d] : by_attr) {
                out << method << ',' << metric << ',' << attr << ','
                    << (d.point_valid ? fmt(d.point) : "") << ',' << fmt(d.boot_mean) << ','
                    << fmt(d.boot_stddev) << ',' << fmt(d.percentiles[0]) << ','
                    << fmt(d.percentiles[1]) << ',' << fmt(d.percentiles[2]) << ','
                    << fmt(d.percentiles[3]) << ',' << fmt(d.percentiles[4]) << ',' << d.skipped
                    << ',';
                if (mr) out << fmt(mr->delta_vs_real.at(metric).at(attr));
                out << '\n';
            }
        }
    };

    fairness_rows("real", report.fairness_real, nullptr);
    for (const auto& m : report.methods) {
        if (!m.ok) {
            out << method_name(m.method) << ",error,," << ",,,,,,,,," << '\n';
            continue;
        }
        const std::string name = method_name(m.method);
        out << name << ",tvd_complement_mean,," << fmt(m.fidelity.tvd_complement_mean)
            << ",,,,,,,,,\n";
        out << name << ",cs_mean,," << fmt(m.fidelity.cs_mean) << ",,,,,,,,,\n";
        if (m.fidelity.discriminator)
            out << name << ",dm,," << fmt(m.fidelity.discriminator->mean_accuracy)
                << ",,,,,,,,,\n";
        for (const auto& [attr, kl] : m.fidelity.kl_protected)
            out << name << ",kl," << attr << ',' << fmt(kl) << ",,,,,,,,,\n";
        fairness_rows(name, m.fairness, &m);
    }
    if (!out) throw io_error("error writing report CSV: " + path);
}

std::string render_audit_tables(const AuditReport& report) {
    std::ostringstream out;

    // fidelity table
    out << "Fidelity (synthetic vs real test data)\n";
    out << std::left << std::setw(22) << "method" << std::right << std::setw(9) << "1-TVD"
        << std::setw(9) << "CS" << std::setw(9) << "DM";
    std::vector<std::string> kl_attrs;
    for (const auto& m : report.methods)
        if (m.ok) {
            for (const auto& [attr, _] : m.fidelity.kl_protected) kl_attrs.push_back(attr);
            break;
        }
    for (const auto& attr : kl_attrs) out << std::setw(12) << ("KL(" + attr + ")");
    out << '\n';
    for (const auto& m : report.methods) {
        out << std::left << std::setw(22) << method_name(m.method) << std::right;
        if (!m.ok) {
            out << "  error: " << m.error << '\n';
            continue;
        }
        out << std::setw(9) << fmt(m.fidelity.tvd_complement_mean, 3) << std::setw(9)
            << fmt(m.fidelity.cs_mean, 3);
        if (m.fidelity.discriminator)
            out << std::setw(9) << fmt(m.fidelity.discriminator->mean_accuracy, 3);
        else
            out << std::setw(9) << "-";
        for (const auto& attr : kl_attrs) {
            auto it = m.fidelity.kl_protected.find(attr);
            out << std::setw(12)
                << (it != m.fidelity.kl_protected.end() ? fmt(it->second, 3) : "-");
        }
        out << '\n';
    }

    // |Δ bootstrap mean| table
    out << "\nAbsolute differences of bootstrap means vs real test data\n";
    std::vector<std::pair<std::string, std::string>> cells;
    for (const auto& [metric, by_attr] : report.fairness_real.metrics)
        for (const auto& [attr, _] : by_attr) cells.push_back({attr, metric});
    std::sort(cells.begin(), cells.end());

    out << std::left << std::setw(22) << "method" << std::right;
    for (const auto& [attr, metric] : cells) out << std::setw(16) << (attr + ":" + metric);
    out << '\n';
    for (const auto& m : report.methods) {
        if (!m.ok) continue;
        out << std::left << std::setw(22) << method_name(m.method) << std::right;
        for (const auto& [attr, metric] : cells) {
            const auto mit = m.delta_vs_real.find(metric);
            if (mit != m.delta_vs_real.end() && mit->second.count(attr))
                out << std::setw(16) << fmt(mit->second.at(attr), 3);
            else
                out << std::setw(16) << "-";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fairsynth
