#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairsynth/em.hpp"
#include "fairsynth/metrics.hpp"
#include "fairsynth/schema.hpp"
#include "fairsynth/serialize.hpp"
#include "fairsynth/split.hpp"
#include "fairsynth/tree.hpp"

namespace fairsynth {

enum class Method { IndepOverlap, MarginalInternal, MarginalExternal, LatentNB, Independent };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct ExperimentConfig {
    std::string name;
    std::string dataset_csv;
    std::string discretization_path;
    std::string separation_path;
    std::vector<Method> methods;
    double test_fraction = 0.3;
    double alpha = 0.5;  // conditional smoothing
    std::size_t em_k = 20;
    EmConfig em;
    TreeConfig classifier;
    std::size_t discriminator_trees = 100;
    std::size_t discriminator_seeds = 5;
    std::string positive_label;
    std::vector<GroupSpec> groups;
    std::size_t bootstrap = 1000;
    std::uint64_t seed = 0;
    std::optional<std::size_t> synthetic_size;  // default: |real test|
    std::string output_dir;

    Json raw;  // config document as read, echoed into reports
};

ExperimentConfig read_experiment_config(const std::string& path);

struct MethodResult {
    Method method = Method::Independent;
    bool ok = false;
    std::string error;
    FidelityReport fidelity;
    FairnessReport fairness;
    // |boot_mean_synth - boot_mean_real| per metric x protected attribute
    std::map<std::string, std::map<std::string, double>> delta_vs_real;
    std::optional<EmTrace> em_trace;
};

struct AuditReport {
    Json config_echo;
    FairnessReport fairness_real;
    std::vector<MethodResult> methods;
};

/// Full experiment: ingest, holdout, separate, fit each method, sample,
/// train the audited classifier on internal data, evaluate fidelity and
/// bootstrap fairness on synthetic vs real test data. Writes per-method
/// artifacts and a top-level report; byte-identical under a fixed config.
AuditReport run_experiment(const ExperimentConfig& config);

Json audit_to_json(const AuditReport& report);

/// Flat CSV (one row per method x metric x attribute) for plotting.
void write_audit_csv(const AuditReport& report, const std::string& path);

/// Aligned text tables: fidelity summary and |Δ bootstrap-mean| matrix.
std::string render_audit_tables(const AuditReport& report);

}  // namespace fairsynth
