#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairsynth/schema.hpp"
#include "fairsynth/tree.hpp"

namespace fairsynth {

// ---------------------------------------------------------------------------
// Fidelity
// ---------------------------------------------------------------------------

/// 1 - TVD of the two empirical marginals of one attribute.
double tvd_complement(const DataTable& real, const DataTable& synth, const std::string& attr);

/// 1 - TVD of the normalized bivariate contingency tables.
double contingency_similarity(const DataTable& real, const DataTable& synth,
                              const std::string& attr_a, const std::string& attr_b);

/// V = sqrt((chi2/N) / min(r-1, c-1)) on raw counts; 0 when either attribute
/// is constant in the table.
double cramers_v(const DataTable& table, const std::string& attr_a, const std::string& attr_b);

/// dcc[i][j] = V_synth(i,j) - V_real(i,j); symmetric, zero diagonal.
std::vector<std::vector<double>> dcc_matrix(const DataTable& real, const DataTable& synth);

struct DiscriminatorResult {
    double mean_accuracy = 0.0;
    double stddev = 0.0;
    std::vector<double> per_seed;
};

/// Synthetic-vs-real classifier: balance by downsampling, label synth rows 1,
/// train a forest on a 70% stratified split, report mean holdout accuracy
/// over `n_seeds` trials.
DiscriminatorResult discriminator_measure(const DataTable& real, const DataTable& synth,
                                          const ForestConfig& forest_config,
                                          std::size_t n_seeds = 5, std::uint64_t seed = 0);

/// D_KL(p_synth(A,Y) || p_real(A,Y)) with Laplace alpha=0.5 on both tables.
double kl_protected_outcome(const DataTable& real, const DataTable& synth,
                            const std::string& protected_attr, const std::string& label);

struct FidelityReport {
    std::vector<std::string> attr_names;
    std::vector<double> tvd_complement_per_attr;
    double tvd_complement_mean = 0.0;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<double> cs_per_pair;
    double cs_mean = 0.0;
    std::vector<std::vector<double>> dcc;
    std::optional<DiscriminatorResult> discriminator;
    std::map<std::string, double> kl_protected;  // protected attr -> KL
};

struct FidelityOptions {
    bool run_discriminator = true;
    ForestConfig forest;
    std::size_t discriminator_seeds = 5;
    std::uint64_t seed = 0;
};

FidelityReport fidelity_report(const DataTable& real, const DataTable& synth,
                               const FidelityOptions& options = {});

// ---------------------------------------------------------------------------
// Fairness
// ---------------------------------------------------------------------------

/// Per-row inputs: group is 1 for unprivileged, 0 for privileged, -1 excluded.
struct FairnessInputs {
    std::vector<std::uint8_t> y_true;
    std::vector<std::uint8_t> y_pred;
    std::vector<std::int8_t> group;
};

/// TPR_unprivileged - TPR_privileged. Throws when a group has no true
/// positives.
double equal_opportunity_difference(const FairnessInputs& in);

/// P(pred+, unprivileged) / P(pred+, privileged). Throws on a zero
/// denominator (including the all-negative 0/0 case).
double disparate_impact(const FairnessInputs& in);

/// ((FPR_u - FPR_p) + (TPR_u - TPR_p)) / 2. Throws when a group lacks
/// positives or negatives.
double average_odds_difference(const FairnessInputs& in);

struct MetricDistribution {
    double point = 0.0;  // full-sample value (NaN if the full sample errors)
    bool point_valid = false;
    double boot_mean = 0.0;
    double boot_stddev = 0.0;
    // percentiles 2.5 / 25 / 50 / 75 / 97.5
    std::array<double, 5> percentiles{};
    std::size_t skipped = 0;  // replicates hitting a degenerate case
    std::size_t used = 0;
};

struct FairnessReport {
    // metric name ("eod", "di", "aod") x protected attribute
    std::map<std::string, std::map<std::string, MetricDistribution>> metrics;
    std::size_t n_boot = 0;
};

struct GroupSpec {
    std::string attr;
    std::string privileged;
    std::string unprivileged;
};

/// Bootstraps EOD/DI/AOD over row resamples of the test table. Predictions
/// are computed once; replicates resample row indices with replacement at
/// the original size. Degenerate replicates are skipped and counted.
FairnessReport bootstrap_fairness(const DataTable& test, const std::vector<std::uint8_t>& y_pred,
                                  const std::string& label, const std::string& positive_category,
                                  const std::vector<GroupSpec>& groups, std::size_t n_boot,
                                  std::uint64_t seed);

/// One replicate-free evaluation; used for point estimates.
FairnessInputs make_fairness_inputs(const DataTable& test,
                                    const std::vector<std::uint8_t>& y_pred,
                                    const std::string& label,
                                    const std::string& positive_category, const GroupSpec& group);

}  // namespace fairsynth
