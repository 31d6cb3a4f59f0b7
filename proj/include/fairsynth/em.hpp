#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsynth/joint_model.hpp"
#include "fairsynth/schema.hpp"

namespace fairsynth {

struct EmConfig {
    double tol = 1e-6;  // relative log-likelihood improvement
    std::size_t max_iters = 500;
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
};

/// Mutable fitting state: responsibilities for each dataset's rows and the
/// running likelihood. Each responsibility row sums to 1.
struct EmState {
    std::size_t iteration = 0;
    double log_likelihood = 0.0;
    std::size_t k = 0;
    std::vector<double> q_internal;  // N1 x K, row-major
    std::vector<double> q_external;  // N2 x K, row-major
};

struct EmTrace {
    std::vector<double> log_likelihoods;  // one entry per iteration, non-decreasing
    bool converged = false;
    std::size_t best_restart = 0;
    std::vector<double> restart_final_lls;
};

struct LatentFitResult {
    JointModel model;
    EmTrace trace;
    EmState state;
};

/// Fits the K-component latent model by EM over two overlapping datasets.
/// Shared attributes pool weighted counts from both datasets in the M-step;
/// mixture weights pool both datasets' responsibilities. Multi-restart with
/// Dirichlet(1) initialization, best final likelihood wins.
LatentFitResult fit_latent_nb(const DataTable& d_internal, const DataTable& d_external,
                              const std::vector<std::string>& overlap, std::size_t k,
                              const EmConfig& config = {});

}  // namespace fairsynth
