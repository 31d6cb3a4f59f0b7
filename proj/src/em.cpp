#include "fairsynth/em.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "fairsynth/error.hpp"
#include "fairsynth/parallel.hpp"
#include "fairsynth/rng.hpp"

namespace fairsynth {

namespace {

struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// One dataset prepared for EM: schema attribute id per column.
struct DatasetView {
    const DataTable* table;
    std::vector<std::size_t> attr_of_col;
    std::size_t n_rows;
};

DatasetView prepare(const DataTable& table) {
    DatasetView side;
    side.table = &table;
    side.n_rows = table.n_rows();
    for (auto id : table.attr_ids()) side.attr_of_col.push_back(id);
    return side;
}

struct Params {
    std::size_t k;
    std::vector<double> pi;
    std::vector<std::vector<double>> cond;  // [attr][c * M + m]
};

// E-step over one dataset: fills q (n x k) and returns the dataset
// log-likelihood under the current parameters. Log-space with
// max-subtraction; responsibilities normalized per row.
double e_step(const DatasetView& side, const Schema& schema, const Params& params,
              const std::vector<std::vector<double>>& log_cond, const std::vector<double>& log_pi,
              std::vector<double>& q) {
    const std::size_t k = params.k;
    const std::size_t width = side.attr_of_col.size();
    KahanSum ll;
    std::vector<double> scores(k);

    for (std::size_t r = 0; r < side.n_rows; ++r) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            double s = log_pi[c];
            for (std::size_t col = 0; col < width; ++col) {
                const std::size_t attr = side.attr_of_col[col];
                s += log_cond[attr][c * schema.cardinality(attr) + side.table->at(r, col)];
            }
            scores[c] = s;
            if (s > best) best = s;
        }
        if (!std::isfinite(best))
            throw numeric_error("EM: row " + std::to_string(r) +
                                " has zero probability under every component");
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double e = std::exp(scores[c] - best);
            q[r * k + c] = e;
            total += e;
        }
        const double inv = 1.0 / total;
        for (std::size_t c = 0; c < k; ++c) q[r * k + c] *= inv;
        ll.add(best + std::log(total));
    }
    return ll.sum;
}

// Weighted count accumulation for the M-step.
void accumulate(const DatasetView& side, const Schema& schema, std::size_t k,
                const std::vector<double>& q, std::vector<double>& pi_acc,
                std::vector<std::vector<double>>& cond_acc) {
    const std::size_t width = side.attr_of_col.size();
    for (std::size_t r = 0; r < side.n_rows; ++r) {
        const double* qr = q.data() + r * k;
        for (std::size_t c = 0; c < k; ++c) pi_acc[c] += qr[c];
        for (std::size_t col = 0; col < width; ++col) {
            const std::size_t attr = side.attr_of_col[col];
            const std::size_t m = side.table->at(r, col);
            double* acc = cond_acc[attr].data() + m;
            const std::size_t stride = schema.cardinality(attr);
            for (std::size_t c = 0; c < k; ++c) acc[c * stride] += qr[c];
        }
    }
}

struct RestartOutcome {
    Params params;
    EmTrace trace;
    EmState state;
    double final_ll = -std::numeric_limits<double>::infinity();
};

RestartOutcome run_one(const DatasetView& side_int, const DatasetView& side_ext, const Schema& schema,
                       const std::set<std::size_t>& internal_attrs,
                       const std::set<std::size_t>& external_attrs, std::size_t k,
                       const EmConfig& config, std::uint64_t restart_seed) {
    Params params;
    params.k = k;
    params.pi.assign(k, 1.0 / static_cast<double>(k));
    params.cond.resize(schema.size());

    Rng rng(restart_seed);
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const std::size_t m_i = schema.cardinality(i);
        params.cond[i].resize(k * m_i);
        for (std::size_t c = 0; c < k; ++c) {
            double total = 0.0;
            for (std::size_t m = 0; m < m_i; ++m) {
                // Dirichlet(1) row via normalized Exp(1) draws
                const double e = -std::log(1.0 - rng.uniform01());
                params.cond[i][c * m_i + m] = e;
                total += e;
            }
            for (std::size_t m = 0; m < m_i; ++m) params.cond[i][c * m_i + m] /= total;
        }
    }

    RestartOutcome out;
    out.state.k = k;
    out.state.q_internal.resize(side_int.n_rows * k);
    out.state.q_external.resize(side_ext.n_rows * k);

    std::vector<double> log_pi(k);
    std::vector<std::vector<double>> log_cond(schema.size());
    const double n_total = static_cast<double>(side_int.n_rows + side_ext.n_rows);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        for (std::size_t c = 0; c < k; ++c) log_pi[c] = std::log(params.pi[c]);
        for (std::size_t i = 0; i < schema.size(); ++i) {
            log_cond[i].resize(params.cond[i].size());
            for (std::size_t j = 0; j < params.cond[i].size(); ++j)
                log_cond[i][j] = std::log(params.cond[i][j]);
        }

        const double ll = e_step(side_int, schema, params, log_cond, log_pi,
                                 out.state.q_internal) +
                          e_step(side_ext, schema, params, log_cond, log_pi,
                                 out.state.q_external);
        if (!std::isfinite(ll))
            throw numeric_error("EM: non-finite log-likelihood at iteration " +
                                std::to_string(iter));

        out.trace.log_likelihoods.push_back(ll);
        out.state.iteration = iter;
        out.state.log_likelihood = ll;

        if (iter > 0) {
            const double rel = (ll - prev_ll) / std::max(1.0, std::abs(prev_ll));
            if (rel < config.tol) {
                out.trace.converged = true;
                break;
            }
        }
        prev_ll = ll;

        // M-step
        std::vector<double> pi_acc(k, 0.0);
        std::vector<std::vector<double>> cond_acc(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i)
            cond_acc[i].assign(k * schema.cardinality(i), 0.0);

        accumulate(side_int, schema, k, out.state.q_internal, pi_acc, cond_acc);

        // Exclusive attributes normalize within their own dataset; shared
        // attributes keep accumulating external counts before normalizing.
        std::vector<double> pi_internal = pi_acc;
        accumulate(side_ext, schema, k, out.state.q_external, pi_acc, cond_acc);

        for (std::size_t c = 0; c < k; ++c) params.pi[c] = pi_acc[c] / n_total;

        for (std::size_t i = 0; i < schema.size(); ++i) {
            const bool in_int = internal_attrs.count(i) > 0;
            const bool in_ext = external_attrs.count(i) > 0;
            const std::size_t m_i = schema.cardinality(i);
            for (std::size_t c = 0; c < k; ++c) {
                // responsibility mass available to attribute i's component c:
                // both datasets for shared attributes, one otherwise
                double denom;
                if (in_int && in_ext)
                    denom = pi_acc[c];
                else if (in_int)
                    denom = pi_internal[c];
                else
                    denom = pi_acc[c] - pi_internal[c];
                const double* src = cond_acc[i].data() + c * m_i;
                double* dst = params.cond[i].data() + c * m_i;
                if (denom <= 0.0)  // dead component; keep a valid simplex
                    for (std::size_t m = 0; m < m_i; ++m) dst[m] = 1.0 / static_cast<double>(m_i);
                else
                    for (std::size_t m = 0; m < m_i; ++m) dst[m] = src[m] / denom;
            }
        }
    }

    out.final_ll = out.trace.log_likelihoods.back();
    out.params = std::move(params);
    return out;
}

}  // namespace

LatentFitResult fit_latent_nb(const DataTable& d_internal, const DataTable& d_external,
                              const std::vector<std::string>& overlap, std::size_t k,
                              const EmConfig& config) {
    const auto& schema = *d_internal.schema();
    if (k < 1) throw usage_error("fit_latent_nb: K must be >= 1");
    if (d_internal.n_rows() == 0 || d_external.n_rows() == 0)
        throw usage_error("fit_latent_nb: both datasets must be non-empty");

    std::set<std::size_t> internal_attrs, external_attrs;
    for (auto id : d_internal.attr_ids()) internal_attrs.insert(id);
    for (auto id : d_external.attr_ids()) external_attrs.insert(id);
    if (internal_attrs.size() + external_attrs.size() -
            [&] {
                std::size_t shared = 0;
                for (auto id : internal_attrs) shared += external_attrs.count(id);
                return shared;
            }() !=
        schema.size())
        throw usage_error("fit_latent_nb: datasets do not cover the full schema");
    for (const auto& name : overlap) {
        const std::size_t id = schema.index_of(name);
        if (!internal_attrs.count(id) || !external_attrs.count(id))
            throw usage_error("fit_latent_nb: overlap attribute '" + name +
                              "' not shared by both datasets");
    }

    const std::size_t n_total = d_internal.n_rows() + d_external.n_rows();
    if (k > n_total)
        std::cerr << "fit_latent_nb: warning: K=" << k << " exceeds total row count " << n_total
                  << "\n";

    const DatasetView side_int = prepare(d_internal);
    const DatasetView side_ext = prepare(d_external);

    const std::size_t restarts = std::max<std::size_t>(1, config.restarts);
    std::vector<RestartOutcome> outcomes(restarts);
    parallel_for(restarts, [&](std::size_t r) {
        outcomes[r] = run_one(side_int, side_ext, schema, internal_attrs, external_attrs, k,
                              config, derive_seed(config.seed, "em_restart", r));
    });

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (outcomes[r].final_ll > outcomes[best].final_ll) best = r;

    EmTrace trace = std::move(outcomes[best].trace);
    trace.best_restart = best;
    for (const auto& o : outcomes) trace.restart_final_lls.push_back(o.final_ll);

    LatentNbPayload payload;
    payload.k = k;
    payload.pi = std::move(outcomes[best].params.pi);
    payload.cond = std::move(outcomes[best].params.cond);

    // guard against drift before the model-level simplex validation
    double pi_sum = 0.0;
    for (double v : payload.pi) pi_sum += v;
    for (auto& v : payload.pi) v /= pi_sum;

    LatentFitResult result{JointModel(d_internal.schema(), std::move(payload), 0.0),
                           std::move(trace), std::move(outcomes[best].state)};
    return result;
}

}  // namespace fairsynth
