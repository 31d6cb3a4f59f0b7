#include <doctest.h>

#include <cmath>

#include "fairsynth/em.hpp"
#include "fairsynth/error.hpp"
#include "fairsynth/rng.hpp"
#include "fairsynth/sampling.hpp"
#include "fairsynth/serialize.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fairsynth;
using test::make_table;
using test::toy_schema;

namespace {

void check_monotone(const EmTrace& trace, double tol = 1e-9) {
    for (std::size_t i = 1; i < trace.log_likelihoods.size(); ++i)
        CHECK(trace.log_likelihoods[i] >= trace.log_likelihoods[i - 1] - tol);
}

// responsibilities over both datasets must be row-normalized
void check_state(const EmState& state) {
    auto check_rows = [&](const std::vector<double>& q) {
        const std::size_t n = q.size() / state.k;
        for (std::size_t r = 0; r < n; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < state.k; ++c) total += q[r * state.k + c];
            CHECK(std::abs(total - 1.0) <= 1e-9);
        }
    };
    check_rows(state.q_internal);
    check_rows(state.q_external);
}

}  // namespace

TEST_CASE("EM log-likelihood trace is non-decreasing on random data") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto schema = toy_schema({{"x1", 3}, {"x2", 2}, {"x3", 2}, {"x4", 4}});
        Rng rng(900 + seed);
        std::vector<std::vector<int>> rows1, rows2;
        for (int i = 0; i < 300; ++i)
            rows1.push_back({static_cast<int>(rng.uniform_int(3)),
                             static_cast<int>(rng.uniform_int(2)),
                             static_cast<int>(rng.uniform_int(2))});
        for (int i = 0; i < 200; ++i)
            rows2.push_back({static_cast<int>(rng.uniform_int(2)),
                             static_cast<int>(rng.uniform_int(4))});
        const DataTable internal = make_table(schema, {"x1", "x2", "x3"}, rows1);
        const DataTable external = make_table(schema, {"x3", "x4"}, rows2);

        EmConfig config;
        config.restarts = 2;
        config.max_iters = 100;
        config.seed = seed;
        const auto result = fit_latent_nb(internal, external, {"x3"}, 3 + seed % 3, config);
        check_monotone(result.trace);
        check_state(result.state);
        result.model.validate();
    }
}

TEST_CASE("K=1 collapses to pooled empirical singleton marginals") {
    auto schema = toy_schema({{"x1", 2}, {"x3", 3}, {"x4", 2}});
    Rng rng(42);
    std::vector<std::vector<int>> rows1, rows2;
    for (int i = 0; i < 50; ++i)
        rows1.push_back(
            {static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(3))});
    for (int i = 0; i < 50; ++i)
        rows2.push_back(
            {static_cast<int>(rng.uniform_int(3)), static_cast<int>(rng.uniform_int(2))});
    const DataTable internal = make_table(schema, {"x1", "x3"}, rows1);
    const DataTable external = make_table(schema, {"x3", "x4"}, rows2);

    EmConfig config;
    config.restarts = 1;
    config.max_iters = 10;
    const auto result = fit_latent_nb(internal, external, {"x3"}, 1, config);
    const auto& payload = result.model.payload<LatentNbPayload>();

    // x1: internal-only marginal
    const auto m1 = empirical_table(internal, {"x1"});
    for (std::size_t m = 0; m < 2; ++m)
        CHECK(payload.cond[0][m] == doctest::Approx(m1.cells()[m]).epsilon(1e-12));
    // x3: counts pooled over both datasets (equal sizes here)
    const auto m3_int = empirical_table(internal, {"x3"});
    const auto m3_ext = empirical_table(external, {"x3"});
    for (std::size_t m = 0; m < 3; ++m) {
        const double pooled = (50.0 * m3_int.cells()[m] + 50.0 * m3_ext.cells()[m]) / 100.0;
        CHECK(payload.cond[1][m] == doctest::Approx(pooled).epsilon(1e-12));
    }
    // x4: external-only marginal
    const auto m4 = empirical_table(external, {"x4"});
    for (std::size_t m = 0; m < 2; ++m)
        CHECK(payload.cond[2][m] == doctest::Approx(m4.cells()[m]).epsilon(1e-12));

    // degenerate mixture: cell prob = product of these marginals
    std::vector<std::uint16_t> cell{1, 2, 0};
    const double expected = payload.cond[0][1] * payload.cond[1][2] * payload.cond[2][0];
    CHECK(result.model.cell_probability(cell) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("EM recovers a 2-component mixture within TVD 0.02") {
    // hand-specified generator over 4 binary attributes
    const std::vector<int> cards{2, 2, 2, 2};
    const std::vector<double> pi{0.6, 0.4};
    const std::vector<std::vector<std::vector<double>>> gen_cond{
        {{0.9, 0.1}, {0.2, 0.8}},
        {{0.8, 0.2}, {0.3, 0.7}},
        {{0.7, 0.3}, {0.1, 0.9}},
        {{0.85, 0.15}, {0.25, 0.75}},
    };
    const auto target = oracle::eq5_joint(cards, pi, gen_cond);

    // draw 50k rows per dataset from the generator, split {x1,x2,x3} / {x3,x4}
    auto schema = toy_schema({{"x1", 2}, {"x2", 2}, {"x3", 2}, {"x4", 2}});
    Rng rng(7);
    auto draw = [&](bool internal_side, int n) {
        std::vector<std::vector<int>> rows;
        for (int i = 0; i < n; ++i) {
            const std::size_t z = rng.uniform01() < pi[0] ? 0 : 1;
            std::vector<int> full(4);
            for (int a = 0; a < 4; ++a) full[a] = rng.uniform01() < gen_cond[a][z][0] ? 0 : 1;
            rows.push_back(internal_side ? std::vector<int>{full[0], full[1], full[2]}
                                         : std::vector<int>{full[2], full[3]});
        }
        return rows;
    };
    const DataTable internal = make_table(schema, {"x1", "x2", "x3"}, draw(true, 50000));
    const DataTable external = make_table(schema, {"x3", "x4"}, draw(false, 50000));

    EmConfig config;
    config.restarts = 3;
    config.max_iters = 300;
    config.seed = 17;
    const auto result = fit_latent_nb(internal, external, {"x3"}, 2, config);
    check_monotone(result.trace);

    // TVD between fitted joint and generator joint is label-permutation free
    double tvd = 0.0;
    for (const auto& [row, p] : target) {
        std::vector<std::uint16_t> assignment(row.begin(), row.end());
        tvd += std::abs(result.model.cell_probability(assignment) - p);
    }
    tvd *= 0.5;
    CHECK(tvd < 0.02);
}

TEST_CASE("EM trace ends at the model log-likelihood of both datasets") {
    auto schema = toy_schema({{"x1", 2}, {"x3", 2}, {"x4", 2}});
    Rng rng(3);
    std::vector<std::vector<int>> rows1, rows2;
    for (int i = 0; i < 120; ++i)
        rows1.push_back(
            {static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(2))});
    for (int i = 0; i < 80; ++i)
        rows2.push_back(
            {static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(2))});
    const DataTable internal = make_table(schema, {"x1", "x3"}, rows1);
    const DataTable external = make_table(schema, {"x3", "x4"}, rows2);

    EmConfig config;
    config.restarts = 2;
    config.max_iters = 200;
    const auto result = fit_latent_nb(internal, external, {"x3"}, 3, config);

    const double ll = log_likelihood(result.model, internal).value +
                      log_likelihood(result.model, external).value;
    CHECK(std::abs(result.trace.log_likelihoods.back() - ll) < 1e-6);
}

TEST_CASE("K above the row count warns but proceeds; K=0 is an error") {
    auto schema = toy_schema({{"x1", 2}, {"x3", 2}, {"x4", 2}});
    const DataTable internal = make_table(schema, {"x1", "x3"}, {{0, 0}, {1, 1}});
    const DataTable external = make_table(schema, {"x3", "x4"}, {{0, 0}, {1, 1}});
    EmConfig config;
    config.restarts = 1;
    config.max_iters = 5;
    CHECK_NOTHROW(fit_latent_nb(internal, external, {"x3"}, 10, config));
    CHECK_THROWS_AS(fit_latent_nb(internal, external, {"x3"}, 0, config), Error);
}

TEST_CASE("latent model samples and serializes") {
    auto schema = toy_schema({{"x1", 2}, {"x3", 2}, {"x4", 3}});
    Rng rng(5);
    std::vector<std::vector<int>> rows1, rows2;
    for (int i = 0; i < 200; ++i)
        rows1.push_back(
            {static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(2))});
    for (int i = 0; i < 200; ++i)
        rows2.push_back(
            {static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(3))});
    const DataTable internal = make_table(schema, {"x1", "x3"}, rows1);
    const DataTable external = make_table(schema, {"x3", "x4"}, rows2);

    EmConfig config;
    config.restarts = 2;
    config.max_iters = 50;
    const auto result = fit_latent_nb(internal, external, {"x3"}, 4, config);
    const DataTable synth = sample(result.model, 1000, 3);
    CHECK(synth.n_rows() == 1000);
    CHECK(synth.width() == 3);

    const Json j = model_to_json(result.model, em_trace_to_json(result.trace));
    const JointModel back = model_from_json(Json::parse(j.dump()));
    const auto joint_a = enumerate_joint(result.model);
    const auto joint_b = enumerate_joint(back);
    for (std::size_t i = 0; i < joint_a.n_cells(); ++i)
        CHECK(joint_a.cells()[i] == joint_b.cells()[i]);
}
