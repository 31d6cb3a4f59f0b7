#include <doctest.h>

#include <cmath>

#include "fairsynth/em.hpp"
#include "fairsynth/error.hpp"
#include "fairsynth/joint_model.hpp"
#include "fairsynth/rng.hpp"
#include "fairsynth/sampling.hpp"
#include "helpers.hpp"

using namespace fairsynth;
using test::make_table;
using test::toy_schema;

namespace {

// TVD between sampled empirical joint and exact model joint
double sampling_tvd(const JointModel& model, std::size_t n, std::uint64_t seed) {
    const DataTable synth = sample(model, n, seed);
    std::vector<std::string> attrs;
    for (const auto& a : model.schema()->attributes()) attrs.push_back(a.name);
    const auto empirical = empirical_table(synth, attrs);
    const auto exact = enumerate_joint(model);
    double l1 = 0.0;
    for (std::size_t i = 0; i < exact.n_cells(); ++i)
        l1 += std::abs(empirical.cells()[i] - exact.cells()[i]);
    return 0.5 * l1;
}

struct ToyModels {
    SchemaPtr schema;
    std::vector<JointModel> models;
};

ToyModels build_toy_models(std::uint64_t seed) {
    auto schema = toy_schema({{"x1", 2}, {"x2", 2}, {"x3", 2}, {"x4", 2}});
    Rng rng(seed);
    std::vector<std::vector<int>> rows1, rows2;
    for (int i = 0; i < 500; ++i)
        rows1.push_back({static_cast<int>(rng.uniform_int(2)),
                         static_cast<int>(rng.uniform_int(2)),
                         static_cast<int>(rng.uniform_int(2))});
    for (int i = 0; i < 400; ++i)
        rows2.push_back(
            {static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(2))});
    const DataTable internal = make_table(schema, {"x1", "x2", "x3"}, rows1);
    const DataTable external = make_table(schema, {"x3", "x4"}, rows2);

    ToyModels out;
    out.schema = schema;
    out.models.push_back(fit_independence_given_overlap(internal, external, {"x3"}));
    out.models.push_back(
        fit_marginal_preservation(internal, external, {"x3"}, Side::Internal));
    out.models.push_back(
        fit_marginal_preservation(internal, external, {"x3"}, Side::External));
    out.models.push_back(fit_independent(internal, external));
    EmConfig config;
    config.restarts = 2;
    config.max_iters = 60;
    out.models.push_back(
        std::move(fit_latent_nb(internal, external, {"x3"}, 3, config).model));
    return out;
}

}  // namespace

TEST_CASE("degenerate marginal always samples category 0") {
    auto schema = toy_schema({{"a", 2}});
    const DataTable data = make_table(schema, {"a"}, {{0}, {0}, {0}});
    const JointModel model = fit_independent(data, data);
    const DataTable synth = sample(model, 500, 1);
    for (std::size_t r = 0; r < synth.n_rows(); ++r) CHECK(synth.at(r, 0) == 0);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
    const auto toy = build_toy_models(31);
    for (const auto& model : toy.models) {
        const DataTable a = sample(model, 2000, 77);
        const DataTable b = sample(model, 2000, 77);
        CHECK(a == b);
        const DataTable c = sample(model, 2000, 78);
        CHECK_FALSE(a == c);
    }
}

TEST_CASE("sampled histogram converges to the exact joint") {
    const auto toy = build_toy_models(32);
    for (const auto& model : toy.models) {
        const double tvd_small = sampling_tvd(model, 2000, 5);
        const double tvd_large = sampling_tvd(model, 50000, 5);
        CHECK(tvd_large < 0.02);
        CHECK(tvd_large < tvd_small + 1e-3);  // shrinks with n
    }
}

TEST_CASE("zero-probability categories are never sampled when unsmoothed") {
    auto schema = toy_schema({{"x1", 3}, {"x3", 2}, {"x4", 2}});
    // x1 = 2 never occurs
    const DataTable internal =
        make_table(schema, {"x1", "x3"}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0}, {1, 1}});
    const DataTable external =
        make_table(schema, {"x3", "x4"}, {{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const JointModel model =
        fit_independence_given_overlap(internal, external, {"x3"}, {0.0});
    const DataTable synth = sample(model, 20000, 9);
    const std::size_t col = synth.column_of("x1");
    for (std::size_t r = 0; r < synth.n_rows(); ++r) CHECK(synth.at(r, col) != 2);
}

TEST_CASE("invalid n is rejected") {
    auto schema = toy_schema({{"a", 2}});
    const DataTable data = make_table(schema, {"a"}, {{0}, {1}});
    const JointModel model = fit_independent(data, data);
    CHECK_THROWS_AS(sample(model, 0, 1), Error);
}
