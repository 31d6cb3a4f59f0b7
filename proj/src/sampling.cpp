#include "fairsynth/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "fairsynth/error.hpp"
#include "fairsynth/parallel.hpp"
#include "fairsynth/rng.hpp"

namespace fairsynth {

namespace {

constexpr std::size_t kChunkRows = 8192;

// Positions in the schema for each attribute of a table component.
std::vector<std::size_t> schema_positions(const Schema& schema,
                                          const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& name : names) out.push_back(schema.index_of(name));
    return out;
}

void unflatten_into(std::size_t flat, const std::vector<std::size_t>& cards,
                    const std::vector<std::size_t>& positions, std::uint16_t* row) {
    for (std::size_t i = cards.size(); i-- > 0;) {
        row[positions[i]] = static_cast<std::uint16_t>(flat % cards[i]);
        flat /= cards[i];
    }
}

// Precomputed inverse-CDF tables for one model.
struct SamplerPlan {
    const Schema* schema;

    // IndepOverlap / MarginalPreserve
    std::vector<double> block_cdf;            // overlap or preserved block
    std::vector<std::size_t> block_cards, block_pos;
    std::vector<std::vector<double>> cond_a_cdf;  // per given cell
    std::vector<std::size_t> a_cards, a_pos;
    std::vector<std::vector<double>> cond_b_cdf;
    std::vector<std::size_t> b_cards, b_pos;
    std::vector<std::size_t> overlap_in_block;  // positions of overlap attrs inside block
    std::vector<std::size_t> overlap_cards;

    // LatentNB
    std::vector<double> pi_cdf;
    std::vector<std::vector<double>> latent_cdf;  // [attr], rows per component

    // Independent
    std::vector<std::vector<double>> marginal_cdf;

    ModelVariant variant;
};

SamplerPlan build_plan(const JointModel& model) {
    SamplerPlan plan;
    plan.schema = model.schema().get();
    plan.variant = model.variant();
    const Schema& schema = *plan.schema;

    switch (plan.variant) {
        case ModelVariant::IndepOverlap: {
            const auto& p = model.payload<IndepOverlapPayload>();
            plan.block_cdf = cumulative_sums(p.p_overlap.cells());
            plan.block_cards = p.p_overlap.cards();
            plan.block_pos = schema_positions(schema, p.p_overlap.attr_names());
            plan.a_cards = p.cond_internal.target_cards();
            plan.a_pos = schema_positions(schema, p.cond_internal.target_names());
            for (std::size_t g = 0; g < p.cond_internal.n_given_cells(); ++g)
                plan.cond_a_cdf.push_back(cumulative_sums(p.cond_internal.slice(g)));
            plan.b_cards = p.cond_external.target_cards();
            plan.b_pos = schema_positions(schema, p.cond_external.target_names());
            for (std::size_t g = 0; g < p.cond_external.n_given_cells(); ++g)
                plan.cond_b_cdf.push_back(cumulative_sums(p.cond_external.slice(g)));
            break;
        }
        case ModelVariant::MarginalPreserve: {
            const auto& m = model.payload<MarginalPreservePayload>();
            plan.block_cdf = cumulative_sums(m.preserved_table.cells());
            plan.block_cards = m.preserved_table.cards();
            plan.block_pos = schema_positions(schema, m.preserved_table.attr_names());
            // overlap attrs' slots inside the preserved block
            for (const auto& name : m.overlap_attrs) {
                const auto& names = m.preserved_table.attr_names();
                const auto it = std::find(names.begin(), names.end(), name);
                plan.overlap_in_block.push_back(
                    static_cast<std::size_t>(it - names.begin()));
                plan.overlap_cards.push_back(schema.cardinality(schema.index_of(name)));
            }
            plan.a_cards = m.cond_other.target_cards();
            plan.a_pos = schema_positions(schema, m.cond_other.target_names());
            for (std::size_t g = 0; g < m.cond_other.n_given_cells(); ++g)
                plan.cond_a_cdf.push_back(cumulative_sums(m.cond_other.slice(g)));
            break;
        }
        case ModelVariant::LatentNB: {
            const auto& l = model.payload<LatentNbPayload>();
            plan.pi_cdf = cumulative_sums(l.pi);
            plan.latent_cdf.resize(schema.size());
            for (std::size_t i = 0; i < schema.size(); ++i) {
                const std::size_t m_i = schema.cardinality(i);
                auto& rows = plan.latent_cdf[i];
                rows.resize(l.k * m_i);
                for (std::size_t c = 0; c < l.k; ++c) {
                    const auto cdf = cumulative_sums(
                        std::span<const double>(l.cond[i].data() + c * m_i, m_i));
                    std::copy(cdf.begin(), cdf.end(), rows.begin() + c * m_i);
                }
            }
            break;
        }
        case ModelVariant::Independent: {
            const auto& ind = model.payload<IndependentPayload>();
            for (const auto& m : ind.marginals)
                plan.marginal_cdf.push_back(cumulative_sums(m.cells()));
            break;
        }
    }
    return plan;
}

void draw_row(const SamplerPlan& plan, Rng& rng, std::uint16_t* row) {
    const Schema& schema = *plan.schema;
    switch (plan.variant) {
        case ModelVariant::IndepOverlap: {
            const std::size_t g = rng.categorical_from_cdf(plan.block_cdf);
            unflatten_into(g, plan.block_cards, plan.block_pos, row);
            const std::size_t a = rng.categorical_from_cdf(plan.cond_a_cdf[g]);
            unflatten_into(a, plan.a_cards, plan.a_pos, row);
            const std::size_t b = rng.categorical_from_cdf(plan.cond_b_cdf[g]);
            unflatten_into(b, plan.b_cards, plan.b_pos, row);
            break;
        }
        case ModelVariant::MarginalPreserve: {
            const std::size_t block = rng.categorical_from_cdf(plan.block_cdf);
            unflatten_into(block, plan.block_cards, plan.block_pos, row);
            // recover the overlap cell from the drawn block
            std::size_t g = 0;
            for (std::size_t i = 0; i < plan.overlap_in_block.size(); ++i) {
                const std::size_t pos = plan.block_pos[plan.overlap_in_block[i]];
                g = g * plan.overlap_cards[i] + row[pos];
            }
            const std::size_t a = rng.categorical_from_cdf(plan.cond_a_cdf[g]);
            unflatten_into(a, plan.a_cards, plan.a_pos, row);
            break;
        }
        case ModelVariant::LatentNB: {
            const std::size_t z = rng.categorical_from_cdf(plan.pi_cdf);
            for (std::size_t i = 0; i < schema.size(); ++i) {
                const std::size_t m_i = schema.cardinality(i);
                const std::span<const double> cdf(plan.latent_cdf[i].data() + z * m_i, m_i);
                row[i] = static_cast<std::uint16_t>(rng.categorical_from_cdf(cdf));
            }
            break;
        }
        case ModelVariant::Independent: {
            for (std::size_t i = 0; i < schema.size(); ++i)
                row[i] = static_cast<std::uint16_t>(
                    rng.categorical_from_cdf(plan.marginal_cdf[i]));
            break;
        }
    }
}

}  // namespace

DataTable sample(const JointModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw usage_error("sample: n must be >= 1");
    const Schema& schema = *model.schema();
    const SamplerPlan plan = build_plan(model);

    const std::size_t width = schema.size();
    std::vector<std::uint16_t> cells(n * width, 0);

    const std::size_t n_chunks = (n + kChunkRows - 1) / kChunkRows;
    parallel_for(n_chunks, [&](std::size_t chunk) {
        Rng rng(derive_seed(seed, "sample_chunk", chunk));
        const std::size_t begin = chunk * kChunkRows;
        const std::size_t end = std::min(n, begin + kChunkRows);
        for (std::size_t r = begin; r < end; ++r) draw_row(plan, rng, cells.data() + r * width);
    });

    std::vector<std::uint32_t> ids(width);
    std::iota(ids.begin(), ids.end(), 0);
    DataTable table(model.schema(), ids);
    table.reserve_rows(n);
    for (std::size_t r = 0; r < n; ++r)
        table.append_row(std::span<const std::uint16_t>(cells.data() + r * width, width));
    return table;
}

}  // namespace fairsynth
