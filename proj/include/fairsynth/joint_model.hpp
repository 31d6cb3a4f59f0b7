#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fairsynth/frequency.hpp"
#include "fairsynth/schema.hpp"

namespace fairsynth {

enum class ModelVariant { IndepOverlap, MarginalPreserve, LatentNB, Independent };
enum class Side { Internal, External };

std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);

/// p(x) = p(overlap) · p̂(internal-only | overlap) · p̂(external-only | overlap),
/// with p(overlap) the arithmetic mean of the two empirical overlap marginals.
struct IndepOverlapPayload {
    std::vector<std::string> overlap_attrs;
    FrequencyTable p_overlap;
    ConditionalTable cond_internal;
    ConditionalTable cond_external;
};

/// p(x) = p̂(preserved side) · p̂(other-only | overlap).
struct MarginalPreservePayload {
    Side preserved = Side::Internal;
    std::vector<std::string> overlap_attrs;
    FrequencyTable preserved_table;
    ConditionalTable cond_other;
};

/// p(x) = Σ_k π_k ∏_i p_i(x_i | k); all attributes conditionally independent
/// given a discrete latent with K states.
struct LatentNbPayload {
    std::size_t k = 0;
    std::vector<double> pi;
    // cond[attr][c * M_attr + m] = p_attr(m | c), one matrix per schema attribute
    std::vector<std::vector<double>> cond;
};

/// p(x) = ∏_i p̂(x_i); attributes shared by both datasets use the mean of the
/// two empirical singleton marginals.
struct IndependentPayload {
    std::vector<FrequencyTable> marginals;  // one per schema attribute, schema order
};

struct FitOptions {
    // Laplace pseudo-count applied to conditional tables only; 0 disables.
    double alpha = 0.5;
};

class JointModel {
public:
    JointModel(SchemaPtr schema,
               std::variant<IndepOverlapPayload, MarginalPreservePayload, LatentNbPayload,
                            IndependentPayload>
                   payload,
               double alpha);

    const SchemaPtr& schema() const { return schema_; }
    ModelVariant variant() const;
    double smoothing_alpha() const { return alpha_; }

    template <typename T>
    const T& payload() const {
        return std::get<T>(payload_);
    }

    /// Exact model probability of a full-schema assignment (schema order).
    double cell_probability(std::span<const std::uint16_t> assignment) const;

    /// Checks every stored distribution sums to 1 within tol.
    void validate(double tol = 1e-9) const;

private:
    SchemaPtr schema_;
    std::variant<IndepOverlapPayload, MarginalPreservePayload, LatentNbPayload, IndependentPayload>
        payload_;
    double alpha_;

    // schema positions of each component table's attributes, precomputed
    struct IndexMap {
        std::vector<std::size_t> positions;
        std::vector<std::size_t> cards;
        std::size_t flatten(std::span<const std::uint16_t> full) const {
            std::size_t flat = 0;
            for (std::size_t i = 0; i < positions.size(); ++i)
                flat = flat * cards[i] + full[positions[i]];
            return flat;
        }
    };
    IndexMap map_a_, map_b_, map_c_;  // meaning depends on variant

    void build_index_maps();
};

JointModel fit_independence_given_overlap(const DataTable& d_internal, const DataTable& d_external,
                                          const std::vector<std::string>& overlap,
                                          const FitOptions& options = {});

JointModel fit_marginal_preservation(const DataTable& d_internal, const DataTable& d_external,
                                     const std::vector<std::string>& overlap, Side preserve,
                                     const FitOptions& options = {});

JointModel fit_independent(const DataTable& d_internal, const DataTable& d_external);

inline double joint_cell_probability(const JointModel& model,
                                     std::span<const std::uint16_t> assignment) {
    return model.cell_probability(assignment);
}

struct LogLikelihood {
    double value = 0.0;
    std::size_t floored_rows = 0;  // rows whose probability hit the floor
};

/// Sum of log marginal row probabilities. Tables over a subset of the schema
/// are scored against the model marginal over that subset.
LogLikelihood log_likelihood(const JointModel& model, const DataTable& table,
                             double floor = 1e-12);

/// Dense joint over the full schema via cell enumeration. Guarded by a cell
/// budget; intended for small schemas (tests, fidelity oracles).
FrequencyTable enumerate_joint(const JointModel& model, std::size_t max_cells = 1u << 24);

/// Model marginal over a schema subset, by summing the complement.
FrequencyTable model_marginal(const JointModel& model, const std::vector<std::string>& attrs,
                              std::size_t max_cells = 1u << 24);

}  // namespace fairsynth
