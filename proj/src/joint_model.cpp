#include "fairsynth/joint_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fairsynth/error.hpp"

namespace fairsynth {

std::string variant_name(ModelVariant v) {
    switch (v) {
        case ModelVariant::IndepOverlap: return "indep_overlap";
        case ModelVariant::MarginalPreserve: return "marginal_preserve";
        case ModelVariant::LatentNB: return "latent_nb";
        case ModelVariant::Independent: return "independent";
    }
    throw usage_error("unknown model variant");
}

ModelVariant variant_from_name(const std::string& name) {
    if (name == "indep_overlap") return ModelVariant::IndepOverlap;
    if (name == "marginal_preserve") return ModelVariant::MarginalPreserve;
    if (name == "latent_nb") return ModelVariant::LatentNB;
    if (name == "independent") return ModelVariant::Independent;
    throw usage_error("unknown model variant '" + name + "'");
}

namespace {

// Attribute names of a table, in schema order.
std::vector<std::string> table_attr_names(const DataTable& table) {
    std::vector<std::uint32_t> ids = table.attr_ids();
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> names;
    for (auto id : ids) names.push_back(table.schema()->attribute(id).name);
    return names;
}

std::vector<std::string> sorted_by_schema(const Schema& schema, std::vector<std::string> names) {
    std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
        return schema.index_of(a) < schema.index_of(b);
    });
    return names;
}

std::vector<std::string> minus(const std::vector<std::string>& all,
                               const std::vector<std::string>& remove) {
    std::vector<std::string> out;
    for (const auto& name : all)
        if (std::find(remove.begin(), remove.end(), name) == remove.end()) out.push_back(name);
    return out;
}

void check_partition(const Schema& schema, const DataTable& d_internal,
                     const DataTable& d_external, const std::vector<std::string>& overlap) {
    if (d_internal.n_rows() == 0 || d_external.n_rows() == 0)
        throw usage_error("fit: both datasets must be non-empty");
    if (overlap.empty()) throw usage_error("fit: overlap must be non-empty");
    for (const auto& name : overlap)
        if (!d_internal.has_column(name) || !d_external.has_column(name))
            throw usage_error("fit: overlap attribute '" + name + "' missing from a dataset");
    std::set<std::size_t> covered;
    for (auto id : d_internal.attr_ids()) covered.insert(id);
    for (auto id : d_external.attr_ids()) covered.insert(id);
    if (covered.size() != schema.size())
        throw usage_error("fit: datasets do not cover the full schema");
}

// Counts over (given=overlap, target=rest of table), given-major layout.
std::vector<double> overlap_major_counts(const DataTable& table,
                                         const std::vector<std::string>& overlap,
                                         const std::vector<std::string>& target,
                                         std::vector<std::size_t>& given_cards,
                                         std::vector<std::size_t>& target_cards) {
    const auto& schema = *table.schema();
    std::vector<std::size_t> given_cols, target_cols;
    given_cards.clear();
    target_cards.clear();
    for (const auto& name : overlap) {
        given_cols.push_back(table.column_of(name));
        given_cards.push_back(schema.cardinality(schema.index_of(name)));
    }
    for (const auto& name : target) {
        target_cols.push_back(table.column_of(name));
        target_cards.push_back(schema.cardinality(schema.index_of(name)));
    }
    std::size_t g_cells = 1, t_cells = 1;
    for (auto c : given_cards) g_cells *= c;
    for (auto c : target_cards) t_cells *= c;

    std::vector<double> counts(g_cells * t_cells, 0.0);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::size_t g = 0, t = 0;
        for (std::size_t i = 0; i < given_cols.size(); ++i)
            g = g * given_cards[i] + table.at(r, given_cols[i]);
        for (std::size_t i = 0; i < target_cols.size(); ++i)
            t = t * target_cards[i] + table.at(r, target_cols[i]);
        counts[g * t_cells + t] += 1.0;
    }
    return counts;
}

// Overlap marginal mass per overlap cell (normalized), used to decide whether
// an unsmoothed empty conditional slice is actually reachable.
std::vector<double> overlap_mass(const FrequencyTable& table,
                                 const std::vector<std::string>& overlap) {
    return table.marginal(overlap).cells();
}

void require_defined_slices(const std::vector<std::size_t>& empty_slices,
                            const std::vector<double>& reach_mass, double alpha,
                            const std::string& which) {
    if (alpha > 0.0) return;
    for (auto g : empty_slices) {
        if (reach_mass[g] > 0.0)
            throw numeric_error(
                "fit: overlap cell " + std::to_string(g) + " has positive probability but no " +
                which + " observations; conditional undefined (enable smoothing or fix data)");
    }
}

}  // namespace

JointModel::JointModel(SchemaPtr schema,
                       std::variant<IndepOverlapPayload, MarginalPreservePayload, LatentNbPayload,
                                    IndependentPayload>
                           payload,
                       double alpha)
    : schema_(std::move(schema)), payload_(std::move(payload)), alpha_(alpha) {
    if (!schema_) throw usage_error("JointModel requires a schema");
    build_index_maps();
    validate();
}

ModelVariant JointModel::variant() const {
    if (std::holds_alternative<IndepOverlapPayload>(payload_)) return ModelVariant::IndepOverlap;
    if (std::holds_alternative<MarginalPreservePayload>(payload_))
        return ModelVariant::MarginalPreserve;
    if (std::holds_alternative<LatentNbPayload>(payload_)) return ModelVariant::LatentNB;
    return ModelVariant::Independent;
}

void JointModel::build_index_maps() {
    auto make_map = [&](const std::vector<std::string>& names,
                        const std::vector<std::size_t>& cards) {
        IndexMap map;
        map.cards = cards;
        for (const auto& name : names) map.positions.push_back(schema_->index_of(name));
        return map;
    };

    if (auto* p = std::get_if<IndepOverlapPayload>(&payload_)) {
        map_a_ = make_map(p->p_overlap.attr_names(), p->p_overlap.cards());
        map_b_ = make_map(p->cond_internal.target_names(), p->cond_internal.target_cards());
        map_c_ = make_map(p->cond_external.target_names(), p->cond_external.target_cards());
    } else if (auto* m = std::get_if<MarginalPreservePayload>(&payload_)) {
        map_a_ = make_map(m->preserved_table.attr_names(), m->preserved_table.cards());
        map_b_ = make_map(m->cond_other.given_names(), m->cond_other.given_cards());
        map_c_ = make_map(m->cond_other.target_names(), m->cond_other.target_cards());
    }
    // LatentNB / Independent index directly by schema position.
}

double JointModel::cell_probability(std::span<const std::uint16_t> assignment) const {
    if (assignment.size() != schema_->size())
        throw usage_error("cell_probability: assignment must cover the full schema");
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] >= schema_->cardinality(i))
            throw usage_error("cell_probability: category index out of range");

    if (const auto* p = std::get_if<IndepOverlapPayload>(&payload_)) {
        const std::size_t g = map_a_.flatten(assignment);
        return p->p_overlap.cells()[g] * p->cond_internal.prob(g, map_b_.flatten(assignment)) *
               p->cond_external.prob(g, map_c_.flatten(assignment));
    }
    if (const auto* m = std::get_if<MarginalPreservePayload>(&payload_)) {
        return m->preserved_table.cells()[map_a_.flatten(assignment)] *
               m->cond_other.prob(map_b_.flatten(assignment), map_c_.flatten(assignment));
    }
    if (const auto* l = std::get_if<LatentNbPayload>(&payload_)) {
        double total = 0.0;
        for (std::size_t c = 0; c < l->k; ++c) {
            double prod = l->pi[c];
            for (std::size_t i = 0; i < schema_->size(); ++i)
                prod *= l->cond[i][c * schema_->cardinality(i) + assignment[i]];
            total += prod;
        }
        return total;
    }
    const auto& ind = std::get<IndependentPayload>(payload_);
    double prod = 1.0;
    for (std::size_t i = 0; i < schema_->size(); ++i)
        prod *= ind.marginals[i].cells()[assignment[i]];
    return prod;
}

void JointModel::validate(double tol) const {
    if (const auto* p = std::get_if<IndepOverlapPayload>(&payload_)) {
        p->p_overlap.validate(tol);
        p->cond_internal.validate(tol);
        p->cond_external.validate(tol);
    } else if (const auto* m = std::get_if<MarginalPreservePayload>(&payload_)) {
        m->preserved_table.validate(tol);
        m->cond_other.validate(tol);
    } else if (const auto* l = std::get_if<LatentNbPayload>(&payload_)) {
        if (l->pi.size() != l->k || l->cond.size() != schema_->size())
            throw usage_error("LatentNB payload shape mismatch");
        double pi_sum = 0.0;
        for (double v : l->pi) {
            if (v < 0.0 || !std::isfinite(v)) throw numeric_error("LatentNB: bad mixture weight");
            pi_sum += v;
        }
        if (std::abs(pi_sum - 1.0) > tol) throw numeric_error("LatentNB: pi does not sum to 1");
        for (std::size_t i = 0; i < schema_->size(); ++i) {
            const std::size_t m_i = schema_->cardinality(i);
            if (l->cond[i].size() != l->k * m_i)
                throw usage_error("LatentNB conditional shape mismatch");
            for (std::size_t c = 0; c < l->k; ++c) {
                double sum = 0.0;
                for (std::size_t m = 0; m < m_i; ++m) {
                    const double v = l->cond[i][c * m_i + m];
                    if (v < 0.0 || !std::isfinite(v))
                        throw numeric_error("LatentNB: bad conditional cell");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > tol)
                    throw numeric_error("LatentNB: conditional row does not sum to 1");
            }
        }
    } else {
        const auto& ind = std::get<IndependentPayload>(payload_);
        if (ind.marginals.size() != schema_->size())
            throw usage_error("Independent payload must have one marginal per attribute");
        for (const auto& m : ind.marginals) m.validate(tol);
    }
}

JointModel fit_independence_given_overlap(const DataTable& d_internal, const DataTable& d_external,
                                          const std::vector<std::string>& overlap,
                                          const FitOptions& options) {
    const auto& schema = *d_internal.schema();
    check_partition(schema, d_internal, d_external, overlap);
    const auto overlap_sorted = sorted_by_schema(schema, overlap);

    const FrequencyTable p1 = empirical_table(d_internal, overlap_sorted);
    const FrequencyTable p2 = empirical_table(d_external, overlap_sorted);

    std::vector<double> avg(p1.n_cells());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = (p1.cells()[i] + p2.cells()[i]) / 2.0;
    FrequencyTable p_overlap(p1.attr_names(), p1.cards(), std::move(avg));

    IndepOverlapPayload payload;
    payload.overlap_attrs = overlap_sorted;

    const auto internal_only = minus(table_attr_names(d_internal), overlap_sorted);
    const auto external_only = minus(table_attr_names(d_external), overlap_sorted);
    if (internal_only.empty() || external_only.empty())
        throw usage_error("fit_independence_given_overlap: a side has no exclusive attributes");

    std::vector<std::size_t> g_cards, t_cards;
    std::vector<std::size_t> empty;
    const auto counts_int =
        overlap_major_counts(d_internal, overlap_sorted, internal_only, g_cards, t_cards);
    payload.cond_internal =
        ConditionalTable::from_counts(overlap_sorted, g_cards, internal_only, t_cards, counts_int,
                                      options.alpha, &empty);
    require_defined_slices(empty, p_overlap.cells(), options.alpha, "internal-side");

    empty.clear();
    const auto counts_ext =
        overlap_major_counts(d_external, overlap_sorted, external_only, g_cards, t_cards);
    payload.cond_external =
        ConditionalTable::from_counts(overlap_sorted, g_cards, external_only, t_cards, counts_ext,
                                      options.alpha, &empty);
    require_defined_slices(empty, p_overlap.cells(), options.alpha, "external-side");

    payload.p_overlap = std::move(p_overlap);
    return JointModel(d_internal.schema(), std::move(payload), options.alpha);
}

JointModel fit_marginal_preservation(const DataTable& d_internal, const DataTable& d_external,
                                     const std::vector<std::string>& overlap, Side preserve,
                                     const FitOptions& options) {
    const auto& schema = *d_internal.schema();
    check_partition(schema, d_internal, d_external, overlap);
    const auto overlap_sorted = sorted_by_schema(schema, overlap);

    const DataTable& preserved_data = (preserve == Side::Internal) ? d_internal : d_external;
    const DataTable& other_data = (preserve == Side::Internal) ? d_external : d_internal;

    MarginalPreservePayload payload;
    payload.preserved = preserve;
    payload.overlap_attrs = overlap_sorted;
    payload.preserved_table = empirical_table(preserved_data, table_attr_names(preserved_data));

    const auto other_only = minus(table_attr_names(other_data), overlap_sorted);
    if (other_only.empty())
        throw usage_error("fit_marginal_preservation: non-preserved side has no exclusive attrs");

    std::vector<std::size_t> g_cards, t_cards;
    std::vector<std::size_t> empty;
    const auto counts =
        overlap_major_counts(other_data, overlap_sorted, other_only, g_cards, t_cards);
    payload.cond_other = ConditionalTable::from_counts(overlap_sorted, g_cards, other_only,
                                                       t_cards, counts, options.alpha, &empty);
    require_defined_slices(empty, overlap_mass(payload.preserved_table, overlap_sorted),
                           options.alpha, "non-preserved-side");

    return JointModel(d_internal.schema(), std::move(payload), options.alpha);
}

JointModel fit_independent(const DataTable& d_internal, const DataTable& d_external) {
    const auto& schema = *d_internal.schema();
    if (d_internal.n_rows() == 0 || d_external.n_rows() == 0)
        throw usage_error("fit_independent: both datasets must be non-empty");

    IndependentPayload payload;
    payload.marginals.resize(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const std::string& name = schema.attribute(i).name;
        const bool in_int = d_internal.has_column(name);
        const bool in_ext = d_external.has_column(name);
        if (in_int && in_ext) {
            const auto m1 = empirical_table(d_internal, {name});
            const auto m2 = empirical_table(d_external, {name});
            std::vector<double> avg(m1.n_cells());
            for (std::size_t j = 0; j < avg.size(); ++j)
                avg[j] = (m1.cells()[j] + m2.cells()[j]) / 2.0;
            payload.marginals[i] = FrequencyTable(m1.attr_names(), m1.cards(), std::move(avg));
        } else if (in_int) {
            payload.marginals[i] = empirical_table(d_internal, {name});
        } else if (in_ext) {
            payload.marginals[i] = empirical_table(d_external, {name});
        } else {
            throw usage_error("fit_independent: attribute '" + name + "' in neither dataset");
        }
    }
    return JointModel(d_internal.schema(), std::move(payload), 0.0);
}

namespace {

// Kahan-compensated accumulator; keeps log-likelihood sums reproducible and
// accurate enough for 1e-9 monotonicity checks.
struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

LogLikelihood log_likelihood(const JointModel& model, const DataTable& table, double floor) {
    const auto& schema = *model.schema();
    const double log_floor = std::log(floor);
    LogLikelihood result;
    KahanSum acc;

    std::vector<std::uint32_t> ids = table.attr_ids();
    std::sort(ids.begin(), ids.end());
    const bool full = ids.size() == schema.size();

    if (full) {
        std::vector<std::size_t> col_of_attr(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i)
            col_of_attr[i] = table.column_of(schema.attribute(i).name);
        std::vector<std::uint16_t> assignment(schema.size());
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            for (std::size_t i = 0; i < schema.size(); ++i)
                assignment[i] = table.at(r, col_of_attr[i]);
            const double p = model.cell_probability(assignment);
            if (p < floor) {
                acc.add(log_floor);
                ++result.floored_rows;
            } else {
                acc.add(std::log(p));
            }
        }
        result.value = acc.sum;
        return result;
    }

    if (model.variant() == ModelVariant::LatentNB) {
        // dropping factors marginalizes exactly
        const auto& l = model.payload<LatentNbPayload>();
        std::vector<std::size_t> attr_of_col(table.width());
        for (std::size_t c = 0; c < table.width(); ++c) attr_of_col[c] = table.attr_ids()[c];
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            double p = 0.0;
            for (std::size_t c2 = 0; c2 < l.k; ++c2) {
                double prod = l.pi[c2];
                for (std::size_t c = 0; c < table.width(); ++c) {
                    const std::size_t attr = attr_of_col[c];
                    prod *= l.cond[attr][c2 * schema.cardinality(attr) + table.at(r, c)];
                }
                p += prod;
            }
            if (p < floor) {
                acc.add(log_floor);
                ++result.floored_rows;
            } else {
                acc.add(std::log(p));
            }
        }
        result.value = acc.sum;
        return result;
    }

    std::vector<std::string> names;
    for (auto id : ids) names.push_back(schema.attribute(id).name);
    const FrequencyTable marg = model_marginal(model, names);

    std::vector<std::size_t> cols;
    for (auto id : ids) cols.push_back(table.column_of(schema.attribute(id).name));
    std::vector<std::uint16_t> idx(ids.size());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) idx[c] = table.at(r, cols[c]);
        const double p = marg.at(idx);
        if (p < floor) {
            acc.add(log_floor);
            ++result.floored_rows;
        } else {
            acc.add(std::log(p));
        }
    }
    result.value = acc.sum;
    return result;
}

FrequencyTable enumerate_joint(const JointModel& model, std::size_t max_cells) {
    const auto& schema = *model.schema();
    std::size_t n_cells = 1;
    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        n_cells *= schema.cardinality(i);
        names.push_back(schema.attribute(i).name);
        cards.push_back(schema.cardinality(i));
        if (n_cells > max_cells)
            throw numeric_error("enumerate_joint: schema product space exceeds cell budget");
    }

    std::vector<double> cells(n_cells);
    std::vector<std::uint16_t> assignment(schema.size(), 0);
    for (std::size_t flat = 0; flat < n_cells; ++flat) {
        cells[flat] = model.cell_probability(assignment);
        // mixed-radix increment
        for (std::size_t i = schema.size(); i-- > 0;) {
            if (++assignment[i] < schema.cardinality(i)) break;
            assignment[i] = 0;
        }
    }
    return FrequencyTable(std::move(names), std::move(cards), std::move(cells));
}

FrequencyTable model_marginal(const JointModel& model, const std::vector<std::string>& attrs,
                              std::size_t max_cells) {
    const auto& schema = *model.schema();
    std::vector<std::size_t> keep_ids;
    for (const auto& name : attrs) keep_ids.push_back(schema.index_of(name));
    std::sort(keep_ids.begin(), keep_ids.end());

    std::vector<std::size_t> drop_ids;
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (!std::binary_search(keep_ids.begin(), keep_ids.end(), i)) drop_ids.push_back(i);

    std::size_t keep_cells = 1, drop_cells = 1;
    for (auto id : keep_ids) keep_cells *= schema.cardinality(id);
    for (auto id : drop_ids) drop_cells *= schema.cardinality(id);
    if (keep_cells * drop_cells > max_cells)
        throw numeric_error("model_marginal: product space exceeds cell budget");

    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    for (auto id : keep_ids) {
        names.push_back(schema.attribute(id).name);
        cards.push_back(schema.cardinality(id));
    }

    std::vector<double> cells(keep_cells, 0.0);
    std::vector<std::uint16_t> assignment(schema.size(), 0);
    std::vector<std::uint16_t> keep_idx(keep_ids.size(), 0);

    for (std::size_t kflat = 0; kflat < keep_cells; ++kflat) {
        for (std::size_t i = 0; i < keep_ids.size(); ++i) assignment[keep_ids[i]] = keep_idx[i];
        // sum over the complement
        std::vector<std::uint16_t> drop_idx(drop_ids.size(), 0);
        double total = 0.0;
        for (std::size_t dflat = 0; dflat < drop_cells; ++dflat) {
            for (std::size_t i = 0; i < drop_ids.size(); ++i) assignment[drop_ids[i]] = drop_idx[i];
            total += model.cell_probability(assignment);
            for (std::size_t i = drop_ids.size(); i-- > 0;) {
                if (++drop_idx[i] < schema.cardinality(drop_ids[i])) break;
                drop_idx[i] = 0;
            }
        }
        cells[kflat] = total;
        for (std::size_t i = keep_ids.size(); i-- > 0;) {
            if (++keep_idx[i] < schema.cardinality(keep_ids[i])) break;
            keep_idx[i] = 0;
        }
    }
    return FrequencyTable(std::move(names), std::move(cards), std::move(cells));
}

}  // namespace fairsynth
