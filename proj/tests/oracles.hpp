#pragma once

// Hand-rolled reference evaluations used to freeze expected values. These are
// written against raw integer rows with map-based counting, independent of
// the library's flat-array tables, so a bug cannot cancel across both sides.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace fairsynth::oracle {

using Row = std::vector<int>;
using Rows = std::vector<Row>;

// all assignments over cards[positions]
inline std::vector<Row> enumerate_space(const std::vector<int>& cards,
                                        const std::vector<int>& positions) {
    std::vector<Row> space{{}};
    for (int pos : positions) {
        std::vector<Row> next;
        for (const auto& prefix : space)
            for (int v = 0; v < cards[pos]; ++v) {
                Row r = prefix;
                r.push_back(v);
                next.push_back(std::move(r));
            }
        space = std::move(next);
    }
    return space;
}

inline Row subset(const Row& full, const std::vector<int>& positions) {
    Row out;
    for (int p : positions) out.push_back(full[p]);
    return out;
}

// positions of `wanted` inside `within` (both are full-schema positions)
inline std::vector<int> local_positions(const std::vector<int>& within,
                                        const std::vector<int>& wanted) {
    std::vector<int> out;
    for (int w : wanted) {
        for (std::size_t i = 0; i < within.size(); ++i)
            if (within[i] == w) out.push_back(static_cast<int>(i));
    }
    return out;
}

inline std::map<Row, double> count_rows(const Rows& rows) {
    std::map<Row, double> counts;
    for (const auto& r : rows) counts[r] += 1.0;
    return counts;
}

// conditional p(target | given) with Laplace alpha over the target space
inline double conditional_prob(const std::map<Row, double>& joint_counts, const Row& given,
                               const Row& target, double given_count, double n_target_space,
                               double alpha) {
    Row key = given;
    key.insert(key.end(), target.begin(), target.end());
    const auto it = joint_counts.find(key);
    const double joint = it == joint_counts.end() ? 0.0 : it->second;
    const double denom = given_count + alpha * n_target_space;
    if (denom <= 0.0) return 1.0 / n_target_space;  // unreachable slice: uniform
    return (joint + alpha) / denom;
}

struct SplitData {
    std::vector<int> cards;           // all attributes
    std::vector<int> internal_attrs;  // full-schema positions
    std::vector<int> external_attrs;
    std::vector<int> overlap;  // subset of both
    Rows rows_internal;        // values in internal_attrs order
    Rows rows_external;
};

namespace detail {

struct OverlapStats {
    std::map<Row, double> avg;  // averaged overlap marginal
    std::map<Row, double> count_int, count_ext;
};

inline OverlapStats overlap_stats(const SplitData& d) {
    const auto ov_in_int = local_positions(d.internal_attrs, d.overlap);
    const auto ov_in_ext = local_positions(d.external_attrs, d.overlap);
    OverlapStats stats;
    for (const auto& r : d.rows_internal) stats.count_int[subset(r, ov_in_int)] += 1.0;
    for (const auto& r : d.rows_external) stats.count_ext[subset(r, ov_in_ext)] += 1.0;
    const double n1 = static_cast<double>(d.rows_internal.size());
    const double n2 = static_cast<double>(d.rows_external.size());
    for (const auto& g : enumerate_space(d.cards, d.overlap)) {
        const double m1 = (stats.count_int.count(g) ? stats.count_int.at(g) : 0.0) / n1;
        const double m2 = (stats.count_ext.count(g) ? stats.count_ext.at(g) : 0.0) / n2;
        stats.avg[g] = (m1 + m2) / 2.0;
    }
    return stats;
}

inline std::vector<int> exclusive(const std::vector<int>& attrs, const std::vector<int>& overlap) {
    std::vector<int> out;
    for (int a : attrs) {
        bool in_overlap = false;
        for (int o : overlap) in_overlap |= (a == o);
        if (!in_overlap) out.push_back(a);
    }
    return out;
}

inline double space_size(const std::vector<int>& cards, const std::vector<int>& positions) {
    double n = 1.0;
    for (int p : positions) n *= cards[p];
    return n;
}

// counts keyed by (overlap ++ exclusive) rows
inline std::map<Row, double> keyed_counts(const Rows& rows, const std::vector<int>& attrs,
                                          const std::vector<int>& overlap,
                                          const std::vector<int>& excl) {
    const auto ov_local = local_positions(attrs, overlap);
    const auto ex_local = local_positions(attrs, excl);
    std::map<Row, double> counts;
    for (const auto& r : rows) {
        Row key = subset(r, ov_local);
        const Row ex = subset(r, ex_local);
        key.insert(key.end(), ex.begin(), ex.end());
        counts[key] += 1.0;
    }
    return counts;
}

}  // namespace detail

// p(x) = mean(p^1(g), p^2(g)) * p^(int-only | g) * p^(ext-only | g)
inline std::map<Row, double> eq3_joint(const SplitData& d, double alpha) {
    const auto stats = detail::overlap_stats(d);
    const auto int_only = detail::exclusive(d.internal_attrs, d.overlap);
    const auto ext_only = detail::exclusive(d.external_attrs, d.overlap);
    const auto counts_int = detail::keyed_counts(d.rows_internal, d.internal_attrs, d.overlap,
                                                 int_only);
    const auto counts_ext = detail::keyed_counts(d.rows_external, d.external_attrs, d.overlap,
                                                 ext_only);
    const double int_space = detail::space_size(d.cards, int_only);
    const double ext_space = detail::space_size(d.cards, ext_only);

    std::vector<int> all(d.cards.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);

    std::map<Row, double> joint;
    for (const auto& full : enumerate_space(d.cards, all)) {
        const Row g = subset(full, d.overlap);
        const Row xi = subset(full, int_only);
        const Row xe = subset(full, ext_only);
        const double cg_int = stats.count_int.count(g) ? stats.count_int.at(g) : 0.0;
        const double cg_ext = stats.count_ext.count(g) ? stats.count_ext.at(g) : 0.0;
        joint[full] = stats.avg.at(g) *
                      conditional_prob(counts_int, g, xi, cg_int, int_space, alpha) *
                      conditional_prob(counts_ext, g, xe, cg_ext, ext_space, alpha);
    }
    return joint;
}

// p(x) = p^(preserved side) * p^(other-only | g)
inline std::map<Row, double> eq4_joint(const SplitData& d, bool preserve_internal, double alpha) {
    const auto& preserved_attrs = preserve_internal ? d.internal_attrs : d.external_attrs;
    const auto& preserved_rows = preserve_internal ? d.rows_internal : d.rows_external;
    const auto& other_attrs = preserve_internal ? d.external_attrs : d.internal_attrs;
    const auto& other_rows = preserve_internal ? d.rows_external : d.rows_internal;

    const auto other_only = detail::exclusive(other_attrs, d.overlap);
    const auto counts_other = detail::keyed_counts(other_rows, other_attrs, d.overlap,
                                                   other_only);
    const double other_space = detail::space_size(d.cards, other_only);

    const auto pres_local_all = local_positions(preserved_attrs, preserved_attrs);
    std::map<Row, double> preserved_counts;
    for (const auto& r : preserved_rows) preserved_counts[subset(r, pres_local_all)] += 1.0;
    const double n_pres = static_cast<double>(preserved_rows.size());

    const auto ov_in_other_side = local_positions(other_attrs, d.overlap);
    std::map<Row, double> other_overlap_counts;
    for (const auto& r : other_rows) other_overlap_counts[subset(r, ov_in_other_side)] += 1.0;

    std::vector<int> all(d.cards.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);

    std::map<Row, double> joint;
    for (const auto& full : enumerate_space(d.cards, all)) {
        const Row pres = subset(full, preserved_attrs);
        const Row g = subset(full, d.overlap);
        const Row other = subset(full, other_only);
        const double p_pres =
            (preserved_counts.count(pres) ? preserved_counts.at(pres) : 0.0) / n_pres;
        const double cg =
            other_overlap_counts.count(g) ? other_overlap_counts.at(g) : 0.0;
        joint[full] = p_pres * conditional_prob(counts_other, g, other, cg, other_space, alpha);
    }
    return joint;
}

// p(x) = sum_z pi_z * prod_i cond[i][z][x_i], from explicit parameters
inline std::map<Row, double> eq5_joint(const std::vector<int>& cards,
                                       const std::vector<double>& pi,
                                       const std::vector<std::vector<std::vector<double>>>& cond) {
    std::vector<int> all(cards.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    std::map<Row, double> joint;
    for (const auto& full : enumerate_space(cards, all)) {
        double total = 0.0;
        for (std::size_t z = 0; z < pi.size(); ++z) {
            double prod = pi[z];
            for (std::size_t i = 0; i < cards.size(); ++i) prod *= cond[i][z][full[i]];
            total += prod;
        }
        joint[full] = total;
    }
    return joint;
}

// p(x) = prod_i p^_i(x_i), shared attributes averaged across datasets
inline std::map<Row, double> independent_joint(const SplitData& d) {
    const double n1 = static_cast<double>(d.rows_internal.size());
    const double n2 = static_cast<double>(d.rows_external.size());
    std::vector<std::vector<double>> marginals(d.cards.size());

    for (std::size_t attr = 0; attr < d.cards.size(); ++attr) {
        std::vector<double> m_int(d.cards[attr], 0.0), m_ext(d.cards[attr], 0.0);
        bool in_int = false, in_ext = false;
        for (std::size_t i = 0; i < d.internal_attrs.size(); ++i)
            if (d.internal_attrs[i] == static_cast<int>(attr)) {
                in_int = true;
                for (const auto& r : d.rows_internal) m_int[r[i]] += 1.0 / n1;
            }
        for (std::size_t i = 0; i < d.external_attrs.size(); ++i)
            if (d.external_attrs[i] == static_cast<int>(attr)) {
                in_ext = true;
                for (const auto& r : d.rows_external) m_ext[r[i]] += 1.0 / n2;
            }
        std::vector<double> m(d.cards[attr], 0.0);
        for (int v = 0; v < d.cards[attr]; ++v) {
            if (in_int && in_ext)
                m[v] = (m_int[v] + m_ext[v]) / 2.0;
            else if (in_int)
                m[v] = m_int[v];
            else
                m[v] = m_ext[v];
        }
        marginals[attr] = std::move(m);
    }

    std::vector<int> all(d.cards.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    std::map<Row, double> joint;
    for (const auto& full : enumerate_space(d.cards, all)) {
        double prod = 1.0;
        for (std::size_t i = 0; i < d.cards.size(); ++i) prod *= marginals[i][full[i]];
        joint[full] = prod;
    }
    return joint;
}

// Naive confusion-matrix fairness oracle. Returns false when undefined.
struct NaiveFairness {
    double tp[2] = {0, 0}, fp[2] = {0, 0}, tn[2] = {0, 0}, fn[2] = {0, 0};

    void add(int y, int yhat, int group) {
        if (y == 1 && yhat == 1) tp[group] += 1;
        if (y == 0 && yhat == 1) fp[group] += 1;
        if (y == 0 && yhat == 0) tn[group] += 1;
        if (y == 1 && yhat == 0) fn[group] += 1;
    }
    bool eod(double& out) const {
        if (tp[0] + fn[0] == 0 || tp[1] + fn[1] == 0) return false;
        out = tp[1] / (tp[1] + fn[1]) - tp[0] / (tp[0] + fn[0]);
        return true;
    }
    bool di(double& out) const {
        const double n0 = tp[0] + fp[0] + tn[0] + fn[0];
        const double n1 = tp[1] + fp[1] + tn[1] + fn[1];
        if (n0 == 0 || n1 == 0) return false;
        const double r0 = (tp[0] + fp[0]) / n0;
        if (r0 == 0) return false;
        out = ((tp[1] + fp[1]) / n1) / r0;
        return true;
    }
    bool aod(double& out) const {
        if (tp[0] + fn[0] == 0 || tp[1] + fn[1] == 0 || fp[0] + tn[0] == 0 || fp[1] + tn[1] == 0)
            return false;
        const double dfpr = fp[1] / (fp[1] + tn[1]) - fp[0] / (fp[0] + tn[0]);
        const double dtpr = tp[1] / (tp[1] + fn[1]) - tp[0] / (tp[0] + fn[0]);
        out = 0.5 * (dfpr + dtpr);
        return true;
    }
};

}  // namespace fairsynth::oracle
