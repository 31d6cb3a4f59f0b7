#include "fairsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairsynth/error.hpp"
#include "fairsynth/frequency.hpp"
#include "fairsynth/parallel.hpp"
#include "fairsynth/rng.hpp"

namespace fairsynth {

namespace {

void check_same_schema(const DataTable& a, const DataTable& b) {
    if (!(*a.schema() == *b.schema()))
        throw usage_error("metric inputs must share one schema");
}

}  // namespace

double tvd_complement(const DataTable& real, const DataTable& synth, const std::string& attr) {
    check_same_schema(real, synth);
    const auto p = empirical_table(real, {attr});
    const auto q = empirical_table(synth, {attr});
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.n_cells(); ++i) l1 += std::abs(p.cells()[i] - q.cells()[i]);
    return 1.0 - 0.5 * l1;
}

double contingency_similarity(const DataTable& real, const DataTable& synth,
                              const std::string& attr_a, const std::string& attr_b) {
    check_same_schema(real, synth);
    const auto p = empirical_table(real, {attr_a, attr_b});
    const auto q = empirical_table(synth, {attr_a, attr_b});
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.n_cells(); ++i) l1 += std::abs(p.cells()[i] - q.cells()[i]);
    return 1.0 - 0.5 * l1;
}

double cramers_v(const DataTable& table, const std::string& attr_a, const std::string& attr_b) {
    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    const std::vector<double> counts = count_table(table, {attr_a, attr_b}, &names, &cards);
    const std::size_t rows = cards[0], cols = cards[1];
    const double n = static_cast<double>(table.n_rows());

    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            row_sum[i] += counts[i * cols + j];
            col_sum[j] += counts[i * cols + j];
        }

    const std::size_t r_obs = std::count_if(row_sum.begin(), row_sum.end(),
                                            [](double v) { return v > 0.0; });
    const std::size_t c_obs = std::count_if(col_sum.begin(), col_sum.end(),
                                            [](double v) { return v > 0.0; });
    if (r_obs < 2 || c_obs < 2) return 0.0;  // constant attribute

    double chi2 = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_sum[i] == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) {
            if (col_sum[j] == 0.0) continue;
            const double expected = row_sum[i] * col_sum[j] / n;
            const double diff = counts[i * cols + j] - expected;
            chi2 += diff * diff / expected;
        }
    }
    const double denom = static_cast<double>(std::min(r_obs, c_obs) - 1);
    return std::sqrt((chi2 / n) / denom);
}

std::vector<std::vector<double>> dcc_matrix(const DataTable& real, const DataTable& synth) {
    check_same_schema(real, synth);
    const auto& schema = *real.schema();
    const std::size_t d = schema.size();
    std::vector<std::vector<double>> out(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const auto& a = schema.attribute(i).name;
            const auto& b = schema.attribute(j).name;
            const double diff = cramers_v(synth, a, b) - cramers_v(real, a, b);
            out[i][j] = diff;
            out[j][i] = diff;
        }
    }
    return out;
}

namespace {

// Stacks real (flag 0) and synthetic (flag 1) rows, balanced by downsampling
// the larger side. Returns shuffled row sources and flags.
struct StackedRows {
    std::vector<std::pair<const DataTable*, std::uint32_t>> rows;
    std::vector<std::uint8_t> flags;
};

StackedRows balanced_stack(const DataTable& real, const DataTable& synth, Rng& rng) {
    const std::size_t n = std::min(real.n_rows(), synth.n_rows());
    auto pick = [&](const DataTable& t) {
        std::vector<std::uint32_t> idx(t.n_rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
        rng.shuffle(idx);
        idx.resize(n);
        return idx;
    };
    StackedRows out;
    for (auto r : pick(real)) {
        out.rows.push_back({&real, r});
        out.flags.push_back(0);
    }
    for (auto r : pick(synth)) {
        out.rows.push_back({&synth, r});
        out.flags.push_back(1);
    }
    return out;
}

}  // namespace

DiscriminatorResult discriminator_measure(const DataTable& real, const DataTable& synth,
                                          const ForestConfig& forest_config, std::size_t n_seeds,
                                          std::uint64_t seed) {
    check_same_schema(real, synth);
    const auto& schema = *real.schema();

    // the discrimination label lives in a widened schema copy
    std::vector<Attribute> attrs = schema.attributes();
    attrs.push_back({"__source__", {"real", "synthetic"}, false});
    auto wide_schema = std::make_shared<const Schema>(attrs, std::nullopt);

    std::vector<std::string> features;
    for (const auto& a : schema.attributes()) features.push_back(a.name);

    DiscriminatorResult result;
    result.per_seed.resize(n_seeds);

    parallel_for(n_seeds, [&](std::size_t trial) {
        Rng rng(derive_seed(seed, "discriminator", trial));
        StackedRows stacked = balanced_stack(real, synth, rng);

        // 30% stratified holdout: classes alternate in the stack, so split
        // each class separately after a shuffle.
        std::vector<std::uint32_t> order(stacked.rows.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
        rng.shuffle(order);

        std::vector<std::uint32_t> train_idx, test_idx;
        std::size_t seen[2] = {0, 0};
        const std::size_t per_class = stacked.rows.size() / 2;
        const std::size_t test_per_class =
            static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(per_class)));
        for (auto i : order) {
            const std::uint8_t cls = stacked.flags[i];
            if (seen[cls] < test_per_class)
                test_idx.push_back(i);
            else
                train_idx.push_back(i);
            ++seen[cls];
        }

        std::vector<std::uint32_t> ids(wide_schema->size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
        std::vector<std::size_t> real_cols, synth_cols;
        for (const auto& a : schema.attributes()) {
            real_cols.push_back(real.column_of(a.name));
            synth_cols.push_back(synth.column_of(a.name));
        }
        auto build = [&](const std::vector<std::uint32_t>& which) {
            DataTable t(wide_schema, ids);
            t.reserve_rows(which.size());
            std::vector<std::uint16_t> row(wide_schema->size());
            for (auto i : which) {
                const auto [src, r] = stacked.rows[i];
                const auto& cols = (src == &real) ? real_cols : synth_cols;
                for (std::size_t c = 0; c < schema.size(); ++c) row[c] = src->at(r, cols[c]);
                row[schema.size()] = stacked.flags[i];
                t.append_row(row);
            }
            return t;
        };
        const DataTable train = build(train_idx);
        const DataTable test = build(test_idx);

        ForestConfig fc = forest_config;
        fc.seed = derive_seed(seed, "discriminator_forest", trial);
        const RandomForest forest = train_forest(train, features, "__source__", fc);
        const auto pred = forest.predict(test);

        std::size_t correct = 0;
        const std::size_t label_col = test.column_of("__source__");
        for (std::size_t r = 0; r < test.n_rows(); ++r)
            if (pred[r] == test.at(r, label_col)) ++correct;
        result.per_seed[trial] =
            static_cast<double>(correct) / static_cast<double>(test.n_rows());
    });

    double mean = 0.0;
    for (double v : result.per_seed) mean += v;
    mean /= static_cast<double>(n_seeds);
    double var = 0.0;
    for (double v : result.per_seed) var += (v - mean) * (v - mean);
    result.mean_accuracy = mean;
    result.stddev = n_seeds > 1 ? std::sqrt(var / static_cast<double>(n_seeds - 1)) : 0.0;
    return result;
}

double kl_protected_outcome(const DataTable& real, const DataTable& synth,
                            const std::string& protected_attr, const std::string& label) {
    check_same_schema(real, synth);
    constexpr double alpha = 0.5;

    auto smoothed = [&](const DataTable& t) {
        std::vector<std::string> names;
        std::vector<std::size_t> cards;
        std::vector<double> counts = count_table(t, {protected_attr, label}, &names, &cards);
        const double denom =
            static_cast<double>(t.n_rows()) + alpha * static_cast<double>(counts.size());
        for (auto& v : counts) v = (v + alpha) / denom;
        return counts;
    };

    const auto p_synth = smoothed(synth);
    const auto p_real = smoothed(real);
    double kl = 0.0;
    for (std::size_t i = 0; i < p_synth.size(); ++i)
        kl += p_synth[i] * std::log(p_synth[i] / p_real[i]);
    return kl;
}

FidelityReport fidelity_report(const DataTable& real, const DataTable& synth,
                               const FidelityOptions& options) {
    check_same_schema(real, synth);
    const auto& schema = *real.schema();
    FidelityReport report;

    for (const auto& a : schema.attributes()) {
        report.attr_names.push_back(a.name);
        report.tvd_complement_per_attr.push_back(tvd_complement(real, synth, a.name));
    }
    report.tvd_complement_mean = 0.0;
    for (double v : report.tvd_complement_per_attr) report.tvd_complement_mean += v;
    report.tvd_complement_mean /= static_cast<double>(report.tvd_complement_per_attr.size());

    for (std::size_t i = 0; i < schema.size(); ++i)
        for (std::size_t j = i + 1; j < schema.size(); ++j) {
            const auto& a = schema.attribute(i).name;
            const auto& b = schema.attribute(j).name;
            report.pairs.push_back({a, b});
            report.cs_per_pair.push_back(contingency_similarity(real, synth, a, b));
        }
    report.cs_mean = 0.0;
    for (double v : report.cs_per_pair) report.cs_mean += v;
    if (!report.cs_per_pair.empty())
        report.cs_mean /= static_cast<double>(report.cs_per_pair.size());

    report.dcc = dcc_matrix(real, synth);

    if (options.run_discriminator)
        report.discriminator = discriminator_measure(real, synth, options.forest,
                                                     options.discriminator_seeds, options.seed);

    if (schema.label_attribute()) {
        for (const auto& attr : schema.protected_attributes())
            report.kl_protected[attr] =
                kl_protected_outcome(real, synth, attr, *schema.label_attribute());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Fairness
// ---------------------------------------------------------------------------

namespace {

struct GroupCounts {
    // [group][y_true][y_pred]
    double c[2][2][2] = {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}};

    void add(std::uint8_t y, std::uint8_t yhat, std::int8_t g, double w = 1.0) {
        if (g < 0) return;
        c[g][y][yhat] += w;
    }
    double positives(int g) const { return c[g][1][0] + c[g][1][1]; }
    double negatives(int g) const { return c[g][0][0] + c[g][0][1]; }
    double total(int g) const { return positives(g) + negatives(g); }
    double pred_positive(int g) const { return c[g][0][1] + c[g][1][1]; }
    double tpr(int g) const { return c[g][1][1] / positives(g); }
    double fpr(int g) const { return c[g][0][1] / negatives(g); }
};

GroupCounts tally(const FairnessInputs& in) {
    GroupCounts counts;
    for (std::size_t i = 0; i < in.y_true.size(); ++i)
        counts.add(in.y_true[i], in.y_pred[i], in.group[i]);
    return counts;
}

double eod_from(const GroupCounts& counts) {
    if (counts.positives(0) <= 0.0 || counts.positives(1) <= 0.0)
        throw numeric_error("EOD undefined: a group has no ground-truth positives");
    return counts.tpr(1) - counts.tpr(0);
}

double di_from(const GroupCounts& counts) {
    if (counts.total(0) <= 0.0 || counts.total(1) <= 0.0)
        throw numeric_error("DI undefined: empty group");
    const double rate_p = counts.pred_positive(0) / counts.total(0);
    const double rate_u = counts.pred_positive(1) / counts.total(1);
    if (rate_p <= 0.0)
        throw numeric_error("DI undefined: privileged group has no positive predictions");
    return rate_u / rate_p;
}

double aod_from(const GroupCounts& counts) {
    if (counts.positives(0) <= 0.0 || counts.positives(1) <= 0.0 || counts.negatives(0) <= 0.0 ||
        counts.negatives(1) <= 0.0)
        throw numeric_error("AOD undefined: a group lacks positives or negatives");
    return 0.5 * ((counts.fpr(1) - counts.fpr(0)) + (counts.tpr(1) - counts.tpr(0)));
}

double percentile(std::vector<double>& sorted, double pct) {
    // linear interpolation between order statistics
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

double equal_opportunity_difference(const FairnessInputs& in) { return eod_from(tally(in)); }
double disparate_impact(const FairnessInputs& in) { return di_from(tally(in)); }
double average_odds_difference(const FairnessInputs& in) { return aod_from(tally(in)); }

FairnessInputs make_fairness_inputs(const DataTable& test,
                                    const std::vector<std::uint8_t>& y_pred,
                                    const std::string& label,
                                    const std::string& positive_category, const GroupSpec& group) {
    const auto& schema = *test.schema();
    const std::size_t label_attr = schema.index_of(label);
    const std::size_t positive = schema.category_index(label_attr, positive_category);
    const std::size_t group_attr = schema.index_of(group.attr);
    const std::uint16_t priv =
        static_cast<std::uint16_t>(schema.category_index(group_attr, group.privileged));
    const std::uint16_t unpriv =
        static_cast<std::uint16_t>(schema.category_index(group_attr, group.unprivileged));

    const std::size_t label_col = test.column_of(label);
    const std::size_t group_col = test.column_of(group.attr);

    FairnessInputs in;
    in.y_true.resize(test.n_rows());
    in.y_pred.resize(test.n_rows());
    in.group.resize(test.n_rows());
    for (std::size_t r = 0; r < test.n_rows(); ++r) {
        in.y_true[r] = test.at(r, label_col) == positive ? 1 : 0;
        in.y_pred[r] = y_pred[r] == positive ? 1 : 0;
        const std::uint16_t g = test.at(r, group_col);
        in.group[r] = g == unpriv ? 1 : (g == priv ? 0 : -1);
    }
    return in;
}

FairnessReport bootstrap_fairness(const DataTable& test, const std::vector<std::uint8_t>& y_pred,
                                  const std::string& label, const std::string& positive_category,
                                  const std::vector<GroupSpec>& groups, std::size_t n_boot,
                                  std::uint64_t seed) {
    if (y_pred.size() != test.n_rows())
        throw usage_error("bootstrap_fairness: prediction vector size mismatch");

    FairnessReport report;
    report.n_boot = n_boot;
    const std::size_t n = test.n_rows();

    static const char* metric_names[3] = {"eod", "di", "aod"};

    for (const auto& group : groups) {
        const FairnessInputs base = make_fairness_inputs(test, y_pred, label, positive_category,
                                                         group);

        // replicate values per metric; NaN marks a skipped replicate
        std::vector<std::array<double, 3>> values(n_boot);
        parallel_for(n_boot, [&](std::size_t b) {
            Rng rng(derive_seed(seed, "bootstrap", b));
            GroupCounts counts;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = static_cast<std::size_t>(rng.uniform_int(n));
                counts.add(base.y_true[r], base.y_pred[r], base.group[r]);
            }
            auto eval = [&](int which) {
                try {
                    switch (which) {
                        case 0: return eod_from(counts);
                        case 1: return di_from(counts);
                        default: return aod_from(counts);
                    }
                } catch (const Error&) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
            };
            for (int m = 0; m < 3; ++m) values[b][m] = eval(m);
        });

        for (int m = 0; m < 3; ++m) {
            MetricDistribution dist;
            std::vector<double> ok;
            ok.reserve(n_boot);
            for (std::size_t b = 0; b < n_boot; ++b) {
                if (std::isnan(values[b][m]))
                    ++dist.skipped;
                else
                    ok.push_back(values[b][m]);
            }
            dist.used = ok.size();
            if (!ok.empty()) {
                double mean = 0.0;
                for (double v : ok) mean += v;
                mean /= static_cast<double>(ok.size());
                double var = 0.0;
                for (double v : ok) var += (v - mean) * (v - mean);
                dist.boot_mean = mean;
                dist.boot_stddev =
                    ok.size() > 1 ? std::sqrt(var / static_cast<double>(ok.size() - 1)) : 0.0;
                std::sort(ok.begin(), ok.end());
                const double pcts[5] = {2.5, 25.0, 50.0, 75.0, 97.5};
                for (int p = 0; p < 5; ++p) dist.percentiles[p] = percentile(ok, pcts[p]);
            }
            try {
                switch (m) {
                    case 0: dist.point = equal_opportunity_difference(base); break;
                    case 1: dist.point = disparate_impact(base); break;
                    default: dist.point = average_odds_difference(base); break;
                }
                dist.point_valid = true;
            } catch (const Error&) {
                dist.point = std::numeric_limits<double>::quiet_NaN();
                dist.point_valid = false;
            }
            report.metrics[metric_names[m]][group.attr] = dist;
        }
    }
    return report;
}

}  // namespace fairsynth
