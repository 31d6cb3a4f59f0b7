#include "fairsynth/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairsynth/error.hpp"

namespace fairsynth {

FrequencyTable::FrequencyTable(std::vector<std::string> attr_names, std::vector<std::size_t> cards,
                               std::vector<double> cells)
    : attr_names_(std::move(attr_names)), cards_(std::move(cards)), cells_(std::move(cells)) {
    std::size_t expected = 1;
    for (auto c : cards_) expected *= c;
    if (cells_.size() != expected)
        throw usage_error("FrequencyTable: cell count does not match attribute cardinalities");
}

std::size_t FrequencyTable::flat_index(std::span<const std::uint16_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        if (idx[i] >= cards_[i]) throw usage_error("FrequencyTable: index out of range");
        flat = flat * cards_[i] + idx[i];
    }
    return flat;
}

void FrequencyTable::unflatten(std::size_t flat, std::span<std::uint16_t> out) const {
    for (std::size_t i = cards_.size(); i-- > 0;) {
        out[i] = static_cast<std::uint16_t>(flat % cards_[i]);
        flat /= cards_[i];
    }
}

void FrequencyTable::validate(double tol) const {
    double sum = 0.0;
    for (double v : cells_) {
        if (v < 0.0 || !std::isfinite(v))
            throw numeric_error("FrequencyTable: negative or non-finite cell");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
        throw numeric_error("FrequencyTable: cells sum to " + std::to_string(sum));
}

FrequencyTable FrequencyTable::marginal(const std::vector<std::string>& keep) const {
    std::vector<std::size_t> kept_dims;
    for (std::size_t i = 0; i < attr_names_.size(); ++i)
        if (std::find(keep.begin(), keep.end(), attr_names_[i]) != keep.end())
            kept_dims.push_back(i);
    if (kept_dims.size() != keep.size())
        throw usage_error("marginal: requested attribute not in table");

    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    std::size_t out_cells = 1;
    for (auto d : kept_dims) {
        names.push_back(attr_names_[d]);
        cards.push_back(cards_[d]);
        out_cells *= cards_[d];
    }

    std::vector<double> out(out_cells, 0.0);
    std::vector<std::uint16_t> idx(cards_.size());
    for (std::size_t flat = 0; flat < cells_.size(); ++flat) {
        unflatten(flat, idx);
        std::size_t out_flat = 0;
        for (auto d : kept_dims) out_flat = out_flat * cards_[d] + idx[d];
        out[out_flat] += cells_[flat];
    }
    return FrequencyTable(std::move(names), std::move(cards), std::move(out));
}

std::vector<double> count_table(const DataTable& table, const std::vector<std::string>& attrs,
                                std::vector<std::string>* ordered_names,
                                std::vector<std::size_t>* cards_out) {
    const auto& schema = *table.schema();
    std::vector<std::size_t> ids;
    for (const auto& name : attrs) ids.push_back(schema.index_of(name));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() != attrs.size()) throw usage_error("count_table: duplicate attribute in list");

    std::vector<std::size_t> cols, cards;
    std::size_t n_cells = 1;
    for (auto id : ids) {
        cols.push_back(table.column_of(schema.attribute(id).name));
        cards.push_back(schema.cardinality(id));
        n_cells *= schema.cardinality(id);
        if (ordered_names) ordered_names->push_back(schema.attribute(id).name);
    }
    if (cards_out) *cards_out = cards;

    std::vector<double> counts(n_cells, 0.0);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < cols.size(); ++i) flat = flat * cards[i] + table.at(r, cols[i]);
        counts[flat] += 1.0;
    }
    return counts;
}

FrequencyTable empirical_table(const DataTable& table, const std::vector<std::string>& attrs) {
    if (table.n_rows() == 0) throw usage_error("empirical_table: empty table");
    std::vector<std::string> names;
    std::vector<std::size_t> cards;
    std::vector<double> cells = count_table(table, attrs, &names, &cards);
    const double n = static_cast<double>(table.n_rows());
    for (auto& v : cells) v /= n;
    return FrequencyTable(std::move(names), std::move(cards), std::move(cells));
}

ConditionalTable ConditionalTable::from_counts(std::vector<std::string> given_names,
                                               std::vector<std::size_t> given_cards,
                                               std::vector<std::string> target_names,
                                               std::vector<std::size_t> target_cards,
                                               std::span<const double> counts, double alpha,
                                               std::vector<std::size_t>* empty_slices) {
    ConditionalTable table;
    table.given_names_ = std::move(given_names);
    table.given_cards_ = std::move(given_cards);
    table.target_names_ = std::move(target_names);
    table.target_cards_ = std::move(target_cards);
    table.given_cells_ = 1;
    for (auto c : table.given_cards_) table.given_cells_ *= c;
    table.target_cells_ = 1;
    for (auto c : table.target_cards_) table.target_cells_ *= c;
    if (counts.size() != table.given_cells_ * table.target_cells_)
        throw usage_error("ConditionalTable: count array size mismatch");

    table.cells_.resize(counts.size());
    const double t = static_cast<double>(table.target_cells_);
    for (std::size_t g = 0; g < table.given_cells_; ++g) {
        const double* slice = counts.data() + g * table.target_cells_;
        double total = 0.0;
        for (std::size_t m = 0; m < table.target_cells_; ++m) total += slice[m];
        double* out = table.cells_.data() + g * table.target_cells_;
        if (total + alpha * t <= 0.0) {
            // no observations, no smoothing: uniform placeholder
            if (empty_slices) empty_slices->push_back(g);
            for (std::size_t m = 0; m < table.target_cells_; ++m) out[m] = 1.0 / t;
        } else {
            if (empty_slices && total == 0.0) empty_slices->push_back(g);
            const double denom = total + alpha * t;
            for (std::size_t m = 0; m < table.target_cells_; ++m)
                out[m] = (slice[m] + alpha) / denom;
        }
    }
    return table;
}

ConditionalTable ConditionalTable::from_cells(std::vector<std::string> given_names,
                                              std::vector<std::size_t> given_cards,
                                              std::vector<std::string> target_names,
                                              std::vector<std::size_t> target_cards,
                                              std::vector<double> cells) {
    ConditionalTable table;
    table.given_names_ = std::move(given_names);
    table.given_cards_ = std::move(given_cards);
    table.target_names_ = std::move(target_names);
    table.target_cards_ = std::move(target_cards);
    table.given_cells_ = 1;
    for (auto c : table.given_cards_) table.given_cells_ *= c;
    table.target_cells_ = 1;
    for (auto c : table.target_cards_) table.target_cells_ *= c;
    if (cells.size() != table.given_cells_ * table.target_cells_)
        throw usage_error("ConditionalTable: cell array size mismatch");
    table.cells_ = std::move(cells);
    return table;
}

void ConditionalTable::validate(double tol) const {
    for (std::size_t g = 0; g < given_cells_; ++g) {
        double sum = 0.0;
        for (double v : slice(g)) {
            if (v < 0.0 || !std::isfinite(v))
                throw numeric_error("ConditionalTable: negative or non-finite cell");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw numeric_error("ConditionalTable: slice " + std::to_string(g) + " sums to " +
                                std::to_string(sum));
    }
}

}  // namespace fairsynth
