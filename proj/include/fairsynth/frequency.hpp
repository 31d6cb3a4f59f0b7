#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairsynth/schema.hpp"

namespace fairsynth {

/// Dense normalized counts over a named attribute subset, row-major in the
/// listed attribute order (always schema order within this codebase).
class FrequencyTable {
public:
    FrequencyTable() = default;
    FrequencyTable(std::vector<std::string> attr_names, std::vector<std::size_t> cards,
                   std::vector<double> cells);

    const std::vector<std::string>& attr_names() const { return attr_names_; }
    const std::vector<std::size_t>& cards() const { return cards_; }
    const std::vector<double>& cells() const { return cells_; }
    std::vector<double>& mutable_cells() { return cells_; }

    std::size_t n_cells() const { return cells_.size(); }
    std::size_t flat_index(std::span<const std::uint16_t> idx) const;
    void unflatten(std::size_t flat, std::span<std::uint16_t> out) const;
    double at(std::span<const std::uint16_t> idx) const { return cells_[flat_index(idx)]; }

    /// All cells >= 0 and summing to 1 within tol; throws otherwise.
    void validate(double tol = 1e-9) const;

    /// Sum out all attributes not in `keep` (names must be a subset, schema
    /// order preserved).
    FrequencyTable marginal(const std::vector<std::string>& keep) const;

    bool operator==(const FrequencyTable& other) const = default;

private:
    std::vector<std::string> attr_names_;
    std::vector<std::size_t> cards_;
    std::vector<double> cells_;
};

/// Empirical marginal p̂ over `attrs` (reordered to schema order); exact
/// count/N, no smoothing.
FrequencyTable empirical_table(const DataTable& table, const std::vector<std::string>& attrs);

/// Raw counts over `attrs` in schema order (same layout as empirical_table).
std::vector<double> count_table(const DataTable& table, const std::vector<std::string>& attrs,
                                std::vector<std::string>* ordered_names = nullptr,
                                std::vector<std::size_t>* cards = nullptr);

/// p(target | given), slices laid out given-major. Built from joint counts
/// with optional Laplace smoothing; an unsmoothed empty slice becomes uniform
/// and is reported so the caller can decide whether that is an error.
class ConditionalTable {
public:
    ConditionalTable() = default;

    static ConditionalTable from_counts(std::vector<std::string> given_names,
                                        std::vector<std::size_t> given_cards,
                                        std::vector<std::string> target_names,
                                        std::vector<std::size_t> target_cards,
                                        std::span<const double> counts,  // given-major
                                        double alpha,
                                        std::vector<std::size_t>* empty_slices = nullptr);

    const std::vector<std::string>& given_names() const { return given_names_; }
    const std::vector<std::string>& target_names() const { return target_names_; }
    const std::vector<std::size_t>& given_cards() const { return given_cards_; }
    const std::vector<std::size_t>& target_cards() const { return target_cards_; }

    std::size_t n_given_cells() const { return given_cells_; }
    std::size_t n_target_cells() const { return target_cells_; }

    std::span<const double> slice(std::size_t given_flat) const {
        return {cells_.data() + given_flat * target_cells_, target_cells_};
    }
    double prob(std::size_t given_flat, std::size_t target_flat) const {
        return cells_[given_flat * target_cells_ + target_flat];
    }
    const std::vector<double>& cells() const { return cells_; }

    void validate(double tol = 1e-9) const;

    // Serialization support: reconstruct from stored cells.
    static ConditionalTable from_cells(std::vector<std::string> given_names,
                                       std::vector<std::size_t> given_cards,
                                       std::vector<std::string> target_names,
                                       std::vector<std::size_t> target_cards,
                                       std::vector<double> cells);

    bool operator==(const ConditionalTable& other) const = default;

private:
    std::vector<std::string> given_names_, target_names_;
    std::vector<std::size_t> given_cards_, target_cards_;
    std::size_t given_cells_ = 0, target_cells_ = 0;
    std::vector<double> cells_;
};

}  // namespace fairsynth
