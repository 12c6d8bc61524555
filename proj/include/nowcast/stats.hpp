#pragma once
// Distributional outcome measures: weighted Gini, weighted median, poverty
// against an anchored line, and means by frozen baseline quintile.

#include "nowcast/core_data.hpp"
#include "nowcast/taxben.hpp"

#include <array>
#include <span>
#include <vector>

namespace nowcast {

/// Weighted Gini, G = 2 * sum w_i y_i (F_i - 1/2) / sum w_i y_i, with F_i the
/// midpoint cumulative weight share in ascending order of y. Equal to the
/// mean-absolute-difference definition. Negative values are allowed (the
/// result may then exceed 1). Throws DataError on zero weight mass or a
/// non-positive mean.
double gini(std::span<const double> values, std::span<const double> weights);

// Average of the lower and upper weighted medians.
double weighted_median(std::span<const double> values, std::span<const double> weights);

struct PovertyLine {
    double value = 0.0; // per equivalent adult, per fortnight
    MonthId anchor_month;
};

enum class PovertyUnit { person, household };

// One value per unit: households, or every member carrying its household's value.
struct UnitValues {
    std::vector<double> values;
    std::vector<double> weights;
};

UnitValues unit_values(const WeightedSample& s, std::span<const double> household_values, PovertyUnit unit);

// 0.5 x weighted median of the unit values.
PovertyLine anchor_poverty_line(const WeightedSample& baseline, std::span<const double> household_values,
                                PovertyUnit unit = PovertyUnit::person);

// Weighted share strictly below the line.
double poverty_rate(std::span<const double> values, std::span<const double> weights, const PovertyLine& line);
double poverty_rate(const WeightedSample& s, std::span<const double> household_values, const PovertyLine& line,
                    PovertyUnit unit = PovertyUnit::person);

enum class Concept {
    household_market_income,               // wage paid + business + investment, household total
    equivalised_disposable,                // before childcare
    equivalised_disposable_after_childcare,
    equivalised_after_housing,             // after childcare and housing
};

// Per-household values aligned with s.households.
std::vector<double> household_concept(const WeightedSample& s, std::span<const DisposableIncomeResult> results,
                                      Concept which);

// Individual market income (wage paid + business + investment) of persons
// aged 15-64, with their household weights.
UnitValues market_income_15_64(const WeightedSample& s, std::span<const DisposableIncomeResult> results);

struct QuintileTable {
    std::array<double, 5> means{}; // monthly units
    double all = 0.0;
};

/// Household-weighted mean of `household_values` (per fortnight) within each
/// baseline quintile, converted to monthly units. Throws DataError when a
/// household has no quintile or a quintile has no weight.
QuintileTable quintile_table(const WeightedSample& s, const QuintileMap& quintiles, std::span<const double> household_values);

// Percentage change of each cell relative to `base`.
QuintileTable percent_change(const QuintileTable& now, const QuintileTable& base);

} // namespace nowcast
