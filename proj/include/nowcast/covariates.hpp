#pragma once
// Covariate specifications and design-matrix construction for the binary
// models (dataset-membership logit, transition probits).
//
// Categorical terms are dummy-coded against their lowest observed level.
// Industry, occupation and hours-band are employment-conditional: levels
// are collected from employed persons only and non-employed rows get all
// zeros (the labour-state dummies separate them from the reference level).

#include "nowcast/core_data.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nowcast {

enum class Factor : std::uint8_t {
    sex,
    married,
    overseas_born,
    education,
    labour_state,
    industry,
    occupation,
    hours_band,
    age_band,
    state,
};

enum class TermKind : std::uint8_t {
    age,
    age_squared,
    married,
    male,
    overseas_born,
    locally_born,
    education,    // categorical
    labour_state, // categorical
    industry,     // categorical, employment-conditional
    occupation,   // categorical, employment-conditional
    hours_band,   // categorical bands of 5 hours, employment-conditional
    usual_hours,
    full_time,
    n_jobs,
    unemployment_duration,
    male_x_employed,
    age_x_employed,
    children_0_4,
    children_5_14,
    household_size,
    state, // categorical
    cell,  // categorical: full interaction of `factors`
};

struct Term {
    TermKind kind;
    std::vector<Factor> factors; // only for TermKind::cell

    std::string name() const;
    bool categorical() const;
    // Same value for every member of a household (children, size, state).
    bool household_level() const;
};

struct CovariateSpec {
    std::vector<Term> terms;

    // Demographic, employment and household characteristics used to reweight
    // the income survey toward a labour-panel wave.
    static CovariateSpec reweighting_default();
    // Propensity of having been employed since the baseline month (not in labour force).
    static CovariateSpec employment_history();
    // Propensity of remaining employed, given employment in the previous month.
    static CovariateSpec employment_retention();
    // One cell term over the given discrete factors (saturated model).
    static CovariateSpec saturated(std::vector<Factor> factors);
};

int hours_band(double usual_hours);
int age_band(int age); // 15-24, 25-34, ..., 65+  -> 0..5; under 15 -> -1

struct DesignMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major

    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

// Column 0 is always the intercept.
class DesignBuilder {
public:
    DesignBuilder() = default;
    explicit DesignBuilder(CovariateSpec spec);

    // Collects categorical levels; call for every fitting observation before freeze().
    void observe(const PersonRecord& p, const HouseholdRecord& h);
    void freeze();
    bool frozen() const { return frozen_; }

    std::size_t width() const { return names_.size(); }
    const std::vector<std::string>& column_names() const { return names_; }
    // Term name owning each column ("intercept" for column 0).
    const std::vector<std::string>& column_terms() const { return column_terms_; }
    // Whether each column comes from a household-level term.
    const std::vector<bool>& household_columns() const { return household_columns_; }
    const CovariateSpec& spec() const { return spec_; }

    // Throws DataError naming the person and term when a categorical level
    // was not present when the builder was frozen.
    void fill(const PersonRecord& p, const HouseholdRecord& h, std::span<double> out) const;

private:
    CovariateSpec spec_;
    bool frozen_ = false;
    // per term: observed level codes (categorical terms only)
    std::vector<std::map<std::int64_t, std::size_t>> levels_;
    std::vector<std::size_t> offsets_; // first column of each term
    std::vector<std::string> names_;
    std::vector<std::string> column_terms_;
    std::vector<bool> household_columns_;
};

// Level code of a categorical term, or nullopt when the row has no level
// (employment-conditional terms on non-employed persons).
std::optional<std::int64_t> level_code(const Term& t, const PersonRecord& p, const HouseholdRecord& h);

} // namespace nowcast
