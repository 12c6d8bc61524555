#pragma once
// Reweights the income survey so its joint distribution of characteristics
// mimics a labour-panel wave:
//
//   w_new = w * Pr(panel | X) / Pr(survey | X) * gamma
//
// with Pr(. | X) from a pooled dataset-membership logit over households.
// A household's covariate row is its intercept, person-level terms summed
// over its adults, and household-level terms (children, size, state) once.

#include "nowcast/core_data.hpp"
#include "nowcast/covariates.hpp"
#include "nowcast/glm.hpp"

#include <span>
#include <optional>
#include <string>
#include <vector>

namespace nowcast {

struct MembershipModel {
    DesignBuilder design;
    GlmFit fit;
    double gamma = 1.0; // ratio of normalised dataset totals, survey / panel
    std::size_t n_survey = 0; // households
    std::size_t n_panel = 0;
    // Household rows can be exactly collinear even when person rows are not
    // (adult count = size - children = sum of any categorical's levels).
    // Columns linearly dependent on earlier ones are left out of the fit.
    std::vector<std::size_t> kept_columns;
    std::vector<std::string> dropped_columns;

    // Full household-design column names, before dropping.
    std::vector<std::string> column_names() const;
    std::size_t width() const { return design.width(); }
    // Full household row. Throws DataError for a household without adults.
    void household_row(const HouseholdRecord& h, std::span<double> out) const;
    // Pr(panel | X) / Pr(survey | X) for one household.
    double odds(const HouseholdRecord& h) const;
};

/// Pooled logit of panel membership (y = 1) against survey membership on all
/// households. Weights are rescaled within each dataset so each dataset's
/// total equals its household count.
MembershipModel fit_membership(const WeightedSample& survey, const WeightedSample& panel, const CovariateSpec& spec,
                               const GlmOptions& options = {});

struct WeightUpdate {
    WeightedSample sample;             // survey records, new weights, panel month
    std::vector<double> household_ratio; // aligned with sample.households, after trimming
    double gamma = 1.0;
    std::optional<double> trim_cap;
    std::size_t n_trimmed = 0;
};

/// New household weight = old weight * min(odds * gamma, cap).
/// `trim_quantile` caps ratios at that quantile of all household ratios;
/// nullopt disables trimming. The result keeps `survey`'s records untouched
/// apart from weights. Throws DataError when Pr(survey | X) is 0 for any household.
WeightUpdate compute_ratios(const MembershipModel& model, const WeightedSample& survey, double gamma,
                            std::optional<double> trim_quantile = 0.995, std::optional<MonthId> month = std::nullopt);

// Uniform rescale to the target total. Throws DataError on zero weight mass.
WeightedSample calibrate_total(WeightedSample sample, double population_target);
WeightedSample calibrate_total(const WeightUpdate& update, double population_target);

struct DiagnosticRow {
    std::string variable;
    double baseline = 0.0;
    double panel = 0.0;
    double modelled = 0.0;
};

struct ReweightDiagnostics {
    std::vector<DiagnosticRow> rows;
    double effective_sample_size = 0.0; // (sum w)^2 / sum w^2 over households
    double max_min_weight_ratio = 0.0;

    std::string to_csv() const;
};

// Demographic and labour-market shares of adults (15+), person weighted.
std::vector<DiagnosticRow> demographic_profile(const WeightedSample& baseline, const WeightedSample& panel,
                                               const WeightedSample& modelled);
ReweightDiagnostics reweight_diagnostics(const WeightedSample& before, const WeightedSample& after,
                                         const WeightedSample& panel);

double effective_sample_size(const WeightedSample& s);

struct LabourShares {
    double employed = 0.0;    // of adults
    double unemployed = 0.0;  // of adults
    double unemployment_rate = 0.0; // of the labour force
};
LabourShares labour_shares(const WeightedSample& s);

} // namespace nowcast
