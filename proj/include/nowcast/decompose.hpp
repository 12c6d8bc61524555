#pragma once
// Sequential decomposition of a distributional change
//
//   I(p1, y1) - I(p0, y0) = [I(p0, y1*) - I(p0, y0)] + [I(p1, y1) - I(p0, y1*)]
//                              income shock A             policy response B
//
// with two bounds on y1*: subsidised jobs kept, or lost.

#include "nowcast/core_data.hpp"
#include "nowcast/taxben.hpp"

#include <array>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace nowcast {

enum class Bound { keep_jobs, lose_jobs };
inline constexpr std::array<Bound, 2> kBounds = {Bound::keep_jobs, Bound::lose_jobs};

std::string_view bound_name(Bound b); // "keep_jobs" / "lose_jobs"
// Labels used by the published tables: keep_jobs is the "upper estimates" /
// "low impact" scenario, lose_jobs the "lower estimates" / "high impact" one.
std::string_view bound_estimate_label(Bound b);
std::string_view bound_impact_label(Bound b);

/// keep_jobs: subsidy flags cleared, employment and usual wage intact.
/// lose_jobs: flagged persons become unemployed with no wage, hours or jobs.
WeightedSample build_counterfactual(const WeightedSample& nowcast, Bound bound);

struct Evaluated {
    WeightedSample sample;
    std::vector<DisposableIncomeResult> results;
};

struct ScenarioSet {
    MonthId baseline_month;
    MonthId month;
    Evaluated pre;                          // (p0, y0) at the baseline month
    Evaluated nowcast;                      // (p1, y1); p0 when p1 does not cover the month
    std::array<Evaluated, 2> counterfactual; // (p0, y1*) per bound
    Evaluated gross_only;                   // p0 with p1's wage subsidy, on y1
    Evaluated no_free_childcare;            // p1 without free childcare, on y1
    bool policy_active = false;             // p1 covers the month
};

ScenarioSet evaluate_scenarios(const WeightedSample& baseline, const WeightedSample& nowcast, const PolicyRegime& p0,
                               const PolicyRegime& p1);

using Measure = std::function<double(const WeightedSample&, std::span<const DisposableIncomeResult>)>;

struct BoundEffects {
    double counterfactual = 0.0; // I(p0, y1*)
    double a = 0.0;
    double b = 0.0;
    double residual = 0.0; // |A + B - (I11 - I00)| relative to the largest magnitude involved
};

struct DecompositionResult {
    double pre = 0.0;     // I(p0, y0)
    double nowcast = 0.0; // I(p1, y1)
    std::array<BoundEffects, 2> bounds;

    double total() const { return nowcast - pre; }
    const BoundEffects& at(Bound b) const { return bounds[static_cast<std::size_t>(b)]; }
};

DecompositionResult run_decomposition(const ScenarioSet& s, const Measure& measure);

// Convenience wrapper evaluating the scenarios first.
DecompositionResult run_decomposition(const WeightedSample& baseline, const WeightedSample& nowcast,
                                      const PolicyRegime& p0, const PolicyRegime& p1, const Measure& measure);

struct Breakdown {
    double total = 0.0;
    double gross_income = 0.0;   // I(p0 + subsidy, y1) - I(p0, y0)
    double free_childcare = 0.0; // I(p1, y1) - I(p1 without free childcare, y1)
    double rest = 0.0;           // total - the two above
};

Breakdown breakdown_disposable(const ScenarioSet& s, const Measure& measure);

} // namespace nowcast
