#include "nowcast/decompose.hpp"

#include "nowcast/error.hpp"

#include <algorithm>
#include <cmath>

namespace nowcast {

namespace {

Evaluated evaluate(WeightedSample s, const PolicyRegime& regime)
{
    Evaluated e;
    e.results = compute_sample(s, regime, s.month);
    e.sample = std::move(s);
    return e;
}

double measure_of(const Measure& m, const Evaluated& e) { return m(e.sample, e.results); }

} // namespace

std::string_view bound_name(Bound b) { return b == Bound::keep_jobs ? "keep_jobs" : "lose_jobs"; }
std::string_view bound_estimate_label(Bound b) { return b == Bound::keep_jobs ? "upper estimates" : "lower estimates"; }
std::string_view bound_impact_label(Bound b) { return b == Bound::keep_jobs ? "low impact" : "high impact"; }

WeightedSample build_counterfactual(const WeightedSample& nowcast, Bound bound)
{
    WeightedSample out = nowcast;
    for (auto& h : out.households)
        for (auto& p : h.members) {
            if (!p.jobkeeper_flag) continue;
            p.jobkeeper_flag = false;
            if (bound == Bound::lose_jobs) {
                p.labour_state = LabourState::unemployed;
                p.wage_income = 0.0;
                p.usual_hours = 0.0;
                p.n_jobs = 0;
                p.unemployment_duration = 0.0;
            }
        }
    return out;
}

ScenarioSet evaluate_scenarios(const WeightedSample& baseline, const WeightedSample& nowcast, const PolicyRegime& p0,
                               const PolicyRegime& p1)
{
    ScenarioSet s;
    s.baseline_month = baseline.month;
    s.month = nowcast.month;
    s.policy_active = p1.covers(nowcast.month);
    const PolicyRegime& now_regime = s.policy_active ? p1 : p0;

    s.pre = evaluate(baseline, p0);
    s.nowcast = evaluate(nowcast, now_regime);
    for (Bound b : kBounds) s.counterfactual[static_cast<std::size_t>(b)] = evaluate(build_counterfactual(nowcast, b), p0);

    PolicyRegime with_subsidy = p0;
    with_subsidy.covid.jobkeeper = now_regime.covid.jobkeeper;
    s.gross_only = evaluate(nowcast, with_subsidy);

    PolicyRegime no_childcare = now_regime;
    no_childcare.covid.free_childcare.active = false;
    no_childcare.covid.free_childcare.months.clear();
    s.no_free_childcare = evaluate(nowcast, no_childcare);
    return s;
}

DecompositionResult run_decomposition(const ScenarioSet& s, const Measure& measure)
{
    DecompositionResult r;
    r.pre = measure_of(measure, s.pre);
    r.nowcast = measure_of(measure, s.nowcast);
    for (Bound b : kBounds) {
        auto& e = r.bounds[static_cast<std::size_t>(b)];
        e.counterfactual = measure_of(measure, s.counterfactual[static_cast<std::size_t>(b)]);
        e.a = e.counterfactual - r.pre;
        e.b = r.nowcast - e.counterfactual;
        const double scale = std::max({std::abs(r.pre), std::abs(r.nowcast), std::abs(e.counterfactual), 1e-300});
        e.residual = std::abs((e.a + e.b) - r.total()) / scale;
    }
    return r;
}

DecompositionResult run_decomposition(const WeightedSample& baseline, const WeightedSample& nowcast,
                                      const PolicyRegime& p0, const PolicyRegime& p1, const Measure& measure)
{
    return run_decomposition(evaluate_scenarios(baseline, nowcast, p0, p1), measure);
}

Breakdown breakdown_disposable(const ScenarioSet& s, const Measure& measure)
{
    Breakdown b;
    const double pre = measure_of(measure, s.pre);
    const double now = measure_of(measure, s.nowcast);
    b.total = now - pre;
    b.gross_income = measure_of(measure, s.gross_only) - pre;
    b.free_childcare = now - measure_of(measure, s.no_free_childcare);
    b.rest = b.total - b.gross_income - b.free_childcare;
    return b;
}

} // namespace nowcast
