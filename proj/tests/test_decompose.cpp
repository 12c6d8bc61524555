#include "support.hpp"

#include "nowcast/csv.hpp"
#include "nowcast/decompose.hpp"
#include "nowcast/record_io.hpp"
#include "nowcast/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

using namespace nowcast;

namespace {

const MonthId kFeb{2020, 2};
const MonthId kApril{2020, 4};

double mean_of(const WeightedSample& s, std::span<const DisposableIncomeResult> r,
               const std::function<double(const DisposableIncomeResult&)>& f)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        num += s.households[i].weight * f(r[i]);
        den += s.households[i].weight;
    }
    return num / den;
}

const std::map<std::string, Measure>& measures()
{
    static const std::map<std::string, Measure> m = {
        {"mean_disposable",
         [](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
             return mean_of(s, r, [](const auto& x) { return x.disposable_income; });
         }},
        {"mean_after_housing",
         [](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
             return mean_of(s, r, [](const auto& x) { return x.after_housing_income; });
         }},
        {"mean_market_income",
         [](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
             return mean_of(s, r, [](const auto& x) { return x.market_income(); });
         }},
    };
    return m;
}

Measure gini_measure()
{
    return [](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
        const auto v = household_concept(s, r, Concept::equivalised_disposable);
        const auto u = unit_values(s, v, PovertyUnit::person);
        return gini(u.values, u.weights);
    };
}

using OracleKey = std::tuple<std::string, std::string, std::string>;

std::map<OracleKey, double> load_oracle()
{
    const auto t = csv::read_file(nowcast::test::source_dir() / "tests/fixtures/three_households/oracle.csv");
    std::map<OracleKey, double> out;
    for (const auto& row : t.rows) out[{row[0], row[1], row[2]}] = std::stod(row[3]);
    return out;
}

ScenarioSet fixture_scenarios()
{
    const auto dir = nowcast::test::source_dir() / "tests/fixtures/three_households";
    const auto samples = io::read_samples(dir / "persons.csv", dir / "households.csv");
    REQUIRE(samples.size() == 2);
    REQUIRE(samples[0].month == kFeb);
    REQUIRE(samples[1].month == kApril);
    return evaluate_scenarios(samples[0], samples[1], nowcast::test::baseline_regime(), nowcast::test::covid_regime());
}

} // namespace

TEST_CASE("three-household fixture matches the hand-computed oracle")
{
    const auto oracle = load_oracle();
    const auto s = fixture_scenarios();
    CHECK(s.policy_active);
    for (const auto& [name, measure] : measures()) {
        INFO(name);
        const auto r = run_decomposition(s, measure);
        CHECK(r.pre == doctest::Approx(oracle.at({name, "level", "pre"})).epsilon(1e-12));
        CHECK(r.nowcast == doctest::Approx(oracle.at({name, "level", "nowcast"})).epsilon(1e-12));
        for (Bound b : kBounds) {
            const std::string bn{bound_name(b)};
            CHECK(r.at(b).counterfactual == doctest::Approx(oracle.at({name, "level", bn})).epsilon(1e-12));
            CHECK(r.at(b).a == doctest::Approx(oracle.at({name, "effect_a", bn})).epsilon(1e-12));
            CHECK(r.at(b).b == doctest::Approx(oracle.at({name, "effect_b", bn})).epsilon(1e-12));
            CHECK(r.at(b).residual < 1e-12);
        }
    }
    const auto bd = breakdown_disposable(s, measures().at("mean_disposable"));
    CHECK(bd.total == doctest::Approx(oracle.at({"mean_disposable", "breakdown", "total"})).epsilon(1e-12));
    CHECK(bd.gross_income == doctest::Approx(oracle.at({"mean_disposable", "breakdown", "gross_income"})).epsilon(1e-12));
    CHECK(bd.free_childcare == 0.0);
    CHECK(bd.rest == doctest::Approx(oracle.at({"mean_disposable", "breakdown", "rest"})).epsilon(1e-12));
}

TEST_CASE("counterfactual samples for one subsidised worker")
{
    auto w = nowcast::test::person(11, 1, 30, LabourState::employed, 800.0);
    w.jobkeeper_flag = true;
    const auto s = nowcast::test::sample(kApril, {nowcast::test::household(1, {w, nowcast::test::person(12, 1, 31)})});
    const auto keep = build_counterfactual(s, Bound::keep_jobs);
    const auto lose = build_counterfactual(s, Bound::lose_jobs);
    const auto& k = keep.households[0].members[0];
    const auto& l = lose.households[0].members[0];
    CHECK(k.wage_income == 800.0);
    CHECK(k.employed());
    CHECK_FALSE(k.jobkeeper_flag);
    CHECK(l.wage_income == 0.0);
    CHECK(l.labour_state == LabourState::unemployed);
    CHECK(l.usual_hours == 0.0);
    CHECK_FALSE(l.jobkeeper_flag);
    CHECK_NOTHROW(validate(lose));
    // Everyone else is untouched.
    CHECK(lose.households[0].members[1].age == 31);
    CHECK(lose.households[0].members[1].labour_state == LabourState::not_in_labour_force);
    // The job loser qualifies for the pre-crisis unemployment payment.
    const auto r = compute_sample(lose, nowcast::test::baseline_regime(), kApril);
    CHECK(r[0].benefits_by_type[static_cast<std::size_t>(Benefit::jobseeker)] == doctest::Approx(557.85));
}

TEST_CASE("without subsidised persons both bounds equal the nowcast sample")
{
    Rng rng{4};
    const auto s = nowcast::test::random_sample(rng, kApril, 50, false);
    for (Bound b : kBounds) {
        const auto c = build_counterfactual(s, b);
        for (std::size_t i = 0; i < s.households.size(); ++i)
            for (std::size_t j = 0; j < s.households[i].members.size(); ++j) {
                CHECK(c.households[i].members[j].wage_income == s.households[i].members[j].wage_income);
                CHECK(c.households[i].members[j].labour_state == s.households[i].members[j].labour_state);
            }
    }
}

TEST_CASE("identities and bound ordering on random fixtures")
{
    const auto p0 = nowcast::test::baseline_regime();
    const auto p1 = nowcast::test::covid_regime();
    Rng rng{8};
    for (int rep = 0; rep < 100; ++rep) {
        const auto base = nowcast::test::random_sample(rng, kFeb, 30, false);
        const auto now = nowcast::test::random_sample(rng, kApril, 30, true);
        const auto s = evaluate_scenarios(base, now, p0, p1);
        for (const auto& measure : {measures().at("mean_disposable"), measures().at("mean_after_housing"), gini_measure()}) {
            const auto r = run_decomposition(s, measure);
            for (Bound b : kBounds) {
                const double scale = std::max({std::abs(r.pre), std::abs(r.nowcast), std::abs(r.at(b).counterfactual)});
                REQUIRE(std::abs(r.at(b).a + r.at(b).b - r.total()) <= 1e-9 * scale);
            }
        }
        const auto mi = run_decomposition(s, measures().at("mean_market_income"));
        REQUIRE(mi.at(Bound::lose_jobs).counterfactual <= mi.at(Bound::keep_jobs).counterfactual + 1e-9);
        REQUIRE(mi.at(Bound::keep_jobs).counterfactual <= mi.nowcast + 1e-9);
        const auto md = run_decomposition(s, measures().at("mean_disposable"));
        REQUIRE(md.at(Bound::lose_jobs).counterfactual <= md.at(Bound::keep_jobs).counterfactual + 1e-9);

        const auto bd = breakdown_disposable(s, measures().at("mean_disposable"));
        REQUIRE(std::abs(bd.gross_income + bd.free_childcare + bd.rest - bd.total) <= 1e-9 * (1.0 + std::abs(bd.total)));
    }
}

TEST_CASE("degenerate regimes")
{
    const auto p0 = nowcast::test::baseline_regime();
    Rng rng{12};
    const auto base = nowcast::test::random_sample(rng, kFeb, 40, false);

    // Same sample, same regime.
    auto same = base;
    const auto r0 = run_decomposition(base, same, p0, p0, measures().at("mean_disposable"));
    for (Bound b : kBounds) {
        CHECK(r0.at(b).a == 0.0);
        CHECK(r0.at(b).b == 0.0);
    }

    // p1 = p0 on a shocked sample: no policy response under keep_jobs.
    auto p1 = p0;
    p1.regime_id = "no_measures";
    const auto shocked = nowcast::test::random_sample(rng, kApril, 40, true);
    for (const auto& [name, measure] : measures()) {
        const auto r = run_decomposition(base, shocked, p0, p1, measure);
        CHECK(r.at(Bound::keep_jobs).b == 0.0);
    }
}

TEST_CASE("breakdown: childcare-only change and households without childcare")
{
    const auto p0 = nowcast::test::baseline_regime();
    auto p1 = p0;
    p1.covid.free_childcare.active = true;
    p1.covid.free_childcare.months = {kApril};

    auto h = nowcast::test::household(1, {nowcast::test::person(11, 1, 35, LabourState::employed, 1200.0),
                                          nowcast::test::person(12, 1, 3)});
    h.childcare_cost = 150.0;
    auto base = nowcast::test::sample(kApril, {h});
    const auto s = evaluate_scenarios(base, base, p0, p1);
    const Measure after_childcare = [](const WeightedSample& smp, std::span<const DisposableIncomeResult> r) {
        return mean_of(smp, r, [](const auto& x) { return x.disposable_after_childcare; });
    };
    const auto bd = breakdown_disposable(s, after_childcare);
    CHECK(bd.total == doctest::Approx(150.0));
    CHECK(bd.free_childcare == doctest::Approx(150.0));
    CHECK(bd.gross_income == 0.0);
    CHECK(bd.rest == doctest::Approx(0.0));

    base.households[0].childcare_cost = 0.0;
    const auto none = breakdown_disposable(evaluate_scenarios(base, base, p0, p1), after_childcare);
    CHECK(none.free_childcare == 0.0);
}

TEST_CASE("presentation labels")
{
    CHECK(bound_name(Bound::keep_jobs) == "keep_jobs");
    CHECK(bound_estimate_label(Bound::lose_jobs) == "lower estimates");
    CHECK(bound_impact_label(Bound::lose_jobs) == "high impact");
    CHECK(bound_impact_label(Bound::keep_jobs) == "low impact");
}
