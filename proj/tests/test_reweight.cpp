#include "support.hpp"

#include "nowcast/error.hpp"
#include "nowcast/reweight.hpp"
#include "nowcast/rng.hpp"
#include "nowcast/synthpop.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace nowcast;
using nowcast::test::household;
using nowcast::test::person;

namespace {

const MonthId kSurvey{2018, 3};
const MonthId kPanel{2020, 5};

// Single-adult households; `counts` gives households per (sex, labour state) cell.
WeightedSample cells(MonthId month, const std::map<std::pair<Sex, LabourState>, int>& counts, std::int64_t first_id,
                     double weight = 1.0)
{
    WeightedSample s;
    s.month = month;
    std::int64_t id = first_id;
    for (const auto& [cell, n] : counts)
        for (int i = 0; i < n; ++i, ++id) {
            auto p = person(id * 10, id, 40, cell.second, 900.0);
            p.sex = cell.first;
            s.households.push_back(household(id, {p}, weight));
        }
    return s;
}

double cell_share(const WeightedSample& s, Sex sex)
{
    double a = 0.0;
    for (const auto& h : s.households)
        if (h.members[0].sex == sex) a += h.weight;
    return a / s.total_weight();
}

MembershipModel zero_model(const WeightedSample& s, const CovariateSpec& spec)
{
    MembershipModel m;
    m.design = DesignBuilder(spec);
    for (const auto& h : s.households)
        for (const auto& p : h.members) m.design.observe(p, h);
    m.design.freeze();
    for (std::size_t j = 0; j < m.design.width(); ++j) m.kept_columns.push_back(j);
    m.fit.coefficients.assign(m.design.width(), 0.0);
    return m;
}

} // namespace

TEST_CASE("zero-coefficient model with gamma one leaves weights unchanged")
{
    SynthConfig cfg;
    cfg.n_households = 200;
    const auto s = gen_baseline_survey(cfg);
    const auto m = zero_model(s, CovariateSpec::reweighting_default());
    const auto u = compute_ratios(m, s, 1.0, std::nullopt);
    for (std::size_t i = 0; i < s.households.size(); ++i) CHECK(u.sample.households[i].weight == s.households[i].weight);
}

TEST_CASE("saturated binary covariate reproduces the cell-proportion ratios")
{
    // Survey shares {0.5, 0.5}, panel shares {0.25, 0.75}.
    const auto survey = cells(kSurvey, {{{Sex::male, LabourState::employed}, 40}, {{Sex::female, LabourState::employed}, 40}}, 1, 3.0);
    const auto panel = cells(kPanel, {{{Sex::male, LabourState::employed}, 30}, {{Sex::female, LabourState::employed}, 90}}, 1000, 7.0);
    const auto m = fit_membership(survey, panel, CovariateSpec::saturated({Factor::sex}));
    CHECK(m.gamma == doctest::Approx(80.0 / 120.0));
    const auto u = compute_ratios(m, survey, m.gamma, std::nullopt);
    for (std::size_t i = 0; i < survey.households.size(); ++i) {
        const double oracle = survey.households[i].members[0].sex == Sex::male ? 0.25 / 0.5 : 0.75 / 0.5;
        CHECK(u.household_ratio[i] == doctest::Approx(oracle).epsilon(1e-8));
    }
    CHECK(u.sample.total_weight() == doctest::Approx(survey.total_weight()).epsilon(1e-8));
    CHECK(cell_share(u.sample, Sex::male) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("ratios scale linearly in gamma")
{
    const auto survey = cells(kSurvey, {{{Sex::male, LabourState::employed}, 20}, {{Sex::female, LabourState::unemployed}, 10}}, 1);
    const auto panel = cells(kPanel, {{{Sex::male, LabourState::employed}, 10}, {{Sex::female, LabourState::unemployed}, 25}}, 500);
    const auto m = fit_membership(survey, panel, CovariateSpec::saturated({Factor::sex}));
    const auto one = compute_ratios(m, survey, 1.0, std::nullopt);
    const auto two = compute_ratios(m, survey, 2.0, std::nullopt);
    for (std::size_t i = 0; i < survey.households.size(); ++i)
        CHECK(two.sample.households[i].weight == 2.0 * one.sample.households[i].weight);
    CHECK_THROWS_AS(compute_ratios(m, survey, 0.0, std::nullopt), ConfigError);
}

TEST_CASE("saturated labour-state cells match panel shares and unemployment")
{
    const auto survey = cells(kSurvey,
                              {{{Sex::male, LabourState::employed}, 300},
                               {{Sex::male, LabourState::unemployed}, 20},
                               {{Sex::male, LabourState::not_in_labour_force}, 150},
                               {{Sex::female, LabourState::employed}, 260},
                               {{Sex::female, LabourState::unemployed}, 15},
                               {{Sex::female, LabourState::not_in_labour_force}, 200}},
                              1, 2.0);
    const auto panel = cells(kPanel,
                             {{{Sex::male, LabourState::employed}, 250},
                              {{Sex::male, LabourState::unemployed}, 45},
                              {{Sex::male, LabourState::not_in_labour_force}, 190},
                              {{Sex::female, LabourState::employed}, 230},
                              {{Sex::female, LabourState::unemployed}, 30},
                              {{Sex::female, LabourState::not_in_labour_force}, 240}},
                             5000, 5.0);
    const auto m = fit_membership(survey, panel, CovariateSpec::saturated({Factor::sex, Factor::labour_state}));
    const auto u = compute_ratios(m, survey, m.gamma, std::nullopt);
    const auto out = calibrate_total(u, panel.total_weight());
    CHECK(labour_shares(out).unemployment_rate == doctest::Approx(labour_shares(panel).unemployment_rate).epsilon(1e-8));
    CHECK(labour_shares(out).employed == doctest::Approx(labour_shares(panel).employed).epsilon(1e-8));
    // Records other than weights are untouched.
    for (std::size_t i = 0; i < survey.households.size(); ++i) {
        CHECK(out.households[i].members[0].wage_income == survey.households[i].members[0].wage_income);
        CHECK(out.households[i].members[0].labour_state == survey.households[i].members[0].labour_state);
    }
}

TEST_CASE("identical sources give zero coefficients and the dataset share")
{
    SynthConfig cfg;
    cfg.n_households = 500;
    const auto s = gen_baseline_survey(cfg);
    const auto m = fit_membership(s, s, CovariateSpec::reweighting_default());
    for (double b : m.fit.coefficients) CHECK(std::abs(b) < 1e-9);
    CHECK(m.gamma == 1.0);
    const auto u = compute_ratios(m, s, m.gamma, std::nullopt);
    for (std::size_t i = 0; i < s.households.size(); ++i)
        CHECK(u.sample.households[i].weight == doctest::Approx(s.households[i].weight).epsilon(1e-9));
    const auto diag = reweight_diagnostics(s, u.sample, s);
    for (const auto& row : diag.rows) CHECK(row.modelled == doctest::Approx(row.baseline).epsilon(1e-9));
}

TEST_CASE("reweighting a synthetic survey tracks the panel unemployment rate")
{
    SynthConfig cfg;
    cfg.n_households = 5000;
    const auto survey = gen_baseline_survey(cfg);
    const auto waves = gen_labour_panel(cfg, survey);
    const auto& may = waves.at(3);
    REQUIRE(may.month == kPanel);
    const auto m = fit_membership(survey, may, CovariateSpec::reweighting_default());
    const auto u = compute_ratios(m, survey, m.gamma);
    const auto out = calibrate_total(u, may.total_weight());
    CHECK(std::abs(labour_shares(out).unemployment_rate - labour_shares(may).unemployment_rate) <= 0.005);
    CHECK(u.n_trimmed <= survey.households.size() / 100);
}

TEST_CASE("trimming caps ratios at the requested quantile")
{
    SynthConfig cfg;
    cfg.n_households = 1000;
    const auto survey = gen_baseline_survey(cfg);
    const auto waves = gen_labour_panel(cfg, survey);
    const auto m = fit_membership(survey, waves.back(), CovariateSpec::reweighting_default());
    const auto u = compute_ratios(m, survey, m.gamma, 0.9);
    REQUIRE(u.trim_cap);
    std::size_t at_cap = 0;
    for (double r : u.household_ratio) {
        CHECK(r <= *u.trim_cap);
        at_cap += r == *u.trim_cap;
    }
    CHECK(at_cap >= 100);
    CHECK(u.n_trimmed <= 100);
}

TEST_CASE("calibration rescales to the target exactly")
{
    auto s = cells(kSurvey, {{{Sex::male, LabourState::employed}, 8}}, 1, 100.0);
    const auto out = calibrate_total(s, 1000.0);
    for (const auto& h : out.households) CHECK(h.weight == doctest::Approx(125.0).epsilon(1e-15));
    const auto same = calibrate_total(s, 800.0);
    for (const auto& h : same.households) CHECK(h.weight == 100.0);

    Rng rng{5};
    for (int rep = 0; rep < 200; ++rep) {
        for (auto& h : s.households) h.weight = 1e-3 + 1e4 * uniform01(rng);
        const double target = 1.0 + 1e7 * uniform01(rng);
        CHECK(std::abs(calibrate_total(s, target).total_weight() / target - 1.0) < 1e-9);
    }
    for (auto& h : s.households) h.weight = 0.0;
    CHECK_THROWS_AS(calibrate_total(s, 10.0), DataError);
}

TEST_CASE("effective sample size of equal weights is the household count")
{
    const auto s = cells(kSurvey, {{{Sex::female, LabourState::employed}, 37}}, 1, 4.5);
    CHECK(effective_sample_size(s) == doctest::Approx(37.0).epsilon(1e-14));
}

TEST_CASE("a household without adults cannot be scored")
{
    const auto s = cells(kSurvey, {{{Sex::female, LabourState::employed}, 3}}, 1);
    const auto m = zero_model(s, CovariateSpec::saturated({Factor::sex}));
    const auto child = household(99, {person(990, 99, 10)});
    std::vector<double> row(m.width());
    CHECK_THROWS_WITH_AS(m.household_row(child, row), "household 99 has no adult to score", DataError);
}
