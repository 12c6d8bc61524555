#include "nowcast/synthpop.hpp"

#include "nowcast/covariates.hpp"
#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"
#include "nowcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace nowcast {

namespace {

// Employment by industry, February 2020 (thousands).
constexpr std::array<double, kIndustryCount> kIndustryEmployment = {
    337.1, 238.5, 908.9, 136.1, 1182.1, 385.7, 1261.4, 930.5, 666.4, 211.6,
    474.5, 213.7, 1171.9, 449.9, 828.5, 1096.6, 1798.3, 251.9, 492.9};

// Change in employment by industry, February to May 2020.
constexpr std::array<double, kIndustryCount> kIndustryChange = {
    0.072, -0.047, -0.049, 0.238, -0.002, 0.010, -0.062, -0.297, -0.142, -0.112,
    0.032, 0.029, -0.054, -0.127, 0.021, -0.055, -0.037, -0.365, -0.102};

// Log hourly-wage premium by industry.
constexpr std::array<double, kIndustryCount> kIndustryWagePremium = {
    -0.15, 0.45, 0.0, 0.25, 0.05, 0.0, -0.2, -0.3, 0.05, 0.15, 0.25, 0.05, 0.2, -0.1, 0.12, 0.08, 0.02, -0.15, -0.1};

constexpr std::array<double, kOccupationCount> kOccupationWagePremium = {0.3, 0.25, 0.05, -0.15, -0.05, -0.2, -0.05, -0.2};

// Part-time propensity multiplier by industry (retail, hospitality, arts lean part-time).
constexpr std::array<double, kIndustryCount> kIndustryPartTime = {
    0.8, 0.3, 0.6, 0.5, 0.6, 0.7, 1.6, 2.0, 0.8, 1.0, 0.8, 1.0, 0.8, 1.2, 0.8, 1.3, 1.4, 1.6, 1.1};

struct Demography {
    // Adult age-band draw for households without children: 15-24, 25-64, 65+.
    std::array<double, 3> adult_bands{0.188, 0.539, 0.273};
    double single_male = 0.52;
    double single_parent_male = 0.18;
    std::array<double, 3> education{0.38, 0.34, 0.28};
    double overseas_born = 0.341;
    double employment_scale = 1.0;
};

Demography survey_demography() { return {}; }

Demography panel_demography()
{
    Demography d;
    d.adult_bands = {0.193, 0.552, 0.255};
    d.education = {0.37, 0.34, 0.29};
    d.overseas_born = 0.329;
    d.employment_scale = 1.01;
    return d;
}

template <std::size_t N>
std::size_t draw_index(Rng& rng, const std::array<double, N>& probs)
{
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < N; ++i) {
        if (u < probs[i]) return i;
        u -= probs[i];
    }
    return N - 1;
}

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

double normal(Rng& rng, double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); }

int uniform_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1)); }

class HouseholdFactory {
public:
    HouseholdFactory(const Demography& demo, bool with_income, std::int64_t first_id)
        : demo_(demo), with_income_(with_income), next_household_(first_id), next_person_(first_id * 10)
    {
    }

    HouseholdRecord make(Rng& rng, double weight)
    {
        HouseholdRecord h;
        h.household_id = HouseholdId{next_household_++};
        h.state = static_cast<State>(draw_index(rng, std::array<double, kStateCount>{0.318, 0.26, 0.201, 0.069, 0.104, 0.021, 0.01, 0.017}));
        h.weight = weight;

        // single, couple, couple with children, single parent, group
        const auto type = draw_index(rng, std::array<double, 5>{0.25, 0.27, 0.25, 0.08, 0.15});
        const bool kids = type == 2 || type == 3;
        const int n_adults = type == 0 || type == 3 ? 1 : (type == 4 ? 3 : 2);
        for (int a = 0; a < n_adults; ++a) {
            PersonRecord p = base_person(h.household_id);
            p.age = kids ? uniform_int(rng, 22, 54) : adult_age(rng);
            if (type == 1 || type == 2) {
                p.sex = a == 0 ? Sex::male : Sex::female;
                p.marital = Marital::partnered;
                if (a == 1) p.age = std::clamp(h.members[0].age + uniform_int(rng, -5, 3), 18, 95);
            } else {
                const double pm = type == 3 ? demo_.single_parent_male : (type == 0 ? demo_.single_male : 0.5);
                p.sex = bernoulli(rng, pm) ? Sex::male : Sex::female;
                p.marital = Marital::single;
            }
            h.members.push_back(p);
        }
        if (kids) {
            const int n_kids = 1 + static_cast<int>(draw_index(rng, std::array<double, 3>{0.45, 0.4, 0.15}));
            for (int c = 0; c < n_kids; ++c) {
                PersonRecord child = base_person(h.household_id);
                child.age = uniform_int(rng, 0, 14);
                child.sex = bernoulli(rng, 0.51) ? Sex::male : Sex::female;
                h.members.push_back(child);
            }
        }
        sync_child_counts(h);
        for (auto& p : h.members)
            if (p.is_adult()) assign_adult(rng, p, h);
        if (with_income_) assign_household_costs(rng, h);
        if (with_income_) assign_welfare_flags(h);
        return h;
    }

private:
    PersonRecord base_person(HouseholdId hid)
    {
        PersonRecord p;
        p.person_id = PersonId{next_person_++};
        p.household_id = hid;
        return p;
    }

    int adult_age(Rng& rng)
    {
        switch (draw_index(rng, demo_.adult_bands)) {
        case 0: return uniform_int(rng, 15, 24);
        case 1: return uniform_int(rng, 25, 64);
        default: return 65 + static_cast<int>(std::floor(28.0 * std::pow(uniform01(rng), 1.6)));
        }
    }

    void assign_adult(Rng& rng, PersonRecord& p, const HouseholdRecord& h)
    {
        p.overseas_born = bernoulli(rng, demo_.overseas_born);
        p.education = static_cast<Education>(draw_index(rng, demo_.education));
        if (p.age < 21 && p.education == Education::bachelor_or_higher) p.education = Education::school;

        static constexpr std::array<double, kAgeBandCount> kEmployment = {0.58, 0.80, 0.80, 0.79, 0.64, 0.13};
        const int band = age_band(p.age);
        double emp = kEmployment[static_cast<std::size_t>(band)] * demo_.employment_scale;
        if (p.sex == Sex::female && h.n_children_0_4 > 0) emp *= 0.72;
        if (p.education == Education::bachelor_or_higher) emp *= 1.08;
        emp = std::min(emp, 0.95);
        const double ur = band == 0 ? 0.12 : 0.045;
        const double unemp = emp * ur / (1.0 - ur);

        const double u = uniform01(rng);
        if (u < emp) {
            p.labour_state = LabourState::employed;
            p.industry = static_cast<Industry>(draw_index(rng, kIndustryEmployment));
            p.occupation = draw_occupation(rng, p.education);
            double pt = p.sex == Sex::female ? 0.42 : 0.2;
            if (band == 0) pt = 0.6;
            if (band == 5) pt = 0.55;
            pt = std::min(0.9, pt * kIndustryPartTime[static_cast<std::size_t>(*p.industry)]);
            p.usual_hours = bernoulli(rng, pt) ? uniform_int(rng, 4, 34)
                                               : std::clamp(std::round(normal(rng, 41.0, 6.0)), 35.0, 70.0);
            p.n_jobs = bernoulli(rng, 0.06) ? 2 : 1;
        } else if (u < emp + unemp) {
            p.labour_state = LabourState::unemployed;
            p.unemployment_duration = 1.0 + std::floor(-6.0 * std::log(1.0 - uniform01(rng)));
        } else {
            p.labour_state = LabourState::not_in_labour_force;
        }
        if (with_income_) assign_income(rng, p);
    }

    static Occupation draw_occupation(Rng& rng, Education e)
    {
        static constexpr std::array<double, kOccupationCount> kDegree = {0.2, 0.45, 0.05, 0.06, 0.12, 0.06, 0.02, 0.04};
        static constexpr std::array<double, kOccupationCount> kCert = {0.12, 0.08, 0.28, 0.13, 0.13, 0.08, 0.09, 0.09};
        static constexpr std::array<double, kOccupationCount> kSchool = {0.08, 0.05, 0.1, 0.13, 0.14, 0.17, 0.1, 0.23};
        const auto& probs = e == Education::bachelor_or_higher ? kDegree : (e == Education::certificate ? kCert : kSchool);
        return static_cast<Occupation>(draw_index(rng, probs));
    }

    void assign_income(Rng& rng, PersonRecord& p)
    {
        static constexpr std::array<double, kAgeBandCount> kAgeWage = {-0.35, -0.1, 0.05, 0.05, 0.0, -0.05};
        const int band = age_band(p.age);
        if (p.employed()) {
            double mu = std::log(36.0) + kIndustryWagePremium[static_cast<std::size_t>(*p.industry)] +
                        kOccupationWagePremium[static_cast<std::size_t>(*p.occupation)] +
                        kAgeWage[static_cast<std::size_t>(band)];
            if (p.education == Education::bachelor_or_higher) mu += 0.25;
            if (p.education == Education::certificate) mu += 0.05;
            const double hourly = std::exp(normal(rng, mu, 0.35));
            p.wage_income = std::round(hourly * p.usual_hours * 2.0 * 100.0) / 100.0;
            if (bernoulli(rng, 0.09)) {
                p.business_income = std::round(std::exp(normal(rng, std::log(900.0), 0.9)) * 100.0) / 100.0;
                // Mostly self-employed: shrink the wage share.
                p.wage_income = std::round(p.wage_income * 0.3 * 100.0) / 100.0;
            }
        }
        const double p_invest = 0.25 + (p.age >= 55 ? 0.35 : 0.0);
        if (bernoulli(rng, p_invest))
            p.investment_income = std::round(std::exp(normal(rng, std::log(20.0 + 1.5 * p.age), 1.2)) * 100.0) / 100.0;
        // Disability- and carer-like transfers outside the modelled payments.
        if (p.labour_state == LabourState::not_in_labour_force && p.age >= 22 && p.age < 66 && bernoulli(rng, 0.45))
            p.other_income = std::round(std::exp(normal(rng, std::log(700.0), 0.25)) * 100.0) / 100.0;
        else if (p.labour_state == LabourState::not_in_labour_force && p.age < 22 && bernoulli(rng, 0.4))
            p.other_income = std::round(std::exp(normal(rng, std::log(300.0), 0.3)) * 100.0) / 100.0;
        else if (p.age >= 60 && bernoulli(rng, 0.3))
            p.other_income = std::round(std::exp(normal(rng, std::log(650.0), 0.6)) * 100.0) / 100.0;
        else if (bernoulli(rng, 0.05))
            p.other_income = std::round(std::exp(normal(rng, std::log(150.0), 0.5)) * 100.0) / 100.0;
    }

    void assign_household_costs(Rng& rng, HouseholdRecord& h)
    {
        int oldest = 0;
        for (const auto& p : h.members) oldest = std::max(oldest, p.age);
        const double own_outright = oldest >= 60 ? 0.75 : 0.18;
        const double u = uniform01(rng);
        double cost = 0.0;
        if (u < own_outright) cost = std::exp(normal(rng, std::log(45.0), 0.3));
        else if (u < own_outright + (1.0 - own_outright) * 0.5) cost = std::exp(normal(rng, std::log(950.0), 0.4));
        else cost = std::exp(normal(rng, std::log(520.0 + 90.0 * static_cast<double>(h.members.size())), 0.3));
        h.housing_cost = std::round(cost * 100.0) / 100.0;

        bool adults_work = true;
        for (const auto& p : h.members)
            if (p.is_adult() && !p.employed()) adults_work = false;
        double care = 0.0;
        if (h.n_children_0_4 > 0 && bernoulli(rng, adults_work ? 0.75 : 0.25))
            care += h.n_children_0_4 * std::exp(normal(rng, std::log(160.0), 0.5));
        if (h.n_children_5_14 > 0 && bernoulli(rng, adults_work ? 0.25 : 0.05))
            care += std::exp(normal(rng, std::log(60.0), 0.4));
        h.childcare_cost = std::round(care * 100.0) / 100.0;
    }

    // Receipt flags as reported at collection; entitlements are recomputed by the rules engine.
    static void assign_welfare_flags(HouseholdRecord& h)
    {
        double household_income = 0.0;
        for (const auto& p : h.members) household_income += p.private_income();
        bool any_partner = false;
        for (const auto& p : h.members) any_partner = any_partner || p.marital == Marital::partnered;
        bool young_child = false;
        for (const auto& p : h.members) young_child = young_child || p.age < 8;
        bool first_adult = true;
        for (auto& p : h.members) {
            if (!p.is_adult()) continue;
            if (p.age >= 66 && p.private_income() < 2000.0) p.welfare_flags.set(Benefit::pension);
            if (p.labour_state == LabourState::unemployed && p.age >= 22 && p.age < 66) p.welfare_flags.set(Benefit::jobseeker);
            if (p.labour_state == LabourState::unemployed && p.age < 22) p.welfare_flags.set(Benefit::youth_allowance);
            if (!any_partner && young_child && p.private_income() < 1000.0) p.welfare_flags.set(Benefit::parenting);
            if (first_adult && h.n_children() > 0 && household_income < 4000.0) p.welfare_flags.set(Benefit::ftb);
            first_adult = false;
        }
    }

    Demography demo_;
    bool with_income_;
    std::int64_t next_household_;
    std::int64_t next_person_;
};

double band_exit_multiplier(int band) { return kExitAgeMultiplier[static_cast<std::size_t>(std::max(band, 0))]; }

} // namespace

const ShockMonth* ShockProfile::find(MonthId m) const
{
    for (const auto& s : months)
        if (s.month == m) return &s;
    return nullptr;
}

ShockMonth ShockProfile::quiet(MonthId m)
{
    ShockMonth s;
    s.month = m;
    s.exit_rate.fill(0.0);
    s.wage_level.fill(1.0);
    s.age_wage_level.fill(1.0);
    return s;
}

ShockProfile ShockProfile::none() { return {}; }

ShockProfile ShockProfile::covid_default(MonthId baseline)
{
    // Share of the Feb-May employment loss falling in March, April, May.
    constexpr std::array<double, 3> kTiming = {0.25, 0.55, 0.20};
    constexpr double kChurn = 0.004; // background exits in shocked months
    ShockProfile profile;
    MonthId m = baseline;
    for (int step = 0; step < 4; ++step) {
        m = m.next();
        ShockMonth s = quiet(m);
        for (int i = 0; i < kIndustryCount; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double loss = std::max(0.0, -kIndustryChange[idx]);
            if (step < 3) s.exit_rate[idx] = kChurn + loss * kTiming[static_cast<std::size_t>(step)];
            else s.exit_rate[idx] = kChurn + 0.02 * loss;
            if (step >= 1) s.wage_level[idx] = 1.0 - 0.12 * loss;
        }
        if (step >= 1) s.age_wage_level[0] = 0.97;
        if (step == 3) s.reentry_rate = 0.12;
        profile.months.push_back(s);
    }
    return profile;
}

void SynthConfig::validate() const
{
    if (n_households == 0) throw ConfigError("synth: n_households must be > 0");
    if (n_panel_waves < 1) throw ConfigError("synth: n_panel_waves must be >= 1");
    if (!(rotation_retention > 0.0 && rotation_retention <= 1.0))
        throw ConfigError("synth: rotation_retention must lie in (0, 1]");
    if (!(population_households > 0.0) || !(panel_population_growth > 0.0))
        throw ConfigError("synth: population sizes must be > 0");
    if (!(unemployed_share_of_exits >= 0.0 && unemployed_share_of_exits <= 1.0))
        throw ConfigError("synth: unemployed_share_of_exits must lie in [0, 1]");
    if (collection_month > baseline_month) throw ConfigError("synth: collection month after baseline month");
    for (const auto& s : shock.months) {
        if (s.month <= baseline_month) throw ConfigError("synth: shock months must follow the baseline month");
        for (double r : s.exit_rate)
            if (!(r >= 0.0 && r < 1.0)) throw ConfigError(fmt::format("synth: exit rate {} outside [0, 1)", r));
        for (double w : s.wage_level)
            if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError(fmt::format("synth: wage level {} must be > 0", w));
        for (double w : s.age_wage_level)
            if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError(fmt::format("synth: age wage level {} must be > 0", w));
        if (!(s.reentry_rate >= 0.0 && s.reentry_rate <= 1.0)) throw ConfigError("synth: reentry rate outside [0, 1]");
    }
}

WeightedSample gen_baseline_survey(const SynthConfig& cfg)
{
    cfg.validate();
    Rng rng = make_rng(cfg.seed, "synth/baseline-survey");
    HouseholdFactory factory(survey_demography(), true, 1);
    WeightedSample s;
    s.month = cfg.collection_month;
    s.households.reserve(cfg.n_households);
    const double base_weight = cfg.population_households / static_cast<double>(cfg.n_households);
    for (std::size_t i = 0; i < cfg.n_households; ++i) {
        const double w = base_weight * (0.8 + 0.4 * uniform01(rng));
        s.households.push_back(factory.make(rng, w));
    }
    // Design weights rescaled to the population exactly.
    const double scale = cfg.population_households / s.total_weight();
    for (auto& h : s.households) h.weight *= scale;
    return s;
}

std::vector<WeightedSample> gen_labour_panel(const SynthConfig& cfg, const WeightedSample& baseline)
{
    cfg.validate();
    std::int64_t max_id = 0;
    for (const auto& h : baseline.households) max_id = std::max(max_id, raw(h.household_id));
    const std::int64_t first_id = (max_id / 1000000 + 1) * 1000000;

    const std::size_t n_panel = cfg.panel_households();
    const double expected_new = static_cast<double>(n_panel) * (1.0 - cfg.rotation_retention) * (cfg.n_panel_waves - 1);
    const std::size_t n_pop = n_panel + static_cast<std::size_t>(expected_new * 1.5) + 64;

    // Stable population with its own labour dynamics; the panel samples it.
    Rng pop_rng = make_rng(cfg.seed, "synth/panel-population");
    HouseholdFactory factory(panel_demography(), false, first_id);
    const double panel_weight = cfg.population_households * cfg.panel_population_growth / static_cast<double>(n_panel);
    std::vector<HouseholdRecord> population;
    population.reserve(n_pop);
    for (std::size_t i = 0; i < n_pop; ++i) population.push_back(factory.make(pop_rng, panel_weight * (0.9 + 0.2 * uniform01(pop_rng))));

    struct History {
        double last_hours = 0.0;
        int last_jobs = 0;
        bool lost_job = false;
    };
    std::vector<std::vector<History>> history(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        history[i].resize(population[i].members.size());
        for (std::size_t j = 0; j < population[i].members.size(); ++j) {
            auto& p = population[i].members[j];
            if (p.employed()) {
                history[i][j].last_hours = p.usual_hours;
                history[i][j].last_jobs = p.n_jobs;
                p.employed_since_baseline_flag = true;
            }
        }
    }

    Rng select_rng = make_rng(cfg.seed, "synth/panel-rotation");
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), select_rng);
    std::size_t next_fresh = 0;
    std::vector<std::size_t> current(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_panel));
    next_fresh = n_panel;

    Rng dyn_rng = make_rng(cfg.seed, "synth/panel-dynamics");
    std::vector<WeightedSample> waves;
    MonthId month = cfg.baseline_month;
    for (int wave = 0; wave < cfg.n_panel_waves; ++wave) {
        if (wave > 0) {
            month = month.next();
            const ShockMonth shock = cfg.shock.find(month) ? *cfg.shock.find(month) : ShockProfile::quiet(month);
            for (std::size_t i = 0; i < population.size(); ++i) {
                for (std::size_t j = 0; j < population[i].members.size(); ++j) {
                    auto& p = population[i].members[j];
                    auto& hist = history[i][j];
                    if (!p.is_adult()) continue;
                    if (p.employed()) {
                        double hazard = shock.exit_rate[static_cast<std::size_t>(*p.industry)] * band_exit_multiplier(age_band(p.age));
                        if (p.usual_hours < 35.0) hazard *= kExitPartTimeMultiplier;
                        if (hazard > 0.0 && uniform01(dyn_rng) < std::min(hazard, 0.95)) {
                            hist.last_hours = p.usual_hours;
                            hist.last_jobs = p.n_jobs;
                            hist.lost_job = true;
                            p.labour_state = uniform01(dyn_rng) < cfg.unemployed_share_of_exits ? LabourState::unemployed
                                                                                               : LabourState::not_in_labour_force;
                            p.usual_hours = 0.0;
                            p.n_jobs = 0;
                            p.unemployment_duration = 0.0;
                        }
                    } else if (hist.lost_job && shock.reentry_rate > 0.0 && uniform01(dyn_rng) < shock.reentry_rate) {
                        p.labour_state = LabourState::employed;
                        p.usual_hours = hist.last_hours;
                        p.n_jobs = hist.last_jobs;
                        p.unemployment_duration = 0.0;
                        hist.lost_job = false;
                    }
                    if (p.labour_state == LabourState::unemployed) p.unemployment_duration += 1.0;
                    if (p.employed()) p.employed_since_baseline_flag = true;
                }
            }
            std::vector<std::size_t> kept;
            for (std::size_t idx : current)
                if (uniform01(select_rng) < cfg.rotation_retention) kept.push_back(idx);
            while (kept.size() < n_panel) {
                if (next_fresh >= order.size()) throw Error("synth: panel population exhausted");
                kept.push_back(order[next_fresh++]);
            }
            current = std::move(kept);
        }
        WeightedSample s;
        s.month = month;
        std::vector<std::size_t> sorted = current;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t idx : sorted) s.households.push_back(population[idx]);
        std::sort(s.households.begin(), s.households.end(),
                  [](const HouseholdRecord& a, const HouseholdRecord& b) { return raw(a.household_id) < raw(b.household_id); });
        waves.push_back(std::move(s));
    }
    return waves;
}

PayrollSeries gen_payroll(const SynthConfig& cfg)
{
    cfg.validate();
    PayrollSeries out;
    const double total_emp = std::accumulate(kIndustryEmployment.begin(), kIndustryEmployment.end(), 0.0);
    std::array<std::array<double, kAgeBandCount>, kIndustryCount> jobs{};
    for (auto& row : jobs) row.fill(1.0);

    MonthId month = cfg.baseline_month;
    for (int wave = 0; wave < cfg.n_panel_waves; ++wave) {
        if (wave > 0) month = month.next();
        const ShockMonth shock = (wave > 0 && cfg.shock.find(month)) ? *cfg.shock.find(month) : ShockProfile::quiet(month);
        double econ_wage = 0.0;
        double econ_jobs = 0.0;
        for (int i = 0; i < kIndustryCount; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const auto ind = static_cast<Industry>(i);
            double ind_wage = 0.0;
            double ind_jobs = 0.0;
            for (int b = 0; b < kAgeBandCount; ++b) {
                const auto bb = static_cast<std::size_t>(b);
                if (wave > 0) jobs[ii][bb] *= 1.0 - std::min(0.95, shock.exit_rate[ii] * kExitAgeMultiplier[bb]);
                const double wage = shock.wage_level[ii] * shock.age_wage_level[bb];
                out.set(ind, b, month, {wage, jobs[ii][bb]});
                ind_wage += wage;
                ind_jobs += jobs[ii][bb];
            }
            ind_wage /= kAgeBandCount;
            ind_jobs /= kAgeBandCount;
            if (wave == 0) ind_wage = ind_jobs = 1.0;
            out.set(ind, std::nullopt, month, {ind_wage, ind_jobs});
            econ_wage += ind_wage * kIndustryEmployment[ii];
            econ_jobs += ind_jobs * kIndustryEmployment[ii];
        }
        econ_wage /= total_emp;
        econ_jobs /= total_emp;
        if (wave == 0) econ_wage = econ_jobs = 1.0;
        out.set(std::nullopt, std::nullopt, month, {econ_wage, econ_jobs});
    }
    return out;
}

void PayrollSeries::set(std::optional<Industry> industry, std::optional<int> age_band, MonthId month, PayrollCell cell)
{
    cells_[Key{industry ? static_cast<int>(*industry) : -1, age_band.value_or(-1), month.index()}] = cell;
}

std::optional<PayrollCell> PayrollSeries::cell(std::optional<Industry> industry, std::optional<int> age_band,
                                               MonthId month) const
{
    const auto it = cells_.find(Key{industry ? static_cast<int>(*industry) : -1, age_band.value_or(-1), month.index()});
    if (it == cells_.end()) return std::nullopt;
    return it->second;
}

std::optional<PayrollCell> PayrollSeries::lookup(std::optional<Industry> industry, int band, MonthId month) const
{
    if (industry) {
        if (auto c = cell(industry, band, month)) return c;
        if (auto c = cell(industry, std::nullopt, month)) return c;
    }
    return cell(std::nullopt, std::nullopt, month);
}

bool PayrollSeries::has_month(MonthId month) const
{
    for (const auto& [k, v] : cells_)
        if (k.month == month.index()) return true;
    return false;
}

void PayrollSeries::save_csv(const std::filesystem::path& path) const
{
    csv::Writer w({"industry", "age_band", "month", "wage_index", "job_index"});
    for (const auto& [k, c] : cells_) {
        const std::string ind = k.industry < 0 ? "all" : std::string(to_code(static_cast<Industry>(k.industry)));
        const std::string band = k.age_band < 0 ? "all" : std::to_string(k.age_band);
        w.row({ind, band, MonthId::from_index(k.month).to_string(), csv::num(c.wage_index), csv::num(c.job_index)});
    }
    w.save(path);
}

PayrollSeries PayrollSeries::load_csv(const std::filesystem::path& path)
{
    const auto t = csv::read_file(path);
    const auto ci = t.column("industry");
    const auto cb = t.column("age_band");
    const auto cm = t.column("month");
    const auto cw = t.column("wage_index");
    const auto cj = t.column("job_index");
    if (!ci || !cb || !cm || !cw || !cj) throw DataError(fmt::format("{}: payroll file missing columns", path.string()));
    PayrollSeries out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto where = [&] { return fmt::format("{} row {}", path.filename().string(), r + 2); };
        std::optional<Industry> ind;
        if (row[*ci] != "all") {
            ind = parse_industry(row[*ci]);
            if (!ind) throw DataError(fmt::format("{}: unknown industry code '{}'", where(), row[*ci]));
        }
        std::optional<int> band;
        if (row[*cb] != "all") {
            try {
                band = std::stoi(row[*cb]);
            } catch (const std::exception&) {
                throw DataError(fmt::format("{}: invalid age band '{}'", where(), row[*cb]));
            }
            if (*band < 0 || *band >= kAgeBandCount) throw DataError(fmt::format("{}: age band out of range", where()));
        }
        PayrollCell c;
        try {
            c.wage_index = std::stod(row[*cw]);
            c.job_index = std::stod(row[*cj]);
        } catch (const std::exception&) {
            throw DataError(fmt::format("{}: invalid index value", where()));
        }
        if (!(c.wage_index > 0.0) || !(c.job_index > 0.0)) throw DataError(fmt::format("{}: index factors must be > 0", where()));
        out.set(ind, band, MonthId::parse(row[*cm]), c);
    }
    return out;
}

} // namespace nowcast
