#pragma once
// Record builders shared by the unit tests.

#include "nowcast/core_data.hpp"
#include "nowcast/rng.hpp"
#include "nowcast/taxben.hpp"

#include <filesystem>
#include <vector>

namespace nowcast::test {

inline std::filesystem::path source_dir() { return NOWCAST_SOURCE_DIR; }

inline PolicyRegime baseline_regime() { return PolicyRegime::load(source_dir() / "config/baseline_feb2020.json"); }
inline PolicyRegime covid_regime() { return PolicyRegime::load(source_dir() / "config/covid_package.json"); }

inline PersonRecord person(std::int64_t id, std::int64_t hh, int age, LabourState state = LabourState::not_in_labour_force,
                           double wage = 0.0)
{
    PersonRecord p;
    p.person_id = PersonId{id};
    p.household_id = HouseholdId{hh};
    p.age = age;
    p.labour_state = state;
    if (state == LabourState::employed) {
        p.industry = Industry::retail;
        p.occupation = Occupation::sales;
        p.usual_hours = 38.0;
        p.n_jobs = 1;
        p.wage_income = wage;
    }
    return p;
}

inline HouseholdRecord household(std::int64_t id, std::vector<PersonRecord> members, double weight = 1.0)
{
    HouseholdRecord h;
    h.household_id = HouseholdId{id};
    h.members = std::move(members);
    for (auto& p : h.members) p.household_id = h.household_id;
    h.weight = weight;
    sync_child_counts(h);
    return h;
}

inline WeightedSample sample(MonthId month, std::vector<HouseholdRecord> households)
{
    WeightedSample s;
    s.month = month;
    s.households = std::move(households);
    return s;
}

// Household with 1-4 adults, 0-3 children, mixed labour states, incomes,
// flags and costs. Person ids are hh * 10 + position.
inline HouseholdRecord random_household(Rng& rng, std::int64_t hh, bool with_jobkeeper = true)
{
    const auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    const auto money = [&](double scale) { return uniform01(rng) < 0.5 ? 0.0 : scale * uniform01(rng); };
    std::vector<PersonRecord> members;
    const int adults = 1 + pick(4);
    const int children = pick(4);
    const bool couple = adults >= 2 && uniform01(rng) < 0.6;
    for (int i = 0; i < adults; ++i) {
        const int age = 15 + pick(76);
        const double u = uniform01(rng);
        const auto state = u < 0.55 ? LabourState::employed : u < 0.7 ? LabourState::unemployed : LabourState::not_in_labour_force;
        auto p = person(hh * 10 + i, hh, age, state, state == LabourState::employed ? 100.0 + 3000.0 * uniform01(rng) : 0.0);
        if (p.employed()) {
            p.industry = static_cast<Industry>(pick(kIndustryCount));
            p.usual_hours = 1.0 + 59.0 * uniform01(rng);
            p.jobkeeper_flag = with_jobkeeper && uniform01(rng) < 0.3;
        }
        p.sex = uniform01(rng) < 0.5 ? Sex::male : Sex::female;
        p.marital = couple && i < 2 ? Marital::partnered : Marital::single;
        p.business_income = money(800.0);
        p.investment_income = money(uniform01(rng) < 0.1 ? 20000.0 : 300.0);
        p.other_income = money(400.0);
        if (state == LabourState::not_in_labour_force) p.employed_since_baseline_flag = uniform01(rng) < 0.4;
        for (int b = 0; b < kBenefitCount; ++b)
            if (uniform01(rng) < 0.15) p.welfare_flags.set(static_cast<Benefit>(b));
        members.push_back(p);
    }
    for (int i = 0; i < children; ++i) members.push_back(person(hh * 10 + adults + i, hh, pick(15)));
    auto h = household(hh, std::move(members), 1.0 + 500.0 * uniform01(rng));
    h.housing_cost = money(900.0);
    h.childcare_cost = h.n_children() > 0 ? money(600.0) : 0.0;
    h.state = static_cast<State>(pick(kStateCount));
    return h;
}

inline WeightedSample random_sample(Rng& rng, MonthId month, int n, bool with_jobkeeper = true)
{
    WeightedSample s;
    s.month = month;
    for (int i = 0; i < n; ++i) s.households.push_back(random_household(rng, i + 1, with_jobkeeper));
    return s;
}

} // namespace nowcast::test
