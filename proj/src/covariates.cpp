#include "nowcast/covariates.hpp"

#include "nowcast/error.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace nowcast {

namespace {

std::string_view factor_name(Factor f)
{
    switch (f) {
    case Factor::sex: return "sex";
    case Factor::married: return "married";
    case Factor::overseas_born: return "overseas_born";
    case Factor::education: return "education";
    case Factor::labour_state: return "labour_state";
    case Factor::industry: return "industry";
    case Factor::occupation: return "occupation";
    case Factor::hours_band: return "hours_band";
    case Factor::age_band: return "age_band";
    case Factor::state: return "state";
    }
    return "?";
}

// Level count per factor, used as the mixed radix of cell codes.
std::int64_t factor_radix(Factor f)
{
    switch (f) {
    case Factor::sex:
    case Factor::married:
    case Factor::overseas_born: return 2;
    case Factor::education:
    case Factor::labour_state: return 3;
    case Factor::industry: return kIndustryCount + 1;
    case Factor::occupation: return kOccupationCount + 1;
    case Factor::hours_band: return 14;
    case Factor::age_band: return 7;
    case Factor::state: return kStateCount;
    }
    return 1;
}

std::int64_t factor_level(Factor f, const PersonRecord& p, const HouseholdRecord& h)
{
    switch (f) {
    case Factor::sex: return p.sex == Sex::male ? 1 : 0;
    case Factor::married: return p.marital == Marital::partnered ? 1 : 0;
    case Factor::overseas_born: return p.overseas_born ? 1 : 0;
    case Factor::education: return static_cast<std::int64_t>(p.education);
    case Factor::labour_state: return static_cast<std::int64_t>(p.labour_state);
    case Factor::industry: return p.employed() && p.industry ? static_cast<std::int64_t>(*p.industry) + 1 : 0;
    case Factor::occupation: return p.employed() && p.occupation ? static_cast<std::int64_t>(*p.occupation) + 1 : 0;
    case Factor::hours_band: return p.employed() ? hours_band(p.usual_hours) + 1 : 0;
    case Factor::age_band: return age_band(p.age) + 1;
    case Factor::state: return static_cast<std::int64_t>(h.state);
    }
    return 0;
}

std::string level_label(const Term& t, std::int64_t code)
{
    switch (t.kind) {
    case TermKind::education: return std::string(to_code(static_cast<Education>(code)));
    case TermKind::labour_state: return std::string(to_code(static_cast<LabourState>(code)));
    case TermKind::industry: return std::string(to_code(static_cast<Industry>(code)));
    case TermKind::occupation: return std::string(to_code(static_cast<Occupation>(code)));
    case TermKind::hours_band: return fmt::format("{}-{}h", code * 5, code * 5 + 4);
    case TermKind::state: return std::string(to_code(static_cast<State>(code)));
    default: return std::to_string(code);
    }
}

double numeric_value(TermKind k, const PersonRecord& p, const HouseholdRecord& h)
{
    const double employed = p.employed() ? 1.0 : 0.0;
    switch (k) {
    case TermKind::age: return p.age;
    case TermKind::age_squared: return static_cast<double>(p.age) * p.age;
    case TermKind::married: return p.marital == Marital::partnered ? 1.0 : 0.0;
    case TermKind::male: return p.sex == Sex::male ? 1.0 : 0.0;
    case TermKind::overseas_born: return p.overseas_born ? 1.0 : 0.0;
    case TermKind::locally_born: return p.overseas_born ? 0.0 : 1.0;
    case TermKind::usual_hours: return p.usual_hours;
    case TermKind::full_time: return p.employed() && p.usual_hours >= 35.0 ? 1.0 : 0.0;
    case TermKind::n_jobs: return p.n_jobs;
    case TermKind::unemployment_duration: return p.unemployment_duration;
    case TermKind::male_x_employed: return (p.sex == Sex::male ? 1.0 : 0.0) * employed;
    case TermKind::age_x_employed: return p.age * employed;
    case TermKind::children_0_4: return h.n_children_0_4;
    case TermKind::children_5_14: return h.n_children_5_14;
    case TermKind::household_size: return static_cast<double>(h.members.size());
    default: return 0.0;
    }
}

} // namespace

int hours_band(double usual_hours)
{
    if (usual_hours <= 0.0) return -1;
    return std::min(12, static_cast<int>(std::floor(usual_hours / 5.0)));
}

int age_band(int age)
{
    if (age < kAdultAge) return -1;
    if (age >= 65) return 5;
    return (age - 15) / 10;
}

bool Term::categorical() const
{
    switch (kind) {
    case TermKind::education:
    case TermKind::labour_state:
    case TermKind::industry:
    case TermKind::occupation:
    case TermKind::hours_band:
    case TermKind::state:
    case TermKind::cell: return true;
    default: return false;
    }
}

bool Term::household_level() const
{
    switch (kind) {
    case TermKind::children_0_4:
    case TermKind::children_5_14:
    case TermKind::household_size:
    case TermKind::state: return true;
    default: return false;
    }
}

std::string Term::name() const
{
    switch (kind) {
    case TermKind::age: return "age";
    case TermKind::age_squared: return "age_squared";
    case TermKind::married: return "married";
    case TermKind::male: return "male";
    case TermKind::overseas_born: return "overseas_born";
    case TermKind::locally_born: return "locally_born";
    case TermKind::education: return "education";
    case TermKind::labour_state: return "labour_state";
    case TermKind::industry: return "industry";
    case TermKind::occupation: return "occupation";
    case TermKind::hours_band: return "hours_band";
    case TermKind::usual_hours: return "usual_hours";
    case TermKind::full_time: return "full_time";
    case TermKind::n_jobs: return "n_jobs";
    case TermKind::unemployment_duration: return "unemployment_duration";
    case TermKind::male_x_employed: return "male_x_employed";
    case TermKind::age_x_employed: return "age_x_employed";
    case TermKind::children_0_4: return "children_0_4";
    case TermKind::children_5_14: return "children_5_14";
    case TermKind::household_size: return "household_size";
    case TermKind::state: return "state";
    case TermKind::cell: {
        std::string out = "cell(";
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (i) out += 'x';
            out += factor_name(factors[i]);
        }
        return out + ")";
    }
    }
    return "?";
}

std::optional<std::int64_t> level_code(const Term& t, const PersonRecord& p, const HouseholdRecord& h)
{
    switch (t.kind) {
    case TermKind::education: return static_cast<std::int64_t>(p.education);
    case TermKind::labour_state: return static_cast<std::int64_t>(p.labour_state);
    case TermKind::industry:
        if (!p.employed() || !p.industry) return std::nullopt;
        return static_cast<std::int64_t>(*p.industry);
    case TermKind::occupation:
        if (!p.employed() || !p.occupation) return std::nullopt;
        return static_cast<std::int64_t>(*p.occupation);
    case TermKind::hours_band:
        if (!p.employed()) return std::nullopt;
        return hours_band(p.usual_hours);
    case TermKind::state: return static_cast<std::int64_t>(h.state);
    case TermKind::cell: {
        std::int64_t code = 0;
        for (Factor f : t.factors) code = code * factor_radix(f) + factor_level(f, p, h);
        return code;
    }
    default: return std::nullopt;
    }
}

CovariateSpec CovariateSpec::reweighting_default()
{
    using K = TermKind;
    return CovariateSpec{{{K::age, {}},
                          {K::age_squared, {}},
                          {K::married, {}},
                          {K::male, {}},
                          {K::overseas_born, {}},
                          {K::education, {}},
                          {K::labour_state, {}},
                          {K::industry, {}},
                          {K::occupation, {}},
                          {K::hours_band, {}},
                          {K::n_jobs, {}},
                          {K::unemployment_duration, {}},
                          {K::male_x_employed, {}},
                          {K::age_x_employed, {}},
                          {K::children_0_4, {}},
                          {K::children_5_14, {}},
                          {K::household_size, {}},
                          {K::state, {}}}};
}

CovariateSpec CovariateSpec::employment_history()
{
    using K = TermKind;
    return CovariateSpec{{{K::age, {}},
                          {K::age_squared, {}},
                          {K::education, {}},
                          {K::locally_born, {}},
                          {K::children_0_4, {}},
                          {K::children_5_14, {}},
                          {K::state, {}}}};
}

CovariateSpec CovariateSpec::employment_retention()
{
    using K = TermKind;
    auto spec = employment_history();
    spec.terms.push_back({K::full_time, {}});
    spec.terms.push_back({K::industry, {}});
    spec.terms.push_back({K::occupation, {}});
    spec.terms.push_back({K::usual_hours, {}});
    spec.terms.push_back({K::n_jobs, {}});
    return spec;
}

CovariateSpec CovariateSpec::saturated(std::vector<Factor> factors)
{
    return CovariateSpec{{{TermKind::cell, std::move(factors)}}};
}

DesignBuilder::DesignBuilder(CovariateSpec spec) : spec_(std::move(spec)), levels_(spec_.terms.size()) {}

void DesignBuilder::observe(const PersonRecord& p, const HouseholdRecord& h)
{
    if (frozen_) throw Error("DesignBuilder::observe after freeze");
    for (std::size_t t = 0; t < spec_.terms.size(); ++t) {
        const auto& term = spec_.terms[t];
        if (!term.categorical()) continue;
        if (const auto code = level_code(term, p, h)) levels_[t].emplace(*code, 0);
    }
}

void DesignBuilder::freeze()
{
    names_ = {"intercept"};
    column_terms_ = {"intercept"};
    household_columns_ = {false};
    offsets_.assign(spec_.terms.size(), 0);
    for (std::size_t t = 0; t < spec_.terms.size(); ++t) {
        const auto& term = spec_.terms[t];
        offsets_[t] = names_.size();
        const auto tname = term.name();
        if (!term.categorical()) {
            names_.push_back(tname);
            column_terms_.push_back(tname);
            household_columns_.push_back(term.household_level());
            continue;
        }
        std::size_t col = 0;
        bool first = true;
        for (auto& [code, column] : levels_[t]) {
            if (first) {
                column = static_cast<std::size_t>(-1); // reference level
                first = false;
                continue;
            }
            first = false;
            column = col++;
            names_.push_back(fmt::format("{}={}", tname, level_label(term, code)));
            column_terms_.push_back(tname);
            household_columns_.push_back(term.household_level());
        }
    }
    frozen_ = true;
}

void DesignBuilder::fill(const PersonRecord& p, const HouseholdRecord& h, std::span<double> out) const
{
    if (!frozen_) throw Error("DesignBuilder::fill before freeze");
    if (out.size() != width()) throw Error("DesignBuilder::fill: row width mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    for (std::size_t t = 0; t < spec_.terms.size(); ++t) {
        const auto& term = spec_.terms[t];
        if (!term.categorical()) {
            out[offsets_[t]] = numeric_value(term.kind, p, h);
            continue;
        }
        const auto code = level_code(term, p, h);
        if (!code) continue;
        const auto it = levels_[t].find(*code);
        if (it == levels_[t].end())
            throw DataError(fmt::format("person {}: level '{}' of term '{}' was not seen when the model was fitted",
                                        raw(p.person_id), level_label(term, *code), term.name()));
        if (it->second != static_cast<std::size_t>(-1)) out[offsets_[t] + it->second] = 1.0;
    }
}

} // namespace nowcast
