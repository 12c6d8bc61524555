#include "nowcast/core_data.hpp"

#include "nowcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace nowcast {

namespace {

constexpr std::array<std::string_view, kIndustryCount> kIndustryCodes = {
    "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O", "P", "Q", "R", "S"};

constexpr std::array<std::string_view, kIndustryCount> kIndustryNames = {
    "Agriculture, Forestry and Fishing",
    "Mining",
    "Manufacturing",
    "Electricity, Gas, Water and Waste Services",
    "Construction",
    "Wholesale Trade",
    "Retail Trade",
    "Accommodation and Food Services",
    "Transport, Postal and Warehousing",
    "Information Media and Telecommunications",
    "Financial and Insurance Services",
    "Rental, Hiring and Real Estate Services",
    "Professional, Scientific and Technical Services",
    "Administrative and Support Services",
    "Public Administration and Safety",
    "Education and Training",
    "Health Care and Social Assistance",
    "Arts and Recreation Services",
    "Other Services",
};

constexpr std::array<std::string_view, kOccupationCount> kOccupationCodes = {"1", "2", "3", "4", "5", "6", "7", "8"};
constexpr std::array<std::string_view, kStateCount> kStateCodes = {"NSW", "VIC", "QLD", "SA", "WA", "TAS", "NT", "ACT"};
constexpr std::array<std::string_view, kBenefitCount> kBenefitCodes = {
    "pension", "jobseeker", "parenting", "youth_allowance", "ftb"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& codes, std::string_view s)
{
    for (std::size_t i = 0; i < N; ++i)
        if (codes[i] == s) return static_cast<E>(i);
    return std::nullopt;
}

} // namespace

std::string MonthId::to_string() const { return fmt::format("{:04d}-{:02d}", year, month); }

MonthId MonthId::parse(std::string_view text)
{
    int y = 0;
    int m = 0;
    const auto dash = text.find('-');
    if (dash == std::string_view::npos) throw ConfigError(fmt::format("invalid month '{}': expected YYYY-MM", text));
    const auto ys = text.substr(0, dash);
    const auto ms = text.substr(dash + 1);
    const auto ry = std::from_chars(ys.data(), ys.data() + ys.size(), y);
    const auto rm = std::from_chars(ms.data(), ms.data() + ms.size(), m);
    if (ry.ec != std::errc{} || rm.ec != std::errc{} || ry.ptr != ys.data() + ys.size() ||
        rm.ptr != ms.data() + ms.size() || m < 1 || m > 12)
        throw ConfigError(fmt::format("invalid month '{}': expected YYYY-MM", text));
    return MonthId{y, m};
}

int HouseholdRecord::n_adults() const
{
    return static_cast<int>(std::count_if(members.begin(), members.end(), [](const PersonRecord& p) { return p.is_adult(); }));
}

double WeightedSample::total_weight() const
{
    double total = 0.0;
    for (const auto& h : households) total += h.weight;
    return total;
}

std::size_t WeightedSample::person_count() const
{
    std::size_t n = 0;
    for (const auto& h : households) n += h.members.size();
    return n;
}

void validate(const PersonRecord& p)
{
    const auto fail = [&](std::string_view what) {
        throw DataError(fmt::format("person {}: {}", raw(p.person_id), what));
    };
    if (p.age < 0) fail("negative age");
    if (p.usual_hours < 0.0 || !std::isfinite(p.usual_hours)) fail("usual_hours must be finite and >= 0");
    if ((p.usual_hours == 0.0) == p.employed()) fail("usual_hours = 0 must coincide with not being employed");
    if (p.n_jobs < 0) fail("n_jobs must be >= 0");
    if (p.unemployment_duration < 0.0) fail("unemployment_duration must be >= 0");
    if (!(p.wage_income >= 0.0) || !std::isfinite(p.wage_income)) fail("wage_income must be finite and >= 0");
    if (!(p.other_income >= 0.0) || !std::isfinite(p.other_income)) fail("other_income must be finite and >= 0");
    if (!std::isfinite(p.business_income) || !std::isfinite(p.investment_income)) fail("non-finite income");
    if (p.wage_income > 0.0 && !p.employed() && !p.jobkeeper_flag) fail("wage income without employment");
    if (p.employed() && !p.industry) fail("employed person without industry");
}

void validate(const HouseholdRecord& h)
{
    if (!std::isfinite(h.weight) || h.weight < 0.0)
        throw DataError(fmt::format("household {}: weight must be finite and >= 0", raw(h.household_id)));
    if (h.members.empty()) throw DataError(fmt::format("household {}: empty household", raw(h.household_id)));
    if (h.housing_cost < 0.0 || h.childcare_cost < 0.0)
        throw DataError(fmt::format("household {}: negative housing or childcare cost", raw(h.household_id)));
    int c04 = 0;
    int c514 = 0;
    for (const auto& p : h.members) {
        if (p.household_id != h.household_id)
            throw DataError(fmt::format("person {} listed under household {} but tagged {}", raw(p.person_id),
                                        raw(h.household_id), raw(p.household_id)));
        validate(p);
        if (p.age <= 4) ++c04;
        else if (p.age <= 14) ++c514;
    }
    if (c04 != h.n_children_0_4 || c514 != h.n_children_5_14)
        throw DataError(fmt::format("household {}: child counts inconsistent with member ages", raw(h.household_id)));
}

void validate(const WeightedSample& s)
{
    for (const auto& h : s.households) validate(h);
    if (!(s.total_weight() > 0.0)) throw DataError("sample total weight must be > 0");
}

void sync_child_counts(HouseholdRecord& h)
{
    h.n_children_0_4 = 0;
    h.n_children_5_14 = 0;
    for (const auto& p : h.members) {
        if (p.age <= 4) ++h.n_children_0_4;
        else if (p.age <= 14) ++h.n_children_5_14;
    }
}

double equivalence_scale(const HouseholdRecord& household)
{
    if (household.members.empty()) throw DataError("empty household");
    double scale = 0.0;
    bool first_adult = true;
    for (const auto& p : household.members) {
        if (p.is_adult()) {
            scale += first_adult ? 1.0 : 0.5;
            first_adult = false;
        } else {
            scale += 0.3;
        }
    }
    // A household of children only still gets a head weight of 1.0.
    if (first_adult) scale += 0.7;
    return scale;
}

double equivalise(double income, const HouseholdRecord& household)
{
    if (!std::isfinite(income)) throw DataError("equivalise: non-finite income");
    return income / equivalence_scale(household);
}

QuintileMap assign_quintiles(const WeightedSample& sample, std::span<const double> measure)
{
    if (measure.size() != sample.households.size()) throw DataError("assign_quintiles: measure size mismatch");
    std::vector<std::size_t> order(sample.households.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (measure[a] != measure[b]) return measure[a] < measure[b];
        return raw(sample.households[a].household_id) < raw(sample.households[b].household_id);
    });
    double total = 0.0;
    for (std::size_t i : order) total += sample.households[i].weight;
    if (!(total > 0.0)) throw DataError("assign_quintiles: zero total weight");

    QuintileMap out;
    double before = 0.0;
    for (std::size_t i : order) {
        const auto& h = sample.households[i];
        const int q = std::clamp(static_cast<int>(std::floor(5.0 * before / total)) + 1, 1, 5);
        out.emplace(h.household_id, q);
        before += h.weight;
    }
    return out;
}

double component_value(const PersonRecord& p, IncomeComponent c)
{
    switch (c) {
    case IncomeComponent::wage: return p.wage_income;
    case IncomeComponent::business: return p.business_income;
    case IncomeComponent::investment: return p.investment_income;
    case IncomeComponent::other: return p.other_income;
    case IncomeComponent::market: return p.wage_income + p.business_income + p.investment_income;
    case IncomeComponent::private_total: return p.private_income();
    }
    return 0.0;
}

double component_value(const HouseholdRecord& h, IncomeComponent c)
{
    double v = 0.0;
    for (const auto& p : h.members) v += component_value(p, c);
    return v;
}

double weighted_total(const WeightedSample& sample, IncomeComponent component)
{
    std::vector<const HouseholdRecord*> order;
    order.reserve(sample.households.size());
    for (const auto& h : sample.households) order.push_back(&h);
    std::sort(order.begin(), order.end(),
              [](const HouseholdRecord* a, const HouseholdRecord* b) { return raw(a->household_id) < raw(b->household_id); });
    double total = 0.0;
    for (const auto* h : order) total += h->weight * component_value(*h, component);
    return total;
}

std::string_view to_code(Sex v) { return v == Sex::male ? "M" : "F"; }
std::string_view to_code(Marital v) { return v == Marital::partnered ? "partnered" : "single"; }
std::string_view to_code(Education v)
{
    switch (v) {
    case Education::school: return "school";
    case Education::certificate: return "certificate";
    case Education::bachelor_or_higher: return "bachelor";
    }
    return "school";
}
std::string_view to_code(LabourState v)
{
    switch (v) {
    case LabourState::employed: return "E";
    case LabourState::unemployed: return "U";
    case LabourState::not_in_labour_force: return "N";
    }
    return "N";
}
std::string_view to_code(Industry v) { return kIndustryCodes[static_cast<std::size_t>(v)]; }
std::string_view to_code(Occupation v) { return kOccupationCodes[static_cast<std::size_t>(v)]; }
std::string_view to_code(State v) { return kStateCodes[static_cast<std::size_t>(v)]; }
std::string_view to_code(Benefit v) { return kBenefitCodes[static_cast<std::size_t>(v)]; }
std::string_view industry_name(Industry v) { return kIndustryNames[static_cast<std::size_t>(v)]; }

std::optional<Sex> parse_sex(std::string_view s)
{
    if (s == "M") return Sex::male;
    if (s == "F") return Sex::female;
    return std::nullopt;
}
std::optional<Marital> parse_marital(std::string_view s)
{
    if (s == "partnered") return Marital::partnered;
    if (s == "single") return Marital::single;
    return std::nullopt;
}
std::optional<Education> parse_education(std::string_view s)
{
    if (s == "school") return Education::school;
    if (s == "certificate") return Education::certificate;
    if (s == "bachelor") return Education::bachelor_or_higher;
    return std::nullopt;
}
std::optional<LabourState> parse_labour_state(std::string_view s)
{
    if (s == "E") return LabourState::employed;
    if (s == "U") return LabourState::unemployed;
    if (s == "N") return LabourState::not_in_labour_force;
    return std::nullopt;
}
std::optional<Industry> parse_industry(std::string_view s) { return lookup<Industry>(kIndustryCodes, s); }
std::optional<Occupation> parse_occupation(std::string_view s) { return lookup<Occupation>(kOccupationCodes, s); }
std::optional<State> parse_state(std::string_view s) { return lookup<State>(kStateCodes, s); }
std::optional<Benefit> parse_benefit(std::string_view s) { return lookup<Benefit>(kBenefitCodes, s); }

std::string format_flags(WelfareFlags flags)
{
    std::string out;
    for (int i = 0; i < kBenefitCount; ++i) {
        const auto b = static_cast<Benefit>(i);
        if (!flags.has(b)) continue;
        if (!out.empty()) out += '|';
        out += to_code(b);
    }
    return out;
}

std::optional<WelfareFlags> parse_flags(std::string_view s)
{
    WelfareFlags flags;
    while (!s.empty()) {
        const auto bar = s.find('|');
        const auto token = s.substr(0, bar);
        const auto b = parse_benefit(token);
        if (!b) return std::nullopt;
        flags.set(*b);
        if (bar == std::string_view::npos) break;
        s.remove_prefix(bar + 1);
    }
    return flags;
}

} // namespace nowcast
