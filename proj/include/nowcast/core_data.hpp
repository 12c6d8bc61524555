#pragma once
// Unit-record data model shared by every stage of the nowcast.
//
// All currency amounts are carried per fortnight. Monthly table outputs are
// produced by multiplying with kFortnightToMonth at the very end.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nowcast {

inline constexpr double kFortnightsPerYear = 26.0;
inline constexpr double kFortnightToMonth = 26.0 / 12.0;
inline constexpr int kAdultAge = 15;

enum class PersonId : std::int64_t {};
enum class HouseholdId : std::int64_t {};

constexpr std::int64_t raw(PersonId id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t raw(HouseholdId id) { return static_cast<std::int64_t>(id); }

enum class Sex : std::uint8_t { male, female };
enum class Marital : std::uint8_t { partnered, single };
enum class Education : std::uint8_t { school, certificate, bachelor_or_higher };
enum class LabourState : std::uint8_t { employed, unemployed, not_in_labour_force };

// ANZSIC divisions A..S.
enum class Industry : std::uint8_t {
    agriculture,
    mining,
    manufacturing,
    utilities,
    construction,
    wholesale,
    retail,
    accommodation_food,
    transport,
    information_media,
    finance,
    rental_real_estate,
    professional,
    administrative,
    public_administration,
    education_training,
    health_care,
    arts_recreation,
    other_services,
};
inline constexpr int kIndustryCount = 19;

// ANZSCO major groups.
enum class Occupation : std::uint8_t {
    managers,
    professionals,
    technicians_trades,
    community_personal_service,
    clerical_admin,
    sales,
    machinery_operators,
    labourers,
};
inline constexpr int kOccupationCount = 8;

enum class State : std::uint8_t { nsw, vic, qld, sa, wa, tas, nt, act };
inline constexpr int kStateCount = 8;

enum class Benefit : std::uint8_t { pension, jobseeker, parenting, youth_allowance, ftb };
inline constexpr int kBenefitCount = 5;

class WelfareFlags {
public:
    constexpr WelfareFlags() = default;

    constexpr bool has(Benefit b) const { return (bits_ >> static_cast<unsigned>(b)) & 1u; }
    constexpr void set(Benefit b, bool on = true)
    {
        const auto mask = static_cast<std::uint8_t>(1u << static_cast<unsigned>(b));
        bits_ = on ? static_cast<std::uint8_t>(bits_ | mask) : static_cast<std::uint8_t>(bits_ & ~mask);
    }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint8_t bits() const { return bits_; }

    friend constexpr bool operator==(WelfareFlags, WelfareFlags) = default;

private:
    std::uint8_t bits_ = 0;
};

struct MonthId {
    int year = 2020;
    int month = 1; // 1..12

    constexpr int index() const { return year * 12 + (month - 1); }
    static constexpr MonthId from_index(int idx) { return MonthId{idx / 12, idx % 12 + 1}; }
    constexpr MonthId next() const { return from_index(index() + 1); }
    constexpr MonthId prev() const { return from_index(index() - 1); }

    friend constexpr bool operator==(const MonthId&, const MonthId&) = default;
    friend constexpr auto operator<=>(const MonthId& a, const MonthId& b) { return a.index() <=> b.index(); }

    std::string to_string() const; // "YYYY-MM"
    static MonthId parse(std::string_view text);
};

constexpr int months_between(MonthId from, MonthId to) { return to.index() - from.index(); }

struct PersonRecord {
    PersonId person_id{};
    HouseholdId household_id{};
    int age = 0;
    Sex sex = Sex::male;
    Marital marital = Marital::single;
    bool overseas_born = false;
    Education education = Education::school;
    LabourState labour_state = LabourState::not_in_labour_force;
    std::optional<Industry> industry;     // current or, after a job loss, last
    std::optional<Occupation> occupation; // same convention as industry
    double usual_hours = 0.0;
    int n_jobs = 0;
    double unemployment_duration = 0.0; // months
    double wage_income = 0.0;
    double business_income = 0.0;
    double investment_income = 0.0;
    double other_income = 0.0;
    WelfareFlags welfare_flags;
    bool jobkeeper_flag = false;
    bool employed_since_baseline_flag = false;

    bool is_adult() const { return age >= kAdultAge; }
    bool employed() const { return labour_state == LabourState::employed; }
    double private_income() const { return wage_income + business_income + investment_income + other_income; }
};

struct HouseholdRecord {
    HouseholdId household_id{};
    std::vector<PersonRecord> members;
    int n_children_0_4 = 0;
    int n_children_5_14 = 0;
    double housing_cost = 0.0;
    double childcare_cost = 0.0;
    State state = State::nsw;
    double weight = 0.0;

    int n_adults() const;
    int n_children() const { return n_children_0_4 + n_children_5_14; }
};

struct WeightedSample {
    MonthId month;
    std::vector<HouseholdRecord> households;

    double total_weight() const;
    std::size_t person_count() const;
};

// Throws DataError naming the first violated record invariant.
void validate(const PersonRecord& p);
void validate(const HouseholdRecord& h);
void validate(const WeightedSample& s);

// Recounts n_children_0_4 / n_children_5_14 from member ages.
void sync_child_counts(HouseholdRecord& h);

/// OECD-modified equivalence scale: 1.0 for the first person aged 15+,
/// 0.5 for each further person aged 15+, 0.3 for each child under 15.
double equivalence_scale(const HouseholdRecord& household);

/// Income per equivalent adult. Throws DataError("empty household").
double equivalise(double income, const HouseholdRecord& household);

using QuintileMap = std::map<HouseholdId, int>;

/// Weighted quintile membership (1..5) from the left-continuous weighted
/// empirical CDF. Households are ordered by (measure, household_id); a
/// household falls in quintile q when the weight strictly before it lies in
/// [(q-1)W/5, qW/5). `measure` is aligned with `sample.households`.
QuintileMap assign_quintiles(const WeightedSample& sample, std::span<const double> measure);

enum class IncomeComponent : std::uint8_t { wage, business, investment, other, market, private_total };

double component_value(const PersonRecord& p, IncomeComponent c);
double component_value(const HouseholdRecord& h, IncomeComponent c);

/// Sum of weight * household value, accumulated in ascending household_id order.
double weighted_total(const WeightedSample& sample, IncomeComponent component);

// Enum <-> text codes used by the CSV formats.
std::string_view to_code(Sex v);
std::string_view to_code(Marital v);
std::string_view to_code(Education v);
std::string_view to_code(LabourState v);
std::string_view to_code(Industry v);   // ANZSIC division letter
std::string_view to_code(Occupation v); // ANZSCO major group digit
std::string_view to_code(State v);
std::string_view to_code(Benefit v);
std::string_view industry_name(Industry v);

std::optional<Sex> parse_sex(std::string_view s);
std::optional<Marital> parse_marital(std::string_view s);
std::optional<Education> parse_education(std::string_view s);
std::optional<LabourState> parse_labour_state(std::string_view s);
std::optional<Industry> parse_industry(std::string_view s);
std::optional<Occupation> parse_occupation(std::string_view s);
std::optional<State> parse_state(std::string_view s);
std::optional<Benefit> parse_benefit(std::string_view s);

std::string format_flags(WelfareFlags flags);            // "pension|ftb"
std::optional<WelfareFlags> parse_flags(std::string_view s);

inline constexpr std::array<Industry, kIndustryCount> all_industries()
{
    std::array<Industry, kIndustryCount> out{};
    for (int i = 0; i < kIndustryCount; ++i) out[static_cast<std::size_t>(i)] = static_cast<Industry>(i);
    return out;
}

} // namespace nowcast
