#pragma once
// Desk-scale synthetic stand-ins for the three data sources: an income
// survey (collection vintage, with incomes), a rotating monthly labour-force
// panel (no incomes) and a payroll wage/job index series.
//
// Structurally faithful only; the generative model is openly synthetic.

#include "nowcast/core_data.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

namespace nowcast {

inline constexpr int kAgeBandCount = 6; // 15-24, 25-34, 35-44, 45-54, 55-64, 65+

struct ShockMonth {
    MonthId month;
    std::array<double, kIndustryCount> exit_rate{};   // monthly job-exit hazard per industry
    std::array<double, kIndustryCount> wage_level{};  // average wage per job relative to baseline
    std::array<double, kAgeBandCount> age_wage_level{}; // multiplies wage_level per age band
    double reentry_rate = 0.0; // hazard of returning to work for those who lost a job since baseline
};

struct ShockProfile {
    std::vector<ShockMonth> months; // ascending, all after the baseline month

    const ShockMonth* find(MonthId m) const;

    static ShockMonth quiet(MonthId m); // no exits, wage levels 1
    static ShockProfile none();
    // Employment losses by industry shaped after the Feb-May 2020 payroll
    // experience (arts/recreation and accommodation/food hit hardest).
    static ShockProfile covid_default(MonthId baseline);
};

struct SynthConfig {
    std::uint64_t seed = 20200201;
    std::size_t n_households = 10000;       // income survey
    std::size_t n_panel_households = 0;     // per wave; 0 = same as n_households
    int n_panel_waves = 5;
    double rotation_retention = 0.83;
    MonthId collection_month{2018, 3};
    MonthId baseline_month{2020, 2};
    MonthId policy_month{2020, 3}; // first month of the shock
    ShockProfile shock = ShockProfile::covid_default(MonthId{2020, 2});
    double population_households = 10.0e6;  // survey weights sum to this
    double panel_population_growth = 1.03;  // panel population relative to survey
    double unemployed_share_of_exits = 0.5; // rest leave the labour force

    std::size_t panel_households() const { return n_panel_households ? n_panel_households : n_households; }
    // Throws ConfigError.
    void validate() const;
};

struct PayrollCell {
    double wage_index = 1.0;
    double job_index = 1.0;
};

// Cells keyed by (industry, age band, month). An absent industry or band is
// the aggregate over that dimension ("all").
class PayrollSeries {
public:
    void set(std::optional<Industry> industry, std::optional<int> age_band, MonthId month, PayrollCell cell);

    // Exact cell lookup.
    std::optional<PayrollCell> cell(std::optional<Industry> industry, std::optional<int> age_band, MonthId month) const;

    // Cell, then industry aggregate, then economy-wide; nullopt when the month is absent.
    std::optional<PayrollCell> lookup(std::optional<Industry> industry, int age_band, MonthId month) const;

    bool has_month(MonthId month) const;
    std::size_t size() const { return cells_.size(); }

    struct Key {
        int industry; // -1 = all
        int age_band; // -1 = all
        int month;    // MonthId::index()
        auto operator<=>(const Key&) const = default;
    };
    const std::map<Key, PayrollCell>& cells() const { return cells_; }

    void save_csv(const std::filesystem::path& path) const;
    static PayrollSeries load_csv(const std::filesystem::path& path);

private:
    std::map<Key, PayrollCell> cells_;
};

// Income survey at the collection vintage. Deterministic in cfg.seed.
WeightedSample gen_baseline_survey(const SynthConfig& cfg);

// One WeightedSample per wave starting at cfg.baseline_month, income fields
// zeroed. Households persist (same ids) with probability rotation_retention
// per wave; the rest rotate out for never-seen households of a stable
// synthetic population.
std::vector<WeightedSample> gen_labour_panel(const SynthConfig& cfg, const WeightedSample& baseline);

PayrollSeries gen_payroll(const SynthConfig& cfg);

// Per-age-band multipliers on the industry exit hazard, and for part-time work.
inline constexpr std::array<double, kAgeBandCount> kExitAgeMultiplier = {1.6, 1.0, 0.85, 0.85, 0.95, 1.2};
inline constexpr double kExitPartTimeMultiplier = 1.3;

} // namespace nowcast
