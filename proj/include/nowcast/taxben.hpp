#pragma once
// Parameterised tax-transfer rules: income tax with levy and low-income
// offset, means-tested single-rate payments with full take-up, and the
// temporary crisis measures (supplement, one-off payments, wage subsidy,
// free childcare). Amounts are per fortnight unless noted.

#include "nowcast/core_data.hpp"

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nowcast {

struct TaxSchedule {
    struct Bracket {
        double threshold; // annual income where the rate starts
        double rate;
    };
    std::vector<Bracket> brackets; // strictly increasing thresholds
    double levy_rate = 0.0;
    double levy_threshold = 0.0; // annual; no levy at or below
    double levy_shade_in = 0.0;  // rate on income above the threshold until the full levy applies
    double offset_amount = 0.0;
    double offset_threshold = 0.0; // offset withdrawn above this annual income
    double offset_taper = 0.0;

    void validate() const;
};

struct AssetTest {
    double threshold = std::numeric_limits<double>::infinity();
    bool active = false;
};

struct BenefitRule {
    bool enabled = false;
    double base_rate = 0.0;       // per person, or per child for ftb
    double own_free_area = 0.0;   // ftb: family income free area
    double own_taper = 0.0;
    double partner_threshold = std::numeric_limits<double>::infinity();
    double partner_taper = 0.0;
    AssetTest asset_test;
    bool activity_test_active = true;
    int min_age = 0;
    int max_age = 200;
};

struct CovidMeasures {
    double supplement_rate = 0.0;
    std::set<Benefit> supplement_benefits;
    struct {
        double amount = 0.0; // per payment month
        std::set<MonthId> months;
        std::set<Benefit> benefits;
    } one_off;
    struct {
        double rate = 1500.0;
        bool active = false;
    } jobkeeper;
    struct {
        bool active = false;
        std::set<MonthId> months;
    } free_childcare;
};

struct PolicyRegime {
    std::string regime_id;
    MonthId effective_from{2000, 1};
    std::optional<MonthId> effective_to;
    TaxSchedule tax;
    std::array<BenefitRule, kBenefitCount> benefits{};
    double deeming_rate = 0.03; // annual return used to impute assets from investment income
    CovidMeasures covid;

    bool covers(MonthId m) const { return m >= effective_from && (!effective_to || m <= *effective_to); }
    const BenefitRule& rule(Benefit b) const { return benefits[static_cast<std::size_t>(b)]; }
    BenefitRule& rule(Benefit b) { return benefits[static_cast<std::size_t>(b)]; }

    // Throws ConfigError.
    void validate() const;

    static PolicyRegime from_json_text(std::string_view text, std::string_view origin = "regime");
    static PolicyRegime load(const std::filesystem::path& path);
    std::string to_json() const;
};

using BenefitAmounts = std::array<double, kBenefitCount>;

struct JobKeeperPay {
    double wage_paid = 0.0;
    double top_up = 0.0;
};

JobKeeperPay jobkeeper_wage(const PersonRecord& p, const PolicyRegime& regime);

// Annual income tax; continuous, floored at 0.
double income_tax(double annual_income, const TaxSchedule& schedule);

// Imputed assets from investment income and the deeming rate.
double imputed_assets(const PersonRecord& p, const PolicyRegime& regime);

// Entitlements of one person (ftb is paid to the household's first adult).
// Income tests use private income with the wage as paid under the regime.
BenefitAmounts benefit_entitlement(const PersonRecord& p, const HouseholdRecord& h, const PolicyRegime& regime,
                                   MonthId month);

// One-off amount paid in the month (not per fortnight).
double one_off_payments(const PersonRecord& p, WelfareFlags flags, const PolicyRegime& regime, MonthId month);

double childcare_out_of_pocket(const HouseholdRecord& h, const PolicyRegime& regime, MonthId month);

struct PersonResult {
    PersonId person_id{};
    double wage_paid = 0.0;
    double jobkeeper_amount = 0.0;
    double market_income = 0.0; // wage paid + business + investment
    BenefitAmounts benefits{};
    double one_off = 0.0; // per-fortnight equivalent
    double income_tax = 0.0;
    WelfareFlags effective_flags;
};

struct DisposableIncomeResult {
    double gross_market_income = 0.0; // usual wage + business + investment + other
    double jobkeeper_amount = 0.0;
    BenefitAmounts benefits_by_type{};
    double one_off_payments = 0.0; // per-fortnight equivalent
    double income_tax = 0.0;
    double disposable_income = 0.0;
    double childcare_out_of_pocket = 0.0;
    double disposable_after_childcare = 0.0;
    double after_housing_income = 0.0;
    std::vector<PersonResult> persons;

    double benefits_total() const;
    // Wage (as paid), business and investment income of the household.
    double market_income() const;
};

/// Throws ConfigError when the regime does not cover the month.
DisposableIncomeResult compute_disposable(const HouseholdRecord& h, const PolicyRegime& regime, MonthId month);

std::vector<DisposableIncomeResult> compute_sample(const WeightedSample& s, const PolicyRegime& regime, MonthId month);

} // namespace nowcast
