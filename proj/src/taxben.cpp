#include "nowcast/taxben.hpp"

#include "nowcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace nowcast {

using json = nlohmann::json;

namespace {

constexpr std::array<Benefit, 4> kPrimaryPayments = {Benefit::pension, Benefit::jobseeker, Benefit::parenting,
                                                     Benefit::youth_allowance};

double means_tested(const BenefitRule& r, double base, double own, double partner)
{
    const double own_excess = std::max(0.0, own - r.own_free_area);
    const double partner_excess = std::max(0.0, partner - r.partner_threshold);
    return std::max(0.0, base - r.own_taper * own_excess - r.partner_taper * partner_excess);
}

const PersonRecord* partner_of(const PersonRecord& p, const HouseholdRecord& h)
{
    if (p.marital != Marital::partnered) return nullptr;
    for (const auto& q : h.members)
        if (q.person_id != p.person_id && q.is_adult() && q.marital == Marital::partnered) return &q;
    return nullptr;
}

double tested_income(const PersonRecord& p, const PolicyRegime& regime)
{
    return jobkeeper_wage(p, regime).wage_paid + p.business_income + p.investment_income + p.other_income;
}

bool jobseeker_condition(const PersonRecord& p, const BenefitRule& r)
{
    if (p.labour_state == LabourState::unemployed) return true;
    return !r.activity_test_active && p.labour_state == LabourState::not_in_labour_force && p.employed_since_baseline_flag;
}

bool eligible(Benefit b, const PersonRecord& p, const HouseholdRecord& h, const BenefitRule& r)
{
    if (!r.enabled || !p.is_adult() || p.age < r.min_age || p.age > r.max_age) return false;
    switch (b) {
    case Benefit::pension: return true;
    case Benefit::jobseeker:
    case Benefit::youth_allowance: return jobseeker_condition(p, r);
    case Benefit::parenting: {
        if (partner_of(p, h)) return false;
        for (const auto& q : h.members)
            if (q.age < 8) return true;
        return false;
    }
    case Benefit::ftb: return false;
    }
    return false;
}

// ---- JSON ---------------------------------------------------------------

[[noreturn]] void bad(std::string_view origin, std::string_view what)
{
    throw ConfigError(fmt::format("{}: {}", origin, what));
}

const json& need(const json& j, const char* key, std::string_view origin)
{
    if (!j.is_object() || !j.contains(key)) bad(origin, fmt::format("missing key '{}'", key));
    return j.at(key);
}

double number(const json& j, const char* key, std::string_view origin)
{
    const auto& v = need(j, key, origin);
    if (!v.is_number()) bad(origin, fmt::format("'{}' must be a number", key));
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback, std::string_view origin)
{
    return j.contains(key) ? number(j, key, origin) : fallback;
}

bool boolean_or(const json& j, const char* key, bool fallback, std::string_view origin)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) bad(origin, fmt::format("'{}' must be true or false", key));
    return j.at(key).get<bool>();
}

MonthId month_value(const json& v, std::string_view origin)
{
    if (!v.is_string()) bad(origin, "months must be \"YYYY-MM\" strings");
    try {
        return MonthId::parse(v.get<std::string>());
    } catch (const ConfigError& e) {
        bad(origin, e.what());
    }
}

std::set<MonthId> month_set(const json& j, const char* key, std::string_view origin)
{
    std::set<MonthId> out;
    if (!j.contains(key)) return out;
    if (!j.at(key).is_array()) bad(origin, fmt::format("'{}' must be a list of months", key));
    for (const auto& v : j.at(key)) out.insert(month_value(v, origin));
    return out;
}

std::set<Benefit> benefit_set(const json& j, const char* key, std::string_view origin)
{
    std::set<Benefit> out;
    if (!j.contains(key)) return out;
    if (!j.at(key).is_array()) bad(origin, fmt::format("'{}' must be a list of benefit names", key));
    for (const auto& v : j.at(key)) {
        const auto b = v.is_string() ? parse_benefit(v.get<std::string>()) : std::nullopt;
        if (!b) bad(origin, fmt::format("unknown benefit '{}' in '{}'", v.dump(), key));
        out.insert(*b);
    }
    return out;
}

json months_json(const std::set<MonthId>& months)
{
    json a = json::array();
    for (MonthId m : months) a.push_back(m.to_string());
    return a;
}

json benefits_json(const std::set<Benefit>& bs)
{
    json a = json::array();
    for (Benefit b : bs) a.push_back(std::string(to_code(b)));
    return a;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

void TaxSchedule::validate() const
{
    for (std::size_t i = 0; i < brackets.size(); ++i) {
        if (!(brackets[i].rate >= 0.0 && brackets[i].rate <= 1.0)) throw ConfigError("tax bracket rate outside [0, 1]");
        if (!(brackets[i].threshold >= 0.0)) throw ConfigError("tax bracket threshold must be >= 0");
        if (i > 0 && !(brackets[i].threshold > brackets[i - 1].threshold))
            throw ConfigError("tax bracket thresholds must be strictly increasing");
    }
    for (double r : {levy_rate, levy_shade_in, offset_taper})
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("tax levy and offset rates must lie in [0, 1]");
    if (!(offset_amount >= 0.0) || !(levy_threshold >= 0.0) || !(offset_threshold >= 0.0))
        throw ConfigError("tax levy and offset amounts must be >= 0");
}

void PolicyRegime::validate() const
{
    if (regime_id.empty()) throw ConfigError("regime_id must not be empty");
    if (effective_to && *effective_to < effective_from) throw ConfigError(fmt::format("{}: effective_to before effective_from", regime_id));
    tax.validate();
    for (int i = 0; i < kBenefitCount; ++i) {
        const auto& r = benefits[static_cast<std::size_t>(i)];
        const auto name = to_code(static_cast<Benefit>(i));
        if (!(r.base_rate >= 0.0) || !(r.own_free_area >= 0.0) || !(r.partner_threshold >= 0.0))
            throw ConfigError(fmt::format("{}: {} amounts must be >= 0", regime_id, name));
        if (!(r.own_taper >= 0.0 && r.own_taper <= 1.0) || !(r.partner_taper >= 0.0 && r.partner_taper <= 1.0))
            throw ConfigError(fmt::format("{}: {} tapers must lie in [0, 1]", regime_id, name));
        if (r.min_age > r.max_age) throw ConfigError(fmt::format("{}: {} min_age above max_age", regime_id, name));
    }
    if (!(deeming_rate > 0.0)) throw ConfigError(fmt::format("{}: deeming_rate must be > 0", regime_id));
    if (!(covid.supplement_rate >= 0.0) || !(covid.one_off.amount >= 0.0) || !(covid.jobkeeper.rate >= 0.0))
        throw ConfigError(fmt::format("{}: crisis measure amounts must be >= 0", regime_id));
}

PolicyRegime PolicyRegime::from_json_text(std::string_view text, std::string_view origin)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(origin, fmt::format("invalid JSON ({})", e.what()));
    }
    PolicyRegime r;
    const auto& id = need(j, "regime_id", origin);
    if (!id.is_string()) bad(origin, "'regime_id' must be a string");
    r.regime_id = id.get<std::string>();
    r.effective_from = month_value(need(j, "effective_from", origin), origin);
    if (j.contains("effective_to") && !j.at("effective_to").is_null()) r.effective_to = month_value(j.at("effective_to"), origin);
    r.deeming_rate = number_or(j, "deeming_rate", r.deeming_rate, origin);

    const auto& tax = need(j, "tax", origin);
    const auto& brackets = need(tax, "brackets", origin);
    if (!brackets.is_array() || brackets.empty()) bad(origin, "'tax.brackets' must be a non-empty list");
    for (const auto& b : brackets) r.tax.brackets.push_back({number(b, "threshold", origin), number(b, "rate", origin)});
    r.tax.levy_rate = number_or(tax, "levy_rate", 0.0, origin);
    r.tax.levy_threshold = number_or(tax, "levy_threshold", 0.0, origin);
    r.tax.levy_shade_in = number_or(tax, "levy_shade_in", 0.0, origin);
    if (tax.contains("offset")) {
        const auto& o = tax.at("offset");
        r.tax.offset_amount = number(o, "amount", origin);
        r.tax.offset_threshold = number(o, "threshold", origin);
        r.tax.offset_taper = number(o, "taper", origin);
    }

    const auto& benefits = need(j, "benefits", origin);
    if (!benefits.is_object()) bad(origin, "'benefits' must be an object");
    for (const auto& [key, b] : benefits.items()) {
        const auto which = parse_benefit(key);
        if (!which) bad(origin, fmt::format("unknown benefit '{}'", key));
        BenefitRule& rule = r.rule(*which);
        rule.enabled = boolean_or(b, "enabled", true, origin);
        rule.base_rate = number(b, "base_rate", origin);
        rule.own_free_area = number_or(b, "own_free_area", 0.0, origin);
        rule.own_taper = number_or(b, "own_taper", 0.0, origin);
        if (b.contains("partner_threshold") && !b.at("partner_threshold").is_null())
            rule.partner_threshold = number(b, "partner_threshold", origin);
        rule.partner_taper = number_or(b, "partner_taper", 0.0, origin);
        if (b.contains("asset_test")) {
            const auto& a = b.at("asset_test");
            rule.asset_test.threshold = number(a, "threshold", origin);
            rule.asset_test.active = boolean_or(a, "active", true, origin);
        }
        rule.activity_test_active = boolean_or(b, "activity_test_active", true, origin);
        rule.min_age = static_cast<int>(number_or(b, "min_age", 0.0, origin));
        rule.max_age = static_cast<int>(number_or(b, "max_age", 200.0, origin));
    }

    if (j.contains("covid_measures")) {
        const auto& c = j.at("covid_measures");
        r.covid.supplement_rate = number_or(c, "supplement_rate", 0.0, origin);
        r.covid.supplement_benefits = benefit_set(c, "supplement_benefits", origin);
        if (c.contains("one_off_payment")) {
            const auto& o = c.at("one_off_payment");
            r.covid.one_off.amount = number(o, "amount", origin);
            r.covid.one_off.months = month_set(o, "months", origin);
            r.covid.one_off.benefits = benefit_set(o, "benefits", origin);
        }
        if (c.contains("jobkeeper")) {
            const auto& k = c.at("jobkeeper");
            r.covid.jobkeeper.rate = number_or(k, "rate", 1500.0, origin);
            r.covid.jobkeeper.active = boolean_or(k, "active", false, origin);
        }
        if (c.contains("free_childcare")) {
            const auto& f = c.at("free_childcare");
            r.covid.free_childcare.active = boolean_or(f, "active", false, origin);
            r.covid.free_childcare.months = month_set(f, "months", origin);
        }
    }
    try {
        r.validate();
    } catch (const ConfigError& e) {
        bad(origin, e.what());
    }
    return r;
}

PolicyRegime PolicyRegime::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open regime file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), path.string());
}

std::string PolicyRegime::to_json() const
{
    json j;
    j["regime_id"] = regime_id;
    j["effective_from"] = effective_from.to_string();
    j["effective_to"] = effective_to ? json(effective_to->to_string()) : json(nullptr);
    j["deeming_rate"] = deeming_rate;
    json brackets = json::array();
    for (const auto& b : tax.brackets) brackets.push_back({{"threshold", b.threshold}, {"rate", b.rate}});
    j["tax"] = {{"brackets", brackets},
                {"levy_rate", tax.levy_rate},
                {"levy_threshold", tax.levy_threshold},
                {"levy_shade_in", tax.levy_shade_in},
                {"offset", {{"amount", tax.offset_amount}, {"threshold", tax.offset_threshold}, {"taper", tax.offset_taper}}}};
    json bs = json::object();
    for (int i = 0; i < kBenefitCount; ++i) {
        const auto& r = benefits[static_cast<std::size_t>(i)];
        json b = {{"enabled", r.enabled},
                  {"base_rate", r.base_rate},
                  {"own_free_area", r.own_free_area},
                  {"own_taper", r.own_taper},
                  {"partner_threshold", finite_or_null(r.partner_threshold)},
                  {"partner_taper", r.partner_taper},
                  {"activity_test_active", r.activity_test_active},
                  {"min_age", r.min_age},
                  {"max_age", r.max_age}};
        if (std::isfinite(r.asset_test.threshold))
            b["asset_test"] = {{"threshold", r.asset_test.threshold}, {"active", r.asset_test.active}};
        bs[std::string(to_code(static_cast<Benefit>(i)))] = b;
    }
    j["benefits"] = bs;
    j["covid_measures"] = {
        {"supplement_rate", covid.supplement_rate},
        {"supplement_benefits", benefits_json(covid.supplement_benefits)},
        {"one_off_payment",
         {{"amount", covid.one_off.amount}, {"months", months_json(covid.one_off.months)}, {"benefits", benefits_json(covid.one_off.benefits)}}},
        {"jobkeeper", {{"rate", covid.jobkeeper.rate}, {"active", covid.jobkeeper.active}}},
        {"free_childcare", {{"active", covid.free_childcare.active}, {"months", months_json(covid.free_childcare.months)}}}};
    return j.dump(2);
}

JobKeeperPay jobkeeper_wage(const PersonRecord& p, const PolicyRegime& regime)
{
    JobKeeperPay out{p.wage_income, 0.0};
    if (regime.covid.jobkeeper.active && p.jobkeeper_flag) {
        out.wage_paid = std::max(p.wage_income, regime.covid.jobkeeper.rate);
        out.top_up = out.wage_paid - p.wage_income;
    }
    return out;
}

double income_tax(double annual_income, const TaxSchedule& s)
{
    if (!(annual_income > 0.0)) return 0.0;
    double base = 0.0;
    for (std::size_t i = 0; i < s.brackets.size(); ++i) {
        const double lo = s.brackets[i].threshold;
        const double hi = i + 1 < s.brackets.size() ? s.brackets[i + 1].threshold : INFINITY;
        if (annual_income > lo) base += (std::min(annual_income, hi) - lo) * s.brackets[i].rate;
    }
    const double offset = std::max(0.0, s.offset_amount - s.offset_taper * std::max(0.0, annual_income - s.offset_threshold));
    double levy = 0.0;
    if (annual_income > s.levy_threshold)
        levy = std::min(s.levy_rate * annual_income, s.levy_shade_in * (annual_income - s.levy_threshold));
    return std::max(0.0, base - offset) + levy;
}

double imputed_assets(const PersonRecord& p, const PolicyRegime& regime)
{
    return std::max(0.0, p.investment_income) * kFortnightsPerYear / regime.deeming_rate;
}

BenefitAmounts benefit_entitlement(const PersonRecord& p, const HouseholdRecord& h, const PolicyRegime& regime,
                                   MonthId)
{
    BenefitAmounts out{};
    if (!p.is_adult()) return out;
    const PersonRecord* partner = partner_of(p, h);
    const double own = tested_income(p, regime);
    const double partner_income = partner ? tested_income(*partner, regime) : 0.0;

    // One primary payment per person: the largest of those it qualifies for.
    double best = 0.0;
    std::optional<Benefit> chosen;
    for (Benefit b : kPrimaryPayments) {
        const BenefitRule& r = regime.rule(b);
        if (!eligible(b, p, h, r)) continue;
        if (r.asset_test.active && imputed_assets(p, regime) > r.asset_test.threshold) continue;
        double amount = means_tested(r, r.base_rate, own, partner_income);
        if (amount > 0.0 && regime.covid.supplement_benefits.contains(b)) amount += regime.covid.supplement_rate;
        if (amount > best) {
            best = amount;
            chosen = b;
        }
    }
    if (chosen) out[static_cast<std::size_t>(*chosen)] = best;

    const BenefitRule& ftb = regime.rule(Benefit::ftb);
    const PersonRecord* first_adult = nullptr;
    for (const auto& q : h.members)
        if (q.is_adult() && (!first_adult || raw(q.person_id) < raw(first_adult->person_id))) first_adult = &q;
    if (ftb.enabled && h.n_children() > 0 && first_adult && first_adult->person_id == p.person_id) {
        double family = 0.0;
        for (const auto& q : h.members) family += tested_income(q, regime);
        double amount = means_tested(ftb, ftb.base_rate * h.n_children(), family, 0.0);
        if (amount > 0.0 && regime.covid.supplement_benefits.contains(Benefit::ftb)) amount += regime.covid.supplement_rate;
        out[static_cast<std::size_t>(Benefit::ftb)] = amount;
    }
    return out;
}

double one_off_payments(const PersonRecord& p, WelfareFlags flags, const PolicyRegime& regime, MonthId month)
{
    const auto& o = regime.covid.one_off;
    if (o.amount <= 0.0 || !o.months.contains(month) || !p.is_adult()) return 0.0;
    for (Benefit b : o.benefits)
        if (flags.has(b)) return o.amount;
    return 0.0;
}

double childcare_out_of_pocket(const HouseholdRecord& h, const PolicyRegime& regime, MonthId month)
{
    const auto& f = regime.covid.free_childcare;
    if (f.active && f.months.contains(month)) return 0.0;
    return h.childcare_cost;
}

double DisposableIncomeResult::benefits_total() const
{
    double s = 0.0;
    for (double b : benefits_by_type) s += b;
    return s;
}

double DisposableIncomeResult::market_income() const
{
    double s = 0.0;
    for (const auto& p : persons) s += p.market_income;
    return s;
}

DisposableIncomeResult compute_disposable(const HouseholdRecord& h, const PolicyRegime& regime, MonthId month)
{
    if (!regime.covers(month))
        throw ConfigError(fmt::format("regime '{}' does not cover {}", regime.regime_id, month.to_string()));
    DisposableIncomeResult r;
    r.persons.reserve(h.members.size());
    for (const auto& p : h.members) {
        PersonResult pr;
        pr.person_id = p.person_id;
        const auto pay = jobkeeper_wage(p, regime);
        pr.wage_paid = pay.wage_paid;
        pr.jobkeeper_amount = pay.top_up;
        pr.market_income = pay.wage_paid + p.business_income + p.investment_income;
        pr.benefits = benefit_entitlement(p, h, regime, month);
        pr.effective_flags = p.welfare_flags;
        for (int b = 0; b < kBenefitCount; ++b)
            if (pr.benefits[static_cast<std::size_t>(b)] > 0.0) pr.effective_flags.set(static_cast<Benefit>(b));
        // Lump sum in the month, spread to a fortnightly equivalent.
        pr.one_off = one_off_payments(p, pr.effective_flags, regime, month) * 12.0 / kFortnightsPerYear;
        const double taxable = pay.wage_paid + p.business_income + p.investment_income + p.other_income;
        pr.income_tax = income_tax(taxable * kFortnightsPerYear, regime.tax) / kFortnightsPerYear;

        r.gross_market_income += p.private_income();
        r.jobkeeper_amount += pr.jobkeeper_amount;
        for (std::size_t b = 0; b < pr.benefits.size(); ++b) r.benefits_by_type[b] += pr.benefits[b];
        r.one_off_payments += pr.one_off;
        r.income_tax += pr.income_tax;
        r.persons.push_back(pr);
    }
    r.disposable_income = r.gross_market_income + r.jobkeeper_amount + r.benefits_total() + r.one_off_payments - r.income_tax;
    r.childcare_out_of_pocket = childcare_out_of_pocket(h, regime, month);
    r.disposable_after_childcare = r.disposable_income - r.childcare_out_of_pocket;
    r.after_housing_income = r.disposable_after_childcare - h.housing_cost;
    return r;
}

std::vector<DisposableIncomeResult> compute_sample(const WeightedSample& s, const PolicyRegime& regime, MonthId month)
{
    std::vector<DisposableIncomeResult> out;
    out.reserve(s.households.size());
    for (const auto& h : s.households) out.push_back(compute_disposable(h, regime, month));
    return out;
}

} // namespace nowcast
