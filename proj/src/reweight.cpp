#include "nowcast/reweight.hpp"

#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

namespace nowcast {

namespace {

double weighted_share(const WeightedSample& s, const std::function<bool(const PersonRecord&, const HouseholdRecord&)>& num,
                      const std::function<bool(const PersonRecord&, const HouseholdRecord&)>& den)
{
    double a = 0.0;
    double b = 0.0;
    for (const auto& h : s.households)
        for (const auto& p : h.members) {
            if (!den(p, h)) continue;
            b += h.weight;
            if (num(p, h)) a += h.weight;
        }
    return b > 0.0 ? a / b : 0.0;
}

} // namespace

std::vector<std::string> MembershipModel::column_names() const
{
    std::vector<std::string> names = design.column_names();
    const auto& hh = design.household_columns();
    for (std::size_t j = 1; j < names.size(); ++j)
        if (!hh[j]) names[j] = "sum " + names[j];
    return names;
}

void MembershipModel::household_row(const HouseholdRecord& h, std::span<double> out) const
{
    const std::size_t k = design.width();
    const auto& hh = design.household_columns();
    std::vector<double> person(k);
    std::fill(out.begin(), out.end(), 0.0);
    bool any = false;
    for (const auto& p : h.members) {
        if (!p.is_adult()) continue;
        design.fill(p, h, person);
        for (std::size_t j = 1; j < k; ++j)
            if (!hh[j]) out[j] += person[j];
            else if (!any) out[j] = person[j];
        any = true;
    }
    if (!any) throw DataError(fmt::format("household {} has no adult to score", raw(h.household_id)));
    out[0] = 1.0;
}

double MembershipModel::odds(const HouseholdRecord& h) const
{
    std::vector<double> row(design.width());
    household_row(h, row);
    double eta = 0.0;
    for (std::size_t j = 0; j < kept_columns.size(); ++j) eta += row[kept_columns[j]] * fit.coefficients[j];
    return std::exp(eta);
}

MembershipModel fit_membership(const WeightedSample& survey, const WeightedSample& panel, const CovariateSpec& spec,
                               const GlmOptions& options)
{
    const double n_survey = static_cast<double>(survey.households.size());
    const double n_panel = static_cast<double>(panel.households.size());
    if (n_survey == 0.0 || n_panel == 0.0) throw DataError("fit_membership: both datasets need at least one household");
    const double w_survey = survey.total_weight();
    const double w_panel = panel.total_weight();
    if (!(w_survey > 0.0) || !(w_panel > 0.0)) throw DataError("fit_membership: zero weight mass in a dataset");

    MembershipModel model;
    model.design = DesignBuilder(spec);
    for (const auto* s : {&survey, &panel})
        for (const auto& h : s->households)
            for (const auto& p : h.members)
                if (p.is_adult()) model.design.observe(p, h);
    model.design.freeze();

    const auto n = static_cast<std::size_t>(n_survey + n_panel);
    DesignMatrix x;
    x.rows = n;
    x.cols = model.design.width();
    x.data.assign(n * x.cols, 0.0);
    std::vector<double> y(n);
    std::vector<double> w(n);
    std::size_t r = 0;
    for (int d = 0; d < 2; ++d) {
        const auto& s = d == 0 ? survey : panel;
        const double scale = d == 0 ? n_survey / w_survey : n_panel / w_panel;
        for (const auto& h : s.households) {
            model.household_row(h, x.row(r));
            y[r] = d;
            w[r] = h.weight * scale;
            ++r;
        }
    }
    const auto names = model.column_names();
    model.kept_columns = independent_columns(x, w);
    for (std::size_t j = 0, next = 0; j < x.cols; ++j) {
        if (next < model.kept_columns.size() && model.kept_columns[next] == j) ++next;
        else model.dropped_columns.push_back(names[j]);
    }
    DesignMatrix xk;
    xk.rows = n;
    xk.cols = model.kept_columns.size();
    xk.data.resize(n * xk.cols);
    std::vector<std::string> kept_names;
    for (std::size_t j : model.kept_columns) kept_names.push_back(names[j]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < xk.cols; ++j) xk.data[i * xk.cols + j] = x.data[i * x.cols + model.kept_columns[j]];
    model.fit = fit_binary(xk, y, w, Link::logit, kept_names, options);
    if (!model.fit.converged)
        throw ConvergenceError(fmt::format("membership model did not converge after {} iterations (max score {:.3g})",
                                           model.fit.iterations, model.fit.max_score));
    model.n_survey = survey.households.size();
    model.n_panel = panel.households.size();
    model.gamma = n_survey / n_panel;
    return model;
}

WeightUpdate compute_ratios(const MembershipModel& model, const WeightedSample& survey, double gamma,
                            std::optional<double> trim_quantile, std::optional<MonthId> month)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("compute_ratios: gamma must be > 0");
    if (trim_quantile && !(*trim_quantile > 0.0 && *trim_quantile <= 1.0))
        throw ConfigError("compute_ratios: trim quantile must lie in (0, 1]");

    WeightUpdate out;
    out.gamma = gamma;
    out.household_ratio.reserve(survey.households.size());
    for (const auto& h : survey.households) {
        const double odds = model.odds(h);
        if (!std::isfinite(odds))
            throw DataError(fmt::format("household {}: predicted survey membership probability is 0", raw(h.household_id)));
        out.household_ratio.push_back(odds * gamma);
    }
    if (trim_quantile && !out.household_ratio.empty()) {
        std::vector<double> sorted = out.household_ratio;
        std::sort(sorted.begin(), sorted.end());
        const auto rank = static_cast<std::size_t>(std::ceil(*trim_quantile * static_cast<double>(sorted.size())));
        out.trim_cap = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
        for (double& ratio : out.household_ratio)
            if (ratio > *out.trim_cap) {
                ratio = *out.trim_cap;
                ++out.n_trimmed;
            }
    }

    out.sample.month = month.value_or(survey.month);
    out.sample.households = survey.households;
    for (std::size_t i = 0; i < out.sample.households.size(); ++i) out.sample.households[i].weight *= out.household_ratio[i];
    return out;
}

WeightedSample calibrate_total(WeightedSample sample, double population_target)
{
    if (!(population_target > 0.0) || !std::isfinite(population_target))
        throw ConfigError("calibrate_total: population target must be > 0");
    const double total = sample.total_weight();
    if (!(total > 0.0)) throw DataError("calibrate_total: zero weight mass");
    const double scale = population_target / total;
    for (auto& h : sample.households) h.weight *= scale;
    return sample;
}

WeightedSample calibrate_total(const WeightUpdate& update, double population_target)
{
    return calibrate_total(update.sample, population_target);
}

double effective_sample_size(const WeightedSample& s)
{
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& h : s.households) {
        sum += h.weight;
        sq += h.weight * h.weight;
    }
    return sq > 0.0 ? sum * sum / sq : 0.0;
}

LabourShares labour_shares(const WeightedSample& s)
{
    double adults = 0.0;
    double emp = 0.0;
    double unemp = 0.0;
    for (const auto& h : s.households)
        for (const auto& p : h.members) {
            if (!p.is_adult()) continue;
            adults += h.weight;
            if (p.labour_state == LabourState::employed) emp += h.weight;
            if (p.labour_state == LabourState::unemployed) unemp += h.weight;
        }
    LabourShares out;
    if (adults > 0.0) {
        out.employed = emp / adults;
        out.unemployed = unemp / adults;
    }
    if (emp + unemp > 0.0) out.unemployment_rate = unemp / (emp + unemp);
    return out;
}

std::vector<DiagnosticRow> demographic_profile(const WeightedSample& baseline, const WeightedSample& panel,
                                               const WeightedSample& modelled)
{
    using Pred = std::function<bool(const PersonRecord&, const HouseholdRecord&)>;
    const Pred adult = [](const PersonRecord& p, const HouseholdRecord&) { return p.is_adult(); };
    const Pred labour_force = [](const PersonRecord& p, const HouseholdRecord&) {
        return p.is_adult() && p.labour_state != LabourState::not_in_labour_force;
    };
    const Pred employed = [](const PersonRecord& p, const HouseholdRecord&) { return p.is_adult() && p.employed(); };

    struct Spec {
        std::string name;
        Pred num;
        Pred den;
    };
    std::vector<Spec> specs = {
        {"aged 15-24", [](const PersonRecord& p, const HouseholdRecord&) { return p.age < 25; }, adult},
        {"aged 25-64", [](const PersonRecord& p, const HouseholdRecord&) { return p.age >= 25 && p.age < 65; }, adult},
        {"aged 65+", [](const PersonRecord& p, const HouseholdRecord&) { return p.age >= 65; }, adult},
        {"male", [](const PersonRecord& p, const HouseholdRecord&) { return p.sex == Sex::male; }, adult},
        {"married or partnered", [](const PersonRecord& p, const HouseholdRecord&) { return p.marital == Marital::partnered; }, adult},
        {"born overseas", [](const PersonRecord& p, const HouseholdRecord&) { return p.overseas_born; }, adult},
        {"bachelor or higher", [](const PersonRecord& p, const HouseholdRecord&) { return p.education == Education::bachelor_or_higher; }, adult},
        {"employed", [](const PersonRecord& p, const HouseholdRecord&) { return p.employed(); }, adult},
        {"unemployed", [](const PersonRecord& p, const HouseholdRecord&) { return p.labour_state == LabourState::unemployed; }, adult},
        {"not in labour force", [](const PersonRecord& p, const HouseholdRecord&) { return p.labour_state == LabourState::not_in_labour_force; }, adult},
        {"unemployment rate", [](const PersonRecord& p, const HouseholdRecord&) { return p.labour_state == LabourState::unemployed; }, labour_force},
        {"full-time among employed", [](const PersonRecord& p, const HouseholdRecord&) { return p.usual_hours >= 35.0; }, employed},
        {"living with children 0-4", [](const PersonRecord&, const HouseholdRecord& h) { return h.n_children_0_4 > 0; }, adult},
    };
    for (Industry ind : all_industries())
        specs.push_back({fmt::format("industry {}", industry_name(ind)),
                         [ind](const PersonRecord& p, const HouseholdRecord&) { return p.industry == ind; }, employed});

    std::vector<DiagnosticRow> rows;
    for (const auto& s : specs)
        rows.push_back({s.name, weighted_share(baseline, s.num, s.den), weighted_share(panel, s.num, s.den),
                        weighted_share(modelled, s.num, s.den)});
    return rows;
}

ReweightDiagnostics reweight_diagnostics(const WeightedSample& before, const WeightedSample& after,
                                         const WeightedSample& panel)
{
    ReweightDiagnostics out;
    out.rows = demographic_profile(before, panel, after);
    out.effective_sample_size = effective_sample_size(after);
    double lo = INFINITY;
    double hi = 0.0;
    for (const auto& h : after.households) {
        if (h.weight <= 0.0) continue;
        lo = std::min(lo, h.weight);
        hi = std::max(hi, h.weight);
    }
    out.max_min_weight_ratio = hi > 0.0 ? hi / lo : 0.0;
    return out;
}

std::string ReweightDiagnostics::to_csv() const
{
    csv::Writer w({"variable", "baseline", "panel", "modelled"});
    for (const auto& r : rows) w.row({r.variable, csv::fixed(r.baseline, 6), csv::fixed(r.panel, 6), csv::fixed(r.modelled, 6)});
    w.row({"effective sample size", "", "", csv::fixed(effective_sample_size, 2)});
    w.row({"max/min weight ratio", "", "", csv::fixed(max_min_weight_ratio, 4)});
    return w.str();
}

} // namespace nowcast
