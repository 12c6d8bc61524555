#include "nowcast/stats.hpp"

#include "nowcast/error.hpp"
#include "nowcast/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace nowcast {

namespace {

std::vector<std::size_t> ascending(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

void check_inputs(std::span<const double> values, std::span<const double> weights, const char* what)
{
    if (values.size() != weights.size()) throw DataError(fmt::format("{}: values/weights size mismatch", what));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DataError(fmt::format("{}: non-finite value", what));
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) throw DataError(fmt::format("{}: weights must be finite and >= 0", what));
    }
}

} // namespace

double gini(std::span<const double> values, std::span<const double> weights)
{
    check_inputs(values, weights, "gini");
    const auto order = ascending(values);
    const std::size_t n = order.size();
    std::vector<double> y(n);
    std::vector<double> w(n);
    std::vector<double> f(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += weights[order[i]];
    if (!(total > 0.0)) throw DataError("gini: zero weight mass");
    double before = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = values[order[i]];
        w[i] = weights[order[i]];
        f[i] = (before + 0.5 * w[i]) / total - 0.5;
        before += w[i];
    }
    const double mass = simd::dot(w, y);
    if (!(mass > 0.0)) throw DataError("gini: mean income must be positive");
    return 2.0 * simd::dot3(w, y, f) / mass;
}

double weighted_median(std::span<const double> values, std::span<const double> weights)
{
    check_inputs(values, weights, "weighted_median");
    const auto order = ascending(values);
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw DataError("weighted_median: zero weight mass");
    const double half = 0.5 * total;
    double cum = 0.0;
    std::optional<double> lower;
    for (std::size_t i : order) {
        if (weights[i] <= 0.0) continue;
        cum += weights[i];
        if (!lower && cum >= half) lower = values[i];
        if (cum > half) return 0.5 * (*lower + values[i]);
    }
    return *lower;
}

UnitValues unit_values(const WeightedSample& s, std::span<const double> household_values, PovertyUnit unit)
{
    if (household_values.size() != s.households.size()) throw DataError("household values misaligned with sample");
    UnitValues out;
    for (std::size_t i = 0; i < s.households.size(); ++i) {
        const auto& h = s.households[i];
        const std::size_t copies = unit == PovertyUnit::person ? h.members.size() : 1;
        for (std::size_t k = 0; k < copies; ++k) {
            out.values.push_back(household_values[i]);
            out.weights.push_back(h.weight);
        }
    }
    return out;
}

PovertyLine anchor_poverty_line(const WeightedSample& baseline, std::span<const double> household_values, PovertyUnit unit)
{
    if (baseline.households.empty()) throw DataError("anchor_poverty_line: empty baseline sample");
    const auto u = unit_values(baseline, household_values, unit);
    return PovertyLine{0.5 * weighted_median(u.values, u.weights), baseline.month};
}

double poverty_rate(std::span<const double> values, std::span<const double> weights, const PovertyLine& line)
{
    check_inputs(values, weights, "poverty_rate");
    double total = 0.0;
    double poor = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total += weights[i];
        if (values[i] < line.value) poor += weights[i];
    }
    if (!(total > 0.0)) throw DataError("poverty_rate: zero weight mass");
    return poor / total;
}

double poverty_rate(const WeightedSample& s, std::span<const double> household_values, const PovertyLine& line,
                    PovertyUnit unit)
{
    const auto u = unit_values(s, household_values, unit);
    return poverty_rate(u.values, u.weights, line);
}

std::vector<double> household_concept(const WeightedSample& s, std::span<const DisposableIncomeResult> results,
                                      Concept which)
{
    if (results.size() != s.households.size()) throw DataError("income results misaligned with sample");
    std::vector<double> out(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const auto& h = s.households[i];
        switch (which) {
        case Concept::household_market_income: out[i] = r.market_income(); break;
        case Concept::equivalised_disposable: out[i] = equivalise(r.disposable_income, h); break;
        case Concept::equivalised_disposable_after_childcare: out[i] = equivalise(r.disposable_after_childcare, h); break;
        case Concept::equivalised_after_housing: out[i] = equivalise(r.after_housing_income, h); break;
        }
    }
    return out;
}

UnitValues market_income_15_64(const WeightedSample& s, std::span<const DisposableIncomeResult> results)
{
    if (results.size() != s.households.size()) throw DataError("income results misaligned with sample");
    UnitValues out;
    for (std::size_t i = 0; i < s.households.size(); ++i) {
        const auto& h = s.households[i];
        for (std::size_t k = 0; k < h.members.size(); ++k) {
            const auto& p = h.members[k];
            if (p.age < 15 || p.age > 64) continue;
            out.values.push_back(results[i].persons[k].market_income);
            out.weights.push_back(h.weight);
        }
    }
    return out;
}

QuintileTable quintile_table(const WeightedSample& s, const QuintileMap& quintiles, std::span<const double> household_values)
{
    if (household_values.size() != s.households.size()) throw DataError("household values misaligned with sample");
    std::array<double, 5> sum{};
    std::array<double, 5> wsum{};
    double all = 0.0;
    double wall = 0.0;
    for (std::size_t i = 0; i < s.households.size(); ++i) {
        const auto& h = s.households[i];
        const auto it = quintiles.find(h.household_id);
        if (it == quintiles.end()) throw DataError(fmt::format("household {} has no baseline quintile", raw(h.household_id)));
        const auto q = static_cast<std::size_t>(it->second - 1);
        sum[q] += h.weight * household_values[i];
        wsum[q] += h.weight;
        all += h.weight * household_values[i];
        wall += h.weight;
    }
    QuintileTable t;
    for (std::size_t q = 0; q < 5; ++q) {
        if (!(wsum[q] > 0.0)) throw DataError(fmt::format("quintile {} is empty", q + 1));
        t.means[q] = sum[q] / wsum[q] * kFortnightToMonth;
    }
    t.all = all / wall * kFortnightToMonth;
    return t;
}

QuintileTable percent_change(const QuintileTable& now, const QuintileTable& base)
{
    QuintileTable out;
    for (std::size_t q = 0; q < 5; ++q) out.means[q] = 100.0 * (now.means[q] / base.means[q] - 1.0);
    out.all = 100.0 * (now.all / base.all - 1.0);
    return out;
}

} // namespace nowcast
