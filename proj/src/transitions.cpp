#include "nowcast/transitions.hpp"

#include "nowcast/error.hpp"
#include "nowcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

namespace nowcast {

double ProbitModel::probability(const PersonRecord& p, const HouseholdRecord& h) const
{
    std::vector<double> row(design.width());
    design.fill(p, h, row);
    double eta = 0.0;
    for (std::size_t j = 0; j < kept_columns.size(); ++j) eta += row[kept_columns[j]] * fit.coefficients[j];
    return standard_normal_cdf(eta);
}

bool ProbitModel::in_population(const PersonRecord& p) const
{
    if (!p.is_adult() || p.sex != stratum.sex) return false;
    if (outcome == TransitionOutcome::remain_employed) return p.employed();
    return p.labour_state == LabourState::not_in_labour_force;
}

ProbitModel fit_probit(const std::vector<ProbitObservation>& obs, const CovariateSpec& spec, TransitionOutcome outcome,
                       Stratum stratum, const GlmOptions& options, const WeightedSample* scoring)
{
    if (obs.empty())
        throw DataError(fmt::format("probit stratum ({}, {}) is empty", to_code(stratum.sex), stratum.wave.to_string()));
    ProbitModel model;
    model.outcome = outcome;
    model.stratum = stratum;
    model.design = DesignBuilder(spec);
    for (const auto& o : obs) model.design.observe(*o.person, *o.household);
    if (scoring)
        for (const auto& h : scoring->households)
            for (const auto& p : h.members)
                if (model.in_population(p)) model.design.observe(p, h);
    model.design.freeze();

    const std::size_t k = model.design.width();
    const std::size_t n = obs.size();
    std::vector<double> full(n * k);
    for (std::size_t i = 0; i < n; ++i) model.design.fill(*obs[i].person, *obs[i].household, {full.data() + i * k, k});

    // A dummy whose rows all share one outcome has no finite estimate.
    const auto& terms = model.design.column_terms();
    const auto& names = model.design.column_names();
    model.kept_columns.push_back(0);
    for (std::size_t j = 1; j < k; ++j) {
        bool keep = true;
        const bool dummy = terms[j] != names[j];
        if (dummy) {
            double w1 = 0.0;
            double pos = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (full[i * k + j] != 0.0 && obs[i].weight > 0.0) {
                    w1 += obs[i].weight;
                    if (obs[i].outcome) pos += obs[i].weight;
                }
            keep = w1 > 0.0 && pos > 0.0 && pos < w1;
        }
        if (keep) model.kept_columns.push_back(j);
        else model.dropped_columns.push_back(names[j]);
    }
    {
        // Dropping separated dummies can leave exact aliases among the rest.
        DesignMatrix pre;
        pre.rows = n;
        pre.cols = model.kept_columns.size();
        pre.data.resize(n * pre.cols);
        std::vector<double> pw(n);
        for (std::size_t i = 0; i < n; ++i) {
            pw[i] = obs[i].weight;
            for (std::size_t c = 0; c < pre.cols; ++c) pre.data[i * pre.cols + c] = full[i * k + model.kept_columns[c]];
        }
        std::vector<std::size_t> kept;
        const auto independent = independent_columns(pre, pw);
        for (std::size_t c = 0, next = 0; c < pre.cols; ++c) {
            if (next < independent.size() && independent[next] == c) {
                kept.push_back(model.kept_columns[c]);
                ++next;
            } else {
                model.dropped_columns.push_back(names[model.kept_columns[c]]);
            }
        }
        model.kept_columns = std::move(kept);
    }

    DesignMatrix x;
    x.rows = n;
    x.cols = model.kept_columns.size();
    x.data.resize(n * x.cols);
    std::vector<std::string> kept_names;
    for (std::size_t j : model.kept_columns) kept_names.push_back(names[j]);
    std::vector<double> y(n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < x.cols; ++c) x.data[i * x.cols + c] = full[i * k + model.kept_columns[c]];
        y[i] = obs[i].outcome ? 1.0 : 0.0;
        w[i] = obs[i].weight;
    }
    try {
        model.fit = fit_binary(x, y, w, Link::probit, kept_names, options);
    } catch (const SeparationError& e) {
        throw SeparationError(fmt::format("probit ({}, {}): {}", to_code(stratum.sex), stratum.wave.to_string(), e.what()));
    } catch (const SingularInformationError& e) {
        throw SingularInformationError(
            fmt::format("probit ({}, {}): {}", to_code(stratum.sex), stratum.wave.to_string(), e.what()));
    }
    if (!model.fit.converged)
        throw ConvergenceError(fmt::format("probit ({}, {}) did not converge after {} iterations",
                                           to_code(stratum.sex), stratum.wave.to_string(), model.fit.iterations));
    return model;
}

std::vector<ProbitObservation> retention_observations(const WeightedSample& previous, const WeightedSample& wave, Sex sex)
{
    std::unordered_map<std::int64_t, const PersonRecord*> now;
    for (const auto& h : wave.households)
        for (const auto& p : h.members) now.emplace(raw(p.person_id), &p);
    std::vector<ProbitObservation> out;
    for (const auto& h : previous.households)
        for (const auto& p : h.members) {
            if (!p.is_adult() || !p.employed() || p.sex != sex) continue;
            const auto it = now.find(raw(p.person_id));
            if (it == now.end()) continue;
            out.push_back({&p, &h, it->second->employed(), h.weight});
        }
    return out;
}

std::vector<ProbitObservation> history_observations(const WeightedSample& wave, Sex sex)
{
    std::vector<ProbitObservation> out;
    for (const auto& h : wave.households)
        for (const auto& p : h.members)
            if (p.is_adult() && p.sex == sex && p.labour_state == LabourState::not_in_labour_force)
                out.push_back({&p, &h, p.employed_since_baseline_flag, h.weight});
    return out;
}

std::map<PersonId, double> score_baseline(const ProbitModel& model, const WeightedSample& sample)
{
    std::map<PersonId, double> out;
    for (const auto& h : sample.households)
        for (const auto& p : h.members)
            if (model.in_population(p)) out.emplace(p.person_id, model.probability(p, h));
    return out;
}

std::set<PersonId> align_binary(const std::vector<AlignmentCandidate>& candidates, const AlignmentTarget& target,
                                std::uint64_t seed)
{
    if (!(target.noise_scale >= 0.0)) throw ConfigError("alignment noise_scale must be >= 0");
    if (!(target.target_count >= 0.0) || !std::isfinite(target.target_count))
        throw InfeasibleAlignmentError("alignment target must be a finite count >= 0");
    double total = 0.0;
    for (const auto& c : candidates) total += c.weight;
    if (target.target_count > total * (1.0 + 1e-12))
        throw InfeasibleAlignmentError(
            fmt::format("alignment target {:.1f} exceeds eligible weighted mass {:.1f}", target.target_count, total));

    Rng rng(seed);
    std::vector<double> key(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double s = std::clamp(candidates[i].score, 1e-300, 1.0 - 1e-16);
        key[i] = std::log(s) - std::log1p(-s);
        if (target.noise_scale > 0.0) {
            double u = uniform01(rng);
            while (u == 0.0) u = uniform01(rng);
            key[i] += target.noise_scale * (std::log(u) - std::log1p(-u));
        }
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });

    std::set<PersonId> selected;
    double cum = 0.0;
    for (std::size_t i : order) {
        if (cum >= target.target_count) break;
        selected.insert(candidates[i].id);
        cum += candidates[i].weight;
    }
    return selected;
}

WeightedSample apply_transitions(WeightedSample sample, const std::set<PersonId>& jobkeeper,
                                 const std::set<PersonId>& eligibility)
{
    std::size_t hit_jk = 0;
    std::size_t hit_el = 0;
    for (auto& h : sample.households)
        for (auto& p : h.members) {
            if (jobkeeper.contains(p.person_id)) {
                if (!p.employed())
                    throw DataError(fmt::format("person {}: jobkeeper flag on a person who is not employed", raw(p.person_id)));
                p.jobkeeper_flag = true;
                ++hit_jk;
            }
            if (eligibility.contains(p.person_id)) {
                if (!p.is_adult() || p.labour_state != LabourState::not_in_labour_force)
                    throw DataError(fmt::format("person {}: eligibility flag on a person not out of the labour force",
                                                raw(p.person_id)));
                p.employed_since_baseline_flag = true;
                ++hit_el;
            }
        }
    if (hit_jk != jobkeeper.size() || hit_el != eligibility.size())
        throw DataError("apply_transitions: selection names persons absent from the sample");
    return sample;
}

double interpolate_target(const std::map<MonthId, double>& anchors, MonthId month)
{
    if (anchors.empty()) return 0.0;
    if (month <= anchors.begin()->first) return anchors.begin()->second;
    if (month >= anchors.rbegin()->first) return anchors.rbegin()->second;
    const auto hi = anchors.upper_bound(month);
    const auto lo = std::prev(hi);
    if (lo->first == month) return lo->second;
    const double t = static_cast<double>(months_between(lo->first, month)) / months_between(lo->first, hi->first);
    return lo->second + t * (hi->second - lo->second);
}

} // namespace nowcast
