#pragma once
// Labour-market transition propensities estimated on the panel, transferred
// to the reweighted survey, and aligned to administrative counts.

#include "nowcast/core_data.hpp"
#include "nowcast/covariates.hpp"
#include "nowcast/glm.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nowcast {

enum class TransitionOutcome : std::uint8_t {
    remain_employed,        // employed in wave m-1, still employed in wave m
    employed_since_baseline // not in labour force in wave m, worked since the baseline month
};

struct Stratum {
    Sex sex = Sex::male;
    MonthId wave;
};

struct ProbitModel {
    TransitionOutcome outcome = TransitionOutcome::remain_employed;
    Stratum stratum;
    DesignBuilder design;
    std::vector<std::size_t> kept_columns; // design columns that entered the fit
    std::vector<std::string> dropped_columns;
    GlmFit fit;

    double probability(const PersonRecord& p, const HouseholdRecord& h) const;
    // Persons the model conditions on (employed for retention, NILF adults for history).
    bool in_population(const PersonRecord& p) const;
};

struct ProbitObservation {
    const PersonRecord* person;
    const HouseholdRecord* household; // covariates
    bool outcome;
    double weight;
};

/// Fits a probit on the given observations. Dummy columns whose level has a
/// constant outcome are dropped before fitting (they would diverge) and
/// recorded in dropped_columns. Throws DataError when the outcome is
/// constant, ConvergenceError on separation, a singular information matrix
/// or non-convergence.
///
/// Levels present only in `scoring` (never in the training rows) are scored
/// as the reference level instead of failing in score_baseline.
ProbitModel fit_probit(const std::vector<ProbitObservation>& obs, const CovariateSpec& spec, TransitionOutcome outcome,
                       Stratum stratum, const GlmOptions& options = {}, const WeightedSample* scoring = nullptr);

/// Observations for the retention model of wave `wave`: persons employed in
/// `previous`, present in both waves, covariates from the previous wave.
std::vector<ProbitObservation> retention_observations(const WeightedSample& previous, const WeightedSample& wave, Sex sex);
/// Observations for the employment-history model: NILF adults of the wave.
std::vector<ProbitObservation> history_observations(const WeightedSample& wave, Sex sex);

// Propensities for every person in the model population, keyed by id.
std::map<PersonId, double> score_baseline(const ProbitModel& model, const WeightedSample& sample);

struct AlignmentTarget {
    double target_count = 0.0; // population units
    double noise_scale = 1.0;  // on the logit scale; 0 = deterministic top-k
};

struct AlignmentCandidate {
    PersonId id;
    double score;  // propensity in (0, 1)
    double weight;
};

/// Ranks candidates by logit(score) + noise_scale * Logistic(0, 1) descending
/// (ties by input order) and selects until the cumulative weight first
/// reaches the target. Throws InfeasibleAlignmentError when the target
/// exceeds the total candidate weight or is negative.
std::set<PersonId> align_binary(const std::vector<AlignmentCandidate>& candidates, const AlignmentTarget& target,
                                std::uint64_t seed);

/// Sets jobkeeper_flag on the first selection (must be employed) and
/// employed_since_baseline_flag on the second (must be NILF adults).
/// Throws DataError when a selected person is ineligible or absent.
WeightedSample apply_transitions(WeightedSample sample, const std::set<PersonId>& jobkeeper,
                                 const std::set<PersonId>& eligibility);

// Linear interpolation between anchor months; held flat outside the anchors.
double interpolate_target(const std::map<MonthId, double>& anchors, MonthId month);

} // namespace nowcast
