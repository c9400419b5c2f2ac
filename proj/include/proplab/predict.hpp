#pragma once

#include <span>
#include <string>
#include <vector>

#include "proplab/inference.hpp"
#include "proplab/model.hpp"

namespace proplab {

/// Probabilities over an explicit community list plus one catch-all mass for
/// anything not listed.
struct PredictiveDistribution {
    std::vector<std::string> communities;
    std::vector<double> probs;  ///< parallel to communities
    double unseen = 0.0;

    double prob_of(const std::string& community) const;
    double sum_squares() const;
    void validate() const;
};

/// Quadratic (Brier) score 2 p(outcome) - sum_c p(c)^2; in [-1, 1], higher is
/// better. An outcome absent from the distribution is charged to the unseen
/// mass.
double quadratic_score(const PredictiveDistribution& dist, const std::string& outcome);

/// One step of a user's visible history: where they acted and the feedback
/// they got.
struct HistoryAction {
    std::string community;
    long replies = 0;
    long score = 0;
};

/// Model prediction for a user's next community: estimates the user's q0 from
/// the history, replays the history through the learning update with the MAP
/// parameters, and normalizes the resulting propensities. An empty history
/// gives the prior predictive (proportional to beta).
PredictiveDistribution predict_next(const FitResult& fit,
                                    std::span<const HistoryAction> history);

enum class Baseline { Global, UserAll, UserKMax, Initial, InitKMax };

const char* baseline_name(Baseline b);

/// Shared inputs for the baselines: global training-frequency counts over a
/// fixed community list, the popularity estimate, and the smoothing/K knobs.
struct BaselineContext {
    std::vector<std::string> communities;
    std::vector<double> global_counts;  ///< per community, from the training log
    std::vector<double> beta;           ///< popularity per community
    double beta_unseen = 0.0;
    double alpha0 = 1.0;
    int k_max = 10;        ///< window for the KMax variants; must be > 0
    double smoothing = 0.5;
};

/// Model-free and no-learning baselines over the same outcome space as the
/// model. `user_history` is the user's available actions, oldest first.
PredictiveDistribution baseline_predict(Baseline kind, const BaselineContext& ctx,
                                        std::span<const HistoryAction> user_history);

}  // namespace proplab
