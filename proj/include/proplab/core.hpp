#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proplab/rng.hpp"

namespace proplab {

/// Social feedback received in response to a single action.
struct FeedbackVector {
    double replies_norm = 0.0;  ///< reply count divided by the corpus cap, >= 0
    double vote_score = 0.0;    ///< net up-votes minus down-votes, may be negative
};

/// Linear map from feedback features to a scalar propensity increment,
/// clamped below at `floor` so propensities stay nonnegative.
struct RewardFunction {
    double w_replies = 1.0;
    double w_votes = 1.0;
    double w_intercept = 0.0;
    double floor = 0.0;

    double operator()(const FeedbackVector& r) const;
};

struct LearningParams {
    double phi = 0.0;      ///< recency decay, in [0, 1]
    double epsilon = 0.0;  ///< exploration share, in [0, 1]
};

/// A user's propensities over an ordered set of communities plus one
/// aggregated "unseen" slot (the last index). Value type; all operations on
/// it are pure.
struct PropensityState {
    std::vector<std::string> communities;  ///< slot i <-> communities[i]
    std::vector<double> q0;                ///< initial propensities, simplex over slots
    std::vector<double> q;                 ///< current propensities, nonnegative

    static PropensityState make(std::vector<std::string> communities,
                                std::vector<double> q0);

    int slot_count() const { return static_cast<int>(q.size()); }
    int unseen_slot() const { return static_cast<int>(q.size()) - 1; }

    /// Slot of a community id, or -1 when it is not indexed (i.e. unseen).
    int slot_of(std::string_view community) const;

    void validate() const;
};

/// max(floor, w·r + intercept); throws on non-finite input.
double reward(const RewardFunction& rf, const FeedbackVector& r);

/// q normalized to sum 1. The last entry is the probability of picking a
/// never-before-seen community. Throws std::domain_error on all-zero q.
std::vector<double> choice_distribution(const PropensityState& state);

/// One learning step, applied in this order:
///   q <- q (1 - phi)
///   q[chosen] += (1 - eps) * reward_value
///   q += eps * reward_value * q0
PropensityState apply_update(PropensityState state, int chosen,
                             double reward_value, const LearningParams& lp);

/// Appends a slot for `new_community`, moving `split_fraction` of the unseen
/// remainder mass of both q0 and q into it. Totals are preserved.
PropensityState grow_state(PropensityState state, const std::string& new_community,
                           double split_fraction = 0.5);

/// One sampled action of a generated trajectory.
struct SampledAction {
    std::string community;
    long replies = 0;
    long score = 0;
    FeedbackVector feedback;
    double reward_value = 0.0;
};

/// Draws (replies, score) for an action in `community` at step `step`.
class FeedbackSource {
public:
    virtual ~FeedbackSource() = default;
    virtual std::pair<long, long> draw(Rng& rng, const std::string& community,
                                       int step) const = 0;
};

/// Independent per-action feedback: replies ~ Poisson(reply_rate),
/// score ~ round(Normal(vote_mean, vote_sd)).
class IndependentFeedback final : public FeedbackSource {
public:
    IndependentFeedback(double reply_rate, double vote_mean, double vote_sd)
        : reply_rate_(reply_rate), vote_mean_(vote_mean), vote_sd_(vote_sd) {}

    std::pair<long, long> draw(Rng& rng, const std::string&, int) const override {
        return {rng.poisson(reply_rate_), std::lround(rng.normal(vote_mean_, vote_sd_))};
    }

private:
    double reply_rate_, vote_mean_, vote_sd_;
};

/// Iterates pick -> feedback -> update for n steps starting from `state`.
/// A draw of the unseen slot spawns a fresh community named
/// "<unseen_prefix><counter>". Deterministic given rng.
std::vector<SampledAction> sample_trajectory(PropensityState state,
                                             const LearningParams& lp,
                                             const RewardFunction& rf,
                                             double reply_cap, int n,
                                             const FeedbackSource& feedback,
                                             Rng& rng,
                                             const std::string& unseen_prefix = "x");

}  // namespace proplab
