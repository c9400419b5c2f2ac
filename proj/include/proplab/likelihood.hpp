#pragma once

#include <span>
#include <vector>

#include "proplab/model.hpp"

namespace proplab {

struct LikelihoodOptions {
    /// Floor applied to per-step choice probabilities. Zero means exact
    /// likelihoods (a zero-probability action yields -inf); inference uses a
    /// tiny positive floor so the sampler cannot get stuck at -inf.
    double prob_floor = 0.0;
};

/// Exact log-likelihood of an observed action sequence, with propensities
/// evolved through the observed rewards. q0 spans the dataset's community
/// slots plus the trailing unseen slot. Always <= 0; -inf (not a throw) on a
/// zero-probability action.
double sequence_log_likelihood(const ModelParams& params, std::span<const double> q0,
                               std::span<const IndexedAction> actions,
                               const LikelihoodOptions& opts = {});

/// Along a fixed action sequence the propensity vector stays affine in q0:
///   q_i[s] = offset_i[s] + q0_coef_i * q0[s],   sum_s q_i[s] = offset_sum_i + q0_coef_i.
/// One StepTerm per action captures the pieces the likelihood needs, so the
/// sequence log-likelihood as a function of q0 is a sum of logs of affine
/// forms (and concave on the simplex).
struct StepTerm {
    int slot = 0;
    double offset = 0.0;      ///< reward-accumulated part at the chosen slot
    double q0_coef = 0.0;     ///< multiplier on q0[slot]
    double offset_sum = 0.0;  ///< sum of the reward-accumulated part over slots
};

std::vector<StepTerm> forward_terms(const LearningParams& lp, const RewardFunction& rf,
                                    std::span<const IndexedAction> actions);

/// sum_i log((offset_i + q0_coef_i q0[slot_i]) / (offset_sum_i + q0_coef_i))
///   + sum_k alpha_k log q0[k]   (the Dirichlet prior in softmax coordinates,
/// up to a q0-independent constant).
double q0_objective(std::span<const StepTerm> terms, std::span<const double> alpha,
                    std::span<const double> q0);

/// Point estimate of a user's initial propensities: maximizes q0_objective by
/// monotone EM/MM ascent from the Dirichlet mean. With no actions this is
/// exactly the Dirichlet mean alpha0*beta normalized.
std::vector<double> estimate_q0_map(std::span<const IndexedAction> actions,
                                    const ModelParams& params, int iterations = 200);

}  // namespace proplab
