#include "proplab/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace proplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shared forward recursion over the affine representation
//   q = scale * accum + q0_coef * q0.
// Visitor sees, per action: (slot, chosen_offset, q0_coef, offset_sum, reward).
template <typename Visit>
void forward_pass(const LearningParams& lp, const RewardFunction& rf,
                  std::span<const IndexedAction> actions, int slot_count, Visit&& visit) {
    std::vector<double> accum(static_cast<std::size_t>(slot_count), 0.0);
    double scale = 1.0;
    double accum_sum = 0.0;  // sum of accum entries
    double q0_coef = 1.0;
    const double keep = 1.0 - lp.phi;
    for (const auto& act : actions) {
        const auto s = static_cast<std::size_t>(act.slot);
        visit(act.slot, scale * accum[s], q0_coef, scale * accum_sum);
        const double r = reward(rf, act.feedback);
        if (keep <= 0.0) {
            // full forgetting: the pre-update state vanishes
            std::fill(accum.begin(), accum.end(), 0.0);
            accum_sum = 0.0;
            scale = 1.0;
            q0_coef = 0.0;
        } else {
            scale *= keep;
            q0_coef *= keep;
        }
        const double direct = (1.0 - lp.epsilon) * r;
        accum[s] += direct / scale;
        accum_sum += direct / scale;
        q0_coef += lp.epsilon * r;
        if (scale < 1e-250) {
            for (auto& v : accum) v *= scale;
            accum_sum *= scale;
            scale = 1.0;
        }
    }
}

}  // namespace

double sequence_log_likelihood(const ModelParams& params, std::span<const double> q0,
                               std::span<const IndexedAction> actions,
                               const LikelihoodOptions& opts) {
    for (const auto& act : actions)
        if (act.slot < 0 || act.slot >= static_cast<int>(q0.size()))
            throw std::out_of_range("sequence_log_likelihood: action slot out of range");
    double ll = 0.0;
    bool hit_zero = false;
    forward_pass(params.learning, params.reward, actions, static_cast<int>(q0.size()),
                 [&](int slot, double offset, double coef, double offset_sum) {
                     const double denom = offset_sum + coef;
                     double p = denom > 0.0
                                    ? (offset + coef * q0[static_cast<std::size_t>(slot)]) / denom
                                    : 0.0;
                     p = std::max(p, opts.prob_floor);
                     if (p <= 0.0)
                         hit_zero = true;
                     else
                         ll += std::log(std::min(p, 1.0));
                 });
    return hit_zero ? kNegInf : ll;
}

std::vector<StepTerm> forward_terms(const LearningParams& lp, const RewardFunction& rf,
                                    std::span<const IndexedAction> actions) {
    int max_slot = -1;
    for (const auto& act : actions) max_slot = std::max(max_slot, act.slot);
    std::vector<StepTerm> terms;
    terms.reserve(actions.size());
    forward_pass(lp, rf, actions, max_slot + 1,
                 [&](int slot, double offset, double coef, double offset_sum) {
                     terms.push_back({slot, offset, coef, offset_sum});
                 });
    return terms;
}

double q0_objective(std::span<const StepTerm> terms, std::span<const double> alpha,
                    std::span<const double> q0) {
    double obj = 0.0;
    for (const auto& t : terms) {
        const double denom = t.offset_sum + t.q0_coef;
        const double num = t.offset + t.q0_coef * q0[static_cast<std::size_t>(t.slot)];
        if (!(num > 0.0) || !(denom > 0.0)) return kNegInf;
        obj += std::log(num / denom);
    }
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (!(q0[k] > 0.0)) return kNegInf;
        obj += alpha[k] * std::log(q0[k]);
    }
    return obj;
}

std::vector<double> estimate_q0_map(std::span<const IndexedAction> actions,
                                    const ModelParams& params, int iterations) {
    params.validate();
    auto alpha = params.hdp.popularity.full();
    double alpha_sum = 0.0;
    for (auto& a : alpha) {
        a = std::max(params.hdp.alpha0 * a, 1e-12);
        alpha_sum += a;
    }
    std::vector<double> q0(alpha.size());
    for (std::size_t k = 0; k < q0.size(); ++k) q0[k] = alpha[k] / alpha_sum;
    if (actions.empty()) return q0;

    const auto terms = forward_terms(params.learning, params.reward, actions);
    std::vector<double> next(q0.size());
    for (int it = 0; it < iterations; ++it) {
        std::copy(alpha.begin(), alpha.end(), next.begin());
        double resp_total = 0.0;
        for (const auto& t : terms) {
            const auto s = static_cast<std::size_t>(t.slot);
            const double num = t.q0_coef * q0[s];
            const double denom = t.offset + num;
            const double resp = denom > 0.0 ? num / denom : 0.0;
            next[s] += resp;
            resp_total += resp;
        }
        const double norm = alpha_sum + resp_total;
        double delta = 0.0;
        for (std::size_t k = 0; k < q0.size(); ++k) {
            const double v = next[k] / norm;
            delta = std::max(delta, std::abs(v - q0[k]));
            q0[k] = v;
        }
        if (delta < 1e-12) break;
    }
    return q0;
}

}  // namespace proplab
