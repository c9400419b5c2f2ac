#include "proplab/predict.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "proplab/likelihood.hpp"

namespace proplab {

double PredictiveDistribution::prob_of(const std::string& community) const {
    for (std::size_t i = 0; i < communities.size(); ++i)
        if (communities[i] == community) return probs[i];
    return unseen;
}

double PredictiveDistribution::sum_squares() const {
    double s = unseen * unseen;
    for (double p : probs) s += p * p;
    return s;
}

void PredictiveDistribution::validate() const {
    if (probs.size() != communities.size())
        throw std::invalid_argument("PredictiveDistribution: size mismatch");
    double total = unseen;
    if (unseen < 0.0) throw std::invalid_argument("PredictiveDistribution: negative mass");
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("PredictiveDistribution: negative mass");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("PredictiveDistribution: must sum to 1");
}

double quadratic_score(const PredictiveDistribution& dist, const std::string& outcome) {
    return 2.0 * dist.prob_of(outcome) - dist.sum_squares();
}

PredictiveDistribution predict_next(const FitResult& fit,
                                    std::span<const HistoryAction> history) {
    ModelParams params = fit.map_params;
    const int unseen = static_cast<int>(fit.communities.size());

    // q0 estimate in the fitted community space; novel communities charge the
    // unseen slot
    std::vector<IndexedAction> indexed;
    indexed.reserve(history.size());
    for (const auto& h : history) {
        int slot = unseen;
        for (std::size_t i = 0; i < fit.communities.size(); ++i)
            if (fit.communities[i] == h.community) {
                slot = static_cast<int>(i);
                break;
            }
        indexed.push_back({slot, {static_cast<double>(std::max(0L, h.replies)) / fit.reply_cap,
                                  static_cast<double>(h.score)}});
    }
    const auto q0 = estimate_q0_map(indexed, params);

    PropensityState state = PropensityState::make(fit.communities, q0);
    for (const auto& h : history) {
        int slot = state.slot_of(h.community);
        if (slot < 0) {
            state = grow_state(std::move(state), h.community);
            slot = state.unseen_slot() - 1;
        }
        const FeedbackVector fb{static_cast<double>(std::max(0L, h.replies)) / fit.reply_cap,
                                static_cast<double>(h.score)};
        state = apply_update(std::move(state), slot, reward(params.reward, fb),
                             params.learning);
    }
    const auto p = choice_distribution(state);
    PredictiveDistribution dist;
    dist.communities = state.communities;
    dist.probs.assign(p.begin(), p.end() - 1);
    dist.unseen = p.back();
    return dist;
}

const char* baseline_name(Baseline b) {
    switch (b) {
        case Baseline::Global: return "Global";
        case Baseline::UserAll: return "UserAll";
        case Baseline::UserKMax: return "UserKMax";
        case Baseline::Initial: return "Initial";
        case Baseline::InitKMax: return "InitKMax";
    }
    return "?";
}

PredictiveDistribution baseline_predict(Baseline kind, const BaselineContext& ctx,
                                        std::span<const HistoryAction> user_history) {
    if (ctx.k_max <= 0) throw std::invalid_argument("baseline_predict: K must be > 0");
    const std::size_t n = ctx.communities.size();
    if (ctx.global_counts.size() != n || ctx.beta.size() != n)
        throw std::invalid_argument("baseline_predict: context size mismatch");

    auto user_counts = [&](std::size_t window) {
        std::vector<double> counts(n + 1, 0.0);
        const std::size_t start =
            user_history.size() > window ? user_history.size() - window : 0;
        for (std::size_t i = start; i < user_history.size(); ++i) {
            bool found = false;
            for (std::size_t c = 0; c < n; ++c)
                if (ctx.communities[c] == user_history[i].community) {
                    counts[c] += 1.0;
                    found = true;
                    break;
                }
            if (!found) counts[n] += 1.0;  // out-of-index history charges unseen
        }
        return counts;
    };

    std::vector<double> weights(n + 1, 0.0);
    const auto all = std::numeric_limits<std::size_t>::max();
    switch (kind) {
        case Baseline::Global:
            for (std::size_t c = 0; c < n; ++c) weights[c] = ctx.global_counts[c] + ctx.smoothing;
            weights[n] = ctx.smoothing;
            break;
        case Baseline::UserAll:
        case Baseline::UserKMax: {
            weights = user_counts(kind == Baseline::UserAll
                                      ? all
                                      : static_cast<std::size_t>(ctx.k_max));
            for (auto& w : weights) w += ctx.smoothing;
            break;
        }
        case Baseline::Initial:
        case Baseline::InitKMax: {
            // Dirichlet-posterior mean with learning disabled
            weights = user_counts(kind == Baseline::Initial
                                      ? all
                                      : static_cast<std::size_t>(ctx.k_max));
            for (std::size_t c = 0; c < n; ++c) weights[c] += ctx.alpha0 * ctx.beta[c];
            weights[n] += ctx.alpha0 * ctx.beta_unseen;
            break;
        }
    }

    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw std::domain_error("baseline_predict: degenerate weights");
    PredictiveDistribution dist;
    dist.communities = ctx.communities;
    dist.probs.resize(n);
    for (std::size_t c = 0; c < n; ++c) dist.probs[c] = weights[c] / total;
    dist.unseen = weights[n] / total;
    return dist;
}

}  // namespace proplab
