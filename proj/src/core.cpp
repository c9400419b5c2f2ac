#include "proplab/core.hpp"

#include <algorithm>
#include <numeric>

namespace proplab {

double RewardFunction::operator()(const FeedbackVector& r) const {
    return reward(*this, r);
}

double reward(const RewardFunction& rf, const FeedbackVector& r) {
    if (!std::isfinite(r.replies_norm) || !std::isfinite(r.vote_score))
        throw std::invalid_argument("reward: non-finite feedback");
    if (r.replies_norm < 0.0)
        throw std::invalid_argument("reward: negative normalized reply count");
    const double lin = rf.w_intercept + rf.w_replies * r.replies_norm + rf.w_votes * r.vote_score;
    return std::max(rf.floor, lin);
}

PropensityState PropensityState::make(std::vector<std::string> communities,
                                      std::vector<double> q0) {
    PropensityState s;
    s.communities = std::move(communities);
    s.q0 = std::move(q0);
    if (s.q0.size() == s.communities.size()) {
        // caller gave no unseen slot; append an empty one
        s.q0.push_back(0.0);
    }
    if (s.q0.size() != s.communities.size() + 1)
        throw std::invalid_argument("PropensityState: q0 length must be #communities (+1)");
    s.q = s.q0;
    s.validate();
    return s;
}

int PropensityState::slot_of(std::string_view community) const {
    for (std::size_t i = 0; i < communities.size(); ++i)
        if (communities[i] == community) return static_cast<int>(i);
    return -1;
}

void PropensityState::validate() const {
    if (q.size() != q0.size() || q.size() != communities.size() + 1)
        throw std::invalid_argument("PropensityState: inconsistent slot counts");
    double total0 = 0.0;
    for (double v : q0) {
        if (!(v >= 0.0)) throw std::invalid_argument("PropensityState: q0 entries must be >= 0");
        total0 += v;
    }
    if (std::abs(total0 - 1.0) > 1e-9)
        throw std::invalid_argument("PropensityState: q0 must sum to 1");
    for (double v : q)
        if (!(v >= 0.0)) throw std::invalid_argument("PropensityState: q entries must be >= 0");
}

std::vector<double> choice_distribution(const PropensityState& state) {
    const double total = std::accumulate(state.q.begin(), state.q.end(), 0.0);
    if (!(total > 0.0))
        throw std::domain_error("choice_distribution: all propensities are zero");
    std::vector<double> p(state.q.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = state.q[i] / total;
    return p;
}

PropensityState apply_update(PropensityState state, int chosen,
                             double reward_value, const LearningParams& lp) {
    if (chosen < 0 || chosen >= state.slot_count())
        throw std::out_of_range("apply_update: slot index out of range");
    if (!(reward_value >= 0.0))
        throw std::invalid_argument("apply_update: reward must be >= 0");
    const double keep = 1.0 - lp.phi;
    for (double& v : state.q) v *= keep;
    state.q[chosen] += (1.0 - lp.epsilon) * reward_value;
    const double spread = lp.epsilon * reward_value;
    for (std::size_t i = 0; i < state.q.size(); ++i) state.q[i] += spread * state.q0[i];
    return state;
}

PropensityState grow_state(PropensityState state, const std::string& new_community,
                           double split_fraction) {
    if (state.slot_of(new_community) >= 0)
        throw std::invalid_argument("grow_state: community already indexed: " + new_community);
    if (!(split_fraction >= 0.0 && split_fraction <= 1.0))
        throw std::invalid_argument("grow_state: split_fraction must be in [0, 1]");
    const int u = state.unseen_slot();
    const double q0_move = state.q0[u] * split_fraction;
    const double q_move = state.q[u] * split_fraction;
    state.q0[u] -= q0_move;
    state.q[u] -= q_move;
    state.communities.push_back(new_community);
    // the new community sits just before the unseen slot
    state.q0.insert(state.q0.end() - 1, q0_move);
    state.q.insert(state.q.end() - 1, q_move);
    return state;
}

std::vector<SampledAction> sample_trajectory(PropensityState state,
                                             const LearningParams& lp,
                                             const RewardFunction& rf,
                                             double reply_cap, int n,
                                             const FeedbackSource& feedback,
                                             Rng& rng,
                                             const std::string& unseen_prefix) {
    if (n < 0) throw std::invalid_argument("sample_trajectory: n must be >= 0");
    if (!(reply_cap > 0.0)) throw std::invalid_argument("sample_trajectory: reply_cap must be > 0");
    std::vector<SampledAction> out;
    out.reserve(static_cast<std::size_t>(n));
    int fresh = 0;
    for (int i = 0; i < n; ++i) {
        int slot = rng.categorical(state.q);
        if (slot == state.unseen_slot()) {
            std::string name = unseen_prefix + std::to_string(fresh++);
            while (state.slot_of(name) >= 0) name = unseen_prefix + std::to_string(fresh++);
            state = grow_state(std::move(state), name);
            slot = state.unseen_slot() - 1;
        }
        SampledAction a;
        a.community = state.communities[static_cast<std::size_t>(slot)];
        auto [replies, score] = feedback.draw(rng, a.community, i);
        a.replies = std::max(0L, replies);
        a.score = score;
        a.feedback = {static_cast<double>(a.replies) / reply_cap,
                      static_cast<double>(a.score)};
        a.reward_value = reward(rf, a.feedback);
        state = apply_update(std::move(state), slot, a.reward_value, lp);
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace proplab
