#include "proplab/synthetic.hpp"

#include <stdexcept>

#include "proplab/core.hpp"

namespace proplab {

EventLog generate_synthetic_log(const ModelParams& params, const SyntheticConfig& cfg) {
    params.validate();
    if (cfg.n_users < 0 || cfg.actions_per_user < 0)
        throw std::invalid_argument("generate_synthetic_log: counts must be >= 0");
    std::vector<std::string> communities;
    for (std::size_t k = 0; k < params.hdp.popularity.beta.size(); ++k)
        communities.push_back(cfg.community_prefix + std::to_string(k));

    const IndependentFeedback feedback(cfg.reply_rate, cfg.vote_mean, cfg.vote_sd);
    EventLog log;
    log.records.reserve(static_cast<std::size_t>(cfg.n_users) *
                        static_cast<std::size_t>(cfg.actions_per_user));
    for (int u = 0; u < cfg.n_users; ++u) {
        Rng rng = Rng::substream(cfg.rng_seed, static_cast<std::uint64_t>(u) + 1);
        auto q0 = sample_initial_propensities(params.hdp, rng);
        auto state = PropensityState::make(communities, std::move(q0));
        const std::string user = "u" + std::to_string(u);
        const auto actions =
            sample_trajectory(std::move(state), params.learning, params.reward,
                              cfg.reply_cap, cfg.actions_per_user, feedback, rng,
                              user + "_x");
        for (std::size_t i = 0; i < actions.size(); ++i)
            log.records.push_back({user, static_cast<std::int64_t>(i), actions[i].community,
                                   actions[i].replies, actions[i].score});
    }
    return log;
}

}  // namespace proplab
