#pragma once

#include <cstdint>
#include <string>

#include "proplab/event_log.hpp"
#include "proplab/model.hpp"

namespace proplab {

struct SyntheticConfig {
    int n_users = 100;
    int actions_per_user = 100;
    double reply_cap = 10.0;        ///< normalization cap used during generation
    double reply_rate = 1.0;        ///< replies ~ Poisson(reply_rate)
    double vote_mean = 1.0;         ///< score ~ round(Normal(vote_mean, vote_sd))
    double vote_sd = 2.0;
    std::string community_prefix = "c";
    std::uint64_t rng_seed = 0;
};

/// Samples each user's q0 from the HDP prior over the K communities named
/// "<prefix>0..K-1", then generates the user's action sequence with
/// feedback drawn per action. Seed-deterministic; user u gets its own
/// substream so logs of different sizes agree on shared users.
EventLog generate_synthetic_log(const ModelParams& params, const SyntheticConfig& cfg);

}  // namespace proplab
