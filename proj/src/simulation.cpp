#include "proplab/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "proplab/hdp.hpp"

namespace proplab {

void SimConfig::validate() const {
    if (n_agents < 0 || n_seed_users < 0)
        throw std::invalid_argument("SimConfig: population counts must be >= 0");
    if (seed_rounds > total_rounds)
        throw std::invalid_argument("SimConfig: seed_rounds must be <= total_rounds");
    if (total_rounds < 1) throw std::invalid_argument("SimConfig: total_rounds must be >= 1");
    if (classify_round_a < 1 || classify_round_b < classify_round_a ||
        classify_round_b > total_rounds)
        throw std::invalid_argument(
            "SimConfig: need 1 <= classify_round_a <= classify_round_b <= total_rounds");
    if (std::find(communities.begin(), communities.end(), target_community) ==
        communities.end())
        throw std::invalid_argument("SimConfig: target_community must be listed in communities");
    if (communities.size() != agent_params.hdp.popularity.beta.size())
        throw std::invalid_argument("SimConfig: beta must match the community list");
    if (!(feedback.reply_cap > 0.0))
        throw std::invalid_argument("SimConfig: reply_cap must be > 0");
    agent_params.validate();
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::NoTraction: return "NoTraction";
        case Regime::LateFailure: return "LateFailure";
        case Regime::Success: return "Success";
    }
    return "?";
}

TrajectorySummary run_seeding(const SimConfig& cfg) {
    cfg.validate();
    TrajectorySummary out;
    if (cfg.n_agents == 0) {
        out.empty_population = true;
        return out;
    }

    const int target_slot = static_cast<int>(
        std::find(cfg.communities.begin(), cfg.communities.end(), cfg.target_community) -
        cfg.communities.begin());

    // Per-agent state and RNG stream; agent draws within a round depend only
    // on the previous round's state.
    std::vector<PropensityState> agents;
    std::vector<Rng> streams;
    agents.reserve(static_cast<std::size_t>(cfg.n_agents));
    for (int a = 0; a < cfg.n_agents; ++a) {
        Rng rng = Rng::substream(cfg.rng_seed, static_cast<std::uint64_t>(a) + 1);
        auto q0 = sample_initial_propensities(cfg.agent_params.hdp, rng);
        agents.push_back(PropensityState::make(cfg.communities, std::move(q0)));
        streams.push_back(std::move(rng));
    }

    out.interest.reserve(static_cast<std::size_t>(cfg.total_rounds));
    std::vector<int> choice(static_cast<std::size_t>(cfg.n_agents));
    for (int round = 1; round <= cfg.total_rounds; ++round) {
        // every post this round, keyed by slot; unseen draws are singleton
        // communities with no co-location
        std::unordered_map<int, int> posts;
        int target_posts = 0;
        for (int a = 0; a < cfg.n_agents; ++a) {
            const auto s = static_cast<std::size_t>(a);
            int slot = streams[s].categorical(agents[s].q);
            choice[s] = slot;
            if (slot != agents[s].unseen_slot()) ++posts[slot];
            if (slot == target_slot) ++target_posts;
        }
        if (round <= cfg.seed_rounds) posts[target_slot] += cfg.n_seed_users;

        for (int a = 0; a < cfg.n_agents; ++a) {
            const auto s = static_cast<std::size_t>(a);
            const int slot = choice[s];
            const int others =
                slot == agents[s].unseen_slot() ? 0 : posts[slot] - 1;
            const double rate = cfg.feedback.reply_rate * static_cast<double>(others);
            const long replies =
                std::min<long>(streams[s].poisson(rate),
                               static_cast<long>(cfg.feedback.reply_cap));
            const double score = std::round(streams[s].normal(
                cfg.feedback.vote_mean * static_cast<double>(others), cfg.feedback.vote_sd));
            const FeedbackVector fb{static_cast<double>(replies) / cfg.feedback.reply_cap,
                                    score};
            agents[s] = apply_update(std::move(agents[s]), slot,
                                     reward(cfg.agent_params.reward, fb),
                                     cfg.agent_params.learning);
        }
        out.interest.push_back(static_cast<double>(target_posts) /
                               static_cast<double>(cfg.n_agents));
    }
    out.regime = classify_trajectory(out.interest, cfg.classify_round_a, cfg.threshold_a,
                                     cfg.classify_round_b, cfg.threshold_b);
    return out;
}

Regime classify_trajectory(std::span<const double> interest, int round_a, double threshold_a,
                           int round_b, double threshold_b) {
    if (static_cast<int>(interest.size()) < std::max(round_a, round_b))
        throw std::invalid_argument("classify_trajectory: trajectory too short");
    if (interest[static_cast<std::size_t>(round_a - 1)] <= threshold_a)
        return Regime::NoTraction;
    if (interest[static_cast<std::size_t>(round_b - 1)] <= threshold_b)
        return Regime::LateFailure;
    return Regime::Success;
}

RegimeAggregate aggregate_runs(const std::vector<TrajectorySummary>& runs) {
    RegimeAggregate agg;
    std::size_t rounds = 0;
    for (const auto& r : runs) {
        if (r.empty_population) continue;
        if (rounds == 0) rounds = r.interest.size();
        if (r.interest.size() != rounds)
            throw std::invalid_argument("aggregate_runs: runs must share a round count");
        auto& mean = agg.mean_interest[r.regime];
        if (mean.empty()) mean.assign(rounds, 0.0);
        for (std::size_t i = 0; i < rounds; ++i) mean[i] += r.interest[i];
        ++agg.counts[r.regime];
    }
    for (auto& [regime, mean] : agg.mean_interest) {
        const double n = static_cast<double>(agg.counts[regime]);
        for (auto& v : mean) v /= n;
    }
    return agg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sim config: " + path.string());
    nlohmann::json j;
    in >> j;
    SimConfig cfg;
    cfg.n_agents = j.value("n_agents", cfg.n_agents);
    cfg.n_seed_users = j.value("n_seed_users", cfg.n_seed_users);
    cfg.seed_rounds = j.value("seed_rounds", cfg.seed_rounds);
    cfg.total_rounds = j.value("total_rounds", cfg.total_rounds);
    cfg.target_community = j.at("target_community");
    cfg.communities = j.at("communities").get<std::vector<std::string>>();
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.classify_round_a = j.value("classify_round_a", cfg.classify_round_a);
    cfg.threshold_a = j.value("threshold_a", cfg.threshold_a);
    cfg.classify_round_b = j.value("classify_round_b", cfg.classify_round_b);
    cfg.threshold_b = j.value("threshold_b", cfg.threshold_b);
    const auto& p = j.at("agent_params");
    cfg.agent_params.learning.phi = p.at("phi");
    cfg.agent_params.learning.epsilon = p.at("epsilon");
    cfg.agent_params.reward.w_replies = p.at("w_replies");
    cfg.agent_params.reward.w_votes = p.at("w_votes");
    cfg.agent_params.reward.w_intercept = p.value("w_intercept", 0.0);
    cfg.agent_params.reward.floor = p.value("reward_floor", 0.0);
    cfg.agent_params.hdp.alpha0 = p.at("alpha0");
    cfg.agent_params.hdp.popularity.gamma = p.value("gamma", 1.0);
    cfg.agent_params.hdp.popularity.beta = p.at("beta").get<std::vector<double>>();
    cfg.agent_params.hdp.popularity.beta_unseen = p.value("beta_unseen", 0.0);
    if (j.contains("feedback")) {
        const auto& f = j.at("feedback");
        cfg.feedback.reply_rate = f.value("reply_rate", cfg.feedback.reply_rate);
        cfg.feedback.vote_mean = f.value("vote_mean", cfg.feedback.vote_mean);
        cfg.feedback.vote_sd = f.value("vote_sd", cfg.feedback.vote_sd);
        cfg.feedback.reply_cap = f.value("reply_cap", cfg.feedback.reply_cap);
    }
    return cfg;
}

void save_sim_config(const SimConfig& cfg, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["n_agents"] = cfg.n_agents;
    j["n_seed_users"] = cfg.n_seed_users;
    j["seed_rounds"] = cfg.seed_rounds;
    j["total_rounds"] = cfg.total_rounds;
    j["target_community"] = cfg.target_community;
    j["communities"] = cfg.communities;
    j["rng_seed"] = cfg.rng_seed;
    j["classify_round_a"] = cfg.classify_round_a;
    j["threshold_a"] = cfg.threshold_a;
    j["classify_round_b"] = cfg.classify_round_b;
    j["threshold_b"] = cfg.threshold_b;
    j["agent_params"] = {{"phi", cfg.agent_params.learning.phi},
                         {"epsilon", cfg.agent_params.learning.epsilon},
                         {"w_replies", cfg.agent_params.reward.w_replies},
                         {"w_votes", cfg.agent_params.reward.w_votes},
                         {"w_intercept", cfg.agent_params.reward.w_intercept},
                         {"reward_floor", cfg.agent_params.reward.floor},
                         {"alpha0", cfg.agent_params.hdp.alpha0},
                         {"gamma", cfg.agent_params.hdp.popularity.gamma},
                         {"beta", cfg.agent_params.hdp.popularity.beta},
                         {"beta_unseen", cfg.agent_params.hdp.popularity.beta_unseen}};
    j["feedback"] = {{"reply_rate", cfg.feedback.reply_rate},
                     {"vote_mean", cfg.feedback.vote_mean},
                     {"vote_sd", cfg.feedback.vote_sd},
                     {"reply_cap", cfg.feedback.reply_cap}};
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write sim config: " + path.string());
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace proplab
