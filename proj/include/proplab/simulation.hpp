#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "proplab/model.hpp"

namespace proplab {

/// How a round's co-located posts turn into feedback for one post:
/// replies ~ Poisson(reply_rate * others), capped at reply_cap;
/// score ~ round(Normal(vote_mean * others, vote_sd)).
struct FeedbackModelParams {
    double reply_rate = 0.5;
    double vote_mean = 0.25;
    double vote_sd = 1.0;
    double reply_cap = 10.0;
};

struct SimConfig {
    int n_agents = 30;
    int n_seed_users = 5;
    int seed_rounds = 200;   ///< seed users act through this round (1-based)
    int total_rounds = 800;
    std::string target_community;
    std::vector<std::string> communities;  ///< must contain target_community
    ModelParams agent_params;
    FeedbackModelParams feedback;
    std::uint64_t rng_seed = 0;
    int classify_round_a = 200;
    double threshold_a = 0.4;
    int classify_round_b = 700;
    double threshold_b = 0.5;

    void validate() const;
};

enum class Regime { NoTraction, LateFailure, Success };

const char* regime_name(Regime r);

struct TrajectorySummary {
    std::vector<double> interest;  ///< per round, fraction of normal-agent posts in target
    Regime regime = Regime::NoTraction;
    bool empty_population = false;
};

/// One seeding run. Each round every normal agent posts in a community drawn
/// from its propensities; seed users post only in the target while seeding
/// lasts; feedback is generated from co-located posts and every normal agent
/// updates its propensities. Seed posts inflate target feedback but are
/// excluded from the interest fraction. Seed-deterministic.
TrajectorySummary run_seeding(const SimConfig& cfg);

/// NoTraction if interest(round_a) <= threshold_a; else LateFailure if
/// interest(round_b) <= threshold_b; else Success. Rounds are 1-based.
Regime classify_trajectory(std::span<const double> interest, int round_a = 200,
                           double threshold_a = 0.4, int round_b = 700,
                           double threshold_b = 0.5);

struct RegimeAggregate {
    std::map<Regime, std::vector<double>> mean_interest;
    std::map<Regime, int> counts;
};

/// Pointwise mean interest per regime; all runs must share a round count.
RegimeAggregate aggregate_runs(const std::vector<TrajectorySummary>& runs);

/// JSON round-trip for simulation configs (the CLI input format).
SimConfig load_sim_config(const std::filesystem::path& path);
void save_sim_config(const SimConfig& cfg, const std::filesystem::path& path);

}  // namespace proplab
