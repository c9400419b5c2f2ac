#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proplab/likelihood.hpp"
#include "proplab/model.hpp"

namespace proplab {

/// Parameter priors. phi and epsilon are Uniform(0,1); reward weights are
/// Normal(0, w_sd); alpha0 is LogNormal(alpha0_log_mean, alpha0_log_sd).
struct Priors {
    double w_sd = 10.0;
    double alpha0_log_mean = 0.0;
    double alpha0_log_sd = 1.0;
};

double log_prior(const ModelParams& params, const Priors& priors);

/// Joint log-posterior: per-user sequence likelihoods, the Dirichlet prior on
/// each user's q0, and the parameter priors. Propagates -inf.
double log_posterior(const ModelParams& params, const Dataset& data,
                     const std::vector<std::vector<double>>& q0s, const Priors& priors,
                     double prob_floor = 0.0);

enum class Q0Treatment { MapPointEstimate, SampleLatent };

struct ProposalScales {
    double learning = 0.25;  ///< random-walk sd on logit(phi), logit(epsilon)
    double reward = 0.15;    ///< sd on reward weights
    double alpha0 = 0.3;     ///< sd on log(alpha0)
    double q0 = 0.4;         ///< sd per coordinate of the latent-q0 walk
};

struct FitConfig {
    int n_samples = 2000;
    int burn_in = 500;
    int thin = 1;
    ProposalScales scales;
    Q0Treatment q0_treatment = Q0Treatment::MapPointEstimate;
    int q0_refresh = 0;      ///< MAP q0 refresh period; 0 picks max(500, n_samples/10)
    int q0_map_iters = 200;
    std::uint64_t rng_seed = 0;
    Priors priors;
    double prob_floor = 1e-12;  ///< inference-only floor inside choice probabilities
    double beta_smoothing = 0.5;
    double gamma = 1.0;
    std::optional<ModelParams> init;  ///< default: phi=eps=0.5, w=(0.5,0.5,0), alpha0=1

    void validate() const;
};

struct ParamSample {
    double phi = 0, epsilon = 0;
    double w_replies = 0, w_votes = 0, w_intercept = 0;
    double alpha0 = 0;
    double log_post = 0;
};

struct FitResult {
    ModelParams map_params;  ///< includes the estimated popularity vector
    double map_log_posterior = 0.0;
    std::vector<std::string> communities;  ///< slot order of beta and q0 vectors
    double reply_cap = 1.0;
    std::vector<ParamSample> samples;  ///< retained after burn-in/thinning
    std::vector<std::string> users;
    std::vector<std::vector<double>> per_user_q0;  ///< parallel to users
    std::map<std::string, double> acceptance;      ///< per proposal block
    FitConfig cfg;

    const std::vector<double>* q0_for(const std::string& user) const;
};

/// Metropolis-within-Gibbs over (phi, epsilon), reward weights, alpha0 and
/// (optionally) the latent per-user q0. Seed-deterministic.
FitResult fit(const Dataset& data, const FitConfig& cfg);

/// JSON round-trip; the file carries everything needed to reproduce
/// predictions (parameters, priors, seeds, normalization cap, diagnostics).
void save_fit(const FitResult& fr, const std::filesystem::path& path);
FitResult load_fit(const std::filesystem::path& path);

}  // namespace proplab
