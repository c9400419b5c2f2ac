#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "proplab/event_log.hpp"
#include "proplab/rng.hpp"

namespace proplab {

/// Finite view of the global community popularity vector: mass over the K
/// observed communities plus one aggregated slot for everything unobserved.
struct GlobalPopularity {
    std::vector<double> beta;   ///< mass per observed community
    double beta_unseen = 0.0;   ///< mass reserved for unobserved communities
    double gamma = 1.0;         ///< top-level stick-breaking concentration

    /// [beta..., beta_unseen] as one vector of length K+1.
    std::vector<double> full() const;
    void validate() const;
};

struct HdpParams {
    double alpha0 = 1.0;  ///< per-user Dirichlet concentration, > 0
    GlobalPopularity popularity;

    void validate() const;
};

/// Truncated stick-breaking draw: v_k ~ Beta(1, gamma),
/// beta_k = v_k prod_{j<k} (1 - v_j), beta_unseen = prod_k (1 - v_k).
GlobalPopularity stick_breaking(double gamma, int k, std::uint64_t rng_seed);

/// One draw q0 ~ Dirichlet(alpha0 * [beta, beta_unseen]), length K+1.
std::vector<double> sample_initial_propensities(const HdpParams& hdp, Rng& rng);
std::vector<double> sample_initial_propensities(const HdpParams& hdp, std::uint64_t rng_seed);

/// Empirical popularity: beta_k proportional to (count_k + smoothing) over
/// communities observed in the log, with beta_unseen = gamma / (gamma + N)
/// reserved CRP-style (configurable via `unseen_mass` >= 0 to override).
/// Communities come out in sorted-id order.
struct BetaEstimate {
    std::vector<std::string> communities;
    GlobalPopularity popularity;
};
BetaEstimate estimate_beta(const EventLog& log, double smoothing = 0.5,
                           double gamma = 1.0, double unseen_mass = -1.0);

/// log Dirichlet(x | alpha) density; -inf when x touches the boundary with
/// alpha != 1 there.
double dirichlet_log_pdf(std::span<const double> x, std::span<const double> alpha);

}  // namespace proplab
