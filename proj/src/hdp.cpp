#include "proplab/hdp.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace proplab {

std::vector<double> GlobalPopularity::full() const {
    std::vector<double> out = beta;
    out.push_back(beta_unseen);
    return out;
}

void GlobalPopularity::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("GlobalPopularity: gamma must be > 0");
    double total = beta_unseen;
    if (beta_unseen < 0.0) throw std::invalid_argument("GlobalPopularity: negative mass");
    for (double b : beta) {
        if (b < 0.0) throw std::invalid_argument("GlobalPopularity: negative mass");
        total += b;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("GlobalPopularity: masses must sum to 1");
}

void HdpParams::validate() const {
    if (!(alpha0 > 0.0)) throw std::invalid_argument("HdpParams: alpha0 must be > 0");
    popularity.validate();
}

GlobalPopularity stick_breaking(double gamma, int k, std::uint64_t rng_seed) {
    if (!(gamma > 0.0)) throw std::invalid_argument("stick_breaking: gamma must be > 0");
    if (k < 1) throw std::invalid_argument("stick_breaking: K must be >= 1");
    Rng rng(rng_seed);
    GlobalPopularity pop;
    pop.gamma = gamma;
    pop.beta.resize(static_cast<std::size_t>(k));
    double remaining = 1.0;
    for (int i = 0; i < k; ++i) {
        const double v = rng.beta(1.0, gamma);
        pop.beta[static_cast<std::size_t>(i)] = v * remaining;
        remaining *= (1.0 - v);
    }
    pop.beta_unseen = remaining;
    return pop;
}

std::vector<double> sample_initial_propensities(const HdpParams& hdp, Rng& rng) {
    hdp.validate();
    auto alpha = hdp.popularity.full();
    for (auto& a : alpha) a = std::max(hdp.alpha0 * a, 1e-300);
    return rng.dirichlet(alpha);
}

std::vector<double> sample_initial_propensities(const HdpParams& hdp, std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return sample_initial_propensities(hdp, rng);
}

BetaEstimate estimate_beta(const EventLog& log, double smoothing, double gamma,
                           double unseen_mass) {
    if (log.empty()) throw std::invalid_argument("estimate_beta: empty event log");
    if (smoothing < 0.0) throw std::invalid_argument("estimate_beta: negative smoothing");
    const auto counts = log.community_counts();
    const double n = static_cast<double>(log.size());
    BetaEstimate est;
    est.popularity.gamma = gamma;
    const double unseen = unseen_mass >= 0.0 ? unseen_mass : gamma / (gamma + n);
    if (unseen >= 1.0) throw std::invalid_argument("estimate_beta: unseen mass must be < 1");
    double total = 0.0;
    for (const auto& [community, count] : counts) {
        est.communities.push_back(community);
        est.popularity.beta.push_back(static_cast<double>(count) + smoothing);
        total += static_cast<double>(count) + smoothing;
    }
    if (!(total > 0.0)) throw std::invalid_argument("estimate_beta: degenerate counts");
    for (auto& b : est.popularity.beta) b *= (1.0 - unseen) / total;
    est.popularity.beta_unseen = unseen;
    return est;
}

double dirichlet_log_pdf(std::span<const double> x, std::span<const double> alpha) {
    if (x.size() != alpha.size())
        throw std::invalid_argument("dirichlet_log_pdf: size mismatch");
    double lp = 0.0;
    double alpha_sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = alpha[i];
        if (!(a > 0.0)) throw std::invalid_argument("dirichlet_log_pdf: alpha must be > 0");
        alpha_sum += a;
        lp -= std::lgamma(a);
        if (x[i] <= 0.0) {
            // boundary: treat as unsupported (the unbounded a < 1 case included)
            if (a != 1.0) return -std::numeric_limits<double>::infinity();
            continue;
        }
        lp += (a - 1.0) * std::log(x[i]);
    }
    lp += std::lgamma(alpha_sum);
    return lp;
}

}  // namespace proplab
