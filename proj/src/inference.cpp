#include "proplab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace proplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Dirichlet(alpha0 * beta_full) prior over user q0 vectors, with the pieces
// that depend on alpha0 separated so alpha0 proposals are cheap:
//   logpdf(q0) = lognorm(alpha0) + alpha0 * sum_k beta_k log q0_k - sum_k log q0_k
struct Q0PriorCache {
    std::vector<double> beta_full;
    std::vector<double> beta_dot;  // per user: sum_k beta_k log q0_k
    std::vector<double> log_sum;   // per user: sum_k log q0_k

    void set_user(std::size_t u, const std::vector<double>& q0) {
        double bd = 0.0, ls = 0.0;
        for (std::size_t k = 0; k < q0.size(); ++k) {
            const double lq = std::log(std::max(q0[k], 1e-300));
            bd += beta_full[k] * lq;
            ls += lq;
        }
        beta_dot[u] = bd;
        log_sum[u] = ls;
    }

    double lognorm(double alpha0) const {
        double s = std::lgamma(alpha0);
        for (double b : beta_full) s -= std::lgamma(std::max(alpha0 * b, 1e-300));
        return s;
    }

    double total(double alpha0) const {
        const double ln = lognorm(alpha0);
        double t = 0.0;
        for (std::size_t u = 0; u < beta_dot.size(); ++u)
            t += ln + alpha0 * beta_dot[u] - log_sum[u];
        return t;
    }

    double user(double alpha0, double lognorm_value, std::size_t u) const {
        return lognorm_value + alpha0 * beta_dot[u] - log_sum[u];
    }
};

struct BlockCounter {
    long accepted = 0;
    long proposed = 0;
    double rate() const { return proposed > 0 ? double(accepted) / double(proposed) : 0.0; }
};

}  // namespace

void FitConfig::validate() const {
    if (!(n_samples > burn_in && burn_in >= 0))
        throw std::invalid_argument("FitConfig: need n_samples > burn_in >= 0");
    if (thin < 1) throw std::invalid_argument("FitConfig: thin must be >= 1");
    if (!(prob_floor >= 0.0)) throw std::invalid_argument("FitConfig: prob_floor must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("FitConfig: gamma must be > 0");
}

double log_prior(const ModelParams& params, const Priors& priors) {
    const double phi = params.learning.phi;
    const double eps = params.learning.epsilon;
    if (!(phi >= 0.0 && phi <= 1.0 && eps >= 0.0 && eps <= 1.0)) return kNegInf;
    if (!(params.hdp.alpha0 > 0.0)) return kNegInf;
    double lp = 0.0;  // phi, eps ~ Uniform(0,1)
    const double vs = priors.w_sd * priors.w_sd;
    for (double w : {params.reward.w_replies, params.reward.w_votes, params.reward.w_intercept})
        lp += -0.5 * w * w / vs - 0.5 * std::log(2.0 * M_PI * vs);
    const double la = std::log(params.hdp.alpha0);
    const double as = priors.alpha0_log_sd * priors.alpha0_log_sd;
    lp += -0.5 * (la - priors.alpha0_log_mean) * (la - priors.alpha0_log_mean) / as -
          0.5 * std::log(2.0 * M_PI * as) - la;
    return lp;
}

double log_posterior(const ModelParams& params, const Dataset& data,
                     const std::vector<std::vector<double>>& q0s, const Priors& priors,
                     double prob_floor) {
    if (q0s.size() != data.users.size())
        throw std::invalid_argument("log_posterior: q0s must cover every user");
    const double lp = log_prior(params, priors);
    if (lp == kNegInf) return kNegInf;
    auto alpha = params.hdp.popularity.full();
    for (auto& a : alpha) a = std::max(params.hdp.alpha0 * a, 1e-300);
    double total = lp;
    const LikelihoodOptions opts{prob_floor};
    for (std::size_t u = 0; u < data.users.size(); ++u) {
        total += sequence_log_likelihood(params, q0s[u], data.actions[u], opts);
        total += dirichlet_log_pdf(q0s[u], alpha);
        if (total == kNegInf) return kNegInf;
    }
    return total;
}

const std::vector<double>* FitResult::q0_for(const std::string& user) const {
    for (std::size_t u = 0; u < users.size(); ++u)
        if (users[u] == user) return &per_user_q0[u];
    return nullptr;
}

FitResult fit(const Dataset& data, const FitConfig& cfg) {
    cfg.validate();
    const std::size_t n_users = data.users.size();
    if (n_users == 0 || data.total_actions() == 0)
        throw std::invalid_argument("fit: empty event log");

    // The latent-q0 posterior is bimodal. Besides the basin around the
    // generating parameters there is a wide degenerate basin where epsilon
    // collapses toward zero, every q0 matches the popularity vector, and
    // alpha0 is unidentified. A chain started from neutral parameters falls
    // into the degenerate basin and no local move escapes it, so pick the
    // starting basin with a short profile climb before sampling.
    if (cfg.q0_treatment == Q0Treatment::SampleLatent && !cfg.init) {
        FitConfig warm = cfg;
        warm.q0_treatment = Q0Treatment::MapPointEstimate;
        warm.n_samples = 400;
        warm.burn_in = 0;
        warm.thin = 1;
        warm.q0_refresh = 50;
        FitConfig main = cfg;
        main.init = fit(data, warm).map_params;
        return fit(data, main);
    }

    // global popularity from training counts (fixed during sampling)
    std::vector<double> counts(static_cast<std::size_t>(data.slot_count()) - 1, 0.0);
    for (const auto& seq : data.actions)
        for (const auto& act : seq)
            if (act.slot < static_cast<int>(counts.size()))
                counts[static_cast<std::size_t>(act.slot)] += 1.0;
    const double n_actions = static_cast<double>(data.total_actions());

    // The default proposal scales target a dataset of roughly 1e4 actions.
    // Posterior width shrinks like 1/sqrt(data), so on larger datasets the
    // same step sizes freeze the parameter blocks while the latent blocks
    // still move, which lets the chain wander before the frozen blocks can
    // pull it back. Shrink all step sizes accordingly; never enlarge them.
    ProposalScales scales = cfg.scales;
    {
        const double shrink = std::min(1.0, std::sqrt(1e4 / std::max(1.0, n_actions)));
        scales.learning *= shrink;
        scales.reward *= shrink;
        scales.alpha0 *= shrink;
        scales.q0 *= shrink;
    }

    GlobalPopularity pop;
    pop.gamma = cfg.gamma;
    pop.beta_unseen = cfg.gamma / (cfg.gamma + n_actions);
    double count_total = 0.0;
    for (double c : counts) count_total += c + cfg.beta_smoothing;
    for (double c : counts)
        pop.beta.push_back((c + cfg.beta_smoothing) * (1.0 - pop.beta_unseen) / count_total);

    ModelParams params;
    if (cfg.init) {
        params = *cfg.init;
    } else {
        params.learning = {0.5, 0.5};
        params.reward = {0.5, 0.5, 0.0, 0.0};
        params.hdp.alpha0 = 1.0;
    }
    params.hdp.popularity = pop;

    Rng rng(cfg.rng_seed);
    const LikelihoodOptions opts{cfg.prob_floor};

    Q0PriorCache prior_cache;
    prior_cache.beta_full = pop.full();
    prior_cache.beta_dot.resize(n_users);
    prior_cache.log_sum.resize(n_users);

    std::vector<std::vector<double>> q0s(n_users);
    std::vector<double> user_ll(n_users);

    auto refresh_q0_map = [&]() {
        for (std::size_t u = 0; u < n_users; ++u) {
            q0s[u] = estimate_q0_map(data.actions[u], params, cfg.q0_map_iters);
            prior_cache.set_user(u, q0s[u]);
        }
    };
    auto recompute_ll = [&](const ModelParams& p) {
        double total = 0.0;
        for (std::size_t u = 0; u < n_users; ++u) {
            user_ll[u] = sequence_log_likelihood(p, q0s[u], data.actions[u], opts);
            total += user_ll[u];
        }
        return total;
    };

    if (cfg.q0_treatment == Q0Treatment::MapPointEstimate) {
        refresh_q0_map();
    } else {
        // Start each q0 from a draw of Dirichlet(alpha + EM responsibilities):
        // data-informed on the communities the user visited and prior-typical
        // elsewhere. EM point estimates are too sharp here; their extreme
        // log-ratio deviations from beta make shrinking everything onto beta
        // (with alpha0 growing without bound) look like a huge prior gain,
        // which tips the chain into the degenerate basin.
        std::vector<double> alpha = prior_cache.beta_full;
        double alpha_sum = 0.0;
        for (auto& a : alpha) {
            a = std::max(params.hdp.alpha0 * a, 1e-12);
            alpha_sum += a;
        }
        std::vector<double> em(alpha.size()), delta(alpha.size());
        for (std::size_t u = 0; u < n_users; ++u) {
            const auto terms = forward_terms(params.learning, params.reward, data.actions[u]);
            for (std::size_t k = 0; k < em.size(); ++k) em[k] = alpha[k] / alpha_sum;
            for (int it = 0; it < 100; ++it) {
                std::copy(alpha.begin(), alpha.end(), delta.begin());
                double total = alpha_sum;
                for (const auto& t : terms) {
                    const auto s = static_cast<std::size_t>(t.slot);
                    const double num = t.q0_coef * em[s];
                    const double den = t.offset + num;
                    const double resp = den > 0.0 ? num / den : 0.0;
                    delta[s] += resp;
                    total += resp;
                }
                for (std::size_t k = 0; k < em.size(); ++k) em[k] = delta[k] / total;
            }
            q0s[u] = rng.dirichlet(delta);
            for (auto& v : q0s[u]) v = std::max(v, 1e-12);
            prior_cache.set_user(u, q0s[u]);
        }
    }

    double ll_total = recompute_ll(params);
    double dir_total = prior_cache.total(params.hdp.alpha0);
    double prior_total = log_prior(params, cfg.priors);
    // Jacobians of the logit/log transforms enter only the MH target.
    auto jacobian = [](const ModelParams& p) {
        return std::log(p.learning.phi * (1.0 - p.learning.phi)) +
               std::log(p.learning.epsilon * (1.0 - p.learning.epsilon)) +
               std::log(p.hdp.alpha0);
    };
    if (!std::isfinite(ll_total + dir_total + prior_total))
        throw std::runtime_error(
            "fit: initialization has -inf posterior; widen the priors or adjust the initial "
            "parameters");

    FitResult fr;
    fr.communities = data.communities;
    fr.reply_cap = data.reply_cap;
    fr.users = data.users;
    fr.cfg = cfg;

    ModelParams best_params = params;
    std::vector<std::vector<double>> best_q0s = q0s;
    double best_post = ll_total + dir_total + prior_total;

    BlockCounter acc_learning, acc_reward, acc_alpha0, acc_q0, acc_funnel;
    const int q0_refresh =
        cfg.q0_refresh > 0 ? cfg.q0_refresh : std::max(500, cfg.n_samples / 10);

    for (int iter = 0; iter < cfg.n_samples; ++iter) {
        // --- learning block: random walk on logit(phi), logit(eps)
        {
            ModelParams cand = params;
            cand.learning.phi = expit(logit(std::clamp(params.learning.phi, 1e-12, 1 - 1e-12)) +
                                      rng.normal(0.0, scales.learning));
            cand.learning.epsilon =
                expit(logit(std::clamp(params.learning.epsilon, 1e-12, 1 - 1e-12)) +
                      rng.normal(0.0, scales.learning));
            double cand_ll = 0.0;
            std::vector<double> cand_user_ll(n_users);
            for (std::size_t u = 0; u < n_users; ++u) {
                cand_user_ll[u] = sequence_log_likelihood(cand, q0s[u], data.actions[u], opts);
                cand_ll += cand_user_ll[u];
            }
            const double cand_prior = log_prior(cand, cfg.priors);
            const double delta = (cand_ll + cand_prior + jacobian(cand)) -
                                 (ll_total + prior_total + jacobian(params));
            ++acc_learning.proposed;
            if (std::isfinite(delta) && std::log(rng.uniform() + 1e-300) < delta) {
                params = cand;
                ll_total = cand_ll;
                user_ll = std::move(cand_user_ll);
                prior_total = cand_prior;
                ++acc_learning.accepted;
            }
        }
        // --- reward block: random walk on the three weights
        {
            ModelParams cand = params;
            cand.reward.w_replies += rng.normal(0.0, scales.reward);
            cand.reward.w_votes += rng.normal(0.0, scales.reward);
            cand.reward.w_intercept += rng.normal(0.0, scales.reward);
            double cand_ll = 0.0;
            std::vector<double> cand_user_ll(n_users);
            for (std::size_t u = 0; u < n_users; ++u) {
                cand_user_ll[u] = sequence_log_likelihood(cand, q0s[u], data.actions[u], opts);
                cand_ll += cand_user_ll[u];
            }
            const double cand_prior = log_prior(cand, cfg.priors);
            const double delta = (cand_ll + cand_prior) - (ll_total + prior_total);
            ++acc_reward.proposed;
            if (std::isfinite(delta) && std::log(rng.uniform() + 1e-300) < delta) {
                params = cand;
                ll_total = cand_ll;
                user_ll = std::move(cand_user_ll);
                prior_total = cand_prior;
                ++acc_reward.accepted;
            }
        }
        // --- alpha0 block: random walk on log(alpha0); only the Dirichlet
        // terms and the prior change. Skipped when the q0s are EM point
        // estimates: refitting them pulls each q0 toward the prior mean as
        // alpha0 grows, so the profile density over alpha0 is unbounded and
        // the walk diverges.
        if (cfg.q0_treatment == Q0Treatment::SampleLatent) {
            ModelParams cand = params;
            cand.hdp.alpha0 = std::exp(std::log(params.hdp.alpha0) +
                                       rng.normal(0.0, scales.alpha0));
            const double cand_dir = prior_cache.total(cand.hdp.alpha0);
            const double cand_prior = log_prior(cand, cfg.priors);
            const double delta = (cand_dir + cand_prior + std::log(cand.hdp.alpha0)) -
                                 (dir_total + prior_total + std::log(params.hdp.alpha0));
            ++acc_alpha0.proposed;
            if (std::isfinite(delta) && std::log(rng.uniform() + 1e-300) < delta) {
                params = cand;
                dir_total = cand_dir;
                prior_total = cand_prior;
                ++acc_alpha0.accepted;
            }
        }
        // --- joint (alpha0, q0) transport move. alpha0 and the spread of the
        // q0s around beta form a funnel: given tight q0s the alpha0
        // conditional concentrates high, and given high alpha0 the q0
        // conditionals stay tight, so single-site updates crawl. Propose
        // alpha0 * c and rescale every user's log-ratio deviation from beta
        // by 1/sqrt(c), which maps the prior at alpha0 approximately onto the
        // prior at alpha0 * c. The map is linear in log-ratio coordinates, so
        // the Jacobian is c^{-(K-1)/2} per user.
        if (cfg.q0_treatment == Q0Treatment::SampleLatent) {
            ModelParams cand = params;
            cand.hdp.alpha0 = std::exp(std::log(params.hdp.alpha0) +
                                       rng.normal(0.0, scales.alpha0));
            const double c = cand.hdp.alpha0 / params.hdp.alpha0;
            const double shrink = 1.0 / std::sqrt(c);
            const std::size_t K = prior_cache.beta_full.size();
            std::vector<double> log_beta(K);
            for (std::size_t k = 0; k < K; ++k)
                log_beta[k] = std::log(std::max(prior_cache.beta_full[k], 1e-300));
            std::vector<std::vector<double>> cand_q0s(n_users);
            std::vector<double> cand_user_ll(n_users);
            double cand_ll = 0.0;
            double cand_bd_sum = 0.0;   // sum over users of beta . log q0
            double cand_ls_sum = 0.0;   // sum over users of sum log q0
            double cur_ls_sum = 0.0;
            std::vector<double> cand_bd(n_users), cand_ls(n_users);
            for (std::size_t u = 0; u < n_users; ++u) {
                std::vector<double> z(K);
                double max_z = kNegInf;
                const double ref_q = std::log(std::max(q0s[u][K - 1], 1e-300));
                for (std::size_t k = 0; k < K; ++k) {
                    const double y = std::log(std::max(q0s[u][k], 1e-300)) - ref_q;
                    const double m = log_beta[k] - log_beta[K - 1];
                    z[k] = m + (y - m) * shrink;
                    max_z = std::max(max_z, z[k]);
                }
                double total = 0.0;
                for (auto& v : z) {
                    v = std::exp(v - max_z);
                    total += v;
                }
                for (auto& v : z) v = std::max(v / total, 1e-300);
                cand_user_ll[u] = sequence_log_likelihood(cand, z, data.actions[u], opts);
                cand_ll += cand_user_ll[u];
                double bd = 0.0, ls = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    const double lq = std::log(z[k]);
                    bd += prior_cache.beta_full[k] * lq;
                    ls += lq;
                }
                cand_bd[u] = bd;
                cand_ls[u] = ls;
                cand_bd_sum += bd;
                cand_ls_sum += ls;
                cur_ls_sum += prior_cache.log_sum[u];
                cand_q0s[u] = std::move(z);
            }
            const double cand_lognorm = prior_cache.lognorm(cand.hdp.alpha0);
            const double cand_dir = static_cast<double>(n_users) * cand_lognorm +
                                    cand.hdp.alpha0 * cand_bd_sum - cand_ls_sum;
            const double cand_prior = log_prior(cand, cfg.priors);
            const double delta =
                (cand_ll + cand_dir + cand_prior + cand_ls_sum + std::log(cand.hdp.alpha0)) -
                (ll_total + dir_total + prior_total + cur_ls_sum +
                 std::log(params.hdp.alpha0)) -
                0.5 * static_cast<double>((K - 1) * n_users) * std::log(c);
            ++acc_funnel.proposed;
            if (std::isfinite(delta) && std::log(rng.uniform() + 1e-300) < delta) {
                params = cand;
                q0s = std::move(cand_q0s);
                user_ll = std::move(cand_user_ll);
                ll_total = cand_ll;
                dir_total = cand_dir;
                prior_total = cand_prior;
                prior_cache.beta_dot = std::move(cand_bd);
                prior_cache.log_sum = std::move(cand_ls);
                ++acc_funnel.accepted;
            }
        }
        // --- q0 handling
        if (cfg.q0_treatment == Q0Treatment::SampleLatent) {
            const double lognorm = prior_cache.lognorm(params.hdp.alpha0);
            for (std::size_t u = 0; u < n_users; ++u) {
                const auto& cur = q0s[u];
                std::vector<double> cand(cur.size());
                double max_z = kNegInf;
                for (std::size_t k = 0; k < cur.size(); ++k) {
                    cand[k] = std::log(std::max(cur[k], 1e-300)) +
                              rng.normal(0.0, scales.q0);
                    max_z = std::max(max_z, cand[k]);
                }
                double total = 0.0;
                for (auto& z : cand) {
                    z = std::exp(z - max_z);
                    total += z;
                }
                for (auto& z : cand) z /= total;
                // symmetric walk in softmax coordinates; the Jacobian of the
                // softmax map enters as +sum log q0_k on both sides
                double cand_ls_j = 0.0;
                for (double v : cand) cand_ls_j += std::log(std::max(v, 1e-300));
                const double prop_correction = cand_ls_j - prior_cache.log_sum[u];
                const double cand_ll =
                    sequence_log_likelihood(params, cand, data.actions[u], opts);
                double cand_bd = 0.0, cand_ls = 0.0;
                for (std::size_t k = 0; k < cand.size(); ++k) {
                    const double lq = std::log(std::max(cand[k], 1e-300));
                    cand_bd += prior_cache.beta_full[k] * lq;
                    cand_ls += lq;
                }
                const double cand_dir_u = lognorm + params.hdp.alpha0 * cand_bd - cand_ls;
                const double cur_dir_u = prior_cache.user(params.hdp.alpha0, lognorm, u);
                const double delta = (cand_ll + cand_dir_u) - (user_ll[u] + cur_dir_u) +
                                     prop_correction;
                ++acc_q0.proposed;
                if (std::isfinite(delta) && std::log(rng.uniform() + 1e-300) < delta) {
                    ll_total += cand_ll - user_ll[u];
                    dir_total += cand_dir_u - cur_dir_u;
                    user_ll[u] = cand_ll;
                    q0s[u] = std::move(cand);
                    prior_cache.beta_dot[u] = cand_bd;
                    prior_cache.log_sum[u] = cand_ls;
                    ++acc_q0.accepted;
                }
            }
        } else if ((iter + 1) % q0_refresh == 0) {
            refresh_q0_map();
            ll_total = recompute_ll(params);
            dir_total = prior_cache.total(params.hdp.alpha0);
        }

        const double post = ll_total + dir_total + prior_total;
        if (post > best_post) {
            best_post = post;
            best_params = params;
            best_q0s = q0s;
        }
        if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
            fr.samples.push_back({params.learning.phi, params.learning.epsilon,
                                  params.reward.w_replies, params.reward.w_votes,
                                  params.reward.w_intercept, params.hdp.alpha0, post});
        }
    }

    fr.map_params = best_params;
    fr.map_log_posterior = best_post;
    fr.per_user_q0 = std::move(best_q0s);
    fr.acceptance = {{"learning", acc_learning.rate()},
                     {"reward", acc_reward.rate()},
                     {"alpha0", acc_alpha0.rate()},
                     {"q0", acc_q0.rate()}};
    if (cfg.q0_treatment == Q0Treatment::SampleLatent)
        fr.acceptance["q0_scale"] = acc_funnel.rate();
    return fr;
}

}  // namespace proplab
