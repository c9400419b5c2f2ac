#include <fstream>

#include "json.hpp"
#include "proplab/inference.hpp"

namespace proplab {

namespace {

using nlohmann::ordered_json;

ordered_json params_to_json(const ModelParams& p) {
    ordered_json j;
    j["phi"] = p.learning.phi;
    j["epsilon"] = p.learning.epsilon;
    j["w_replies"] = p.reward.w_replies;
    j["w_votes"] = p.reward.w_votes;
    j["w_intercept"] = p.reward.w_intercept;
    j["reward_floor"] = p.reward.floor;
    j["alpha0"] = p.hdp.alpha0;
    j["gamma"] = p.hdp.popularity.gamma;
    j["beta"] = p.hdp.popularity.beta;
    j["beta_unseen"] = p.hdp.popularity.beta_unseen;
    return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
    ModelParams p;
    p.learning.phi = j.at("phi");
    p.learning.epsilon = j.at("epsilon");
    p.reward.w_replies = j.at("w_replies");
    p.reward.w_votes = j.at("w_votes");
    p.reward.w_intercept = j.at("w_intercept");
    p.reward.floor = j.at("reward_floor");
    p.hdp.alpha0 = j.at("alpha0");
    p.hdp.popularity.gamma = j.at("gamma");
    p.hdp.popularity.beta = j.at("beta").get<std::vector<double>>();
    p.hdp.popularity.beta_unseen = j.at("beta_unseen");
    return p;
}

}  // namespace

void save_fit(const FitResult& fr, const std::filesystem::path& path) {
    ordered_json j;
    j["tool"] = "proplab";
    j["map_params"] = params_to_json(fr.map_params);
    j["map_log_posterior"] = fr.map_log_posterior;
    j["communities"] = fr.communities;
    j["reply_cap"] = fr.reply_cap;
    j["priors"] = {{"w_sd", fr.cfg.priors.w_sd},
                   {"alpha0_log_mean", fr.cfg.priors.alpha0_log_mean},
                   {"alpha0_log_sd", fr.cfg.priors.alpha0_log_sd}};
    j["config"] = {{"n_samples", fr.cfg.n_samples},
                   {"burn_in", fr.cfg.burn_in},
                   {"thin", fr.cfg.thin},
                   {"scale_learning", fr.cfg.scales.learning},
                   {"scale_reward", fr.cfg.scales.reward},
                   {"scale_alpha0", fr.cfg.scales.alpha0},
                   {"scale_q0", fr.cfg.scales.q0},
                   {"q0_treatment", fr.cfg.q0_treatment == Q0Treatment::SampleLatent
                                        ? "sample"
                                        : "map"},
                   {"q0_refresh", fr.cfg.q0_refresh},
                   {"q0_map_iters", fr.cfg.q0_map_iters},
                   {"rng_seed", fr.cfg.rng_seed},
                   {"prob_floor", fr.cfg.prob_floor},
                   {"beta_smoothing", fr.cfg.beta_smoothing},
                   {"gamma", fr.cfg.gamma}};
    j["acceptance"] = fr.acceptance;
    j["users"] = fr.users;
    j["per_user_q0"] = fr.per_user_q0;
    ordered_json samples = ordered_json::array();
    for (const auto& s : fr.samples)
        samples.push_back({s.phi, s.epsilon, s.w_replies, s.w_votes, s.w_intercept,
                           s.alpha0, s.log_post});
    j["samples"] = std::move(samples);

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write fit file: " + path.string());
        out << j.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

FitResult load_fit(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fit file: " + path.string());
    nlohmann::json j;
    in >> j;

    FitResult fr;
    fr.map_params = params_from_json(j.at("map_params"));
    fr.map_log_posterior = j.at("map_log_posterior");
    fr.communities = j.at("communities").get<std::vector<std::string>>();
    fr.reply_cap = j.at("reply_cap");
    const auto& pr = j.at("priors");
    fr.cfg.priors = {pr.at("w_sd"), pr.at("alpha0_log_mean"), pr.at("alpha0_log_sd")};
    const auto& cj = j.at("config");
    fr.cfg.n_samples = cj.at("n_samples");
    fr.cfg.burn_in = cj.at("burn_in");
    fr.cfg.thin = cj.at("thin");
    fr.cfg.scales = {cj.at("scale_learning"), cj.at("scale_reward"), cj.at("scale_alpha0"),
                     cj.at("scale_q0")};
    fr.cfg.q0_treatment = cj.at("q0_treatment") == "sample" ? Q0Treatment::SampleLatent
                                                            : Q0Treatment::MapPointEstimate;
    fr.cfg.q0_refresh = cj.at("q0_refresh");
    fr.cfg.q0_map_iters = cj.at("q0_map_iters");
    fr.cfg.rng_seed = cj.at("rng_seed");
    fr.cfg.prob_floor = cj.at("prob_floor");
    fr.cfg.beta_smoothing = cj.at("beta_smoothing");
    fr.cfg.gamma = cj.at("gamma");
    fr.acceptance = j.at("acceptance").get<std::map<std::string, double>>();
    fr.users = j.at("users").get<std::vector<std::string>>();
    fr.per_user_q0 = j.at("per_user_q0").get<std::vector<std::vector<double>>>();
    for (const auto& s : j.at("samples"))
        fr.samples.push_back({s.at(0), s.at(1), s.at(2), s.at(3), s.at(4), s.at(5), s.at(6)});
    return fr;
}

}  // namespace proplab
