// proplab — fit, evaluate and simulate the community-selection model.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "proplab/inference.hpp"
#include "proplab/io_util.hpp"
#include "proplab/predict.hpp"
#include "proplab/simulation.hpp"
#include "proplab/sweep.hpp"
#include "proplab/synthetic.hpp"

using namespace proplab;

namespace {

std::uint64_t env_seed_fallback(std::uint64_t seed, bool seed_given) {
    if (seed_given) return seed;
    if (const char* env = std::getenv("PROPLAB_SEED")) return std::strtoull(env, nullptr, 10);
    return seed;
}

std::string sweep_csv(const SweepResult& sr) {
    std::ostringstream os;
    os << "training_fraction,predictor,mean_score,se_user,n_test_events,n_users,"
          "skipped_users,test_set_hash\n";
    for (const auto& r : sr.rows)
        os << format_double(r.fraction) << ',' << r.predictor << ','
           << format_double(r.mean_score) << ',' << format_double(r.se_user) << ','
           << r.n_test_events << ',' << r.n_users << ',' << sr.skipped_users << ','
           << sr.test_set_hash << '\n';
    return os.str();
}

std::string curve_csv(const FeedbackCurve& c) {
    std::ostringstream os;
    os << "bucket,replies_from,relative_increase,n_transitions\n";
    for (std::size_t b = 0; b < c.bucket_labels.size(); ++b) {
        os << c.bucket_labels[b] << ',' << c.bucket_lower[b] << ',';
        if (c.relative_increase[b])
            os << format_double(*c.relative_increase[b]);
        else
            os << "missing";
        os << ',' << c.n_transitions[b] << '\n';
    }
    return os.str();
}

std::string trajectory_csv(const TrajectorySummary& t) {
    std::ostringstream os;
    os << "round,interest,regime\n";
    for (std::size_t i = 0; i < t.interest.size(); ++i)
        os << (i + 1) << ',' << format_double(t.interest[i]) << ',' << regime_name(t.regime)
           << '\n';
    return os.str();
}

std::string aggregate_csv(const RegimeAggregate& agg) {
    std::ostringstream os;
    os << "regime,round,mean_interest,n_runs\n";
    for (const auto& [regime, mean] : agg.mean_interest)
        for (std::size_t i = 0; i < mean.size(); ++i)
            os << regime_name(regime) << ',' << (i + 1) << ',' << format_double(mean[i]) << ','
               << agg.counts.at(regime) << '\n';
    return os.str();
}

RunManifest make_manifest(const std::string& command, int argc, char** argv,
                          std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    for (int i = 0; i < argc; ++i) m.argv.emplace_back(argv[i]);
    m.rng_seed = seed;
    return m;
}

/// Fig.-3 scenario derived from a fit: the most popular communities from the
/// training data plus one small "target" community to seed.
SimConfig default_sim_config(const FitResult& fit, int n_top, double target_mass,
                             std::uint64_t seed) {
    SimConfig cfg;
    cfg.agent_params = fit.map_params;
    std::vector<std::size_t> order(fit.communities.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fit.map_params.hdp.popularity.beta[a] > fit.map_params.hdp.popularity.beta[b];
    });
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(n_top), order.size());
    std::vector<std::string> communities;
    std::vector<double> beta;
    double total = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
        communities.push_back(fit.communities[order[i]]);
        beta.push_back(fit.map_params.hdp.popularity.beta[order[i]]);
        total += beta.back();
    }
    for (auto& b : beta) b *= (1.0 - target_mass - 1e-4) / total;
    communities.push_back("target");
    beta.push_back(target_mass);
    cfg.communities = communities;
    cfg.target_community = "target";
    cfg.agent_params.hdp.popularity.beta = beta;
    cfg.agent_params.hdp.popularity.beta_unseen = 1e-4;
    cfg.rng_seed = seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Community-selection model: generation, inference, prediction, "
                 "evaluation and seeding simulations"};
    app.require_subcommand(1);

    // ---- generate
    auto* gen = app.add_subcommand("generate", "Generate a synthetic event log");
    int g_users = 100, g_actions = 100, g_k = 20;
    double g_phi = 0.1, g_eps = 0.2, g_alpha0 = 2.0, g_gamma = 1.0;
    double g_wr = 1.0, g_wv = 0.5, g_wi = 0.0, g_floor = 0.0;
    double g_cap = 10.0, g_rate = 1.0, g_vmean = 1.0, g_vsd = 2.0;
    std::uint64_t g_seed = 0;
    std::string g_out;
    gen->add_option("--users", g_users, "Number of users");
    gen->add_option("--actions", g_actions, "Actions per user");
    gen->add_option("--communities", g_k, "Number of communities K");
    gen->add_option("--phi", g_phi, "Recency");
    gen->add_option("--epsilon", g_eps, "Exploration");
    gen->add_option("--alpha0", g_alpha0, "HDP concentration");
    gen->add_option("--gamma", g_gamma, "Stick-breaking concentration");
    gen->add_option("--w-replies", g_wr, "Reward weight on normalized replies");
    gen->add_option("--w-votes", g_wv, "Reward weight on vote score");
    gen->add_option("--w-intercept", g_wi, "Reward intercept");
    gen->add_option("--reward-floor", g_floor, "Minimum emitted reward");
    gen->add_option("--reply-cap", g_cap, "Reply normalization cap");
    gen->add_option("--reply-rate", g_rate, "Mean replies per action");
    gen->add_option("--vote-mean", g_vmean, "Mean vote score");
    gen->add_option("--vote-sd", g_vsd, "Vote score spread");
    auto* g_seed_opt = gen->add_option("--seed", g_seed, "RNG seed (PROPLAB_SEED fallback)");
    gen->add_option("-o,--output", g_out, "Output JSONL path")->required();

    // ---- fit
    auto* fitcmd = app.add_subcommand("fit", "Fit model parameters to an event log");
    std::string f_log, f_out;
    FitConfig f_cfg;
    std::string f_q0 = "map";
    double f_cap = 0.0;
    fitcmd->add_option("log", f_log, "Event log (JSONL)")->required();
    fitcmd->add_option("--samples", f_cfg.n_samples, "MH iterations");
    fitcmd->add_option("--burn-in", f_cfg.burn_in, "Burn-in iterations");
    fitcmd->add_option("--thin", f_cfg.thin, "Sample thinning");
    auto* f_seed_opt = fitcmd->add_option("--seed", f_cfg.rng_seed, "RNG seed");
    fitcmd->add_option("--q0", f_q0, "q0 treatment: map|sample");
    fitcmd->add_option("--reply-cap", f_cap, "Reply cap (0 = corpus 99th percentile)");
    fitcmd->add_option("--smoothing", f_cfg.beta_smoothing, "Popularity smoothing");
    fitcmd->add_option("--gamma", f_cfg.gamma, "Stick-breaking concentration");
    fitcmd->add_option("--prob-floor", f_cfg.prob_floor, "Choice-probability floor");
    fitcmd->add_option("--scale-learning", f_cfg.scales.learning, "Proposal sd, logit scale");
    fitcmd->add_option("--scale-reward", f_cfg.scales.reward, "Proposal sd, reward weights");
    fitcmd->add_option("--scale-alpha0", f_cfg.scales.alpha0, "Proposal sd, log alpha0");
    fitcmd->add_option("--scale-q0", f_cfg.scales.q0, "Proposal sd, latent q0");
    fitcmd->add_option("-o,--output", f_out, "Output fit JSON")->required();

    // ---- predict
    auto* pred = app.add_subcommand("predict", "Predict a user's next community");
    std::string p_log, p_fit, p_user, p_out;
    pred->add_option("log", p_log, "Event log (JSONL)")->required();
    pred->add_option("fit", p_fit, "Fitted model JSON")->required();
    pred->add_option("--user", p_user, "User id")->required();
    pred->add_option("-o,--output", p_out, "Output JSON path")->required();

    // ---- evaluate
    auto* eval = app.add_subcommand("evaluate", "Training-fraction sweep with baselines");
    std::string e_log, e_fit, e_out;
    SweepConfig e_cfg;
    eval->add_option("log", e_log, "Event log (JSONL)")->required();
    eval->add_option("fit", e_fit, "Fitted model JSON")->required();
    eval->add_option("--fractions", e_cfg.fractions, "Training fractions")->delimiter(',');
    eval->add_option("--test-fraction", e_cfg.test_fraction, "Held-out per-user suffix");
    eval->add_option("--min-actions", e_cfg.min_actions, "Minimum actions per user");
    eval->add_option("--kmax", e_cfg.k_max, "Window of the KMax baselines");
    eval->add_option("--smoothing", e_cfg.smoothing, "Baseline smoothing");
    eval->add_option("-o,--output", e_out, "Output CSV path")->required();

    // ---- simulate
    auto* sim = app.add_subcommand("simulate", "Run one seeding simulation");
    std::string s_cfg_path, s_out;
    std::uint64_t s_seed = 0;
    sim->add_option("config", s_cfg_path, "SimConfig JSON")->required();
    auto* s_seed_opt = sim->add_option("--seed", s_seed, "Override the config seed");
    sim->add_option("-o,--output", s_out, "Output CSV path")->required();

    // ---- replicate-figures
    auto* figs = app.add_subcommand(
        "replicate-figures",
        "Emit fig1.csv (feedback response), fig2.csv (prediction sweep) and fig3.csv "
        "(seeding regimes) for a log and fit");
    std::string r_log, r_fit, r_dir;
    int r_reps = 200, r_agents = 30, r_top = 8;
    double r_target_mass = 0.02;
    std::uint64_t r_seed = 0;
    SweepConfig r_sweep;
    figs->add_option("log", r_log, "Event log (JSONL)")->required();
    figs->add_option("fit", r_fit, "Fitted model JSON")->required();
    figs->add_option("-o,--outdir", r_dir, "Output directory")->required();
    figs->add_option("--sim-reps", r_reps, "Seeding repetitions for fig3");
    figs->add_option("--sim-agents", r_agents, "Agents per seeding run");
    figs->add_option("--sim-top", r_top, "Existing communities kept in the fig3 scenario");
    figs->add_option("--target-mass", r_target_mass, "Popularity mass of the target");
    auto* r_seed_opt = figs->add_option("--seed", r_seed, "RNG seed for fig3");
    figs->add_option("--kmax", r_sweep.k_max, "Window of the KMax baselines");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            g_seed = env_seed_fallback(g_seed, g_seed_opt->count() > 0);
            ModelParams params;
            params.learning = {g_phi, g_eps};
            params.reward = {g_wr, g_wv, g_wi, g_floor};
            params.hdp.alpha0 = g_alpha0;
            params.hdp.popularity = stick_breaking(g_gamma, g_k, splitmix64(g_seed) ^ 0x5eedull);
            SyntheticConfig cfg;
            cfg.n_users = g_users;
            cfg.actions_per_user = g_actions;
            cfg.reply_cap = g_cap;
            cfg.reply_rate = g_rate;
            cfg.vote_mean = g_vmean;
            cfg.vote_sd = g_vsd;
            cfg.rng_seed = g_seed;
            save_event_log(generate_synthetic_log(params, cfg), g_out);
            auto m = make_manifest("generate", argc, argv, g_seed);
            m.outputs = {g_out};
            m.config_json = nlohmann::ordered_json{{"users", g_users},
                                                   {"actions", g_actions},
                                                   {"communities", g_k},
                                                   {"phi", g_phi},
                                                   {"epsilon", g_eps},
                                                   {"alpha0", g_alpha0},
                                                   {"gamma", g_gamma},
                                                   {"w_replies", g_wr},
                                                   {"w_votes", g_wv},
                                                   {"w_intercept", g_wi},
                                                   {"reply_cap", g_cap}}
                                .dump();
            m.write(g_out + ".manifest.json");
        } else if (*fitcmd) {
            f_cfg.rng_seed = env_seed_fallback(f_cfg.rng_seed, f_seed_opt->count() > 0);
            f_cfg.q0_treatment =
                f_q0 == "sample" ? Q0Treatment::SampleLatent : Q0Treatment::MapPointEstimate;
            const auto log = load_event_log(f_log);
            const auto data = Dataset::build(log, f_cap);
            const auto result = fit(data, f_cfg);
            save_fit(result, f_out);
            auto m = make_manifest("fit", argc, argv, f_cfg.rng_seed);
            m.input_hashes = {{f_log, file_hash(f_log)}};
            m.outputs = {f_out};
            m.config_json = nlohmann::ordered_json{{"samples", f_cfg.n_samples},
                                                   {"burn_in", f_cfg.burn_in},
                                                   {"q0", f_q0},
                                                   {"reply_cap", data.reply_cap}}
                                .dump();
            m.write(f_out + ".manifest.json");
        } else if (*pred) {
            const auto log = load_event_log(p_log);
            const auto fr = load_fit(p_fit);
            std::vector<HistoryAction> history;
            bool found = false;
            for (const auto& [user, recs] : log.by_user())
                if (user == p_user) {
                    found = true;
                    for (const auto* r : recs)
                        history.push_back({r->community, r->replies, r->score});
                }
            if (!found) throw std::runtime_error("predict: no such user: " + p_user);
            const auto dist = predict_next(fr, history);
            nlohmann::ordered_json j;
            j["user"] = p_user;
            j["history_length"] = history.size();
            nlohmann::ordered_json probs = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < dist.communities.size(); ++i)
                probs[dist.communities[i]] = dist.probs[i];
            j["probs"] = std::move(probs);
            j["unseen"] = dist.unseen;
            write_file_atomic(p_out, j.dump(2) + "\n");
            auto m = make_manifest("predict", argc, argv, 0);
            m.input_hashes = {{p_log, file_hash(p_log)}, {p_fit, file_hash(p_fit)}};
            m.outputs = {p_out};
            m.write(p_out + ".manifest.json");
        } else if (*eval) {
            const auto log = load_event_log(e_log);
            const auto fr = load_fit(e_fit);
            const auto sr = training_fraction_sweep(log, fr, e_cfg);
            write_file_atomic(e_out, sweep_csv(sr));
            auto m = make_manifest("evaluate", argc, argv, 0);
            m.input_hashes = {{e_log, file_hash(e_log)}, {e_fit, file_hash(e_fit)}};
            m.outputs = {e_out};
            m.write(e_out + ".manifest.json");
        } else if (*sim) {
            auto cfg = load_sim_config(s_cfg_path);
            if (s_seed_opt->count() > 0)
                cfg.rng_seed = s_seed;
            else
                cfg.rng_seed = env_seed_fallback(cfg.rng_seed, false);
            const auto traj = run_seeding(cfg);
            if (traj.empty_population)
                write_file_atomic(s_out, "round,interest,regime\n# empty population\n");
            else
                write_file_atomic(s_out, trajectory_csv(traj));
            auto m = make_manifest("simulate", argc, argv, cfg.rng_seed);
            m.input_hashes = {{s_cfg_path, file_hash(s_cfg_path)}};
            m.outputs = {s_out};
            m.write(s_out + ".manifest.json");
        } else if (*figs) {
            r_seed = env_seed_fallback(r_seed, r_seed_opt->count() > 0);
            const auto log = load_event_log(r_log);
            const auto fr = load_fit(r_fit);
            std::filesystem::create_directories(r_dir);
            const auto dir = std::filesystem::path(r_dir);

            write_file_atomic(dir / "fig1.csv", curve_csv(feedback_response_curve(log)));
            write_file_atomic(dir / "fig2.csv",
                              sweep_csv(training_fraction_sweep(log, fr, r_sweep)));

            SimConfig scfg = default_sim_config(fr, r_top, r_target_mass, r_seed);
            scfg.n_agents = r_agents;
            std::vector<TrajectorySummary> runs;
            for (int rep = 0; rep < r_reps; ++rep) {
                SimConfig one = scfg;
                one.rng_seed = splitmix64(r_seed) + static_cast<std::uint64_t>(rep);
                runs.push_back(run_seeding(one));
            }
            write_file_atomic(dir / "fig3.csv", aggregate_csv(aggregate_runs(runs)));

            auto m = make_manifest("replicate-figures", argc, argv, r_seed);
            m.input_hashes = {{r_log, file_hash(r_log)}, {r_fit, file_hash(r_fit)}};
            m.outputs = {(dir / "fig1.csv").string(), (dir / "fig2.csv").string(),
                         (dir / "fig3.csv").string()};
            m.write(dir / "figures.manifest.json");
        }
    } catch (const std::exception& e) {
        std::cerr << "proplab: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
