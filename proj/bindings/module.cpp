#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "proplab/inference.hpp"
#include "proplab/likelihood.hpp"
#include "proplab/predict.hpp"
#include "proplab/simulation.hpp"
#include "proplab/sweep.hpp"
#include "proplab/synthetic.hpp"

namespace py = pybind11;
using namespace proplab;

PYBIND11_MODULE(_proplab, m) {
    m.doc() = "Community-selection model: propensity learning, HDP prior, inference, "
              "prediction and seeding simulations";

    py::class_<FeedbackVector>(m, "FeedbackVector")
        .def(py::init<double, double>(), py::arg("replies_norm") = 0.0,
             py::arg("vote_score") = 0.0)
        .def_readwrite("replies_norm", &FeedbackVector::replies_norm)
        .def_readwrite("vote_score", &FeedbackVector::vote_score);

    py::class_<RewardFunction>(m, "RewardFunction")
        .def(py::init<double, double, double, double>(), py::arg("w_replies") = 1.0,
             py::arg("w_votes") = 1.0, py::arg("w_intercept") = 0.0, py::arg("floor") = 0.0)
        .def_readwrite("w_replies", &RewardFunction::w_replies)
        .def_readwrite("w_votes", &RewardFunction::w_votes)
        .def_readwrite("w_intercept", &RewardFunction::w_intercept)
        .def_readwrite("floor", &RewardFunction::floor)
        .def("__call__", [](const RewardFunction& rf, const FeedbackVector& r) {
            return reward(rf, r);
        });

    py::class_<LearningParams>(m, "LearningParams")
        .def(py::init<double, double>(), py::arg("phi") = 0.0, py::arg("epsilon") = 0.0)
        .def_readwrite("phi", &LearningParams::phi)
        .def_readwrite("epsilon", &LearningParams::epsilon);

    py::class_<PropensityState>(m, "PropensityState")
        .def_static("make", &PropensityState::make, py::arg("communities"), py::arg("q0"))
        .def_readonly("communities", &PropensityState::communities)
        .def_readonly("q0", &PropensityState::q0)
        .def_readonly("q", &PropensityState::q)
        .def("slot_of", &PropensityState::slot_of)
        .def_property_readonly("unseen_slot", &PropensityState::unseen_slot);

    m.def("reward", &reward, py::arg("reward_function"), py::arg("feedback"));
    m.def("choice_distribution", &choice_distribution, py::arg("state"));
    m.def("apply_update", &apply_update, py::arg("state"), py::arg("chosen"),
          py::arg("reward_value"), py::arg("learning"));
    m.def("grow_state", &grow_state, py::arg("state"), py::arg("new_community"),
          py::arg("split_fraction") = 0.5);

    py::class_<GlobalPopularity>(m, "GlobalPopularity")
        .def(py::init<>())
        .def_readwrite("beta", &GlobalPopularity::beta)
        .def_readwrite("beta_unseen", &GlobalPopularity::beta_unseen)
        .def_readwrite("gamma", &GlobalPopularity::gamma);

    py::class_<HdpParams>(m, "HdpParams")
        .def(py::init<>())
        .def_readwrite("alpha0", &HdpParams::alpha0)
        .def_readwrite("popularity", &HdpParams::popularity);

    m.def("stick_breaking", &stick_breaking, py::arg("gamma"), py::arg("k"),
          py::arg("rng_seed"));
    m.def(
        "sample_initial_propensities",
        [](const HdpParams& hdp, std::uint64_t seed) {
            return sample_initial_propensities(hdp, seed);
        },
        py::arg("hdp"), py::arg("rng_seed"));

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("hdp", &ModelParams::hdp)
        .def_readwrite("learning", &ModelParams::learning)
        .def_readwrite("reward", &ModelParams::reward);

    m.def(
        "sequence_log_likelihood",
        [](const ModelParams& params, const std::vector<double>& q0,
           const std::vector<std::pair<int, std::pair<double, double>>>& actions,
           double prob_floor) {
            std::vector<IndexedAction> acts;
            for (const auto& [slot, fb] : actions)
                acts.push_back({slot, {fb.first, fb.second}});
            return sequence_log_likelihood(params, q0, acts, {prob_floor});
        },
        py::arg("params"), py::arg("q0"), py::arg("actions"), py::arg("prob_floor") = 0.0,
        "actions: list of (slot, (replies_norm, vote_score))");

    py::class_<PredictiveDistribution>(m, "PredictiveDistribution")
        .def_readonly("communities", &PredictiveDistribution::communities)
        .def_readonly("probs", &PredictiveDistribution::probs)
        .def_readonly("unseen", &PredictiveDistribution::unseen)
        .def("prob_of", &PredictiveDistribution::prob_of);

    m.def("quadratic_score", &quadratic_score, py::arg("dist"), py::arg("outcome"));

    py::enum_<Regime>(m, "Regime")
        .value("NoTraction", Regime::NoTraction)
        .value("LateFailure", Regime::LateFailure)
        .value("Success", Regime::Success);

    m.def(
        "classify_trajectory",
        [](const std::vector<double>& interest, int round_a, double thr_a, int round_b,
           double thr_b) { return classify_trajectory(interest, round_a, thr_a, round_b, thr_b); },
        py::arg("interest"), py::arg("round_a") = 200, py::arg("threshold_a") = 0.4,
        py::arg("round_b") = 700, py::arg("threshold_b") = 0.5);

    py::class_<TrajectorySummary>(m, "TrajectorySummary")
        .def_readonly("interest", &TrajectorySummary::interest)
        .def_readonly("regime", &TrajectorySummary::regime)
        .def_readonly("empty_population", &TrajectorySummary::empty_population);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("n_agents", &SimConfig::n_agents)
        .def_readwrite("n_seed_users", &SimConfig::n_seed_users)
        .def_readwrite("seed_rounds", &SimConfig::seed_rounds)
        .def_readwrite("total_rounds", &SimConfig::total_rounds)
        .def_readwrite("target_community", &SimConfig::target_community)
        .def_readwrite("communities", &SimConfig::communities)
        .def_readwrite("agent_params", &SimConfig::agent_params)
        .def_readwrite("rng_seed", &SimConfig::rng_seed)
        .def_readwrite("classify_round_a", &SimConfig::classify_round_a)
        .def_readwrite("threshold_a", &SimConfig::threshold_a)
        .def_readwrite("classify_round_b", &SimConfig::classify_round_b)
        .def_readwrite("threshold_b", &SimConfig::threshold_b);

    m.def("run_seeding", &run_seeding, py::arg("config"));
    m.def("load_sim_config", &load_sim_config, py::arg("path"));

    py::class_<EventRecord>(m, "EventRecord")
        .def_readonly("user", &EventRecord::user)
        .def_readonly("seq", &EventRecord::seq)
        .def_readonly("community", &EventRecord::community)
        .def_readonly("replies", &EventRecord::replies)
        .def_readonly("score", &EventRecord::score);

    py::class_<EventLog>(m, "EventLog")
        .def_readonly("records", &EventLog::records)
        .def("__len__", [](const EventLog& log) { return log.size(); });

    m.def("load_event_log", &load_event_log, py::arg("path"));
    m.def("save_event_log", &save_event_log, py::arg("log"), py::arg("path"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("communities", &FitResult::communities)
        .def_readonly("reply_cap", &FitResult::reply_cap)
        .def_readonly("map_log_posterior", &FitResult::map_log_posterior)
        .def_readonly("acceptance", &FitResult::acceptance)
        .def_property_readonly("map_params",
                               [](const FitResult& fr) { return fr.map_params; });

    m.def("load_fit", &load_fit, py::arg("path"));
    m.def(
        "fit_event_log",
        [](const std::filesystem::path& log_path, int n_samples, int burn_in,
           std::uint64_t seed) {
            FitConfig cfg;
            cfg.n_samples = n_samples;
            cfg.burn_in = burn_in;
            cfg.rng_seed = seed;
            return fit(Dataset::build(load_event_log(log_path)), cfg);
        },
        py::arg("log_path"), py::arg("n_samples") = 2000, py::arg("burn_in") = 500,
        py::arg("seed") = 0);
}
