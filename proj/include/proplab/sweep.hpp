#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proplab/event_log.hpp"
#include "proplab/predict.hpp"

namespace proplab {

struct SweepConfig {
    std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
    double test_fraction = 0.2;  ///< per-user chronological test suffix
    int min_actions = 10;        ///< users below this are skipped
    int k_max = 10;
    double smoothing = 0.5;
    bool include_model = true;
    std::vector<Baseline> baselines = {Baseline::Global, Baseline::UserAll,
                                       Baseline::UserKMax, Baseline::Initial,
                                       Baseline::InitKMax};
};

struct SweepRow {
    double fraction = 0.0;
    std::string predictor;
    double mean_score = 0.0;
    double se_user = 0.0;  ///< standard error of the per-user mean score
    int n_test_events = 0;
    int n_users = 0;
    /// Per-user mean scores in a fixed user order shared by every row, so two
    /// predictors can be compared pairwise on the same users.
    std::vector<double> user_scores;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::uint64_t test_set_hash = 0;  ///< FNV-1a over (user, seq) of test events
    int skipped_users = 0;

    const SweepRow* row(double fraction, const std::string& predictor) const;
};

/// Fig.-2-style benchmark. The test set is the fixed per-user suffix and is
/// identical across fractions and predictors. For fraction f each predictor
/// is conditioned on the most recent f of the user's pre-test actions (the
/// window grows backward from the test boundary), with global statistics
/// (counts, popularity) recomputed from the union of those windows. The
/// fitted parameters in `fit` supply the model and the Initial baselines.
SweepResult training_fraction_sweep(const EventLog& log, const FitResult& fit,
                                    const SweepConfig& cfg);

/// Fig.-1-style model-free analysis: for each reply-count bucket, the
/// probability that the user's next action repeats the current community,
/// relative to the zero-reply bucket (which is 1 by construction).
struct FeedbackCurve {
    std::vector<std::string> bucket_labels;
    std::vector<long> bucket_lower;          ///< inclusive lower reply bound
    std::vector<std::optional<double>> relative_increase;  ///< empty bucket -> nullopt
    std::vector<long> n_transitions;
};

FeedbackCurve feedback_response_curve(const EventLog& log,
                                      const std::vector<long>& bucket_lowers = {0, 1, 2, 3,
                                                                                5});

}  // namespace proplab
