#include "proplab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace proplab {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

struct UserSplit {
    std::string user;
    std::vector<HistoryAction> prefix;  // oldest first
    std::vector<HistoryAction> test;    // the held-out suffix, oldest first
    std::vector<std::int64_t> test_seq;
};

}  // namespace

const SweepRow* SweepResult::row(double fraction, const std::string& predictor) const {
    for (const auto& r : rows)
        if (std::abs(r.fraction - fraction) < 1e-12 && r.predictor == predictor) return &r;
    return nullptr;
}

SweepResult training_fraction_sweep(const EventLog& log, const FitResult& fit,
                                    const SweepConfig& cfg) {
    for (double f : cfg.fractions)
        if (!(f > 0.0 && f <= 1.0))
            throw std::invalid_argument("training_fraction_sweep: fractions must be in (0, 1]");
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
        throw std::invalid_argument("training_fraction_sweep: test_fraction must be in (0, 1)");

    SweepResult result;
    std::vector<UserSplit> splits;
    for (const auto& [user, recs] : log.by_user()) {
        if (static_cast<int>(recs.size()) < cfg.min_actions) {
            ++result.skipped_users;
            continue;
        }
        const auto n_test = std::max<std::size_t>(
            1, static_cast<std::size_t>(cfg.test_fraction * static_cast<double>(recs.size())));
        UserSplit s;
        s.user = user;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            HistoryAction h{recs[i]->community, recs[i]->replies, recs[i]->score};
            if (i + n_test < recs.size())
                s.prefix.push_back(std::move(h));
            else {
                s.test.push_back(std::move(h));
                s.test_seq.push_back(recs[i]->seq);
            }
        }
        if (s.prefix.empty()) {
            ++result.skipped_users;
            continue;
        }
        splits.push_back(std::move(s));
    }

    std::uint64_t h = 1469598103934665603ull;
    for (const auto& s : splits) {
        h = fnv1a(h, s.user.data(), s.user.size());
        for (auto seq : s.test_seq) h = fnv1a(h, &seq, sizeof(seq));
    }
    result.test_set_hash = h;

    std::vector<std::string> predictors;
    for (Baseline b : cfg.baselines) predictors.push_back(baseline_name(b));
    if (cfg.include_model) predictors.push_back("FullModel");

    for (double f : cfg.fractions) {
        // the training window is the most recent f of each user's prefix
        std::vector<std::vector<HistoryAction>> windows(splits.size());
        for (std::size_t u = 0; u < splits.size(); ++u) {
            const auto& prefix = splits[u].prefix;
            const auto len = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::lround(f * static_cast<double>(prefix.size()))));
            windows[u].assign(prefix.end() - static_cast<std::ptrdiff_t>(len), prefix.end());
        }

        // global statistics from the union of the training windows
        BaselineContext ctx;
        ctx.communities = fit.communities;
        ctx.global_counts.assign(ctx.communities.size(), 0.0);
        ctx.alpha0 = fit.map_params.hdp.alpha0;
        ctx.k_max = cfg.k_max;
        ctx.smoothing = cfg.smoothing;
        double total_count = 0.0;
        for (const auto& w : windows)
            for (const auto& a : w) {
                for (std::size_t c = 0; c < ctx.communities.size(); ++c)
                    if (ctx.communities[c] == a.community) {
                        ctx.global_counts[c] += 1.0;
                        break;
                    }
                total_count += 1.0;
            }
        const double gamma = fit.map_params.hdp.popularity.gamma;
        ctx.beta_unseen = gamma / (gamma + std::max(1.0, total_count));
        ctx.beta.assign(ctx.communities.size(), 0.0);
        double beta_total = 0.0;
        for (std::size_t c = 0; c < ctx.communities.size(); ++c)
            beta_total += ctx.global_counts[c] + cfg.smoothing;
        for (std::size_t c = 0; c < ctx.communities.size(); ++c)
            ctx.beta[c] =
                (ctx.global_counts[c] + cfg.smoothing) * (1.0 - ctx.beta_unseen) / beta_total;

        for (const auto& name : predictors) {
            std::vector<double> user_means;
            double score_sum = 0.0;
            int n_events = 0;
            for (std::size_t u = 0; u < splits.size(); ++u) {
                PredictiveDistribution dist;
                if (name == "FullModel") {
                    dist = predict_next(fit, windows[u]);
                } else {
                    Baseline kind = Baseline::Global;
                    for (Baseline b : cfg.baselines)
                        if (name == baseline_name(b)) kind = b;
                    dist = baseline_predict(kind, ctx, windows[u]);
                }
                double user_sum = 0.0;
                for (const auto& t : splits[u].test) {
                    const double s = quadratic_score(dist, t.community);
                    user_sum += s;
                    score_sum += s;
                    ++n_events;
                }
                user_means.push_back(user_sum / static_cast<double>(splits[u].test.size()));
            }
            SweepRow row;
            row.fraction = f;
            row.predictor = name;
            row.n_test_events = n_events;
            row.n_users = static_cast<int>(splits.size());
            row.mean_score = n_events > 0 ? score_sum / n_events : 0.0;
            if (user_means.size() > 1) {
                double mean = 0.0;
                for (double m : user_means) mean += m;
                mean /= static_cast<double>(user_means.size());
                double var = 0.0;
                for (double m : user_means) var += (m - mean) * (m - mean);
                var /= static_cast<double>(user_means.size() - 1);
                row.se_user = std::sqrt(var / static_cast<double>(user_means.size()));
            }
            row.user_scores = std::move(user_means);
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

FeedbackCurve feedback_response_curve(const EventLog& log,
                                      const std::vector<long>& bucket_lowers) {
    if (bucket_lowers.empty() || bucket_lowers.front() != 0)
        throw std::invalid_argument("feedback_response_curve: buckets must start at 0");
    for (std::size_t i = 1; i < bucket_lowers.size(); ++i)
        if (bucket_lowers[i] <= bucket_lowers[i - 1])
            throw std::invalid_argument("feedback_response_curve: buckets must be increasing");

    FeedbackCurve curve;
    curve.bucket_lower = bucket_lowers;
    for (std::size_t i = 0; i < bucket_lowers.size(); ++i) {
        const long lo = bucket_lowers[i];
        if (i + 1 < bucket_lowers.size()) {
            const long hi = bucket_lowers[i + 1] - 1;
            curve.bucket_labels.push_back(lo == hi ? std::to_string(lo)
                                                   : std::to_string(lo) + "-" +
                                                         std::to_string(hi));
        } else {
            curve.bucket_labels.push_back(std::to_string(lo) + "+");
        }
    }

    std::vector<long> returns(bucket_lowers.size(), 0);
    std::vector<long> totals(bucket_lowers.size(), 0);
    for (const auto& [user, recs] : log.by_user()) {
        for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
            std::size_t b = 0;
            while (b + 1 < bucket_lowers.size() && recs[i]->replies >= bucket_lowers[b + 1]) ++b;
            ++totals[b];
            if (recs[i + 1]->community == recs[i]->community) ++returns[b];
        }
    }

    curve.n_transitions = totals;
    const double base =
        totals[0] > 0 ? static_cast<double>(returns[0]) / static_cast<double>(totals[0]) : 0.0;
    for (std::size_t b = 0; b < totals.size(); ++b) {
        if (totals[b] == 0 || base <= 0.0)
            curve.relative_increase.push_back(std::nullopt);
        else
            curve.relative_increase.push_back(
                (static_cast<double>(returns[b]) / static_cast<double>(totals[b])) / base);
    }
    return curve;
}

}  // namespace proplab
