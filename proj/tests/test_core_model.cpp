#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "proplab/core.hpp"

using namespace proplab;

namespace {

PropensityState two_state(std::vector<double> q0) {
    return PropensityState::make({"a", "b"}, std::move(q0));
}

}  // namespace

TEST_CASE("reward: linear form with floor") {
    CHECK(reward({0, 0, 0, 0}, {3.0, -2.0}) == 0.0);
    CHECK(reward({1, 0.5, 0, 0}, {2.0, 4.0}) == doctest::Approx(4.0));
    CHECK(reward({1, 1, 0, 0.01}, {0.0, -5.0}) == doctest::Approx(0.01));
}

TEST_CASE("reward: invalid input") {
    CHECK_THROWS_AS(reward({1, 1, 0, 0}, {std::nan(""), 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(reward({1, 1, 0, 0},
                           {0.0, std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
    CHECK_THROWS_AS(reward({1, 1, 0, 0}, {-0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("choice_distribution: normalization") {
    auto s = PropensityState::make({"a"}, {1.0, 0.0});
    CHECK(choice_distribution(s)[0] == doctest::Approx(1.0));

    s = two_state({0.25, 0.75, 0.0});
    s.q = {1.0, 3.0, 0.0};
    auto p = choice_distribution(s);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.75));

    s = PropensityState::make({"a", "b", "c"}, {0.25, 0.25, 0.5, 0.0});
    s.q = {2.0, 2.0, 4.0, 0.0};
    p = choice_distribution(s);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[2] == doctest::Approx(0.5));
}

TEST_CASE("choice_distribution: degenerate state") {
    auto s = two_state({0.5, 0.5, 0.0});
    s.q = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(choice_distribution(s), std::domain_error);
}

TEST_CASE("choice_distribution: scale invariance and unit sum") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = two_state({0.3, 0.6, 0.1});
        s.q = {rng.uniform(), rng.uniform(), rng.uniform()};
        if (std::accumulate(s.q.begin(), s.q.end(), 0.0) <= 0.0) continue;
        auto p = choice_distribution(s);
        CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        const double c = 1.0 + 10.0 * rng.uniform();
        auto scaled = s;
        for (auto& v : scaled.q) v *= c;
        auto p2 = choice_distribution(scaled);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(p[i] == doctest::Approx(p2[i]).epsilon(1e-12));
    }
}

TEST_CASE("apply_update: worked examples") {
    auto s = two_state({0.5, 0.5, 0.0});
    s.q = {0.5, 0.5, 0.0};
    auto r = apply_update(s, 0, 0.0, {0.0, 0.0});
    CHECK(r.q[0] == doctest::Approx(0.5));
    CHECK(r.q[1] == doctest::Approx(0.5));

    r = apply_update(s, 0, 1.0, {0.0, 0.0});
    CHECK(r.q[0] == doctest::Approx(1.5));
    CHECK(r.q[1] == doctest::Approx(0.5));

    auto s2 = two_state({0.25, 0.75, 0.0});
    s2.q = {1.0, 1.0, 0.0};
    r = apply_update(s2, 0, 2.0, {0.5, 0.5});
    CHECK(r.q[0] == doctest::Approx(1.75));
    CHECK(r.q[1] == doctest::Approx(1.25));
    // q0 untouched
    CHECK(r.q0[0] == doctest::Approx(0.25));
}

TEST_CASE("apply_update: bad slot") {
    auto s = two_state({0.5, 0.5, 0.0});
    CHECK_THROWS_AS(apply_update(s, 7, 1.0, {}), std::out_of_range);
    CHECK_THROWS_AS(apply_update(s, -1, 1.0, {}), std::out_of_range);
}

TEST_CASE("apply_update: mass conservation, positivity, extremes") {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> q0 = rng.dirichlet({1.0, 1.0, 1.0, 1.0});
        auto s = PropensityState::make({"a", "b", "c"}, q0);
        for (auto& v : s.q) v = 3.0 * rng.uniform();
        const double before = std::accumulate(s.q.begin(), s.q.end(), 0.0);
        const LearningParams lp{rng.uniform(), rng.uniform()};
        const double rv = 2.0 * rng.uniform();
        const int chosen = static_cast<int>(rng.next_u64() % 4);
        auto r = apply_update(s, chosen, rv, lp);
        const double after = std::accumulate(r.q.begin(), r.q.end(), 0.0);
        CHECK(std::abs(after - ((1.0 - lp.phi) * before + rv)) < 1e-12);
        for (double v : r.q) CHECK(v >= 0.0);
    }

    // epsilon = 1: reward spreads proportionally to q0, chosen gets no extra
    auto s = two_state({0.25, 0.75, 0.0});
    s.q = {1.0, 1.0, 0.0};
    auto r = apply_update(s, 0, 2.0, {0.0, 1.0});
    CHECK(r.q[0] == doctest::Approx(1.0 + 2.0 * 0.25));
    CHECK(r.q[1] == doctest::Approx(1.0 + 2.0 * 0.75));

    // epsilon = 0: everything to the chosen slot
    r = apply_update(s, 1, 2.0, {0.0, 0.0});
    CHECK(r.q[0] == doctest::Approx(1.0));
    CHECK(r.q[1] == doctest::Approx(3.0));

    // phi = 1 forgets the prior state entirely
    auto a = two_state({0.25, 0.75, 0.0});
    a.q = {5.0, 7.0, 0.0};
    auto b = two_state({0.25, 0.75, 0.0});
    b.q = {0.1, 0.2, 0.0};
    auto ra = apply_update(a, 0, 1.5, {1.0, 0.3});
    auto rb = apply_update(b, 0, 1.5, {1.0, 0.3});
    for (std::size_t i = 0; i < ra.q.size(); ++i)
        CHECK(ra.q[i] == doctest::Approx(rb.q[i]).epsilon(1e-12));
}

TEST_CASE("grow_state: remainder split and conservation") {
    auto s = PropensityState::make({"a"}, {0.9, 0.1});
    s.q = {0.6, 0.2};
    auto g = grow_state(s, "b", 0.5);
    CHECK(g.communities.size() == 2);
    CHECK(g.q0[1] == doctest::Approx(0.05));
    CHECK(g.q0[2] == doctest::Approx(0.05));
    CHECK(g.q[1] == doctest::Approx(0.1));
    const double q0_total = std::accumulate(g.q0.begin(), g.q0.end(), 0.0);
    const double q_total = std::accumulate(g.q.begin(), g.q.end(), 0.0);
    CHECK(std::abs(q0_total - 1.0) < 1e-12);
    CHECK(std::abs(q_total - 0.8) < 1e-12);

    // zero remainder is legal: the new slot just gets zero mass
    auto z = PropensityState::make({"a"}, {1.0, 0.0});
    auto gz = grow_state(z, "b");
    CHECK(gz.q0[1] == 0.0);
    CHECK(gz.q[1] == 0.0);

    CHECK_THROWS_AS(grow_state(g, "a"), std::invalid_argument);
}

TEST_CASE("sample_trajectory: degenerate cases and determinism") {
    const LearningParams lp{0.1, 0.2};
    const RewardFunction rf{1.0, 0.5, 0.0, 0.0};
    const IndependentFeedback fb(1.0, 0.5, 1.0);

    {
        Rng rng(1);
        auto s = two_state({0.5, 0.5, 0.0});
        CHECK(sample_trajectory(s, lp, rf, 10.0, 0, fb, rng).empty());
    }
    {
        Rng rng(2);
        auto s = PropensityState::make({"only"}, {1.0, 0.0});
        auto t = sample_trajectory(s, lp, rf, 10.0, 40, fb, rng);
        for (const auto& a : t) CHECK(a.community == "only");
    }
    {
        Rng r1(77), r2(77);
        auto t1 = sample_trajectory(two_state({0.5, 0.5, 0.0}), lp, rf, 10.0, 60, fb, r1);
        auto t2 = sample_trajectory(two_state({0.5, 0.5, 0.0}), lp, rf, 10.0, 60, fb, r2);
        REQUIRE(t1.size() == t2.size());
        for (std::size_t i = 0; i < t1.size(); ++i) {
            CHECK(t1[i].community == t2[i].community);
            CHECK(t1[i].replies == t2[i].replies);
            CHECK(t1[i].score == t2[i].score);
            CHECK(t1[i].reward_value == t2[i].reward_value);
        }
    }
}

// Independent twin: same draw order, update math coded from scratch.
TEST_CASE("sample_trajectory: matches an independently coded simulator") {
    const LearningParams lp{0.15, 0.3};
    const RewardFunction rf{1.0, 0.5, 0.1, 0.0};
    const IndependentFeedback fb(1.5, 1.0, 2.0);
    const double cap = 10.0;
    const std::vector<double> q0{0.5, 0.3, 0.2};

    Rng r1(4242);
    auto produced = sample_trajectory(PropensityState::make({"a", "b"}, q0), lp, rf, cap, 200,
                                      fb, r1);

    Rng r2(4242);
    std::vector<std::string> names{"a", "b"};
    std::vector<double> init = q0;      // grows as unseen communities appear
    std::vector<double> props = q0;     // last entry is the unseen remainder
    int fresh = 0;
    for (int i = 0; i < 200; ++i) {
        int slot = r2.categorical(props);
        if (slot == static_cast<int>(props.size()) - 1) {
            names.push_back("x" + std::to_string(fresh++));
            const double move0 = init.back() * 0.5;
            const double move = props.back() * 0.5;
            init.back() -= move0;
            props.back() -= move;
            init.insert(init.end() - 1, move0);
            props.insert(props.end() - 1, move);
            slot = static_cast<int>(props.size()) - 2;
        }
        auto [replies, score] = fb.draw(r2, names[static_cast<std::size_t>(slot)], i);
        const double rew =
            std::max(rf.floor, rf.w_intercept +
                                   rf.w_replies * static_cast<double>(replies) / cap +
                                   rf.w_votes * static_cast<double>(score));
        for (auto& v : props) v *= (1.0 - lp.phi);
        props[static_cast<std::size_t>(slot)] += (1.0 - lp.epsilon) * rew;
        for (std::size_t k = 0; k < props.size(); ++k) props[k] += lp.epsilon * rew * init[k];

        CHECK(produced[static_cast<std::size_t>(i)].community ==
              names[static_cast<std::size_t>(slot)]);
        CHECK(produced[static_cast<std::size_t>(i)].reward_value == doctest::Approx(rew));
    }
}
