#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "act/efe.hpp"
#include "act/environments.hpp"
#include "test_support.hpp"

using namespace act;
using doctest::Approx;

namespace {

GenerativeModel identity_model(const Categorical& c) {
    GenerativeModel m;
    m.num_states = m.num_obs = c.size();
    m.num_actions = 1;
    m.set_shared_likelihood(StochasticMatrix::identity(c.size()));
    m.transitions = {StochasticMatrix::identity(c.size())};
    m.set_preferences(c);
    m.initial_belief = Categorical::uniform(c.size());
    return m;
}

}  // namespace

TEST_CASE("belief update examples") {
    const auto m = identity_model(Categorical{0.5, 0.5});
    auto post = belief_update(m, Categorical{1, 0}, 0, 0);
    CHECK(post[0] == 1.0);
    post = belief_update(m, Categorical{0.5, 0.5}, 0, 1);
    CHECK(post[0] < 1e-10);
    CHECK(post[1] == Approx(1.0));
    CHECK_THROWS_AS(belief_update(m, Categorical{1, 0}, 0, 1), ImpossibleObservation);
}

TEST_CASE("tiger cue gives a 0.9 / 0.1 posterior over contexts") {
    const auto tiger_env = build_tiger_tmaze({});
    const auto& m = *tiger_env.model;
    std::vector<Entry> prior{{static_cast<std::uint32_t>(tiger::state(tiger::kLower, 0)), 0.5},
                             {static_cast<std::uint32_t>(tiger::state(tiger::kLower, 1)), 0.5}};
    const auto x = Categorical::from_entries(8, prior);
    const auto post = belief_update(m, x, tiger::kLower, tiger::obs(tiger::kLower, tiger::kCue0));
    CHECK(std::abs(post[tiger::state(tiger::kLower, 0)] - 0.9) <= 1e-6);
    CHECK(std::abs(post[tiger::state(tiger::kLower, 1)] - 0.1) <= 1e-6);
}

TEST_CASE("belief update matches unnormalized Bayes") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        auto r = testing::random_model(rng, 5, 5, 3);
        const auto& m = r.model;
        const auto prior = testing::random_distribution(m.num_states, rng, 0.2);
        const std::size_t u = std::uniform_int_distribution<std::size_t>(0, m.num_actions - 1)(rng);
        const auto pred = testing::dense_matvec(r.b[u], prior);
        const auto p_obs = testing::dense_matvec(r.a[u], pred);
        const std::size_t o = static_cast<std::size_t>(std::max_element(p_obs.begin(), p_obs.end()) - p_obs.begin());
        const auto want = testing::brute_force_update(r.a[u], r.b[u], prior, o);
        const auto got = belief_update(m, Categorical(prior), u, o);
        for (std::size_t s = 0; s < m.num_states; ++s) CHECK(std::abs(got[s] - want[s]) <= 1e-6);
    }
}

TEST_CASE("predict examples") {
    const auto m = identity_model(Categorical{0.5, 0.5});
    const auto p = predict(m, Categorical{0.3, 0.7}, 0);
    CHECK(p.next_belief[1] == Approx(0.7));
    CHECK(p.predicted_obs[1] == Approx(0.7));

    const auto trap = build_binary_trap({3});
    const auto leaf = predict(*trap.model, Categorical::point(7, 4), 0);
    CHECK(leaf.next_belief[4] == 1.0);
}

TEST_CASE("predict on RockSample(2,1): going east from the start cell") {
    RockSampleSpec spec;
    spec.n = 2;
    spec.k = 1;
    spec.rocks = {{1, 0}};
    spec.d0 = 1.0;
    const auto env = build_rocksample(spec);
    const RockSampleLayout layout(spec);
    const auto p = predict(*env.model, env.model->initial_belief, 3);
    // Top-left (states 4, 5) moves to top-right (states 6, 7).
    CHECK(p.next_belief[6] == Approx(0.5));
    CHECK(p.next_belief[7] == Approx(0.5));
    // East again leaves the grid through the exit.
    const auto q = predict(*env.model, p.next_belief, 3);
    CHECK(q.next_belief[layout.exit_state(0)] == Approx(0.5));
    CHECK(q.next_belief[layout.exit_state(1)] == Approx(0.5));
}

TEST_CASE("expected free energy examples") {
    auto e = expected_free_energy(identity_model(Categorical{0.5, 0.5}), Categorical{0.5, 0.5}, 0);
    CHECK(e.risk == Approx(0.0));
    CHECK(e.ambiguity == Approx(0.0));
    CHECK(e.total == Approx(0.0));

    e = expected_free_energy(identity_model(Categorical{0.75, 0.25}), Categorical{0.25, 0.75}, 0);
    CHECK(e.risk == Approx(0.549306).epsilon(1e-6));
    CHECK(e.ambiguity == 0.0);
    CHECK(std::abs(e.total - (e.risk + e.ambiguity)) <= 1e-12);
}

TEST_CASE("expected free energy matches the brute-force sum") {
    Rng rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        auto r = testing::random_model(rng, 6, 5, 4);
        const auto x = testing::random_distribution(r.model.num_states, rng, 0.2);
        for (std::size_t u = 0; u < r.model.num_actions; ++u) {
            const auto e = expected_free_energy(r.model, Categorical(x), u);
            CHECK(std::abs(e.total - testing::brute_force_efe(r.a[u], r.c, x)) <= 1e-9);
            CHECK(e.risk >= 0.0);
            CHECK(e.ambiguity >= 0.0);
        }
    }
}

TEST_CASE("ambiguity vanishes for deterministic likelihoods") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        auto r = testing::random_model(rng, 6, 5, 1);
        std::vector<std::vector<Entry>> cols(r.model.num_states);
        for (auto& col : cols)
            col.push_back({static_cast<std::uint32_t>(
                               std::uniform_int_distribution<std::size_t>(0, r.model.num_obs - 1)(rng)),
                           1.0});
        r.model.set_shared_likelihood(StochasticMatrix::from_columns(r.model.num_obs, cols));
        const auto x = testing::random_distribution(r.model.num_states, rng);
        CHECK(expected_free_energy(r.model, Categorical(x), 0).ambiguity == 0.0);
    }
}

TEST_CASE("risk is zero when predicted outcomes equal the preferences") {
    Rng rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        auto r = testing::random_model(rng, 6, 5, 1);
        const auto x = testing::random_distribution(r.model.num_states, rng);
        const auto p = testing::dense_matvec(r.a[0], x);
        r.model.set_preferences(Categorical::normalize(p));
        CHECK(std::abs(expected_free_energy(r.model, Categorical(x), 0).risk) <= 1e-12);
    }
}

TEST_CASE("expected free energy is invariant under relabeling") {
    Rng rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        auto r = testing::random_model(rng, 6, 5, 1);
        const std::size_t S = r.model.num_states, O = r.model.num_obs;
        std::vector<std::size_t> ps(S), po(O);
        std::iota(ps.begin(), ps.end(), 0);
        std::iota(po.begin(), po.end(), 0);
        std::shuffle(ps.begin(), ps.end(), rng);
        std::shuffle(po.begin(), po.end(), rng);
        std::vector<std::vector<double>> a(O, std::vector<double>(S));
        std::vector<double> c(O), x(S);
        const auto x0 = testing::random_distribution(S, rng);
        for (std::size_t o = 0; o < O; ++o) {
            c[po[o]] = r.c[o];
            for (std::size_t s = 0; s < S; ++s) a[po[o]][ps[s]] = r.a[0][o][s];
        }
        for (std::size_t s = 0; s < S; ++s) x[ps[s]] = x0[s];
        GenerativeModel permuted = r.model;
        permuted.set_shared_likelihood(StochasticMatrix::from_dense(a));
        permuted.set_preferences(Categorical(c));
        const double g0 = expected_free_energy(r.model, Categorical(x0), 0).total;
        const double g1 = expected_free_energy(permuted, Categorical(x), 0).total;
        CHECK(std::abs(g0 - g1) <= 1e-12);
    }
}

TEST_CASE("precision update") {
    auto p = precision_update(1, 1, 0);
    CHECK(p.gamma == 1.0);
    CHECK(!p.clamped);
    p = precision_update(1, 1, -1);
    CHECK(p.gamma == 0.5);
    p = precision_update(1, 1, 1);
    CHECK(p.gamma == GAMMA_MAX);
    CHECK(p.clamped);
    double last = 0.0;
    for (double g = -5.0; g < 0.99; g += 0.25) {
        const double gamma = precision_update(1, 1, g).gamma;
        CHECK(gamma > last);
        last = gamma;
    }
}

TEST_CASE("source-observed actions condition before the transition") {
    RockSampleSpec spec;
    spec.n = 2;
    spec.k = 1;
    spec.rocks = {{0, 1}};
    spec.d0 = 1.0;
    const auto env = build_rocksample(spec);
    const RockSampleLayout layout(spec);
    const auto& m = *env.model;
    const std::size_t sample = layout.sample_action();
    // At the start cell, which holds the rock: a reward observation says the rock was good.
    const std::size_t reward_obs = layout.observation(layout.location(layout.grid_state({0, 1}, 1)), 1, false);
    const auto post = belief_update(m, m.initial_belief, sample, reward_obs);
    CHECK(post[layout.grid_state({0, 1}, 0)] == Approx(1.0));
    const auto e = transition_efe(m, m.initial_belief, matvec(m.transition(sample), m.initial_belief), sample);
    CHECK(e.total == Approx(expected_free_energy(m, m.initial_belief, sample).total));
}

TEST_CASE("efe upper bound is the worst point belief") {
    Rng rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        auto r = testing::random_model(rng, 6, 5, 3);
        double worst = 0.0;
        for (std::size_t u = 0; u < r.model.num_actions; ++u)
            for (std::size_t s = 0; s < r.model.num_states; ++s) {
                std::vector<double> x(r.model.num_states, 0.0);
                x[s] = 1.0;
                worst = std::max(worst, testing::brute_force_efe(r.a[u], r.c, x));
            }
        const double bound = efe_upper_bound(r.model);
        CHECK(std::abs(bound - worst) <= 1e-9);
        for (int k = 0; k < 20; ++k) {
            const auto x = testing::random_distribution(r.model.num_states, rng, 0.3);
            for (std::size_t u = 0; u < r.model.num_actions; ++u)
                CHECK(expected_free_energy(r.model, Categorical(x), u).total <= bound + 1e-9);
        }
        const double beta = suggested_beta(r.model);
        CHECK(beta > bound);
        CHECK(beta - bound <= 0.5);
        CHECK(std::fmod(beta, 0.5) == 0.0);
    }
}

TEST_CASE("suggested beta on the binary trap") {
    const auto env = build_binary_trap({10});
    // Worst leaf: the level-1 trap with reward 0.
    CHECK(suggested_beta(*env.model) == 3.5);
}
