#include <doctest.h>

#include <cmath>

#include "act/environments.hpp"
#include "act/planner.hpp"
#include "test_support.hpp"

using namespace act;
using doctest::Approx;

namespace {

/// States {start, a, b}; action u moves every state to state u + 1.
GenerativeModel fork_model(std::size_t actions, const Categorical& c) {
    GenerativeModel m;
    m.num_states = actions + 1;
    m.num_obs = actions + 1;
    m.num_actions = actions;
    m.set_shared_likelihood(StochasticMatrix::identity(m.num_states));
    for (std::size_t u = 0; u < actions; ++u) {
        std::vector<std::vector<Entry>> cols(m.num_states, {{static_cast<std::uint32_t>(u + 1), 1.0}});
        m.transitions.push_back(StochasticMatrix::from_columns(m.num_states, cols));
    }
    m.set_preferences(c);
    m.initial_belief = Categorical::point(m.num_states, 0);
    return m;
}

/// A identity, every action rotates the state by one; nothing is absorbing.
GenerativeModel cycle_model(std::size_t states, std::size_t actions) {
    GenerativeModel m;
    m.num_states = m.num_obs = states;
    m.num_actions = actions;
    m.set_shared_likelihood(StochasticMatrix::identity(states));
    std::vector<std::vector<Entry>> cols(states);
    for (std::size_t s = 0; s < states; ++s) cols[s].push_back({static_cast<std::uint32_t>((s + 1) % states), 1.0});
    for (std::size_t u = 0; u < actions; ++u) m.transitions.push_back(StochasticMatrix::from_columns(states, cols));
    m.set_preferences(Categorical::uniform(states));
    m.initial_belief = Categorical::point(states, 0);
    return m;
}

GenerativeModel identity_model(std::size_t states, std::size_t actions) {
    GenerativeModel m;
    m.num_states = m.num_obs = states;
    m.num_actions = actions;
    m.set_shared_likelihood(StochasticMatrix::identity(states));
    for (std::size_t u = 0; u < actions; ++u) m.transitions.push_back(StochasticMatrix::identity(states));
    m.set_preferences(Categorical::uniform(states));
    m.initial_belief = Categorical::uniform(states);
    return m;
}

bool same_result(const PlanResult& a, const PlanResult& b) {
    return a.chosen_action == b.chosen_action &&
           a.root_action_distribution.dense() == b.root_action_distribution.dense() &&
           a.child_quality == b.child_quality && a.child_visits == b.child_visits &&
           a.tree_stats.node_count == b.tree_stats.node_count &&
           a.tree_stats.max_depth_reached == b.tree_stats.max_depth_reached &&
           a.tree_stats.simulations == b.tree_stats.simulations;
}

}  // namespace

TEST_CASE("max depth from the discount horizon") {
    PlannerConfig c;
    CHECK(c.max_depth() == 18);
    CHECK(std::pow(0.95, 18) < 0.4);
    CHECK(std::pow(0.95, 17) >= 0.4);
    c.delta = 0.9;
    c.epsilon = 0.5;
    CHECK(c.max_depth() == 7);
    c.delta = 1.0;
    CHECK_THROWS_AS(c.max_depth(), Error);
    c.delta = 0.9;
    c.epsilon = 1.5;
    CHECK_THROWS_AS(c.max_depth(), Error);
}

TEST_CASE("predictive EFE") {
    CHECK(predictive_efe(2.5, 0.95, 0) == 2.5);
    CHECK(predictive_efe(1.0, 0.95, 18) == Approx(0.397214).epsilon(1e-6));
    CHECK(predictive_efe(0.0, 0.95, 7) == 0.0);
}

TEST_CASE("path integration keeps running means") {
    const auto m = identity_model(2, 1);
    PlannerConfig cfg;
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, m.initial_belief);
    const NodeId child = tree.add_child(ctx, tree.root(), 0, m.initial_belief);
    path_integration(tree, child, 4.0);
    CHECK(tree.node(child).visit_count == 1);
    CHECK(tree.node(child).quality == 4.0);
    path_integration(tree, child, 2.0);
    CHECK(tree.node(child).visit_count == 2);
    CHECK(tree.node(child).quality == 3.0);
    CHECK(tree.node(tree.root()).visit_count == 0);

    const NodeId grandchild = tree.add_child(ctx, child, 0, m.initial_belief);
    for (double g : {1.0, 2.0, 3.0, 4.0, 5.0}) path_integration(tree, grandchild, g);
    CHECK(std::abs(tree.node(grandchild).quality - 3.0) <= 1e-12);
    CHECK(tree.node(child).visit_count == 7);
    CHECK(tree.node(grandchild).depth == tree.node(child).depth + 1);
}

TEST_CASE("evaluate discounts the node's own EFE") {
    const auto m = fork_model(2, Categorical{0.1, 0.2, 0.7});
    PlannerConfig cfg;
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, m.initial_belief);
    CHECK_THROWS_AS(evaluate(tree, tree.root(), ctx), Error);
    const NodeId a = tree.add_child(ctx, tree.root(), 1, matvec(m.transition(1), m.initial_belief));
    const NodeId b = tree.add_child(ctx, a, 0, matvec(m.transition(0), tree.node(a).belief));
    const double efe_b = expected_free_energy(m, tree.node(b).belief, 0).total;
    CHECK(evaluate(tree, b, ctx) == Approx(0.95 * 0.95 * efe_b));
    CHECK(evaluate(tree, a, ctx) == Approx(0.95 * -std::log(0.7)));
}

TEST_CASE("single-action model") {
    const auto m = identity_model(3, 1);
    PlannerConfig cfg;
    cfg.max_simulations = 20;
    Rng rng(1);
    const auto r = plan(m, m.initial_belief, cfg, rng);
    CHECK(r.chosen_action == 0);
    CHECK(r.root_action_distribution.size() == 1);
    CHECK(r.root_action_distribution[0] == 1.0);
}

TEST_CASE("plan picks the action whose outcome is preferred") {
    const Categorical c{0.05, 0.05, 0.9};
    const auto m = fork_model(2, c);
    // Oracle: along any path the visited states are {1} for action 0 and {2}
    // for action 1 at depth 1; EFE of a point mass on s is -ln C_s.
    CHECK(-std::log(0.9) < -std::log(0.05));
    PlannerConfig cfg;
    cfg.max_simulations = 60;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        CHECK(plan(m, m.initial_belief, cfg, rng).chosen_action == 1);
    }
}

TEST_CASE("tree policy expands before it selects") {
    const auto m = cycle_model(3, 3);
    PlannerConfig cfg;
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, m.initial_belief);
    Rng rng(3);
    for (int i = 0; i < 3; ++i) {
        const NodeId v = tree_policy(tree, tree.root(), ctx, rng);
        CHECK(tree.node(v).depth == 1);
        path_integration(tree, v, evaluate(tree, v, ctx));
        tree.node(tree.root()).visit_count += 1;
    }
    CHECK(tree.node(tree.root()).fully_expanded());
    for (auto c : tree.node(tree.root()).children) CHECK(c != kNoNode);
    const NodeId deeper = tree_policy(tree, tree.root(), ctx, rng);
    CHECK(tree.node(deeper).depth == 2);
}

TEST_CASE("tree policy returns terminal nodes as they are") {
    const auto m = identity_model(2, 2);
    PlannerConfig cfg;
    cfg.delta = 0.5;
    cfg.epsilon = 0.6;  // max depth 1
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, m.initial_belief);
    const NodeId leaf = tree.add_child(ctx, tree.root(), 0, m.initial_belief);
    CHECK(tree.node(leaf).terminal);
    Rng rng(4);
    CHECK(tree_policy(tree, leaf, ctx, rng) == leaf);
}

TEST_CASE("variational inference with symmetric children is uniform") {
    const auto m = identity_model(2, 2);
    PlannerConfig cfg;
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, m.initial_belief);
    for (std::size_t u = 0; u < 2; ++u) {
        const NodeId c = tree.add_child(ctx, tree.root(), u, m.initial_belief);
        tree.mark_used(tree.root(), u);
        tree.node(c).visit_count = 5;
        tree.node(c).quality = 0.3;
    }
    tree.node(tree.root()).visit_count = 10;
    Rng rng(5);
    std::size_t first = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (variational_inference(tree, tree.root(), ctx, rng) == tree.node(tree.root()).children[0]) ++first;
    CHECK(std::abs(static_cast<double>(first) / draws - 0.5) <= 0.02);
}

TEST_CASE("child distribution and the exploration factor") {
    const auto m = identity_model(2, 2);
    PlannerConfig cfg;
    const SearchContext ctx0(m, cfg);
    SearchTree tree(ctx0, m.initial_belief);
    const std::size_t visits[2] = {9, 1};
    for (std::size_t u = 0; u < 2; ++u) {
        const NodeId c = tree.add_child(ctx0, tree.root(), u, m.initial_belief);
        tree.mark_used(tree.root(), u);
        tree.node(c).visit_count = visits[u];
        tree.node(c).quality = -0.5;
    }
    tree.node(tree.root()).visit_count = 10;

    cfg.kappa_p = 5.0;
    const SearchContext ctx(m, cfg);
    const auto dist = child_distribution(tree, tree.root(), ctx);
    const double e0 = std::sqrt(2 * std::log(10.0) / 9), e1 = std::sqrt(2 * std::log(10.0) / 1);
    const double want1 = std::pow(e1, 5) / (std::pow(e0, 5) + std::pow(e1, 5));
    CHECK(dist[1] > 0.5);
    CHECK(dist[1] == Approx(want1));

    cfg.kappa_p = 0.0;
    const SearchContext fe(m, cfg);
    Precision p;
    const auto flat = child_distribution(tree, tree.root(), fe, &p);
    CHECK(flat[0] == Approx(0.5));
    CHECK(p.gamma == Approx(1.0 / 1.5));
    tree.node(tree.node(tree.root()).children[0]).quality = -1.0;
    const auto tilted = child_distribution(tree, tree.root(), fe, &p);
    const double g = (9 * -1.0 + 1 * -0.5) / 10.0;
    const double gamma = 1.0 / (1.0 - g);
    CHECK(p.gamma == Approx(gamma));
    CHECK(tilted[0] == Approx(std::exp(gamma * 1.0) / (std::exp(gamma * 1.0) + std::exp(gamma * 0.5))));
}

TEST_CASE("heuristic and habit prior multiply into E") {
    auto m = identity_model(2, 2);
    m.habit_prior = Categorical{0.25, 0.75};
    PlannerConfig cfg;
    cfg.heuristic = [](const Categorical&, std::size_t a) { return a == 0 ? 6.0 : 1.0; };
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, m.initial_belief);
    for (std::size_t u = 0; u < 2; ++u) {
        const NodeId c = tree.add_child(ctx, tree.root(), u, m.initial_belief);
        tree.mark_used(tree.root(), u);
        tree.node(c).visit_count = 4;
        tree.node(c).quality = 0.0;
    }
    tree.node(tree.root()).visit_count = 8;
    const auto dist = child_distribution(tree, tree.root(), ctx);
    // E ~ (6 * 0.25, 1 * 0.75) = (2 : 1).
    CHECK(dist[0] == Approx(2.0 / 3.0));
}

TEST_CASE("expansion applies the transition") {
    const auto m = identity_model(3, 2);
    PlannerConfig cfg;
    const SearchContext ctx(m, cfg);
    SearchTree tree(ctx, Categorical{0.2, 0.3, 0.5});
    Rng rng(6);
    const NodeId c = expansion(tree, tree.root(), ctx, rng);
    CHECK(tree.node(c).belief.dense() == tree.node(tree.root()).belief.dense());
    CHECK(tree.node(c).visit_count == 0);
    CHECK(tree.node(c).quality == 0.0);
    CHECK(tree.node(tree.root()).unused_actions.size() == 1);

    RockSampleSpec spec;
    spec.n = 2;
    spec.k = 1;
    spec.rocks = {{1, 0}};
    spec.d0 = 1.0;
    const auto env = build_rocksample(spec);
    const SearchContext rctx(*env.model, cfg);
    SearchTree rtree(rctx, Categorical::point(11, 4));
    NodeId east = kNoNode;
    while (east == kNoNode) {
        const NodeId v = expansion(rtree, rtree.root(), rctx, rng);
        if (*rtree.node(v).incoming_action == 3) east = v;
    }
    CHECK(rtree.node(east).belief[6] == 1.0);

    const auto trap = build_binary_trap({2});
    const SearchContext tctx(*trap.model, cfg);
    SearchTree ttree(tctx, Categorical::point(5, 3));
    for (int i = 0; i < 2; ++i) {
        const NodeId v = expansion(ttree, ttree.root(), tctx, rng);
        CHECK(ttree.node(v).belief[3] == 1.0);
        CHECK(ttree.node(v).terminal);
    }
}

TEST_CASE("structural invariants on random models") {
    Rng models(50);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = testing::random_model(models, 5, 4, 3);
        PlannerConfig cfg;
        cfg.delta = 0.8;
        cfg.epsilon = 0.3;
        const SearchContext ctx(r.model, cfg);
        SearchTree tree(ctx, r.model.initial_belief);
        Rng rng(trial);
        const auto shadow = testing::shadow_simulations(tree, ctx, rng, 500);
        CHECK(shadow.depth_violations == 0);
        CHECK(tree.max_depth_reached() <= ctx.max_depth);
        double bound = 0.0;
        for (std::size_t d = 0; d <= ctx.max_depth; ++d) bound += std::pow(r.model.num_actions, d);
        CHECK(static_cast<double>(tree.size()) <= bound);
        for (NodeId v = 1; v < tree.size(); ++v) {
            const auto& n = tree.node(v);
            CHECK(n.visit_count == shadow.counts[v]);
            CHECK(std::abs(n.quality - shadow.sums[v] / static_cast<double>(shadow.counts[v])) <= 1e-9);
            CHECK(tree.node(n.parent).depth + 1 == n.depth);
            if (n.parent != tree.root()) CHECK(tree.node(n.parent).visit_count >= n.visit_count);
        }
    }
}

TEST_CASE("FE equals AcT with kappa_p = 0, and planning is deterministic") {
    Rng models(60);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = testing::random_model(models, 5, 4, 3);
        PlannerConfig cfg;
        cfg.max_simulations = 300;
        cfg.final_action = FinalAction::Sample;
        Rng a(trial), b(trial);
        const auto fe = fe_plan(r.model, r.model.initial_belief, cfg, a);
        cfg.kappa_p = 0.0;
        const auto act0 = plan(r.model, r.model.initial_belief, cfg, b);
        CHECK(same_result(fe, act0));
        cfg.kappa_p = 1.0;
        Rng c(trial + 100), d(trial + 100);
        CHECK(same_result(plan(r.model, r.model.initial_belief, cfg, c), plan(r.model, r.model.initial_belief, cfg, d)));
    }
}

TEST_CASE("plan stops when the tree is exhausted") {
    const auto m = cycle_model(3, 2);
    PlannerConfig cfg;
    cfg.delta = 0.5;
    cfg.epsilon = 0.3;  // max depth 2
    cfg.max_simulations = 1000;
    Rng rng(8);
    const auto r = plan(m, m.initial_belief, cfg, rng);
    CHECK(r.tree_stats.node_count == 7);
    CHECK(r.tree_stats.simulations == 6);
    CHECK(r.tree_stats.max_depth_reached == 2);
}

TEST_CASE("absorbing leaves keep the budget running") {
    const auto trap = build_binary_trap({2});
    PlannerConfig cfg;
    cfg.max_simulations = 300;
    Rng rng(9);
    const auto r = plan(*trap.model, trap.model->initial_belief, cfg, rng);
    CHECK(r.tree_stats.simulations == 300);
    CHECK(r.tree_stats.node_count <= 5);
}

TEST_CASE("episodes") {
    SUBCASE("terminal at start") {
        const auto trap = build_binary_trap({2});
        auto model = trap.model;
        ModelProcess process(model, 4, trap.reward, trap.terminal);
        Rng rng(1);
        const auto trace = act_episode(*model, process, PlannerConfig{}, rng);
        CHECK(trace.steps.empty());
        CHECK(trace.terminated);
    }
    SUBCASE("forced chain") {
        auto m = std::make_shared<GenerativeModel>();
        m->num_states = m->num_obs = 3;
        m->num_actions = 1;
        m->set_shared_likelihood(StochasticMatrix::identity(3));
        m->transitions = {StochasticMatrix::from_dense({{0, 0, 0}, {1, 0, 0}, {0, 1, 1}})};
        m->set_preferences(Categorical::uniform(3));
        m->initial_belief = Categorical::point(3, 0);
        ModelProcess process(m, 0, nullptr, [](std::size_t s) { return s == 2; });
        Rng rng(2);
        PlannerConfig cfg;
        cfg.max_simulations = 10;
        const auto trace = act_episode(*m, process, cfg, rng);
        REQUIRE(trace.steps.size() == 2);
        CHECK(trace.steps[0].state == 0);
        CHECK(trace.steps[1].state == 1);
        CHECK(trace.final_state == 2);
        CHECK(trace.final_belief[2] == 1.0);
    }
    SUBCASE("impossible observations reset the belief to D") {
        // The agent believes action 0 keeps it in place; the world moves it.
        auto world = std::make_shared<GenerativeModel>();
        world->num_states = world->num_obs = 2;
        world->num_actions = 1;
        world->set_shared_likelihood(StochasticMatrix::identity(2));
        world->transitions = {StochasticMatrix::from_dense({{0, 0}, {1, 1}})};
        world->set_preferences(Categorical::uniform(2));
        world->initial_belief = Categorical::point(2, 0);
        GenerativeModel agent = *world;
        agent.transitions = {StochasticMatrix::identity(2)};
        ModelProcess process(world, 0, nullptr, nullptr);
        Rng rng(3);
        PlannerConfig cfg;
        cfg.max_simulations = 5;
        const auto trace = act_episode(agent, process, cfg, rng, 2);
        CHECK(trace.steps.size() == 2);
        CHECK(trace.belief_resets >= 1);
    }
}
