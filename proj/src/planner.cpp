#include "act/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "act/log.hpp"

namespace act {

std::size_t PlannerConfig::max_depth() const {
    if (!(delta > 0.0 && delta <= 1.0)) throw Error("planner: delta must lie in (0, 1]");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("planner: epsilon must lie in (0, 1)");
    if (delta == 1.0) throw Error("planner: delta = 1 gives an unbounded tree depth");
    std::size_t d = 0;
    double power = 1.0;
    while (!(power < epsilon)) {
        power *= delta;
        ++d;
    }
    return d;
}

SearchContext::SearchContext(const GenerativeModel& model, const PlannerConfig& config)
    : SearchContext(model, config, absorbing_states(model)) {}

SearchContext::SearchContext(const GenerativeModel& model, const PlannerConfig& config, std::vector<bool> absorbing)
    : model(model), config(config), max_depth(config.max_depth()), absorbing(std::move(absorbing)) {
    if (config.kappa_p < 0.0) throw Error("planner: kappa_p must be >= 0");
    if (config.max_simulations == 0) throw Error("planner: max_simulations must be >= 1");
}

bool SearchContext::absorbed(const Categorical& belief) const {
    double mass = 0.0;
    for (const auto& e : belief.support())
        if (absorbing[e.index]) mass += e.value;
    return mass > 1.0 - 1e-6;
}

SearchTree::SearchTree(const SearchContext& ctx, Categorical root_belief) {
    if (ctx.model.num_actions == 0) throw Error("planner: model has no actions");
    if (root_belief.size() != ctx.model.num_states) throw Error("planner: root belief does not match the model");
    TreeNode root;
    root.belief = std::move(root_belief);
    root.children.assign(ctx.model.num_actions, kNoNode);
    for (std::uint32_t u = 0; u < ctx.model.num_actions; ++u) root.unused_actions.push_back(u);
    nodes_.push_back(std::move(root));
    expandable_ = 1;
}

NodeId SearchTree::add_child(const SearchContext& ctx, NodeId parent, std::size_t action, Categorical belief) {
    const std::size_t depth = node(parent).depth + 1;
    TreeNode child;
    const bool absorbed = depth < ctx.max_depth && ctx.absorbed(belief);
    child.terminal = depth >= ctx.max_depth || absorbed;
    if (absorbed) ++absorbed_leaves_;
    child.belief = std::move(belief);
    child.incoming_action = action;
    child.depth = depth;
    child.parent = parent;
    child.children.assign(ctx.model.num_actions, kNoNode);
    if (!child.terminal) {
        for (std::uint32_t u = 0; u < ctx.model.num_actions; ++u) child.unused_actions.push_back(u);
        ++expandable_;
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(child));
    node(parent).children[action] = id;
    max_depth_reached_ = std::max(max_depth_reached_, depth);
    return id;
}

void SearchTree::mark_used(NodeId parent, std::size_t action) {
    auto& unused = node(parent).unused_actions;
    for (std::size_t i = 0; i < unused.size(); ++i)
        if (unused[i] == action) {
            unused[i] = unused.back();
            unused.pop_back();
            if (unused.empty()) --expandable_;
            return;
        }
    throw Error("planner: action already expanded");
}

namespace {

const std::vector<double>& action_bias(TreeNode& v, const SearchContext& ctx) {
    const auto& model = ctx.model;
    if (v.action_bias.empty() && (ctx.config.heuristic || model.habit_prior)) {
        v.action_bias.assign(model.num_actions, 1.0);
        for (std::size_t a = 0; a < model.num_actions; ++a) {
            if (ctx.config.heuristic) v.action_bias[a] *= std::max(0.0, ctx.config.heuristic(v.belief, a));
            if (model.habit_prior) v.action_bias[a] *= (*model.habit_prior)[a];
        }
    }
    return v.action_bias;
}

}  // namespace

Categorical child_distribution(SearchTree& tree, NodeId node, const SearchContext& ctx, Precision* precision_out) {
    auto& v = tree.node(node);
    const std::size_t n_actions = ctx.model.num_actions;
    const auto& bias = action_bias(v, ctx);

    std::vector<double> e(n_actions, 0.0);
    const double log_parent = std::log(static_cast<double>(std::max<std::size_t>(v.visit_count, 1)));
    double raw_total = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (v.children[a] == kNoNode) continue;
        const auto n = static_cast<double>(std::max<std::size_t>(tree.node(v.children[a]).visit_count, 1));
        e[a] = std::sqrt(2.0 * log_parent / n);
        raw_total += e[a];
    }
    // N(v) = 1 makes every component 0; fall back to a flat E.
    if (raw_total == 0.0)
        for (std::size_t a = 0; a < n_actions; ++a) e[a] = v.children[a] == kNoNode ? 0.0 : 1.0;
    double total = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (!bias.empty()) e[a] *= bias[a];
        total += e[a];
    }

    double weighted_g = 0.0, weight = 0.0, plain_g = 0.0;
    std::size_t expanded = 0;
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (v.children[a] == kNoNode) continue;
        const auto& c = tree.node(v.children[a]);
        weighted_g += static_cast<double>(c.visit_count) * c.quality;
        weight += static_cast<double>(c.visit_count);
        plain_g += c.quality;
        ++expanded;
    }
    if (expanded == 0) throw Error("planner: node has no expanded children");
    const double g = weight > 0.0 ? weighted_g / weight : plain_g / static_cast<double>(expanded);
    const Precision precision = precision_update(ctx.config.alpha, ctx.config.beta, g);
    if (precision_out) *precision_out = precision;

    std::vector<double> logits(n_actions, -std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < n_actions; ++a) {
        if (v.children[a] == kNoNode) continue;
        const double ln_e = total > 0.0 ? floored_log(e[a] / total) : -std::log(static_cast<double>(expanded));
        logits[a] = ctx.config.kappa_p * ln_e - precision.gamma * tree.node(v.children[a]).quality;
    }
    return softmax(logits);
}

NodeId expansion(SearchTree& tree, NodeId node, const SearchContext& ctx, Rng& rng) {
    const auto& unused = tree.node(node).unused_actions;
    if (unused.empty()) throw Error("planner: expansion of a fully expanded node");
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng);
    const std::size_t action = unused[pick];
    tree.mark_used(node, action);
    Categorical next = matvec(ctx.model.transition(action), tree.node(node).belief);
    return tree.add_child(ctx, node, action, std::move(next));
}

NodeId variational_inference(SearchTree& tree, NodeId node, const SearchContext& ctx, Rng& rng,
                             std::size_t* gamma_clamps) {
    Precision precision;
    const Categorical dist = child_distribution(tree, node, ctx, &precision);
    if (precision.clamped && gamma_clamps) ++*gamma_clamps;
    return tree.node(node).children[sample(dist, rng)];
}

NodeId tree_policy(SearchTree& tree, NodeId node, const SearchContext& ctx, Rng& rng, std::size_t* gamma_clamps) {
    NodeId v = node;
    while (!tree.node(v).terminal) {
        if (!tree.node(v).fully_expanded()) return expansion(tree, v, ctx, rng);
        v = variational_inference(tree, v, ctx, rng, gamma_clamps);
    }
    return v;
}

double predictive_efe(double efe, double delta, std::size_t depth) {
    return std::pow(delta, static_cast<double>(depth)) * efe;
}

double evaluate(SearchTree& tree, NodeId node, const SearchContext& ctx) {
    auto& v = tree.node(node);
    if (!v.incoming_action || v.parent == kNoNode) throw Error("planner: the root node has no EFE of its own");
    if (!v.efe) {
        const auto& parent = tree.node(v.parent);
        v.efe = transition_efe(ctx.model, parent.belief, v.belief, *v.incoming_action).total;
    }
    return predictive_efe(*v.efe, ctx.config.delta, v.depth);
}

void path_integration(SearchTree& tree, NodeId leaf, double g_delta) {
    for (NodeId v = leaf; v != tree.root(); v = tree.node(v).parent) {
        auto& n = tree.node(v);
        n.visit_count += 1;
        n.quality += (g_delta - n.quality) / static_cast<double>(n.visit_count);
    }
}

PlanResult plan(const GenerativeModel& model, const Categorical& root_belief, const PlannerConfig& config, Rng& rng) {
    SearchContext ctx(model, config);
    return plan(ctx, root_belief, rng);
}

PlanResult plan(const SearchContext& ctx, const Categorical& root_belief, Rng& rng) {
    SearchTree tree(ctx, root_belief);
    PlanResult result;
    std::size_t sims = 0;
    while (sims < ctx.config.max_simulations && !tree.complete()) {
        const NodeId leaf = tree_policy(tree, tree.root(), ctx, rng, &result.tree_stats.gamma_clamps);
        path_integration(tree, leaf, evaluate(tree, leaf, ctx));
        tree.node(tree.root()).visit_count += 1;
        if (ctx.config.record_rollouts) {
            Rollout path;
            for (NodeId v = leaf; v != tree.root(); v = tree.node(v).parent)
                path.push_back({tree.node(v).depth, tree.node(v).belief});
            std::reverse(path.begin(), path.end());
            result.rollout_snapshots.push_back(std::move(path));
        }
        ++sims;
    }

    result.root_action_distribution = child_distribution(tree, tree.root(), ctx);
    const auto& root = tree.node(tree.root());
    switch (ctx.config.final_action) {
        case FinalAction::Argmax: result.chosen_action = result.root_action_distribution.argmax(); break;
        case FinalAction::Sample: result.chosen_action = sample(result.root_action_distribution, rng); break;
        case FinalAction::MinEfe: {
            std::optional<std::size_t> best;
            for (std::size_t a = 0; a < ctx.model.num_actions; ++a) {
                if (root.children[a] == kNoNode) continue;
                if (!best || tree.node(root.children[a]).quality < tree.node(root.children[*best]).quality) best = a;
            }
            result.chosen_action = *best;
            break;
        }
    }
    result.child_quality.assign(ctx.model.num_actions, 0.0);
    result.child_visits.assign(ctx.model.num_actions, 0);
    for (std::size_t a = 0; a < ctx.model.num_actions; ++a) {
        if (root.children[a] == kNoNode) continue;
        result.child_quality[a] = tree.node(root.children[a]).quality;
        result.child_visits[a] = tree.node(root.children[a]).visit_count;
    }
    result.tree_stats.node_count = tree.size();
    result.tree_stats.max_depth_reached = tree.max_depth_reached();
    result.tree_stats.simulations = sims;
    return result;
}

PlanResult fe_plan(const GenerativeModel& model, const Categorical& root_belief, PlannerConfig config, Rng& rng) {
    config.kappa_p = 0.0;
    return plan(model, root_belief, config, rng);
}

EpisodeTrace act_episode(const GenerativeModel& model, GenerativeProcess& process, const PlannerConfig& config,
                         Rng& rng, std::size_t step_limit) {
    const SearchContext ctx(model, config);
    EpisodeTrace trace;
    trace.final_state = process.state();
    trace.final_belief = model.initial_belief;
    if (process.terminal()) {
        trace.terminated = true;
        return trace;
    }

    std::size_t observation = process.initial_observation(rng);
    Categorical belief;
    try {
        belief = condition(model, model.initial_belief, 0, observation);
    } catch (const ImpossibleObservation&) {
        log(LogLevel::Warn, "initial observation ", observation, " impossible under D; keeping D");
        belief = model.initial_belief;
        ++trace.belief_resets;
    }

    for (std::size_t t = 0; t < step_limit; ++t) {
        PlanResult result = plan(ctx, belief, rng);
        StepRecord record;
        record.state = process.state();
        record.observation = observation;
        record.action = result.chosen_action;
        record.belief = belief;
        record.tree_stats = result.tree_stats;
        record.rollouts = std::move(result.rollout_snapshots);

        const StepOutcome out = process.step(result.chosen_action, rng);
        record.reward = out.reward;
        trace.steps.push_back(std::move(record));

        observation = out.observation;
        try {
            belief = belief_update(model, belief, result.chosen_action, observation);
        } catch (const ImpossibleObservation&) {
            log(LogLevel::Warn, "step ", t, ": observation ", observation, " impossible under the prediction; resetting belief to D");
            belief = model.initial_belief;
            ++trace.belief_resets;
        }
        if (out.terminal) {
            trace.terminated = true;
            break;
        }
    }
    trace.final_state = process.state();
    trace.final_belief = belief;
    return trace;
}

}  // namespace act
