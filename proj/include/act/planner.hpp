#pragma once

// Active Inference Tree Search: a planning tree whose nodes hold predicted
// beliefs x' = B(u) x (no observation branching). Each simulation runs
//   tree_policy   -> descend by variational_inference, then expansion
//   evaluate      -> G_delta = delta^depth * EFE(node)
//   path_integration -> running-mean update of G along the path
// and the root action distribution is softmax(kappa_p ln E - gamma G).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "act/belief.hpp"
#include "act/efe.hpp"
#include "act/model.hpp"
#include "act/random.hpp"

namespace act {

/// Nonnegative bias multiplied into E for `action` at a node holding `belief`.
using HeuristicFn = std::function<double(const Categorical& belief, std::size_t action)>;

/// Argmax and Sample read the root action distribution; MinEfe takes the
/// expanded root child with the smallest G (ties to the lower index).
enum class FinalAction { Argmax, Sample, MinEfe };

struct PlannerConfig {
    double delta = 0.95;    // discount
    double epsilon = 0.4;   // discount horizon: max depth = min{d : delta^d < epsilon}
    double kappa_p = 1.0;   // exploration factor
    double alpha = 1.0;
    double beta = 1.0;
    std::size_t max_simulations = 1000;
    std::uint64_t rng_seed = 0;
    HeuristicFn heuristic;
    FinalAction final_action = FinalAction::Argmax;
    bool record_rollouts = false;

    /// Throws Error when delta^d never drops below epsilon.
    std::size_t max_depth() const;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

struct TreeNode {
    Categorical belief;
    std::optional<std::size_t> incoming_action;
    std::size_t visit_count = 0;
    double quality = 0.0;            // running mean of integrated G_delta values
    std::vector<NodeId> children;    // per action; kNoNode when unexpanded
    std::size_t depth = 0;
    NodeId parent = kNoNode;
    std::vector<std::uint32_t> unused_actions;
    bool terminal = false;
    std::optional<double> efe;       // cached undiscounted EFE of this node
    std::vector<double> action_bias; // heuristic x habit factors, filled on first use

    bool fully_expanded() const { return unused_actions.empty(); }
};

/// Read-only inputs shared by every stage of one planning call.
struct SearchContext {
    SearchContext(const GenerativeModel& model, const PlannerConfig& config);
    SearchContext(const GenerativeModel& model, const PlannerConfig& config, std::vector<bool> absorbing);

    const GenerativeModel& model;
    const PlannerConfig& config;
    std::size_t max_depth;
    std::vector<bool> absorbing;

    /// More than 1 - 1e-6 of the mass sits on absorbing states.
    bool absorbed(const Categorical& belief) const;
};

class SearchTree {
public:
    SearchTree(const SearchContext& ctx, Categorical root_belief);

    NodeId root() const { return 0; }
    TreeNode& node(NodeId id) { return nodes_.at(id); }
    const TreeNode& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }
    std::size_t max_depth_reached() const { return max_depth_reached_; }
    /// No node can be expanded any further.
    bool exhausted() const { return expandable_ == 0; }
    /// Exhausted, and every leaf sits at the maximum depth. Trees closed off by
    /// absorbing beliefs never are: revisiting their leaves still moves G.
    bool complete() const { return expandable_ == 0 && absorbed_leaves_ == 0; }

    NodeId add_child(const SearchContext& ctx, NodeId parent, std::size_t action, Categorical belief);
    /// Removes `action` from the parent's unused list.
    void mark_used(NodeId parent, std::size_t action);

private:
    std::vector<TreeNode> nodes_;
    std::size_t expandable_ = 0;
    std::size_t absorbed_leaves_ = 0;
    std::size_t max_depth_reached_ = 0;
};

struct RolloutStep {
    std::size_t depth;
    Categorical belief;
};
using Rollout = std::vector<RolloutStep>;

struct TreeStats {
    std::size_t node_count = 0;
    std::size_t max_depth_reached = 0;
    std::size_t simulations = 0;
    std::size_t gamma_clamps = 0;
};

struct PlanResult {
    std::size_t chosen_action = 0;
    Categorical root_action_distribution;
    TreeStats tree_stats;
    std::vector<double> child_quality;        // per action (0 when unexpanded)
    std::vector<std::size_t> child_visits;    // per action
    std::vector<Rollout> rollout_snapshots;   // only with config.record_rollouts
};

/// Selection distribution over the expanded children of `node`:
/// softmax(kappa_p ln E - gamma G) with E ~ sqrt(2 ln N(v) / N(v')) times any
/// heuristic/habit bias, and gamma from the visit-weighted mean child G.
/// Unexpanded actions get probability 0.
Categorical child_distribution(SearchTree& tree, NodeId node, const SearchContext& ctx,
                               Precision* precision_out = nullptr);

NodeId expansion(SearchTree& tree, NodeId node, const SearchContext& ctx, Rng& rng);
NodeId variational_inference(SearchTree& tree, NodeId node, const SearchContext& ctx, Rng& rng,
                             std::size_t* gamma_clamps = nullptr);
NodeId tree_policy(SearchTree& tree, NodeId node, const SearchContext& ctx, Rng& rng,
                   std::size_t* gamma_clamps = nullptr);

/// delta^depth * efe.
double predictive_efe(double efe, double delta, std::size_t depth);
/// G_delta of a non-root node: its own EFE discounted by its depth.
double evaluate(SearchTree& tree, NodeId node, const SearchContext& ctx);
/// Running-mean update of N and G from `leaf` up to, but excluding, the root.
void path_integration(SearchTree& tree, NodeId leaf, double g_delta);

PlanResult plan(const GenerativeModel& model, const Categorical& root_belief, const PlannerConfig& config, Rng& rng);
PlanResult plan(const SearchContext& ctx, const Categorical& root_belief, Rng& rng);

/// plan() with kappa_p forced to 0.
PlanResult fe_plan(const GenerativeModel& model, const Categorical& root_belief, PlannerConfig config, Rng& rng);

struct StepRecord {
    std::size_t state = 0;        // true state when the action was chosen
    std::size_t observation = 0;  // observation that produced `belief`
    std::size_t action = 0;
    double reward = 0.0;          // reward of the transition caused by `action`
    Categorical belief;           // root belief the plan started from
    TreeStats tree_stats;
    std::vector<Rollout> rollouts;
};

struct EpisodeTrace {
    std::vector<StepRecord> steps;
    std::size_t final_state = 0;
    Categorical final_belief;
    bool terminated = false;
    std::size_t belief_resets = 0;
};

EpisodeTrace act_episode(const GenerativeModel& model, GenerativeProcess& process, const PlannerConfig& config,
                         Rng& rng, std::size_t step_limit = 100);

}  // namespace act
