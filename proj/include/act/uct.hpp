#pragma once

// UCT baseline for fully observable problems: UCB1 selection, one expansion
// per playout, uniform random rollouts and discounted mean-return backups.

#include <cstdint>
#include <vector>

#include "act/model.hpp"
#include "act/planner.hpp"
#include "act/random.hpp"

namespace act {

struct UctConfig {
    double c_p = 1.0;
    double delta = 0.95;
    std::size_t rollout_depth = 18;
    std::size_t playouts = 5000;
    std::uint64_t seed = 0;
};

/// V + c_p sqrt(ln n_parent / n_child); +inf for an unvisited child.
double ucb_score(double v, double n_parent, double n_child, double c_p);

/// A generative model read as an MDP: the agent sees the true state.
struct Mdp {
    const GenerativeModel& model;
    RewardFn reward;
    std::vector<bool> terminal;
};

struct UctNode {
    std::size_t state = 0;
    std::size_t visit_count = 0;
    double mean_return = 0.0;  // running mean of returns backed up through this node
    std::vector<std::vector<std::uint32_t>> children;  // per action, one node per sampled successor
    std::vector<std::size_t> action_visits;
    std::vector<double> action_value;
};

struct UctResult {
    std::size_t action = 0;
    std::vector<std::size_t> root_visits;
    std::vector<double> root_values;
    std::vector<UctNode> tree;
};

/// The chosen action is the most visited root action; ties go to the higher
/// mean return, then the lower index.
UctResult uct_search(const Mdp& mdp, std::size_t root_state, const UctConfig& config, Rng& rng);
inline std::size_t uct_plan(const Mdp& mdp, std::size_t root_state, const UctConfig& config, Rng& rng) {
    return uct_search(mdp, root_state, config, rng).action;
}

/// Acts with uct_plan on the process's true state until terminal or step_limit.
EpisodeTrace uct_episode(const Mdp& mdp, GenerativeProcess& process, const UctConfig& config, Rng& rng,
                         std::size_t step_limit = 100);

}  // namespace act
