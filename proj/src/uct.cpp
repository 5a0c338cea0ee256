#include "act/uct.hpp"

#include <cmath>
#include <limits>

namespace act {

double ucb_score(double v, double n_parent, double n_child, double c_p) {
    if (n_child <= 0.0) return std::numeric_limits<double>::infinity();
    if (c_p == 0.0) return v;
    return v + c_p * std::sqrt(std::log(n_parent) / n_child);
}

namespace {

struct Edge {
    std::uint32_t node;
    std::size_t action;
    double reward;
    std::uint32_t child;
};

class UctSearch {
public:
    UctSearch(const Mdp& mdp, const UctConfig& config, Rng& rng) : mdp_(mdp), config_(config), rng_(rng) {}

    UctResult run(std::size_t root_state) {
        tree_.clear();
        new_node(root_state);
        for (std::size_t p = 0; p < config_.playouts; ++p) playout();

        UctResult result;
        const auto& root = tree_[0];
        result.root_visits = root.action_visits;
        result.root_values = root.action_value;
        std::size_t best = 0;
        for (std::size_t a = 1; a < root.action_visits.size(); ++a) {
            const bool more = root.action_visits[a] > root.action_visits[best];
            const bool tie_better = root.action_visits[a] == root.action_visits[best] &&
                                    root.action_value[a] > root.action_value[best];
            if (more || tie_better) best = a;
        }
        result.action = best;
        result.tree = std::move(tree_);
        return result;
    }

private:
    std::uint32_t new_node(std::size_t state) {
        UctNode n;
        n.state = state;
        n.children.resize(mdp_.model.num_actions);
        n.action_visits.assign(mdp_.model.num_actions, 0);
        n.action_value.assign(mdp_.model.num_actions, 0.0);
        tree_.push_back(std::move(n));
        return static_cast<std::uint32_t>(tree_.size() - 1);
    }

    double reward(std::size_t s, std::size_t a, std::size_t s2) const {
        return mdp_.reward ? mdp_.reward(s, a, s2) : 0.0;
    }

    bool terminal(std::size_t s) const { return s < mdp_.terminal.size() && mdp_.terminal[s]; }

    std::size_t next_state(std::size_t s, std::size_t a) {
        return sample_entries(mdp_.model.transition(a).column(s), rng_);
    }

    std::uint32_t child_for(std::uint32_t node, std::size_t a, std::size_t s_next) {
        for (auto c : tree_[node].children[a])
            if (tree_[c].state == s_next) return c;
        const auto c = new_node(s_next);
        tree_[node].children[a].push_back(c);
        return c;
    }

    double rollout(std::size_t s, std::size_t depth) {
        double ret = 0.0, discount = 1.0;
        std::uniform_int_distribution<std::size_t> pick(0, mdp_.model.num_actions - 1);
        while (!terminal(s) && depth < config_.rollout_depth) {
            const std::size_t a = pick(rng_);
            const std::size_t s2 = next_state(s, a);
            ret += discount * reward(s, a, s2);
            discount *= config_.delta;
            s = s2;
            ++depth;
        }
        return ret;
    }

    void playout() {
        std::vector<Edge> path;
        std::uint32_t v = 0;
        std::size_t depth = 0;
        bool expanded = false;
        while (!terminal(tree_[v].state) && depth < config_.rollout_depth && !expanded) {
            const auto& node = tree_[v];
            std::size_t action = 0;
            std::vector<std::size_t> untried;
            for (std::size_t a = 0; a < node.action_visits.size(); ++a)
                if (node.action_visits[a] == 0) untried.push_back(a);
            if (!untried.empty()) {
                action = untried[std::uniform_int_distribution<std::size_t>(0, untried.size() - 1)(rng_)];
                expanded = true;
            } else {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t a = 0; a < node.action_visits.size(); ++a) {
                    const double score = ucb_score(node.action_value[a], static_cast<double>(node.visit_count),
                                                   static_cast<double>(node.action_visits[a]), config_.c_p);
                    if (score > best) {
                        best = score;
                        action = a;
                    }
                }
            }
            const std::size_t s = tree_[v].state;
            const std::size_t s2 = next_state(s, action);
            const double r = reward(s, action, s2);
            const std::uint32_t c = child_for(v, action, s2);
            path.push_back({v, action, r, c});
            v = c;
            ++depth;
        }

        double g = rollout(tree_[v].state, depth);
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            auto& child = tree_[it->child];
            child.visit_count += 1;
            child.mean_return += (g - child.mean_return) / static_cast<double>(child.visit_count);
            g = it->reward + config_.delta * g;
            auto& parent = tree_[it->node];
            parent.action_visits[it->action] += 1;
            parent.action_value[it->action] +=
                (g - parent.action_value[it->action]) / static_cast<double>(parent.action_visits[it->action]);
        }
        auto& root = tree_[0];
        root.visit_count += 1;
        root.mean_return += (g - root.mean_return) / static_cast<double>(root.visit_count);
    }

    const Mdp& mdp_;
    const UctConfig& config_;
    Rng& rng_;
    std::vector<UctNode> tree_;
};

}  // namespace

UctResult uct_search(const Mdp& mdp, std::size_t root_state, const UctConfig& config, Rng& rng) {
    if (config.c_p < 0.0) throw Error("uct: c_p must be >= 0");
    if (!(config.delta > 0.0 && config.delta <= 1.0)) throw Error("uct: delta must lie in (0, 1]");
    if (mdp.model.num_actions == 0) throw Error("uct: model has no actions");
    if (root_state >= mdp.model.num_states) throw Error("uct: root state out of range");
    UctSearch search(mdp, config, rng);
    return search.run(root_state);
}

EpisodeTrace uct_episode(const Mdp& mdp, GenerativeProcess& process, const UctConfig& config, Rng& rng,
                         std::size_t step_limit) {
    EpisodeTrace trace;
    const std::size_t n = mdp.model.num_states;
    trace.final_state = process.state();
    trace.final_belief = Categorical::point(n, process.state());
    if (process.terminal()) {
        trace.terminated = true;
        return trace;
    }
    std::size_t observation = process.initial_observation(rng);
    for (std::size_t t = 0; t < step_limit; ++t) {
        const UctResult result = uct_search(mdp, process.state(), config, rng);
        StepRecord record;
        record.state = process.state();
        record.observation = observation;
        record.action = result.action;
        record.belief = Categorical::point(n, process.state());
        record.tree_stats.node_count = result.tree.size();
        record.tree_stats.simulations = config.playouts;
        const StepOutcome out = process.step(result.action, rng);
        record.reward = out.reward;
        trace.steps.push_back(std::move(record));
        observation = out.observation;
        if (out.terminal) {
            trace.terminated = true;
            break;
        }
    }
    trace.final_state = process.state();
    trace.final_belief = Categorical::point(n, process.state());
    return trace;
}

}  // namespace act
