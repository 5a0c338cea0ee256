#pragma once

// Benchmark problems as (generative model, generative process) pairs.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "act/model.hpp"
#include "act/planner.hpp"

namespace act {

/// The binary trap, g-function and RockSample builders set the model's beta to
/// suggested_beta(model); RockSample also sets alpha = beta. Tiger keeps 1 and 1.
/// A built benchmark: the agent's model plus everything needed to spawn the
/// true environment for one execution.
struct Environment {
    std::string name;
    std::shared_ptr<const GenerativeModel> model;
    RewardFn reward;
    ObservationRewardFn observation_reward;  // optional
    TerminalFn terminal;
    /// Draws the true initial state of one execution.
    std::function<std::size_t(Rng&)> initial_state;
    std::size_t step_limit = 100;
    HeuristicFn heuristic;  // empty when the problem has none

    std::unique_ptr<GenerativeProcess> make_process(Rng& rng) const;
    /// Terminal flags per state, for planners that see the true state.
    std::vector<bool> terminal_states() const;
};

// ---------------------------------------------------------------- binary trap

/// Interior states 0..D-1 (depth i), trap leaf for level d = 1..D at index
/// D + d - 1 with reward (D - d)/D, goal leaf at 2D with reward 1.
/// Action 0 advances, action 1 springs the trap of the next level.
struct BinaryTrapSpec {
    std::size_t depth = 10;
};

Environment build_binary_trap(const BinaryTrapSpec& spec);
/// Reward attached to each state (0 for interior states).
std::vector<double> binary_trap_rewards(const BinaryTrapSpec& spec);
/// Depth reached when the walk ends in `state`: interior i -> i, trap d -> d - 1, goal -> D.
std::size_t binary_trap_depth_reached(const BinaryTrapSpec& spec, std::size_t state);

// ------------------------------------------------------------------ g-function

double g_function(double x);

/// Dyadic intervals in heap order: state 0 = [0, 1], children of i are 2i+1
/// (left half) and 2i+2 (right half). Splitting stops at the first depth whose
/// width is below min_width.
struct GFunctionSpec {
    double min_width = 1e-5;
};

struct Interval {
    double lo;
    double hi;
    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

std::size_t g_function_depth(const GFunctionSpec& spec);
Interval g_function_interval(std::size_t state);
Environment build_g_function(const GFunctionSpec& spec);

// ------------------------------------------------------------------ RockSample

struct Cell {
    int x = 0;  // column, 0 = west
    int y = 0;  // row, 0 = south
    bool operator==(const Cell&) const = default;
};

struct RockSampleSpec {
    int n = 7;
    int k = 8;
    std::vector<Cell> rocks;
    /// True rock qualities; empty = drawn uniformly for every execution.
    std::vector<bool> qualities;
    double d0 = 0.0;  // half-accuracy distance; <= 0 means n/2
    double preference = 3.0;  // c in softmax([c, -c]) over (reward, penalty)
    double good_reward = 10.0;
    double bad_reward = -10.0;
    double exit_reward = 10.0;
    double heuristic_bias = 4.0;
    std::size_t step_limit = 100;

    double half_accuracy_distance() const { return d0 > 0.0 ? d0 : n / 2.0; }
};

/// k distinct cells drawn from the n x n grid.
RockSampleSpec rocksample_random_layout(int n, int k, std::uint64_t seed);
/// {"n", "k", "rocks": [[x, y], ...], "qualities": [bool, ...], "d0"}; "qualities" and "d0" optional.
RockSampleSpec rocksample_layout_from_json(const std::string& text);
std::string rocksample_layout_to_json(const RockSampleSpec& spec);

/// Canonical indexing. Grid states: (y n + x) 2^k + config; then the exit
/// location times each config; then the border state last. Bit i of config
/// is rock i's quality (1 = good).
class RockSampleLayout {
public:
    explicit RockSampleLayout(const RockSampleSpec& spec);

    enum class Move { North = 0, South = 1, West = 2, East = 3 };

    std::size_t num_states() const;
    std::size_t num_actions() const { return 4 + rocks_.size() + 1; }
    std::size_t num_locations() const { return cells_ + 2; }  // grid + exit + border
    std::size_t num_configs() const { return configs_; }
    std::size_t num_obs() const { return num_locations() * configs_ * 2; }

    std::size_t check_action(std::size_t rock) const { return 4 + rock; }
    std::size_t sample_action() const { return 4 + rocks_.size(); }

    std::size_t grid_state(Cell c, std::size_t config) const;
    std::size_t exit_state(std::size_t config) const;
    std::size_t border_state() const;
    bool is_grid(std::size_t s) const { return s < cells_ * configs_; }
    bool is_exit(std::size_t s) const { return !is_grid(s) && s < border_state(); }
    bool is_border(std::size_t s) const { return s == border_state(); }
    /// Location index: grid cell (y n + x), exit = n^2, border = n^2 + 1.
    std::size_t location(std::size_t s) const;
    std::size_t config(std::size_t s) const;  // 0 for the border
    Cell cell(std::size_t location) const;
    Cell start_cell() const;

    std::size_t observation(std::size_t location, std::size_t config, bool penalty) const {
        return (location * configs_ + config) * 2 + (penalty ? 1 : 0);
    }

    /// Successor of state s under action a.
    std::size_t next(std::size_t s, std::size_t a) const;
    /// Rock at a cell, if any.
    std::optional<std::size_t> rock_at(Cell c) const;
    /// (1 + 2^(-d/d0)) / 2 for the sensor at `c` checking rock i.
    double check_accuracy(Cell c, std::size_t rock) const;

    const RockSampleSpec& spec() const { return spec_; }
    const std::vector<Cell>& rocks() const { return rocks_; }

private:
    RockSampleSpec spec_;
    std::vector<Cell> rocks_;
    std::size_t cells_;
    std::size_t configs_;
};

/// The three likelihood factors of one action: location readout, observed
/// rock configuration, and utility (reward/penalty).
struct RockSampleFactors {
    StochasticMatrix location;
    StochasticMatrix configuration;
    StochasticMatrix utility;
};

RockSampleFactors rocksample_factors(const RockSampleLayout& layout, std::size_t action);
Environment build_rocksample(const RockSampleSpec& spec);
/// Bias > 1 on actions that move toward the nearest believed-good rock (or
/// toward the exit when none is left), check rocks of uncertain quality, or
/// sample a believed-good rock at the agent's location.
HeuristicFn rocksample_heuristic(const RockSampleSpec& spec);

// ----------------------------------------------------------------------- Tiger

/// States loc * 2 + context with loc in {centre, left, right, lower} and
/// context 0 = reward at the right arm. Observations position * 4 + outcome
/// with outcome in {reward, penalty, cue context 0, cue context 1}.
/// Action a moves to location a.
struct TigerTMazeSpec {
    double validity = 0.90;
    double utility = 2.0;
    std::size_t epochs = 3;
};

namespace tiger {
inline constexpr std::size_t kCentre = 0, kLeft = 1, kRight = 2, kLower = 3;
inline constexpr std::size_t kReward = 0, kPenalty = 1, kCue0 = 2, kCue1 = 3;
inline std::size_t state(std::size_t loc, std::size_t context) { return loc * 2 + context; }
inline std::size_t obs(std::size_t pos, std::size_t outcome) { return pos * 4 + outcome; }
/// The arm holding the reward in a context.
inline std::size_t rewarded_arm(std::size_t context) { return context == 0 ? kRight : kLeft; }
}  // namespace tiger

Environment build_tiger_tmaze(const TigerTMazeSpec& spec);

}  // namespace act
