#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "act/belief.hpp"
#include "act/random.hpp"

namespace act {

/// Parameters of a categorical generative model: likelihood A (per action),
/// transitions B(u), log-preferences ln C, initial belief D, optional habit
/// prior E over actions, and the gamma prior's shape/rate.
struct GenerativeModel {
    std::size_t num_states = 0;
    std::size_t num_obs = 0;
    std::size_t num_actions = 0;

    /// Distinct likelihood matrices (|O| x |S|); actions index into them via
    /// likelihood_of_action, so action-independent models hold one matrix.
    std::vector<StochasticMatrix> likelihoods;
    std::vector<std::size_t> likelihood_of_action;
    std::vector<StochasticMatrix> transitions;
    LogVector log_preferences;
    Categorical initial_belief;
    std::optional<Categorical> habit_prior;
    double alpha = 1.0;
    double beta = 1.0;

    /// Per action: when true the likelihood reads the state the action is taken
    /// from rather than the state it leads to (outcomes that depend on the
    /// transition itself, e.g. the RockSample sampling reward). Empty = all false.
    std::vector<bool> observe_before_transition;

    const StochasticMatrix& likelihood(std::size_t action) const {
        return likelihoods.at(likelihood_of_action.at(action));
    }
    const StochasticMatrix& transition(std::size_t action) const { return transitions.at(action); }
    bool observes_source(std::size_t action) const {
        return action < observe_before_transition.size() && observe_before_transition[action];
    }
    Categorical preferences() const { return Categorical::normalize(log_preferences.exp()); }

    /// Shares one likelihood across every action.
    void set_shared_likelihood(StochasticMatrix a);
    void set_preferences(const Categorical& c) { log_preferences = LogVector::of(c); }
};

struct Violation {
    std::string tensor;  // "A", "B", "C", "D", "E", "alpha", "beta", "model"
    std::optional<std::size_t> action;
    std::optional<std::size_t> index;
    std::string rule;

    std::string describe() const;
};

/// Empty iff every model invariant holds.
std::vector<Violation> validate(const GenerativeModel& model);

/// Violations of "length `expected`, nonnegative, sums to 1" for a raw vector.
std::vector<Violation> distribution_violations(const std::vector<double>& values, std::size_t expected,
                                               const std::string& tensor);

class ModelError : public Error {
public:
    explicit ModelError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Throws ModelError when validate() reports anything.
void require_valid(const GenerativeModel& model);

struct StepOutcome {
    std::size_t state = 0;
    std::size_t observation = 0;
    double reward = 0.0;
    bool terminal = false;
};

/// The environment the agent acts in. Single-owner and mutable.
class GenerativeProcess {
public:
    virtual ~GenerativeProcess() = default;
    virtual std::size_t state() const = 0;
    virtual bool terminal() const = 0;
    /// Observation available before the first action.
    virtual std::size_t initial_observation(Rng& rng) = 0;
    virtual StepOutcome step(std::size_t action, Rng& rng) = 0;
};

using RewardFn = std::function<double(std::size_t from, std::size_t action, std::size_t to)>;
using TerminalFn = std::function<bool(std::size_t state)>;
using ObservationRewardFn = std::function<double(std::size_t observation)>;

/// Process whose dynamics and outcomes are sampled from a generative model,
/// with an external reward table and terminal predicate. The reward of a step
/// is reward(from, action, to) plus observation_reward(observation).
class ModelProcess final : public GenerativeProcess {
public:
    ModelProcess(std::shared_ptr<const GenerativeModel> model, std::size_t initial_state, RewardFn reward,
                 TerminalFn terminal, ObservationRewardFn observation_reward = {});

    std::size_t state() const override { return state_; }
    bool terminal() const override { return terminal_ ? terminal_(state_) : false; }
    std::size_t initial_observation(Rng& rng) override;
    StepOutcome step(std::size_t action, Rng& rng) override;

private:
    std::shared_ptr<const GenerativeModel> model_;
    std::size_t state_;
    RewardFn reward_;
    TerminalFn terminal_;
    ObservationRewardFn observation_reward_;
};

/// States that every action maps to themselves with probability 1.
std::vector<bool> absorbing_states(const GenerativeModel& model);

}  // namespace act
