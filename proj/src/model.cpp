#include "act/model.hpp"

#include <sstream>

namespace act {

void GenerativeModel::set_shared_likelihood(StochasticMatrix a) {
    likelihoods.clear();
    likelihoods.push_back(std::move(a));
    likelihood_of_action.assign(num_actions, 0);
}

std::string Violation::describe() const {
    std::ostringstream out;
    out << tensor;
    if (action) out << "[action " << *action << "]";
    if (index) out << "[" << *index << "]";
    out << ": " << rule;
    return out.str();
}

namespace {

void check_distribution(const std::vector<double>& values, std::size_t expected, const std::string& tensor,
                        std::vector<Violation>& out) {
    if (values.size() != expected) {
        out.push_back({tensor, {}, {},
                       "length " + std::to_string(values.size()) + " but expected " + std::to_string(expected)});
        return;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) out.push_back({tensor, {}, i, "negative or non-finite entry"});
        total += values[i];
    }
    if (std::abs(total - 1.0) > NORM_TOL)
        out.push_back({tensor, {}, {}, "entries sum to " + std::to_string(total) + ", expected 1"});
}

void check_matrix(const StochasticMatrix& m, std::size_t rows, std::size_t cols, const std::string& tensor,
                  std::size_t action, std::vector<Violation>& out) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream msg;
        msg << "shape " << m.rows() << "x" << m.cols() << " but expected " << rows << "x" << cols;
        out.push_back({tensor, action, {}, msg.str()});
        return;
    }
    for (std::size_t j : m.bad_columns())
        out.push_back({tensor, action, j,
                       "column sums to " + std::to_string(m.column_sum(j)) + " (must be a distribution)"});
}

}  // namespace

std::vector<Violation> distribution_violations(const std::vector<double>& values, std::size_t expected,
                                               const std::string& tensor) {
    std::vector<Violation> out;
    check_distribution(values, expected, tensor, out);
    return out;
}

std::vector<Violation> validate(const GenerativeModel& model) {
    std::vector<Violation> out;
    const auto S = model.num_states, O = model.num_obs, U = model.num_actions;
    if (S == 0 || O == 0 || U == 0) out.push_back({"model", {}, {}, "dimensions must be positive"});

    if (model.likelihood_of_action.size() != U)
        out.push_back({"A", {}, {}, "likelihood map has " + std::to_string(model.likelihood_of_action.size()) +
                                        " actions, expected " + std::to_string(U)});
    for (std::size_t u = 0; u < model.likelihood_of_action.size(); ++u)
        if (model.likelihood_of_action[u] >= model.likelihoods.size())
            out.push_back({"A", u, {}, "action refers to a missing likelihood"});
    for (std::size_t k = 0; k < model.likelihoods.size(); ++k) check_matrix(model.likelihoods[k], O, S, "A", k, out);

    if (model.transitions.size() != U)
        out.push_back({"B", {}, {}, std::to_string(model.transitions.size()) + " transition slices, expected " +
                                        std::to_string(U)});
    for (std::size_t u = 0; u < model.transitions.size(); ++u) check_matrix(model.transitions[u], S, S, "B", u, out);

    check_distribution(model.log_preferences.exp(), O, "C", out);
    check_distribution(model.initial_belief.dense(), S, "D", out);
    if (model.habit_prior) check_distribution(model.habit_prior->dense(), U, "E", out);
    if (!(model.alpha > 0.0)) out.push_back({"alpha", {}, {}, "must be > 0"});
    if (!(model.beta > 0.0)) out.push_back({"beta", {}, {}, "must be > 0"});
    if (!model.observe_before_transition.empty() && model.observe_before_transition.size() != U)
        out.push_back({"model", {}, {}, "observe_before_transition must list every action"});
    return out;
}

namespace {
std::string summarize(const std::vector<Violation>& violations) {
    std::string msg = "invalid generative model";
    for (const auto& v : violations) msg += "\n  " + v.describe();
    return msg;
}
}  // namespace

ModelError::ModelError(std::vector<Violation> violations)
    : Error(summarize(violations)), violations_(std::move(violations)) {}

void require_valid(const GenerativeModel& model) {
    if (auto v = validate(model); !v.empty()) throw ModelError(std::move(v));
}

ModelProcess::ModelProcess(std::shared_ptr<const GenerativeModel> model, std::size_t initial_state, RewardFn reward,
                           TerminalFn terminal, ObservationRewardFn observation_reward)
    : model_(std::move(model)),
      state_(initial_state),
      reward_(std::move(reward)),
      terminal_(std::move(terminal)),
      observation_reward_(std::move(observation_reward)) {
    if (state_ >= model_->num_states) throw Error("process: initial state out of range");
}

std::size_t ModelProcess::initial_observation(Rng& rng) {
    return sample_entries(model_->likelihood(0).column(state_), rng);
}

StepOutcome ModelProcess::step(std::size_t action, Rng& rng) {
    if (action >= model_->num_actions) throw Error("process: action out of range");
    const std::size_t from = state_;
    state_ = sample_entries(model_->transition(action).column(from), rng);
    const std::size_t seen = model_->observes_source(action) ? from : state_;
    StepOutcome out;
    out.state = state_;
    out.observation = sample_entries(model_->likelihood(action).column(seen), rng);
    out.reward = reward_ ? reward_(from, action, state_) : 0.0;
    if (observation_reward_) out.reward += observation_reward_(out.observation);
    out.terminal = terminal_ ? terminal_(state_) : false;
    return out;
}

std::vector<bool> absorbing_states(const GenerativeModel& model) {
    std::vector<bool> absorbing(model.num_states, true);
    for (std::size_t u = 0; u < model.num_actions; ++u) {
        const auto& b = model.transition(u);
        for (std::size_t s = 0; s < model.num_states; ++s) {
            if (!absorbing[s]) continue;
            auto col = b.column(s);
            absorbing[s] = col.size() == 1 && col[0].index == s && std::abs(col[0].value - 1.0) <= NORM_TOL;
        }
    }
    return absorbing;
}

}  // namespace act
