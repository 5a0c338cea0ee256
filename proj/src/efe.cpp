#include "act/efe.hpp"

#include <algorithm>
#include <cmath>

namespace act {

namespace {

// Unnormalized posterior weights A[observation, j] * belief_j.
std::vector<Entry> likelihood_weights(const StochasticMatrix& a, const Categorical& belief, std::size_t observation) {
    std::vector<Entry> out;
    for (const auto& x : belief.support()) {
        double lik = 0.0;
        for (const auto& e : a.column(x.index))
            if (e.index == observation) {
                lik = e.value;
                break;
            }
        if (lik > 0.0) out.push_back({x.index, lik * x.value});
    }
    return out;
}

void check_indices(const GenerativeModel& model, const Categorical& belief, std::size_t action) {
    if (action >= model.num_actions) throw Error("action out of range");
    if (belief.size() != model.num_states) throw Error("belief does not match the model's state count");
}

}  // namespace

Categorical condition(const GenerativeModel& model, const Categorical& prior, std::size_t likelihood_action,
                      std::size_t observation) {
    check_indices(model, prior, likelihood_action);
    if (observation >= model.num_obs) throw Error("observation out of range");
    auto weights = likelihood_weights(model.likelihood(likelihood_action), prior, observation);
    if (weights.empty()) throw ImpossibleObservation();
    return Categorical::normalize(model.num_states, std::move(weights));
}

Categorical belief_update(const GenerativeModel& model, const Categorical& prior, std::size_t action,
                          std::size_t observation) {
    check_indices(model, prior, action);
    if (model.observes_source(action))
        return matvec(model.transition(action), condition(model, prior, action, observation));
    return condition(model, matvec(model.transition(action), prior), action, observation);
}

Prediction predict(const GenerativeModel& model, const Categorical& belief, std::size_t action) {
    check_indices(model, belief, action);
    Categorical next = matvec(model.transition(action), belief);
    const Categorical& observed = model.observes_source(action) ? belief : next;
    Categorical obs = matvec(model.likelihood(action), observed);
    return {std::move(next), std::move(obs)};
}

EfeBreakdown expected_free_energy(const GenerativeModel& model, const Categorical& observed_belief,
                                  std::size_t action) {
    check_indices(model, observed_belief, action);
    const auto& a = model.likelihood(action);

    std::vector<Entry> outcomes;
    double ambiguity = 0.0;
    for (const auto& x : observed_belief.support()) {
        double h = 0.0;
        for (const auto& e : a.column(x.index)) {
            outcomes.push_back({e.index, e.value * x.value});
            h += entropy_term(e.value);
        }
        ambiguity += x.value * h;
    }
    compact(outcomes);

    double risk = 0.0;
    for (const auto& o : outcomes) risk += o.value * (floored_log(o.value) - model.log_preferences[o.index]);
    risk = std::max(risk, 0.0);
    return {risk, ambiguity, risk + ambiguity};
}

EfeBreakdown transition_efe(const GenerativeModel& model, const Categorical& before, const Categorical& after,
                            std::size_t action) {
    return expected_free_energy(model, model.observes_source(action) ? before : after, action);
}

double efe_upper_bound(const GenerativeModel& model) {
    double worst = 0.0;
    for (const auto& a : model.likelihoods)
        for (std::size_t s = 0; s < model.num_states; ++s) {
            double risk = 0.0, ambiguity = 0.0;
            for (const auto& e : a.column(s)) {
                risk += e.value * (floored_log(e.value) - model.log_preferences[e.index]);
                ambiguity += entropy_term(e.value);
            }
            worst = std::max(worst, std::max(risk, 0.0) + ambiguity);
        }
    return worst;
}

double suggested_beta(const GenerativeModel& model) {
    return std::floor(2.0 * efe_upper_bound(model)) / 2.0 + 0.5;
}

Precision precision_update(double alpha, double beta, double g) {
    const double denom = beta - g;
    if (!(denom > 0.0)) return {GAMMA_MAX, true};
    return {alpha / denom, false};
}

}  // namespace act
