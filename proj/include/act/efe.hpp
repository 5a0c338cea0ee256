#pragma once

#include <optional>

#include "act/belief.hpp"
#include "act/model.hpp"

namespace act {

inline constexpr double GAMMA_MAX = 32.0;

/// Expected free energy split into risk (KL of predicted outcomes from the
/// preferences) and ambiguity (expected outcome entropy). Smaller is better.
struct EfeBreakdown {
    double risk = 0.0;
    double ambiguity = 0.0;
    double total = 0.0;
};

struct Precision {
    double gamma = 1.0;
    bool clamped = false;  // beta - g <= 0: outside the formula's domain
};

class ImpossibleObservation : public Error {
public:
    ImpossibleObservation() : Error("impossible observation") {}
};

/// Posterior over the state reached by `action` after seeing `observation`:
/// softmax(ln A_action[observation, :] + ln(B(action) . prior)).
/// For source-observed actions the likelihood conditions the pre-transition
/// state, which is then pushed through B(action).
Categorical belief_update(const GenerativeModel& model, const Categorical& prior, std::size_t action,
                          std::size_t observation);

/// Conditions a belief on an observation without a transition, using the
/// likelihood of `likelihood_action` (the initial observation uses action 0).
Categorical condition(const GenerativeModel& model, const Categorical& prior, std::size_t likelihood_action,
                      std::size_t observation);

struct Prediction {
    Categorical next_belief;    // B(action) . belief
    Categorical predicted_obs;  // A_action . (belief the likelihood reads)
};

Prediction predict(const GenerativeModel& model, const Categorical& belief, std::size_t action);

/// Risk and ambiguity of A_action applied to `observed_belief` (the post-action
/// belief, or the pre-action one for source-observed actions).
EfeBreakdown expected_free_energy(const GenerativeModel& model, const Categorical& observed_belief,
                                  std::size_t action);

/// EFE of taking `action` from `before`, which leads to `after`.
EfeBreakdown transition_efe(const GenerativeModel& model, const Categorical& before, const Categorical& after,
                            std::size_t action);

/// Largest EFE over all beliefs and actions. EFE is convex in the belief, so
/// the maximum sits at a point belief and a scan of the likelihood columns finds it.
double efe_upper_bound(const GenerativeModel& model);

/// Smallest multiple of 0.5 strictly above efe_upper_bound, so beta - G stays
/// positive everywhere.
double suggested_beta(const GenerativeModel& model);

/// gamma = alpha / (beta - g), clamped to GAMMA_MAX outside the domain.
Precision precision_update(double alpha, double beta, double g);

}  // namespace act
