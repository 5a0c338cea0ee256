#pragma once

#include <string>

#include "act/model.hpp"

namespace act {

/// JSON model document:
///   { num_states, num_obs, num_actions,
///     likelihood:  [A] (shared) or [A_0, ..., A_{U-1}], each |O| x |S|,
///     likelihood_of_action: optional per-action index into likelihood,
///     transitions: [B_0, ..., B_{U-1}], each |S| x |S|,
///     preferences: C (probabilities over outcomes), initial_belief: D,
///     habit_prior: E or null, alpha, beta,
///     observe_before_transition: optional per-action booleans }
/// A matrix is either an array of rows or, for large models,
///   { rows, cols, columns: [[[row, value], ...] per column] }.
/// save_model writes the sparse form once rows x cols exceeds 65536.
///
/// load_model throws ModelError (parse and validation problems, naming the field).
GenerativeModel load_model(const std::string& text);
std::string save_model(const GenerativeModel& model);

GenerativeModel load_model_file(const std::string& path);
void save_model_file(const GenerativeModel& model, const std::string& path);

}  // namespace act
