#pragma once

#include <string>
#include <string_view>

#include "metalens/bias_sim.hpp"

namespace metalens {

/// Flat `key = value` text, one key per line, `#` comments. Keys:
/// n_studies, questions_per_study, selection (report_all|best_of_k),
/// publication_censor_prob, per_study_bias, se_low, se_high, alpha, seed.
/// Unknown or repeated keys are rejected with ValidationError.
SimScenario parse_scenario(std::string_view text);

std::string render_scenario(const SimScenario& scenario);

/// One row per replicate.
std::string render_simulation_csv(const SimOutcome& outcome);

/// Every published estimate of every replicate, in the study CSV layout.
std::string render_published_csv(const SimOutcome& outcome);

/// Short plain-text summary of a run.
std::string render_simulation_summary(const SimOutcome& outcome);

}  // namespace metalens
