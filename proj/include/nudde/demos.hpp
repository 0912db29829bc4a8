#pragma once

#include <nudde/solver.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace nudde {

/// exponential-ivp, delay-linear, das-neutral-order-n, corduneanu-series-kernel,
/// continuous-delay, neutral-first-order, cantor-forcing, commutator-flow.
std::vector<std::string> demo_names();

/// Spec document of a demo, all tables inline.
nlohmann::json demo_spec(const std::string& name);

Problem demo_problem(const std::string& name);

} // namespace nudde
