#pragma once

#include <string>
#include <vector>

#include "apdg/dynamics.hpp"
#include "apdg/params.hpp"
#include "apdg/verify.hpp"
#include "socp/ipm.hpp"

namespace apdg {

enum class StartMode { Cold, Warm };

struct ScOptions {
    StartMode mode = StartMode::Cold;
    int warm_iterations = 1; ///< IPM iteration cap of warm-started subproblems
    int max_steps = 30;      ///< SC step cap
    socp::SolverSettings solver; ///< max_iterations is taken from ScWeights::n_iter
};

/// Parses "cold" or "warm:N". Throws ScenarioError otherwise.
ScOptions parse_mode(const std::string& text);
std::string mode_name(const ScOptions& options);
/// 120 SC steps for 1-iteration warm starts, 30 otherwise.
int default_step_cap(const ScOptions& options);

struct ScStep {
    int step = 0;
    socp::SolveStatus status = socp::SolveStatus::NumericalFailure;
    int iterations = 0;
    std::size_t factorizations = 0;
    std::size_t kkt_solves = 0;
    double seconds = 0.0; ///< subproblem construction and solve
    double objective = 0.0;
    double dt = 0.0;
    double kappa_max = 0.0;
    double r_err = 0.0;
    double v_err = 0.0;
    double fuel_remaining = 0.0;
};

struct ScResult {
    bool success = false;
    TrajectoryIterate trajectory;
    Verification verification;
    std::vector<ScStep> steps;
    int total_iterations = 0;
    std::size_t total_factorizations = 0;
    std::size_t total_kkt_solves = 0;
    double seconds = 0.0;
    std::string message;
};

/// Straight-line r and v from the boundary state to the origin, mass falling
/// linearly from m0 to m_dry, thrust cancelling gravity (magnitude clamped to
/// [T_min, T_max]) and dt = t_f0 / k_f.
TrajectoryIterate initial_guess(const Scenario& scenario);

/**
 * Successive convexification. Each step builds the subproblem about the
 * current reference, solves it (cold, or warm-started from the previous
 * subproblem's point under the iteration cap), and simulates the programmed
 * thrust on the fine grid. Stops once r_err <= eps_r and v_err <= eps_v.
 * A solver failure or an unusable subproblem result ends the run unsuccessfully.
 */
ScResult sc_solve(const Scenario& scenario, const ScOptions& options);

} // namespace apdg
