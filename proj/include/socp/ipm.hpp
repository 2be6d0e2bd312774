#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "socp/cones.hpp"
#include "socp/kkt.hpp"
#include "socp/problem.hpp"

namespace socp {

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus status);

enum class NewtonPhase { Predictor, Corrector };

/// Passed to SolverSettings::on_newton after every Newton solve.
struct NewtonEvent {
    int iteration;
    NewtonPhase phase;
    const SocpProblem& problem;
    const HsdState& state;
    const NtScaling& scaling;
    const RhsBundle& rhs;
    const NewtonDirection& direction;
};

/// Passed to SolverSettings::on_iteration after every accepted step.
struct IterationEvent {
    int iteration;
    const HsdState& state;
    double mu;
    double alpha_p;
    double alpha_c;
};

struct SolverSettings {
    int max_iterations = 50;  ///< N_iter
    double delta0 = 0.995;
    double delta1 = 0.9;
    double eps_feas = 1e-8;
    double eps_gap = 1e-8;
    double eps_inf = 1e-10;
    double lambda0 = 0.999;
    /// Iteration cap for warm-started solves; the capped result is marked usable.
    std::optional<int> iteration_cap;
    /// Use mat(dx) dx on unscaled directions for the second-order term
    /// instead of the scaled cross product mat(dx~) ds~.
    bool literal_corrector = false;
    KktOptions kkt;

    std::function<void(const NewtonEvent&)> on_newton;
    std::function<void(const IterationEvent&)> on_iteration;

    void validate() const;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    /// True when x, y, s are a tau-normalized point that may be used, i.e.
    /// Optimal, or MaxIterations under an explicit iteration cap.
    bool usable = false;
    Vec x;
    Vec y;
    Vec s;
    HsdState final_state;  ///< raw embedding iterate
    int iterations = 0;
    double objective = 0.0;  ///< c^T x at the normalized point
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    std::size_t factorizations = 0;
    std::size_t kkt_solves = 0;
    double seconds = 0.0;
    std::string message;
};

HsdState cold_start(const ConeLayout& layout, std::size_t p);

struct WarmStart {
    HsdState state;
    double lambda = 0.0;
    bool fell_back = false;  ///< previous point was outside K; cold start used
};

/**
 * x_w = lambda x_o + (1 - lambda) e, y_w = lambda y_o, s_w = lambda s_o + (1 - lambda) e,
 * kappa_w = x_o^T s_o / (l + m) (at least 1e-10), tau_w = 1, with
 * lambda = max(1 - 1 / (|A|_inf + |b|_inf), lambda0) on the new problem's data.
 */
WarmStart warm_start(std::span<const double> x_o, std::span<const double> y_o,
                     std::span<const double> s_o, const SocpProblem& problem,
                     const SolverSettings& settings);

/// Second-order terms of the corrector from the predictor direction.
struct CorrectorTerms {
    Vec e_xs;
    double e_kt = 0.0;
};

CorrectorTerms corrector_terms(const NewtonDirection& predictor, const NtScaling& scaling,
                               bool literal = false);

enum class StopStatus { Continue, Optimal, PrimalInfeasible, DualInfeasible };

struct StopCheck {
    StopStatus status = StopStatus::Continue;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
};

StopCheck stopping_test(const HsdState& z, const SocpProblem& problem, const SolverSettings& settings);

/// Runs the predictor-corrector method from `init`. A caller-owned KktSystem
/// (built for the same A pattern and layout) may be passed to reuse its
/// symbolic analysis; its A values are refreshed from `problem`.
SolveOutcome solve(const SocpProblem& problem, const HsdState& init, const SolverSettings& settings,
                   KktSystem* kkt = nullptr);

} // namespace socp
