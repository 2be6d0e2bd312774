#pragma once

#include <span>
#include <vector>

#include "apdg/dynamics.hpp"
#include "apdg/params.hpp"
#include "socp/problem.hpp"

namespace apdg {

/// Solver-variable units: a solver entry times its scale gives SI.
struct VariableScales {
    double r = 1e3;
    double v = 1e2;
    double m = 1e4;
    double T = 1e6;
    double kappa = 1.0;
    double dt = 1.0;
};

/**
 * Column indices of one node. Fields are -1 where the quantity is a fixed
 * boundary value (r, v at both ends, m at the start). Cones by node:
 *
 *   linear:  Gamma, Gamma - T_min, T_max - Gamma, T_y - cos(theta_T) Gamma,
 *            m - m_dry, m0 - m, r_y
 *   SOC 4:   (v_max, v)         velocity bound
 *   SOC 3:   (tan(theta_gs) r_y, r_x, r_z)  glide slope
 *   SOC 4:   (Gamma, T)         thrust magnitude
 *   SOC 4:   (eta_T, T - T_ref) thrust trust region
 *   SOC 4:   (eta_a, kappa)     virtual acceleration
 */
struct NodeVars {
    int Gamma = -1;
    int g_min = -1;
    int g_max = -1;
    int tilt = -1;
    int mu = -1;   ///< m - m_dry
    int q = -1;    ///< m0 - m
    int h = -1;    ///< r_y
    int nu = -1;   ///< velocity cone head; v follows
    int w = -1;    ///< glide cone head; r_x, r_z follow
    int t = -1;    ///< thrust cone head; T follows
    int eta_T = -1;
    int eta_a = -1; ///< kappa follows
};

struct VariableMap {
    std::vector<NodeVars> node;
    std::vector<int> rate_up;   ///< Gamma_{k+1} - Gamma_k - Tdot_min dt_ref
    std::vector<int> rate_down; ///< Tdot_max dt_ref - (Gamma_{k+1} - Gamma_k)
    int dt = -1;
    int eta_dt = -1;
    int e_plus = -1;
    int e_minus = -1;
    VariableScales scale;
    double objective_scale = 1.0; ///< c was divided by this
};

struct Subproblem {
    socp::SocpProblem problem;
    VariableMap map;
    std::size_t linear_constraints = 0; ///< l
    std::size_t soc_constraints = 0;    ///< m
};

/**
 * Convex subproblem about `ref`, in standard form with all linear cones first.
 *
 * minimize  -w_m_f m[k_f] + w_eta_dt eta_dt + (w_eta_T / k_f) sum eta_T[k]
 *           + (w_kappa_aR / k_f) sum eta_a[k]
 *
 * subject to the linearized dynamics, the boundary conditions, the vertical
 * terminal thrust and the cone constraints listed at NodeVars. The pattern of
 * A depends on k_f and on whether C_D is zero, never on the reference values.
 */
Subproblem build_subproblem(const TrajectoryIterate& ref, const BoundaryConditions& bc,
                            const VehicleParams& p, const ScWeights& w);

/// Trajectory from a solver point x of the subproblem.
TrajectoryIterate extract_trajectory(const Subproblem& sub, std::span<const double> x,
                                     const BoundaryConditions& bc, const VehicleParams& p);

/// Physical objective value at solver point x (constant term excluded).
double physical_objective(const Subproblem& sub, std::span<const double> x);

} // namespace apdg
