#pragma once

#include <vector>

#include "apdg/dynamics.hpp"
#include "apdg/params.hpp"

namespace apdg {

struct FineSample {
    double t = 0.0;
    Vec3 r;
    Vec3 v;
    double m = 0.0;
    Vec3 T;
    double Gamma = 0.0;
};

struct Verification {
    double r_err = 0.0;          ///< |r(t_f)|, m
    double v_err = 0.0;          ///< |v(t_f)|, m/s
    double fuel_remaining = 0.0; ///< m(t_f) - m_dry, kg
    bool feasible = false;       ///< mass stayed above m_dry
    std::vector<FineSample> samples; ///< k_fine + 1 points when requested
};

/// Thrust and Gamma at time t, linear between nodes.
Vec3 thrust_at(const TrajectoryIterate& traj, double t, double* gamma = nullptr);

/**
 * Integrates the nonlinear dynamics from (r0, v0, m0) with RK4 over k_fine
 * uniform steps on [0, k_f dt] under the programmed thrust. `k_fine` <= 0
 * takes the value from the weights.
 */
Verification verify_fine_grid(const TrajectoryIterate& candidate, const BoundaryConditions& bc,
                              const VehicleParams& p, const ScWeights& w, bool keep_samples = false,
                              int k_fine = 0);

} // namespace apdg
