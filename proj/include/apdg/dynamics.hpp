#pragma once

#include <Eigen/Core>
#include <vector>

#include "apdg/params.hpp"

namespace apdg {

/// State (r, v, m) packed as a 7-vector.
using StateVec = Eigen::Matrix<double, 7, 1>;
using StateMat = Eigen::Matrix<double, 7, 7>;
using InputMat = Eigen::Matrix<double, 7, 3>;

/// D_a = -(C_D S_ref / 2) rho0 exp(-c_rho r_y) |v| v
Vec3 drag(double r_y, const Vec3& v, const VehicleParams& p);

/// -|T| / (I_sp g0)
double mass_rate(const Vec3& T, const VehicleParams& p);

/// (r', v', m') = (v, (T + D_a) / m + g, mass_rate). Throws ScenarioError if m <= 0.
StateVec nonlinear_derivative(const StateVec& x, const Vec3& T, const VehicleParams& p);

struct DerivativeJacobians {
    StateMat A; ///< d f / d x
    InputMat B; ///< d f / d T
};

/// Exact Jacobians of nonlinear_derivative; the |T| and |v| kinks use the zero subgradient.
DerivativeJacobians derivative_jacobians(const StateVec& x, const Vec3& T, const VehicleParams& p);

/// Reference trajectory on the k_f + 1 node grid.
struct TrajectoryIterate {
    std::vector<Vec3> r;
    std::vector<Vec3> v;
    std::vector<Vec3> a; ///< (T + D_a) / m + g at each node
    std::vector<double> m;
    std::vector<Vec3> T;
    std::vector<double> Gamma;
    double dt = 0.0;

    // Penalty diagnostics of the subproblem that produced this iterate.
    double eta_dt = 0.0;
    double eta_T_mean = 0.0;
    double kappa_max = 0.0;

    std::size_t nodes() const { return r.size(); }
    int k_f() const { return static_cast<int>(r.size()) - 1; }
    StateVec state(std::size_t k) const;
    void set_state(std::size_t k, const StateVec& x);
    /// Fills `a` from the states and thrusts.
    void update_accelerations(const VehicleParams& p);
};

/**
 * Affine dynamics of one interval in implicit form
 *
 *     Xk x_k + Xk1 x_{k+1} + Uk u_k + Uk1 u_{k+1} + dt * Dt + Kk kappa_k + Kk1 kappa_{k+1} = rhs
 *
 * with u = (T, Gamma). Velocity and mass use the trapezoidal rule; position
 * integrates the linearly varying acceleration exactly,
 * r_{k+1} = r_k + Dt v_k + Dt^2 (2 a_k + a_{k+1}) / 6. Mass burns Gamma, the
 * thrust-magnitude slack. kappa is an acceleration added at each node.
 */
struct IntervalMap {
    StateMat Xk;
    StateMat Xk1;
    Eigen::Matrix<double, 7, 4> Uk;
    Eigen::Matrix<double, 7, 4> Uk1;
    StateVec dt;
    InputMat Kk;
    InputMat Kk1;
    StateVec rhs;
};

/// Interval defect F at a point (zero for a dynamically consistent trajectory).
StateVec interval_defect(const StateVec& x0, const Vec3& T0, double G0, const StateVec& x1,
                         const Vec3& T1, double G1, double dt, const Vec3& kappa0,
                         const Vec3& kappa1, const VehicleParams& p);

/// First-order expansion of interval_defect about the reference, one map per interval.
std::vector<IntervalMap> linearize_discretize(const TrajectoryIterate& ref, const VehicleParams& p);

} // namespace apdg
