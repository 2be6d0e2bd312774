#include "apdg/verify.hpp"

#include <algorithm>
#include <cmath>

namespace apdg {

Vec3 thrust_at(const TrajectoryIterate& traj, double t, double* gamma)
{
    const int kf = traj.k_f();
    double u = t / traj.dt;
    u = std::clamp(u, 0.0, static_cast<double>(kf));
    const int k = std::min(static_cast<int>(std::floor(u)), kf - 1);
    const double f = u - k;
    if (gamma != nullptr) {
        *gamma = (1.0 - f) * traj.Gamma[k] + f * traj.Gamma[k + 1];
    }
    return (1.0 - f) * traj.T[k] + f * traj.T[k + 1];
}

Verification verify_fine_grid(const TrajectoryIterate& candidate, const BoundaryConditions& bc,
                              const VehicleParams& p, const ScWeights& w, bool keep_samples, int k_fine)
{
    if (!(candidate.dt > 0.0) || candidate.nodes() < 2) {
        throw ScenarioError("verify_fine_grid: candidate needs a positive time step");
    }
    const int steps = k_fine > 0 ? k_fine : w.k_fine;
    const double tf = candidate.k_f() * candidate.dt;
    const double h = tf / steps;

    StateVec x;
    x << bc.r0, bc.v0, bc.m0;
    Verification out;
    out.feasible = true;
    auto sample = [&](double t) {
        if (!keep_samples) {
            return;
        }
        FineSample s;
        s.t = t;
        s.r = x.segment<3>(0);
        s.v = x.segment<3>(3);
        s.m = x(6);
        s.T = thrust_at(candidate, t, &s.Gamma);
        out.samples.push_back(s);
    };
    sample(0.0);
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const StateVec k1 = nonlinear_derivative(x, thrust_at(candidate, t), p);
        const StateVec x2 = x + 0.5 * h * k1;
        if (!(x2(6) > 0.0)) {
            out.feasible = false;
            break;
        }
        const StateVec k2 = nonlinear_derivative(x2, thrust_at(candidate, t + 0.5 * h), p);
        const StateVec x3 = x + 0.5 * h * k2;
        if (!(x3(6) > 0.0)) {
            out.feasible = false;
            break;
        }
        const StateVec k3 = nonlinear_derivative(x3, thrust_at(candidate, t + 0.5 * h), p);
        const StateVec x4 = x + h * k3;
        if (!(x4(6) > 0.0)) {
            out.feasible = false;
            break;
        }
        const StateVec k4 = nonlinear_derivative(x4, thrust_at(candidate, t + h), p);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (x(6) < p.m_dry) {
            out.feasible = false;
        }
        sample(i + 1 == steps ? tf : t + h);
    }
    out.r_err = x.segment<3>(0).norm();
    out.v_err = x.segment<3>(3).norm();
    out.fuel_remaining = x(6) - p.m_dry;
    return out;
}

} // namespace apdg
