#include "apdg/dynamics.hpp"

#include <cmath>

namespace apdg {

namespace {

double drag_coefficient(double r_y, const VehicleParams& p)
{
    return 0.5 * p.C_D * p.S_ref * p.rho0 * std::exp(-p.c_rho * r_y);
}

Vec3 acceleration(const StateVec& x, const Vec3& T, const VehicleParams& p)
{
    const Vec3 v = x.segment<3>(3);
    return (T + drag(x(1), v, p)) / x(6) + p.g;
}

// d a / d x (3 x 7) and d a / d T = I / m.
Eigen::Matrix<double, 3, 7> acceleration_jacobian(const StateVec& x, const Vec3& T, const VehicleParams& p)
{
    const DerivativeJacobians j = derivative_jacobians(x, T, p);
    return j.A.block<3, 7>(3, 0);
}

} // namespace

Vec3 drag(double r_y, const Vec3& v, const VehicleParams& p)
{
    return -drag_coefficient(r_y, p) * v.norm() * v;
}

double mass_rate(const Vec3& T, const VehicleParams& p)
{
    return -T.norm() / (p.I_sp * p.g0);
}

StateVec nonlinear_derivative(const StateVec& x, const Vec3& T, const VehicleParams& p)
{
    if (!(x(6) > 0.0)) {
        throw ScenarioError("nonlinear_derivative: mass must be positive");
    }
    StateVec f;
    f.segment<3>(0) = x.segment<3>(3);
    f.segment<3>(3) = acceleration(x, T, p);
    f(6) = mass_rate(T, p);
    return f;
}

DerivativeJacobians derivative_jacobians(const StateVec& x, const Vec3& T, const VehicleParams& p)
{
    if (!(x(6) > 0.0)) {
        throw ScenarioError("derivative_jacobians: mass must be positive");
    }
    const Vec3 v = x.segment<3>(3);
    const double m = x(6);
    const double k = drag_coefficient(x(1), p);
    const double speed = v.norm();
    const Vec3 d = -k * speed * v;

    DerivativeJacobians j;
    j.A.setZero();
    j.B.setZero();
    j.A.block<3, 3>(0, 3).setIdentity();
    // d D / d r_y = -c_rho D
    j.A.block<3, 1>(3, 1) = -p.c_rho * d / m;
    if (speed > 0.0) {
        const Eigen::Matrix3d dv = -k * (speed * Eigen::Matrix3d::Identity() + v * v.transpose() / speed);
        j.A.block<3, 3>(3, 3) = dv / m;
    }
    j.A.block<3, 1>(3, 6) = -(T + d) / (m * m);
    j.B.block<3, 3>(3, 0) = Eigen::Matrix3d::Identity() / m;
    const double tn = T.norm();
    if (tn > 0.0) {
        j.B.block<1, 3>(6, 0) = -T.transpose() / (tn * p.I_sp * p.g0);
    }
    return j;
}

StateVec TrajectoryIterate::state(std::size_t k) const
{
    StateVec x;
    x << r[k], v[k], m[k];
    return x;
}

void TrajectoryIterate::set_state(std::size_t k, const StateVec& x)
{
    r[k] = x.segment<3>(0);
    v[k] = x.segment<3>(3);
    m[k] = x(6);
}

void TrajectoryIterate::update_accelerations(const VehicleParams& p)
{
    a.resize(nodes());
    for (std::size_t k = 0; k < nodes(); ++k) {
        a[k] = acceleration(state(k), T[k], p);
    }
}

StateVec interval_defect(const StateVec& x0, const Vec3& T0, double G0, const StateVec& x1,
                         const Vec3& T1, double G1, double dt, const Vec3& kappa0,
                         const Vec3& kappa1, const VehicleParams& p)
{
    const Vec3 a0 = acceleration(x0, T0, p) + kappa0;
    const Vec3 a1 = acceleration(x1, T1, p) + kappa1;
    StateVec f;
    f.segment<3>(0) = x1.segment<3>(0) - x0.segment<3>(0) - dt * x0.segment<3>(3) -
                      dt * dt / 6.0 * (2.0 * a0 + a1);
    f.segment<3>(3) = x1.segment<3>(3) - x0.segment<3>(3) - 0.5 * dt * (a0 + a1);
    f(6) = x1(6) - x0(6) + 0.5 * dt * (G0 + G1) / (p.I_sp * p.g0);
    return f;
}

std::vector<IntervalMap> linearize_discretize(const TrajectoryIterate& ref, const VehicleParams& p)
{
    if (ref.nodes() < 2 || !(ref.dt > 0.0)) {
        throw ScenarioError("linearize_discretize: need two nodes and a positive time step");
    }
    for (std::size_t k = 0; k < ref.nodes(); ++k) {
        if (!(ref.m[k] > 0.0)) {
            throw ScenarioError("linearize_discretize: reference mass must be positive");
        }
    }
    const double h = ref.dt;
    const double burn = 1.0 / (p.I_sp * p.g0);
    const Eigen::Matrix3d I3 = Eigen::Matrix3d::Identity();
    std::vector<IntervalMap> maps(ref.nodes() - 1);
    for (std::size_t k = 0; k + 1 < ref.nodes(); ++k) {
        const StateVec x0 = ref.state(k);
        const StateVec x1 = ref.state(k + 1);
        const auto ja0 = acceleration_jacobian(x0, ref.T[k], p);
        const auto ja1 = acceleration_jacobian(x1, ref.T[k + 1], p);
        const Vec3 a0 = acceleration(x0, ref.T[k], p);
        const Vec3 a1 = acceleration(x1, ref.T[k + 1], p);

        IntervalMap& mp = maps[k];
        mp.Xk.setZero();
        mp.Xk1.setZero();
        mp.Uk.setZero();
        mp.Uk1.setZero();
        mp.Kk.setZero();
        mp.Kk1.setZero();

        // Position rows.
        mp.Xk.block<3, 3>(0, 0) = -I3;
        mp.Xk.block<3, 3>(0, 3) = -h * I3;
        mp.Xk.block<3, 7>(0, 0) -= h * h / 3.0 * ja0;
        mp.Xk1.block<3, 3>(0, 0) = I3;
        mp.Xk1.block<3, 7>(0, 0) -= h * h / 6.0 * ja1;
        mp.Uk.block<3, 3>(0, 0) = -h * h / 3.0 / x0(6) * I3;
        mp.Uk1.block<3, 3>(0, 0) = -h * h / 6.0 / x1(6) * I3;
        mp.Kk.block<3, 3>(0, 0) = -h * h / 3.0 * I3;
        mp.Kk1.block<3, 3>(0, 0) = -h * h / 6.0 * I3;
        mp.dt.segment<3>(0) = -x0.segment<3>(3) - h / 3.0 * (2.0 * a0 + a1);

        // Velocity rows.
        mp.Xk.block<3, 3>(3, 3) = -I3;
        mp.Xk.block<3, 7>(3, 0) -= 0.5 * h * ja0;
        mp.Xk1.block<3, 3>(3, 3) = I3;
        mp.Xk1.block<3, 7>(3, 0) -= 0.5 * h * ja1;
        mp.Uk.block<3, 3>(3, 0) = -0.5 * h / x0(6) * I3;
        mp.Uk1.block<3, 3>(3, 0) = -0.5 * h / x1(6) * I3;
        mp.Kk.block<3, 3>(3, 0) = -0.5 * h * I3;
        mp.Kk1.block<3, 3>(3, 0) = -0.5 * h * I3;
        mp.dt.segment<3>(3) = -0.5 * (a0 + a1);

        // Mass row.
        mp.Xk(6, 6) = -1.0;
        mp.Xk1(6, 6) = 1.0;
        mp.Uk(6, 3) = 0.5 * h * burn;
        mp.Uk1(6, 3) = 0.5 * h * burn;
        mp.dt(6) = 0.5 * (ref.Gamma[k] + ref.Gamma[k + 1]) * burn;

        // rhs = J z_ref - F(z_ref), with kappa_ref = 0.
        Eigen::Vector4d u0;
        Eigen::Vector4d u1;
        u0 << ref.T[k], ref.Gamma[k];
        u1 << ref.T[k + 1], ref.Gamma[k + 1];
        const StateVec f = interval_defect(x0, ref.T[k], ref.Gamma[k], x1, ref.T[k + 1], ref.Gamma[k + 1],
                                           h, Vec3::Zero(), Vec3::Zero(), p);
        mp.rhs = mp.Xk * x0 + mp.Xk1 * x1 + mp.Uk * u0 + mp.Uk1 * u1 + mp.dt * h - f;
    }
    return maps;
}

} // namespace apdg
