#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace apdg {

using Vec3 = Eigen::Vector3d;

/// Raised for invalid scenario data or a malformed config file.
class ScenarioError : public std::invalid_argument {
public:
    explicit ScenarioError(const std::string& what) : std::invalid_argument(what) {}
};

/// Everything is SI internally. The y axis points up (altitude r_y).
struct VehicleParams {
    double rho0 = 1.225;    // kg/m^3
    double c_rho = 1e-4;    // 1/m
    double S_ref = 10.0;    // m^2
    double C_D = 0.5;
    Vec3 g{0.0, -9.8, 0.0}; // m/s^2
    double g0 = 9.8;        // standard gravity in the fuel law
    double I_sp = 300.0;    // s
    double m_dry = 30000.0; // kg
    double v_max = 340.0;   // m/s
    double T_min = 300e3;   // N
    double T_max = 1000e3;
    double Tdot_min = -100e3; // N/s
    double Tdot_max = 100e3;
    double theta_T_max = 30.0 * 3.14159265358979323846 / 180.0; // rad
    double theta_gs = 80.0 * 3.14159265358979323846 / 180.0;    // rad, from vertical

    void validate() const;
};

struct BoundaryConditions {
    Vec3 r0{-1000.0, 4000.0, 500.0};
    Vec3 v0{-50.0, -200.0, -100.0};
    double m0 = 40000.0;
    double t_f0 = 35.0;

    /// Throws ScenarioError when m0 <= m_dry or r0 lies outside the glide slope.
    void validate(const VehicleParams& vehicle) const;
};

struct ScWeights {
    double w_m_f = 1.0;        // 1/kg
    double w_eta_dt = 0.1;     // 1/s
    double w_eta_T = 0.01e-3;  // 1/N (0.01 per kN)
    double w_kappa_aR = 5e5;   // s^2/m
    int k_f = 30;
    int k_fine = 300;
    double eps_r = 2.0;  // m
    double eps_v = 0.2;  // m/s
    int n_iter = 60;     // IPM iteration limit per subproblem

    void validate() const;
};

struct Scenario {
    VehicleParams vehicle;
    BoundaryConditions bc;
    ScWeights weights;

    void validate() const;
};

/// The sample landing scenario.
Scenario sample_scenario();

/**
 * Flat `key = value` text with the sample scenario's units: thrust in kN,
 * thrust rate in kN/s, w_eta_T per kN, angles in degrees. Vectors are three
 * numbers separated by spaces or commas. `#` starts a comment. Keys left out
 * keep their sample-scenario value; unknown or repeated keys are rejected.
 */
Scenario read_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const Scenario& scenario);

} // namespace apdg
