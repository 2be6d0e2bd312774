#include "apdg/params.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

namespace apdg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<double> parse_numbers(const std::string& key, const std::string& text)
{
    std::string cleaned = text;
    for (char& ch : cleaned) {
        if (ch == ',' || ch == '[' || ch == ']') {
            ch = ' ';
        }
    }
    std::istringstream in(cleaned);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || !std::isfinite(v)) {
            throw ScenarioError("config: bad number '" + token + "' for key " + key);
        }
        out.push_back(v);
    }
    return out;
}

double scalar(const std::string& key, const std::string& text)
{
    const auto v = parse_numbers(key, text);
    if (v.size() != 1) {
        throw ScenarioError("config: key " + key + " expects one number");
    }
    return v[0];
}

Vec3 vector3(const std::string& key, const std::string& text)
{
    const auto v = parse_numbers(key, text);
    if (v.size() != 3) {
        throw ScenarioError("config: key " + key + " expects three numbers");
    }
    return {v[0], v[1], v[2]};
}

int integer(const std::string& key, const std::string& text)
{
    const double v = scalar(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ScenarioError("config: key " + key + " expects an integer");
    }
    return static_cast<int>(v);
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

void VehicleParams::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ScenarioError(std::string("vehicle: ") + name + " must be positive");
        }
    };
    positive(rho0, "rho0");
    positive(c_rho, "c_rho");
    positive(S_ref, "S_ref");
    positive(g0, "g0");
    positive(I_sp, "I_sp");
    positive(m_dry, "m_dry");
    positive(v_max, "v_max");
    positive(T_min, "T_min");
    positive(T_max, "T_max");
    if (!(C_D >= 0.0)) {
        throw ScenarioError("vehicle: C_D must be non-negative");
    }
    if (!g.allFinite() || !(g.y() < 0.0)) {
        throw ScenarioError("vehicle: gravity must point down the y axis");
    }
    if (!(T_min < T_max)) {
        throw ScenarioError("vehicle: T_min must be below T_max");
    }
    if (!(Tdot_min < 0.0 && Tdot_max > 0.0)) {
        throw ScenarioError("vehicle: thrust rate bounds must bracket zero");
    }
    if (!(theta_T_max > 0.0 && theta_T_max < std::numbers::pi / 2)) {
        throw ScenarioError("vehicle: theta_T_max must lie in (0, 90) degrees");
    }
    if (!(theta_gs > 0.0 && theta_gs < std::numbers::pi / 2)) {
        throw ScenarioError("vehicle: theta_gs must lie in (0, 90) degrees");
    }
}

void BoundaryConditions::validate(const VehicleParams& vehicle) const
{
    if (!r0.allFinite() || !v0.allFinite() || !std::isfinite(m0) || !(t_f0 > 0.0)) {
        throw ScenarioError("boundary: non-finite data or non-positive t_f0");
    }
    if (!(m0 > vehicle.m_dry)) {
        throw ScenarioError("boundary: m0 must exceed m_dry");
    }
    if (std::hypot(r0.x(), r0.z()) >= std::tan(vehicle.theta_gs) * r0.y()) {
        throw ScenarioError("boundary: r0 lies outside the glide-slope cone");
    }
}

void ScWeights::validate() const
{
    if (!(w_m_f > 0.0 && w_eta_dt > 0.0 && w_eta_T > 0.0 && w_kappa_aR > 0.0)) {
        throw ScenarioError("weights: all weights must be positive");
    }
    if (k_f < 2 || k_fine < 1 || n_iter < 1) {
        throw ScenarioError("weights: k_f >= 2, k_fine >= 1 and N_iter >= 1 required");
    }
    if (!(eps_r >= 0.0 && eps_v >= 0.0)) {
        throw ScenarioError("weights: error bounds must be non-negative");
    }
}

void Scenario::validate() const
{
    vehicle.validate();
    bc.validate(vehicle);
    weights.validate();
}

Scenario sample_scenario()
{
    return Scenario{};
}

Scenario read_scenario(std::istream& in)
{
    Scenario sc = sample_scenario();
    VehicleParams& p = sc.vehicle;
    BoundaryConditions& bc = sc.bc;
    ScWeights& w = sc.weights;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"rho0", [&](auto& k, auto& v) { p.rho0 = scalar(k, v); }},
        {"c_rho", [&](auto& k, auto& v) { p.c_rho = scalar(k, v); }},
        {"S_ref", [&](auto& k, auto& v) { p.S_ref = scalar(k, v); }},
        {"C_D", [&](auto& k, auto& v) { p.C_D = scalar(k, v); }},
        {"g", [&](auto& k, auto& v) { p.g = vector3(k, v); }},
        {"m_dry", [&](auto& k, auto& v) { p.m_dry = scalar(k, v); }},
        {"I_sp", [&](auto& k, auto& v) { p.I_sp = scalar(k, v); }},
        {"v_max", [&](auto& k, auto& v) { p.v_max = scalar(k, v); }},
        {"m0", [&](auto& k, auto& v) { bc.m0 = scalar(k, v); }},
        {"t_f0", [&](auto& k, auto& v) { bc.t_f0 = scalar(k, v); }},
        {"r0", [&](auto& k, auto& v) { bc.r0 = vector3(k, v); }},
        {"v0", [&](auto& k, auto& v) { bc.v0 = vector3(k, v); }},
        {"T_min", [&](auto& k, auto& v) { p.T_min = 1e3 * scalar(k, v); }},
        {"T_max", [&](auto& k, auto& v) { p.T_max = 1e3 * scalar(k, v); }},
        {"Tdot_min", [&](auto& k, auto& v) { p.Tdot_min = 1e3 * scalar(k, v); }},
        {"Tdot_max", [&](auto& k, auto& v) { p.Tdot_max = 1e3 * scalar(k, v); }},
        {"theta_T_max_deg", [&](auto& k, auto& v) { p.theta_T_max = kDeg * scalar(k, v); }},
        {"theta_gs_deg", [&](auto& k, auto& v) { p.theta_gs = kDeg * scalar(k, v); }},
        {"N_iter", [&](auto& k, auto& v) { w.n_iter = integer(k, v); }},
        {"k_f", [&](auto& k, auto& v) { w.k_f = integer(k, v); }},
        {"w_m_f", [&](auto& k, auto& v) { w.w_m_f = scalar(k, v); }},
        {"w_eta_dt", [&](auto& k, auto& v) { w.w_eta_dt = scalar(k, v); }},
        {"w_eta_T", [&](auto& k, auto& v) { w.w_eta_T = 1e-3 * scalar(k, v); }},
        {"w_kappa_aR", [&](auto& k, auto& v) { w.w_kappa_aR = scalar(k, v); }},
        {"k_fine", [&](auto& k, auto& v) { w.k_fine = integer(k, v); }},
        {"eps_r", [&](auto& k, auto& v) { w.eps_r = scalar(k, v); }},
        {"eps_v", [&](auto& k, auto& v) { w.eps_v = scalar(k, v); }},
    };

    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ScenarioError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ScenarioError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            throw ScenarioError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        }
        it->second(key, value);
    }
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open config " + path);
    }
    return read_scenario(in);
}

void write_scenario(std::ostream& out, const Scenario& sc)
{
    const auto& p = sc.vehicle;
    const auto& bc = sc.bc;
    const auto& w = sc.weights;
    auto vec = [](const Vec3& v) {
        std::ostringstream s;
        s.precision(17);
        s << v.x() << ' ' << v.y() << ' ' << v.z();
        return s.str();
    };
    const auto old = out.precision(17);
    out << "rho0 = " << p.rho0 << " # kg/m^3\n"
        << "c_rho = " << p.c_rho << " # 1/m\n"
        << "S_ref = " << p.S_ref << " # m^2\n"
        << "C_D = " << p.C_D << '\n'
        << "g = " << vec(p.g) << " # m/s^2\n"
        << "m_dry = " << p.m_dry << " # kg\n"
        << "I_sp = " << p.I_sp << " # s\n"
        << "v_max = " << p.v_max << " # m/s\n"
        << "m0 = " << bc.m0 << " # kg\n"
        << "t_f0 = " << bc.t_f0 << " # s\n"
        << "r0 = " << vec(bc.r0) << " # m\n"
        << "v0 = " << vec(bc.v0) << " # m/s\n"
        << "T_min = " << p.T_min / 1e3 << " # kN\n"
        << "T_max = " << p.T_max / 1e3 << " # kN\n"
        << "Tdot_min = " << p.Tdot_min / 1e3 << " # kN/s\n"
        << "Tdot_max = " << p.Tdot_max / 1e3 << " # kN/s\n"
        << "theta_T_max_deg = " << p.theta_T_max / kDeg << '\n'
        << "theta_gs_deg = " << p.theta_gs / kDeg << '\n'
        << "N_iter = " << w.n_iter << '\n'
        << "k_f = " << w.k_f << '\n'
        << "w_m_f = " << w.w_m_f << " # 1/kg\n"
        << "w_eta_dt = " << w.w_eta_dt << " # 1/s\n"
        << "w_eta_T = " << w.w_eta_T * 1e3 << " # 1/kN\n"
        << "w_kappa_aR = " << w.w_kappa_aR << " # s^2/m\n"
        << "k_fine = " << w.k_fine << '\n'
        << "eps_r = " << w.eps_r << " # m\n"
        << "eps_v = " << w.eps_v << " # m/s\n";
    out.precision(old);
}

} // namespace apdg
