#include "apdg/scvx.hpp"

#include <algorithm>
#include <chrono>
#include <memory>

#include "apdg/subproblem.hpp"
#include "socp/error.hpp"
#include "socp/kkt.hpp"

namespace apdg {

ScOptions parse_mode(const std::string& text)
{
    ScOptions o;
    if (text == "cold") {
        o.mode = StartMode::Cold;
    } else if (text.rfind("warm:", 0) == 0) {
        o.mode = StartMode::Warm;
        const std::string num = text.substr(5);
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (num.empty() || used != num.size() || n < 1) {
            throw ScenarioError("mode: expected warm:N with N >= 1, got '" + text + "'");
        }
        o.warm_iterations = n;
    } else {
        throw ScenarioError("mode: expected cold or warm:N, got '" + text + "'");
    }
    o.max_steps = default_step_cap(o);
    return o;
}

std::string mode_name(const ScOptions& options)
{
    return options.mode == StartMode::Cold ? "cold" : "warm:" + std::to_string(options.warm_iterations);
}

int default_step_cap(const ScOptions& options)
{
    return options.mode == StartMode::Warm && options.warm_iterations == 1 ? 120 : 30;
}

TrajectoryIterate initial_guess(const Scenario& scenario)
{
    const auto& p = scenario.vehicle;
    const auto& bc = scenario.bc;
    const int kf = scenario.weights.k_f;
    TrajectoryIterate t;
    t.r.resize(kf + 1);
    t.v.resize(kf + 1);
    t.m.resize(kf + 1);
    t.T.resize(kf + 1);
    t.Gamma.resize(kf + 1);
    t.dt = bc.t_f0 / kf;
    for (int k = 0; k <= kf; ++k) {
        const double s = static_cast<double>(k) / kf;
        t.r[k] = (1.0 - s) * bc.r0;
        t.v[k] = (1.0 - s) * bc.v0;
        t.m[k] = bc.m0 + s * (p.m_dry - bc.m0);
        Vec3 thrust = -t.m[k] * p.g;
        const double mag = std::clamp(thrust.norm(), p.T_min, p.T_max);
        thrust *= mag / thrust.norm();
        t.T[k] = thrust;
        t.Gamma[k] = mag;
    }
    t.update_accelerations(p);
    return t;
}

ScResult sc_solve(const Scenario& scenario, const ScOptions& options)
{
    scenario.validate();
    if (options.max_steps < 1 || options.warm_iterations < 1) {
        throw ScenarioError("sc_solve: step cap and warm iteration cap must be positive");
    }
    using clock = std::chrono::steady_clock;
    const auto& p = scenario.vehicle;
    const auto& bc = scenario.bc;
    const auto& w = scenario.weights;

    socp::SolverSettings cold = options.solver;
    cold.max_iterations = w.n_iter;
    cold.iteration_cap.reset();
    socp::SolverSettings warm = cold;
    warm.iteration_cap = options.warm_iterations;

    ScResult result;
    TrajectoryIterate ref = initial_guess(scenario);
    std::unique_ptr<socp::KktSystem> kkt;
    socp::SolveOutcome previous;
    bool have_previous = false;

    for (int step = 1; step <= options.max_steps; ++step) {
        const auto start = clock::now();
        const Subproblem sub = build_subproblem(ref, bc, p, w);
        if (!kkt) {
            kkt = std::make_unique<socp::KktSystem>(sub.problem.A, sub.problem.layout, cold.kkt);
        }
        socp::SolveOutcome out;
        if (options.mode == StartMode::Warm && have_previous) {
            const socp::WarmStart ws = socp::warm_start(previous.x, previous.y, previous.s, sub.problem, warm);
            out = socp::solve(sub.problem, ws.state, warm, kkt.get());
        } else {
            out = socp::solve(sub.problem, socp::cold_start(sub.problem.layout, sub.problem.p()), cold,
                              kkt.get());
        }
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();

        ScStep st;
        st.step = step;
        st.status = out.status;
        st.iterations = out.iterations;
        st.factorizations = out.factorizations;
        st.kkt_solves = out.kkt_solves;
        st.seconds = seconds;
        result.total_iterations += out.iterations;
        result.total_factorizations += out.factorizations;
        result.total_kkt_solves += out.kkt_solves;
        result.seconds += seconds;

        if (!out.usable) {
            result.steps.push_back(st);
            result.message = "SC step " + std::to_string(step) + ": subproblem " +
                             socp::to_string(out.status) + (out.message.empty() ? "" : " (" + out.message + ")");
            return result;
        }
        ref = extract_trajectory(sub, out.x, bc, p);
        st.objective = physical_objective(sub, out.x);
        st.dt = ref.dt;
        st.kappa_max = ref.kappa_max;
        bool valid = ref.dt > 0.0;
        for (const double m : ref.m) {
            valid = valid && m > 0.0;
        }
        if (!valid) {
            result.steps.push_back(st);
            result.message = "SC step " + std::to_string(step) + ": subproblem point has non-positive mass or time step";
            return result;
        }
        const Verification ver = verify_fine_grid(ref, bc, p, w);
        st.r_err = ver.r_err;
        st.v_err = ver.v_err;
        st.fuel_remaining = ver.fuel_remaining;
        result.steps.push_back(st);
        result.trajectory = ref;
        result.verification = ver;
        previous = std::move(out);
        have_previous = true;

        if (ver.feasible && ver.r_err <= w.eps_r && ver.v_err <= w.eps_v) {
            result.success = true;
            result.verification = verify_fine_grid(ref, bc, p, w, true);
            return result;
        }
    }
    result.message = "SC step cap of " + std::to_string(options.max_steps) + " exceeded";
    return result;
}

} // namespace apdg
