#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "apdg/bench.hpp"
#include "apdg/montecarlo.hpp"
#include "apdg/params.hpp"
#include "apdg/scvx.hpp"
#include "socp/error.hpp"
#include "socp/ipm.hpp"
#include "socp/problem.hpp"
#include "socp/sparse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitFailure = 3;
constexpr int kExitUsage = 64;

using socp::format_double;
namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void write_vector(std::ostream& out, const char* name, const socp::Vec& v)
{
    out << name;
    for (const double x : v) {
        out << ' ' << format_double(x);
    }
    out << '\n';
}

struct SolveArgs {
    std::string problem;
    std::string out;
    socp::SolverSettings settings;
};

int cmd_solve(const SolveArgs& args)
{
    socp::SocpProblem prob;
    try {
        std::ifstream in(args.problem);
        if (!in) {
            std::cerr << "solve: cannot open " << args.problem << '\n';
            return kExitUsage;
        }
        prob = socp::read_problem(in);
        args.settings.validate();
    } catch (const std::exception& e) {
        std::cerr << "solve: " << e.what() << '\n';
        return kExitUsage;
    }
    const socp::SolveOutcome r = socp::solve(prob, socp::cold_start(prob.layout, prob.p()), args.settings);

    std::ostringstream text;
    text << "status " << socp::to_string(r.status) << '\n'
         << "objective " << format_double(r.objective) << '\n'
         << "iterations " << r.iterations << '\n'
         << "primal_residual " << format_double(r.primal_residual) << '\n'
         << "dual_residual " << format_double(r.dual_residual) << '\n'
         << "gap " << format_double(r.gap) << '\n';
    write_vector(text, "x", r.x);
    write_vector(text, "y", r.y);
    write_vector(text, "s", r.s);
    if (args.out.empty()) {
        std::cout << text.str();
    } else {
        open_out(args.out) << text.str();
        std::cout << socp::to_string(r.status) << ", objective " << format_double(r.objective) << ", "
                  << r.iterations << " iterations\n";
    }
    if (!r.message.empty()) {
        std::cerr << "solve: " << r.message << '\n';
    }
    switch (r.status) {
    case socp::SolveStatus::Optimal:
        return kExitOk;
    case socp::SolveStatus::PrimalInfeasible:
    case socp::SolveStatus::DualInfeasible:
        return kExitInfeasible;
    default:
        return kExitFailure;
    }
}

struct LandArgs {
    std::string config;
    std::string mode = "cold";
    std::string out = ".";
    int max_steps = 0;
};

void write_land_files(const fs::path& dir, const apdg::ScResult& res, const apdg::ScOptions& options)
{
    {
        auto out = open_out(dir / "steps.csv");
        out << "step,status,iterations,factorizations,kkt_solves,seconds,objective,dt,kappa_max,r_err,v_err,"
               "fuel_remaining\n";
        for (const apdg::ScStep& s : res.steps) {
            out << s.step << ',' << socp::to_string(s.status) << ',' << s.iterations << ',' << s.factorizations
                << ',' << s.kkt_solves << ',' << format_double(s.seconds) << ',' << format_double(s.objective)
                << ',' << format_double(s.dt) << ',' << format_double(s.kappa_max) << ','
                << format_double(s.r_err) << ',' << format_double(s.v_err) << ','
                << format_double(s.fuel_remaining) << '\n';
        }
    }
    {
        auto out = open_out(dir / "summary.csv");
        out << "mode,success,sc_steps,ipm_iterations,factorizations,kkt_solves,seconds,r_err,v_err,"
               "fuel_remaining,message\n";
        out << apdg::mode_name(options) << ',' << (res.success ? 1 : 0) << ',' << res.steps.size() << ','
            << res.total_iterations << ',' << res.total_factorizations << ',' << res.total_kkt_solves << ','
            << format_double(res.seconds) << ',' << format_double(res.verification.r_err) << ','
            << format_double(res.verification.v_err) << ',' << format_double(res.verification.fuel_remaining)
            << ",\"" << res.message << "\"\n";
    }
    const apdg::TrajectoryIterate& t = res.trajectory;
    if (t.nodes() > 0) {
        auto out = open_out(dir / "nodes.csv");
        out << "t,rx,ry,rz,vx,vy,vz,m,Tx,Ty,Tz,Gamma\n";
        for (std::size_t k = 0; k < t.nodes(); ++k) {
            out << format_double(static_cast<double>(k) * t.dt);
            for (const auto* v : {&t.r[k], &t.v[k]}) {
                out << ',' << format_double(v->x()) << ',' << format_double(v->y()) << ',' << format_double(v->z());
            }
            out << ',' << format_double(t.m[k]) << ',' << format_double(t.T[k].x()) << ','
                << format_double(t.T[k].y()) << ',' << format_double(t.T[k].z()) << ','
                << format_double(t.Gamma[k]) << '\n';
        }
    }
    const auto& samples = res.verification.samples;
    if (samples.empty()) {
        return;
    }
    auto traj = open_out(dir / "trajectory.csv");
    auto vel = open_out(dir / "velocity.csv");
    auto thrust = open_out(dir / "thrust.csv");
    auto mass = open_out(dir / "mass.csv");
    traj << "t,rx,ry,rz,vx,vy,vz,m,Tx,Ty,Tz,Gamma\n";
    vel << "t,vx,vy,vz,speed\n";
    thrust << "t,magnitude_kN,tilt_deg,azimuth_deg\n";
    mass << "t,m\n";
    constexpr double deg = 180.0 / std::numbers::pi;
    for (const apdg::FineSample& s : samples) {
        const std::string t_s = format_double(s.t);
        traj << t_s << ',' << format_double(s.r.x()) << ',' << format_double(s.r.y()) << ','
             << format_double(s.r.z()) << ',' << format_double(s.v.x()) << ',' << format_double(s.v.y()) << ','
             << format_double(s.v.z()) << ',' << format_double(s.m) << ',' << format_double(s.T.x()) << ','
             << format_double(s.T.y()) << ',' << format_double(s.T.z()) << ',' << format_double(s.Gamma) << '\n';
        vel << t_s << ',' << format_double(s.v.x()) << ',' << format_double(s.v.y()) << ','
            << format_double(s.v.z()) << ',' << format_double(s.v.norm()) << '\n';
        const double mag = s.T.norm();
        const double tilt = mag > 0.0 ? std::acos(std::clamp(s.T.y() / mag, -1.0, 1.0)) * deg : 0.0;
        const double azimuth = std::atan2(s.T.z(), s.T.x()) * deg;
        thrust << t_s << ',' << format_double(mag / 1e3) << ',' << format_double(tilt) << ','
               << format_double(azimuth) << '\n';
        mass << t_s << ',' << format_double(s.m) << '\n';
    }
}

int cmd_land(const LandArgs& args)
{
    apdg::Scenario sc;
    apdg::ScOptions options;
    try {
        sc = apdg::load_scenario(args.config);
        options = apdg::parse_mode(args.mode);
        if (args.max_steps > 0) {
            options.max_steps = args.max_steps;
        }
        fs::create_directories(args.out);
    } catch (const std::exception& e) {
        std::cerr << "land: " << e.what() << '\n';
        return kExitUsage;
    }
    const apdg::ScResult res = apdg::sc_solve(sc, options);
    write_land_files(args.out, res, options);

    std::cout << "mode " << apdg::mode_name(options) << '\n'
              << "success " << (res.success ? "yes" : "no") << '\n'
              << "sc_steps " << res.steps.size() << '\n'
              << "ipm_iterations " << res.total_iterations << '\n'
              << "factorizations " << res.total_factorizations << '\n'
              << "run_time_ms " << res.seconds * 1e3 << '\n'
              << "position_error_m " << res.verification.r_err << '\n'
              << "velocity_error_m_s " << res.verification.v_err << '\n'
              << "fuel_remaining_kg " << res.verification.fuel_remaining << '\n';
    if (!res.success) {
        std::cerr << "land: " << res.message << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

struct MonteCarloArgs {
    std::string config;
    std::string mode = "cold";
    std::string out = ".";
    std::uint64_t runs = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool timing = false;
    apdg::NoiseSigma sigma;
};

int cmd_montecarlo(const MonteCarloArgs& args)
{
    apdg::Scenario sc;
    apdg::ScOptions options;
    try {
        sc = apdg::load_scenario(args.config);
        options = apdg::parse_mode(args.mode);
        if (args.runs < 1) {
            throw apdg::ScenarioError("--runs must be at least 1");
        }
        if (!(args.sigma.r >= 0.0 && args.sigma.v >= 0.0 && args.sigma.m >= 0.0)) {
            throw apdg::ScenarioError("noise sigmas must be non-negative");
        }
        fs::create_directories(args.out);
    } catch (const std::exception& e) {
        std::cerr << "montecarlo: " << e.what() << '\n';
        return kExitUsage;
    }
    const std::vector<apdg::RunRow> rows = apdg::run_batch(sc, options, args.sigma, args.runs, args.seed, args.threads);
    const apdg::BatchSummary summary = apdg::summarize(rows);
    {
        auto out = open_out(fs::path(args.out) / "runs.csv");
        apdg::write_runs_csv(out, rows, args.timing);
    }
    {
        auto out = open_out(fs::path(args.out) / "summary.csv");
        apdg::write_summary_csv(out, summary, args.timing);
    }
    std::cout << "mode " << apdg::mode_name(options) << '\n'
              << "runs " << summary.runs << '\n'
              << "success_rate " << summary.success_rate << '\n'
              << "mean_run_time_ms " << summary.mean_seconds * 1e3 << '\n'
              << "mean_sc_steps " << summary.mean_sc_steps << '\n'
              << "mean_fuel_remaining_kg " << summary.mean_fuel << '\n';
    return kExitOk;
}

struct BenchArgs {
    std::string config;
    std::string out;
    std::vector<int> k_f{30, 50, 100, 200, 300, 400};
    int repeats = 3;
};

int cmd_bench(const BenchArgs& args)
{
    apdg::Scenario sc;
    try {
        sc = apdg::load_scenario(args.config);
        for (const int k : args.k_f) {
            if (k < 2) {
                throw apdg::ScenarioError("k_f values must be at least 2");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "bench-sparsity: " << e.what() << '\n';
        return kExitUsage;
    }
    apdg::Scenario no_drag = sc;
    no_drag.vehicle.C_D = 0.0;
    std::vector<apdg::SparsityRow> rows;
    for (const apdg::Scenario* variant : {&sc, &no_drag}) {
        for (const int k : args.k_f) {
            rows.push_back(apdg::sparsity_row(*variant, k, args.repeats));
        }
    }
    if (args.out.empty()) {
        apdg::write_sparsity_csv(std::cout, rows);
    } else {
        auto out = open_out(args.out);
        apdg::write_sparsity_csv(out, rows);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Powered-descent guidance by successive convexification, and a standalone SOCP solver"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve a standard-form problem file");
    solve->add_option("problem", solve_args.problem, "Problem file")->required();
    solve->add_option("--out", solve_args.out, "Solution file (default: stdout)");
    solve->add_option("--max-iter", solve_args.settings.max_iterations, "Iteration limit");
    solve->add_option("--eps-feas", solve_args.settings.eps_feas, "Feasibility tolerance");
    solve->add_option("--eps-gap", solve_args.settings.eps_gap, "Gap tolerance");
    solve->add_option("--eps-inf", solve_args.settings.eps_inf, "Infeasibility tolerance");

    LandArgs land_args;
    auto* land = app.add_subcommand("land", "Solve a landing scenario");
    land->add_option("config", land_args.config, "Scenario config")->required();
    land->add_option("--mode", land_args.mode, "cold or warm:N")->capture_default_str();
    land->add_option("--out", land_args.out, "Output directory")->capture_default_str();
    land->add_option("--max-steps", land_args.max_steps, "SC step cap (default 120 for warm:1, else 30)");

    MonteCarloArgs mc_args;
    auto* mc = app.add_subcommand("montecarlo", "Solve a batch of perturbed scenarios");
    mc->add_option("config", mc_args.config, "Scenario config")->required();
    mc->add_option("--runs", mc_args.runs, "Number of runs")->capture_default_str();
    mc->add_option("--seed", mc_args.seed, "Generator seed")->capture_default_str();
    mc->add_option("--mode", mc_args.mode, "cold or warm:N")->capture_default_str();
    mc->add_option("--out", mc_args.out, "Output directory")->capture_default_str();
    mc->add_option("--threads", mc_args.threads, "Workers (0: one per core)")->capture_default_str();
    mc->add_option("--sigma-r", mc_args.sigma.r, "Position noise per component, m")->capture_default_str();
    mc->add_option("--sigma-v", mc_args.sigma.v, "Velocity noise per component, m/s")->capture_default_str();
    mc->add_option("--sigma-m", mc_args.sigma.m, "Initial mass noise, kg")->capture_default_str();
    mc->add_flag("--timing", mc_args.timing, "Add wall times (makes the reports nondeterministic)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench-sparsity", "Compare Newton-system sparsity across problem sizes");
    bench->add_option("config", bench_args.config, "Scenario config")->required();
    bench->add_option("--out", bench_args.out, "CSV file (default: stdout)");
    bench->add_option("--kf", bench_args.k_f, "Node counts")->capture_default_str();
    bench->add_option("--repeats", bench_args.repeats, "Timed solves per size, median reported")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve->parsed()) {
            return cmd_solve(solve_args);
        }
        if (land->parsed()) {
            return cmd_land(land_args);
        }
        if (mc->parsed()) {
            return cmd_montecarlo(mc_args);
        }
        return cmd_bench(bench_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
