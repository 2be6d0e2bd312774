#include "apdg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "apdg/scvx.hpp"
#include "apdg/subproblem.hpp"
#include "socp/cones.hpp"
#include "socp/kkt.hpp"
#include "socp/sparse.hpp"

namespace apdg {

SparsityRow sparsity_row(const Scenario& scenario, int k_f, int repeats)
{
    Scenario sc = scenario;
    sc.weights.k_f = k_f;
    sc.validate();
    const Subproblem sub = build_subproblem(initial_guess(sc), sc.bc, sc.vehicle, sc.weights);
    const socp::SocpProblem& prob = sub.problem;

    SparsityRow row;
    row.k_f = k_f;
    row.drag = sc.vehicle.C_D > 0.0;
    row.n = prob.n();
    row.p = prob.p();
    row.l = sub.linear_constraints;
    row.m = sub.soc_constraints;

    // Both patterns are value independent; the symmetric point gives a valid scaling.
    const socp::Vec e = socp::unit_vector(prob.layout);
    const socp::NtScaling scaling = socp::compute_nt_scaling(prob.layout, e, e);
    const socp::KktSystem kkt(prob.A, prob.layout);
    row.dim_b = kkt.dim();
    row.nnz_b = kkt.nnz();
    const socp::SparseMat baseline = socp::build_normal_equations_baseline(prob.A, scaling);
    row.dim_baseline = static_cast<std::size_t>(baseline.rows());
    row.nnz_baseline = baseline.nnz_full();

    std::vector<double> times;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const Subproblem timed = build_subproblem(initial_guess(sc), sc.bc, sc.vehicle, sc.weights);
        socp::SolverSettings settings;
        settings.max_iterations = sc.weights.n_iter;
        const socp::SolveOutcome out =
            socp::solve(timed.problem, socp::cold_start(timed.problem.layout, timed.problem.p()), settings);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        row.status = out.status;
        row.iterations = out.iterations;
    }
    if (!times.empty()) {
        std::sort(times.begin(), times.end());
        row.median_seconds = times[times.size() / 2];
    }
    return row;
}

void write_sparsity_csv(std::ostream& out, const std::vector<SparsityRow>& rows)
{
    out << "k_f,drag,n,p,l,m,dim_B,nnz_B,dim_baseline,nnz_baseline,nnz_ratio,status,iterations,median_seconds\n";
    for (const SparsityRow& r : rows) {
        out << r.k_f << ',' << (r.drag ? 1 : 0) << ',' << r.n << ',' << r.p << ',' << r.l << ',' << r.m << ','
            << r.dim_b << ',' << r.nnz_b << ',' << r.dim_baseline << ',' << r.nnz_baseline << ','
            << socp::format_double(static_cast<double>(r.nnz_b) / static_cast<double>(r.nnz_baseline)) << ','
            << socp::to_string(r.status) << ',' << r.iterations << ',' << socp::format_double(r.median_seconds)
            << '\n';
    }
}

} // namespace apdg
