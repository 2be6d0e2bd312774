// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "apdg/bench.hpp"
#include "apdg/dynamics.hpp"
#include "apdg/montecarlo.hpp"
#include "apdg/scvx.hpp"
#include "socp/cones.hpp"
#include "socp/ipm.hpp"
#include "socp/kkt.hpp"
#include "socp/ldl.hpp"
#include "support/corpus.hpp"
#include "support/dense_reference.hpp"

using namespace socp;
using namespace testing_support;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail)
{
    std::printf("%s [PRIMARY] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

double inf_norm(std::span<const double> v)
{
    double m = 0.0;
    for (const double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

constexpr int kCorpus = 200;

struct CorpusStats {
    int solved = 0;
    double worst_objective = 0.0;
    double worst_residual = 0.0;
    std::size_t newton_solves = 0;
    double worst_newton = 0.0;     ///< |B0 u - w0| / (1 + |w0|)
    std::size_t dense_solves = 0;         ///< n <= 30
    double worst_dense_gap = 0.0;         ///< |u - u_dense| / (1 + |u_dense|)
    double worst_conditioned_gap = 0.0;   ///< same, restricted to cond(B0) <= 1e6
    double worst_cond = 0.0;
    bool interior = true;
    std::string first_problem;
};

CorpusStats run_corpus()
{
    CorpusStats st;
    for (int seed = 1; seed <= kCorpus; ++seed) {
        const SocpProblem prob = random_feasible_socp(static_cast<std::uint64_t>(seed));
        SolverSettings settings;
        settings.on_newton = [&](const NewtonEvent& ev) {
            const Vec w0 = ev.rhs.w0();
            const double res = newton_residual(ev.problem, ev.scaling, ev.rhs, ev.direction);
            st.worst_newton = std::max(st.worst_newton, res / (1.0 + inf_norm(w0)));
            ++st.newton_solves;
            if (prob.n() > 30) {
                return;
            }
            const Eigen::MatrixXd b0 = dense_newton_matrix(ev.problem, ev.scaling, ev.rhs);
            const Eigen::VectorXd ref =
                b0.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(w0.data(), static_cast<Eigen::Index>(w0.size())));
            const Eigen::VectorXd got = stack(ev.direction);
            const double gap = (got - ref).lpNorm<Eigen::Infinity>() / (1.0 + ref.lpNorm<Eigen::Infinity>());
            const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(b0).singularValues();
            const double cond = sv(0) / sv(sv.size() - 1);
            st.worst_dense_gap = std::max(st.worst_dense_gap, gap);
            st.worst_cond = std::max(st.worst_cond, cond);
            if (cond <= 1e6) {
                st.worst_conditioned_gap = std::max(st.worst_conditioned_gap, gap);
            }
            ++st.dense_solves;
        };
        settings.on_iteration = [&](const IterationEvent& ev) {
            st.interior = st.interior && in_cone(prob.layout, ev.state.x, true) &&
                          in_cone(prob.layout, ev.state.s, true) && ev.state.tau > 0.0 && ev.state.kappa > 0.0;
        };
        const SolveOutcome r = solve(prob, cold_start(prob.layout, prob.p()), settings);
        const DenseResult ref = dense_reference_solve(prob);
        const bool ok = r.status == SolveStatus::Optimal && ref.optimal;
        if (ok) {
            ++st.solved;
            st.worst_objective = std::max(st.worst_objective,
                                          std::abs(r.objective - ref.objective) / (1.0 + std::abs(ref.objective)));
            st.worst_residual = std::max({st.worst_residual, r.primal_residual, r.dual_residual});
        } else if (st.first_problem.empty()) {
            st.first_problem = "seed " + std::to_string(seed) + ": " + to_string(r.status) +
                               (ref.optimal ? "" : ", dense reference not optimal");
        }
    }
    return st;
}

void criterion_1_2(const CorpusStats& st)
{
    const bool ok1 = st.solved == kCorpus && st.worst_objective <= 1e-6 && st.worst_residual <= 1e-8;
    report(1, ok1, "solver correctness corpus",
           std::to_string(st.solved) + "/" + std::to_string(kCorpus) + " optimal" +
               fmt(", worst objective rel %.2e, worst residual %.2e", st.worst_objective, st.worst_residual) +
               (st.first_problem.empty() ? "" : "; " + st.first_problem));
    const bool ok2 = st.newton_solves > 0 && st.worst_newton <= 1e-9 && st.worst_dense_gap <= 1e-8;
    report(2, ok2, "Newton-system oracle",
           std::to_string(st.newton_solves) + " solves" + fmt(", worst |B0 u - w0| %.2e (<= 1e-9); ", st.worst_newton) +
               std::to_string(st.dense_solves) + " dense comparisons on n <= 30" +
               fmt(", worst gap %.2e (<= 1e-8), %.2e where cond(B0) <= 1e6, max cond(B0) %.1e", st.worst_dense_gap,
                   st.worst_conditioned_gap, st.worst_cond));
}

void criterion_3()
{
    std::mt19937_64 rng(3);
    double worst = 0.0;
    bool rule = true;
    for (std::size_t nk = 2; nk <= 16; ++nk) {
        const ConeLayout layout(0, {nk});
        std::vector<Triplet> t;
        for (std::size_t j = 0; j < nk; ++j) {
            t.push_back({0, static_cast<std::int32_t>(j), 1.0 + static_cast<double>(j)});
        }
        KktSystem sys(SparseMat::from_triplets(1, static_cast<std::int32_t>(nk), t, false), layout);
        rule = rule && (KktSystem::is_sparsified(nk) == (nk >= 4)) && (sys.aux_count() == (nk >= 4 ? 1u : 0u));
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_interior(layout, rng);
            const Vec s = random_interior(layout, rng);
            const NtScaling scal = compute_nt_scaling(layout, x, s);
            sys.assemble(scal, Vec{0}, Vec(nk, 0.0), 1.0);
            const auto len = static_cast<std::int32_t>(nk + sys.aux_count());
            const Eigen::MatrixXd blk = dense_block(sys.matrix(), sys.s_row(0), len);
            const Eigen::MatrixXd d = dense_d(layout, Eigen::Map<const Eigen::VectorXd>(x.data(), nk),
                                              Eigen::Map<const Eigen::VectorXd>(s.data(), nk));
            const Vec hv = random_vec(nk, rng);
            const Eigen::Map<const Eigen::VectorXd> h(hv.data(), static_cast<Eigen::Index>(nk));
            // Dense: D^2 u = D^2 h has solution h; arrow block: same first nk rows.
            Eigen::VectorXd r = Eigen::VectorXd::Zero(len);
            r.head(static_cast<Eigen::Index>(nk)) = d * d * h;
            const Eigen::VectorXd arrow = blk.fullPivLu().solve(r);
            const Eigen::VectorXd dense = (d * d).fullPivLu().solve(r.head(static_cast<Eigen::Index>(nk)));
            const double err = (arrow.head(static_cast<Eigen::Index>(nk)) - dense).lpNorm<Eigen::Infinity>();
            worst = std::max(worst, err / (1.0 + dense.lpNorm<Eigen::Infinity>()));
        }
    }
    report(3, rule && worst <= 1e-10, "SOC sparsification equivalence",
           fmt("dims 2-16 x 100 scalings, worst rel gap %.2e (<= 1e-10), ", worst) +
               (rule ? "lifted iff dim >= 4" : "threshold rule violated"));
}

apdg::ScResult criterion_4()
{
    const apdg::Scenario sc = apdg::sample_scenario();
    const auto start = std::chrono::steady_clock::now();
    const apdg::ScResult res = apdg::sc_solve(sc, apdg::parse_mode("cold"));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& v = res.verification;
    const bool ok = res.success && v.r_err <= 2.0 && v.v_err <= 0.2 &&
                    std::abs(v.fuel_remaining - 3123.9) <= 0.05 * 3123.9 && res.steps.size() <= 6;
    report(4, ok, "sample scenario, cold mode",
           fmt("r_err %.3f m, v_err %.4f m/s, fuel %.1f kg, ", v.r_err, v.v_err, v.fuel_remaining) +
               std::to_string(res.steps.size()) + " SC steps" + fmt(", %.3f s", secs) +
               (res.success ? "" : "; " + res.message));
    return res;
}

void criterion_5(const apdg::ScResult& cold)
{
    const apdg::ScResult res = apdg::sc_solve(apdg::sample_scenario(), apdg::parse_mode("warm:1"));
    bool one_each = res.steps.size() >= 1;
    for (std::size_t i = 1; i < res.steps.size(); ++i) {
        one_each = one_each && res.steps[i].iterations == 1;
    }
    const auto& v = res.verification;
    const bool ok = res.success && v.r_err <= 2.0 && v.v_err <= 0.2 && res.steps.size() <= 120 && one_each &&
                    res.total_factorizations < cold.total_factorizations;
    report(5, ok, "warm start with 1 IPM iteration",
           std::to_string(res.steps.size()) + " SC steps, " + (one_each ? "1 iteration per later subproblem" : "iteration cap violated") +
               fmt(", r_err %.3f m, v_err %.4f m/s, ", v.r_err, v.v_err) + "factorizations " +
               std::to_string(res.total_factorizations) + " vs cold " + std::to_string(cold.total_factorizations) +
               (res.success ? "" : "; " + res.message));
}

void criterion_6()
{
    const apdg::Scenario sc = apdg::sample_scenario();
    const apdg::SparsityRow r30 = apdg::sparsity_row(sc, 30, 0);
    const apdg::SparsityRow r100 = apdg::sparsity_row(sc, 100, 0);
    auto within = [](std::size_t got, double want) { return std::abs(static_cast<double>(got) - want) <= 0.1 * want; };
    const bool sizes = within(r30.n, 870) && within(r30.l, 281) && within(r30.m, 155) && within(r100.n, 2830) &&
                       within(r100.l, 911) && within(r100.m, 505);
    const bool ok = r30.drag && static_cast<double>(r30.nnz_b) < 0.4 * static_cast<double>(r30.nnz_baseline) &&
                    r30.dim_b > r30.dim_baseline && sizes;
    std::ostringstream d;
    d << "k_f 30: nnz(B) " << r30.nnz_b << " vs baseline " << r30.nnz_baseline << ", dim(B) " << r30.dim_b
      << " vs " << r30.dim_baseline << "; sizes n/l/m " << r30.n << '/' << r30.l << '/' << r30.m << " and "
      << r100.n << '/' << r100.l << '/' << r100.m;
    report(6, ok, "sparsity contrast and problem sizes", d.str());
}

void criterion_7()
{
    const apdg::Scenario sc = apdg::sample_scenario();
    const apdg::NoiseSigma sigma;
    const std::uint64_t seed = 1;
    const auto cold = apdg::summarize(apdg::run_batch(sc, apdg::parse_mode("cold"), sigma, 100, seed));
    const auto warm = apdg::summarize(apdg::run_batch(sc, apdg::parse_mode("warm:1"), sigma, 100, seed));
    auto fuel_ok = [](double f) { return std::abs(f - 2950.0) <= 0.1 * 2950.0; };
    const bool ok = cold.success_rate >= 0.70 && warm.success_rate >= 0.65 && fuel_ok(cold.mean_fuel) &&
                    fuel_ok(warm.mean_fuel);
    report(7, ok, "Monte Carlo, 100 runs per mode",
           fmt("cold %.0f%% (>= 70%%) mean fuel %.1f kg, warm:1 %.0f%% (>= 65%%) mean fuel %.1f kg", 100.0 * cold.success_rate,
               cold.mean_fuel, 100.0 * warm.success_rate, warm.mean_fuel));
}

void criterion_8(const CorpusStats& corpus)
{
    std::mt19937_64 rng(8);
    std::ostringstream d;
    bool ok = true;

    // Cone algebra round trips and the NT identity.
    double round_trip = 0.0;
    double nt = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> dims;
        for (int k = 0; k < 1 + trial % 4; ++k) {
            dims.push_back(2 + static_cast<std::size_t>((trial + 3 * k) % 7));
        }
        const ConeLayout layout(static_cast<std::size_t>(trial % 5), dims);
        const Vec x = random_interior(layout, rng);
        const Vec s = random_interior(layout, rng);
        const Vec v = random_vec(layout.dim(), rng);
        const Vec back = arrow_solve(layout, x, arrow_apply(layout, x, v));
        const NtScaling scal = compute_nt_scaling(layout, x, s);
        const Vec dv = apply_scaling(scal, v, ScalingMode::D);
        const Vec v2 = apply_scaling(scal, dv, ScalingMode::DInverse);
        const Vec xb = apply_scaling(scal, x, ScalingMode::DInverse);
        const Vec sb = apply_scaling(scal, s, ScalingMode::D);
        for (std::size_t i = 0; i < v.size(); ++i) {
            round_trip = std::max({round_trip, std::abs(back[i] - v[i]) / (1.0 + inf_norm(v)),
                                   std::abs(v2[i] - v[i]) / (1.0 + inf_norm(v))});
            nt = std::max(nt, std::abs(xb[i] - sb[i]) / (1.0 + inf_norm(xb)));
        }
    }
    ok = ok && round_trip <= 1e-12 && nt <= 1e-10;
    d << fmt("round trip %.1e, NT identity %.1e", round_trip, nt);

    ok = ok && corpus.interior;
    d << (corpus.interior ? ", iterates interior" : ", iterate left the interior");

    // LDL reconstruction on random quasi-definite matrices.
    double recon = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 5 + trial % 20;
        const int p = 2 + trial % 7;
        std::vector<Triplet> t;
        for (int i = 0; i < n; ++i) {
            t.push_back({i, i, 2.0 + coin(rng)});
        }
        for (int r = 0; r < p; ++r) {
            t.push_back({n + r, n + r, -(1.0 + coin(rng))});
            for (int j = 0; j < n; ++j) {
                if (coin(rng) < 0.3) {
                    t.push_back({j, n + r, u(rng)});
                }
            }
        }
        const SparseMat m = SparseMat::from_triplets(n + p, n + p, t, true);
        auto sym = std::make_shared<SymbolicFactorization>(symbolic_ldl(m, amd_order(m)));
        NumericFactorization f(sym);
        Regularization reg;
        reg.signs.assign(static_cast<std::size_t>(n + p), 1);
        std::fill(reg.signs.begin() + n, reg.signs.end(), -1);
        f.factor(m, reg);
        double e_sum = 0.0;
        for (const double e : f.regularization()) {
            e_sum += std::abs(e);
        }
        recon = std::max(recon, ((reconstruct(f) - to_dense(m)).norm() - e_sum) / m.norm_frobenius());
    }
    ok = ok && recon <= 1e-12;
    d << fmt(", LDL reconstruction %.1e", std::max(recon, 0.0));

    // Jacobians against Richardson-extrapolated central differences, step 1e-3 * scale.
    const apdg::VehicleParams vp;
    double jac = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        apdg::StateVec x;
        x << -800.0 + 200 * u(rng), 3200.0 + 500 * u(rng), 400.0, -40.0 + 20 * u(rng), -180.0 + 50 * u(rng), -70.0,
            36000.0 + 2000 * u(rng);
        const apdg::Vec3 T(2e5 * u(rng), 6e5 + 2e5 * u(rng), 2e5 * u(rng));
        const auto j = apdg::derivative_jacobians(x, T, vp);
        for (int i = 0; i < 10; ++i) {
            const double h = 1e-3 * (i < 3 ? 1e3 : i < 6 ? 1e2 : i < 7 ? 1e4 : 1e6);
            auto f = [&](double dlt) {
                apdg::StateVec xp = x;
                apdg::Vec3 tp = T;
                if (i < 7) {
                    xp(i) += dlt;
                } else {
                    tp(i - 7) += dlt;
                }
                return apdg::nonlinear_derivative(xp, tp, vp);
            };
            const apdg::StateVec d1 = (f(h) - f(-h)) / (2.0 * h);
            const apdg::StateVec d2 = (f(0.5 * h) - f(-0.5 * h)) / h;
            const apdg::StateVec fd = (4.0 * d2 - d1) / 3.0;
            const apdg::StateVec exact = i < 7 ? apdg::StateVec(j.A.col(i)) : apdg::StateVec(j.B.col(i - 7));
            const double scale = std::max(exact.lpNorm<Eigen::Infinity>(), 1e-12);
            jac = std::max(jac, (exact - fd).lpNorm<Eigen::Infinity>() / scale);
        }
    }
    ok = ok && jac <= 1e-6;
    d << fmt(", Jacobian FD %.1e", jac);

    // RK4 on a ballistic arc.
    apdg::Scenario sc = apdg::sample_scenario();
    sc.vehicle.C_D = 0.0;
    apdg::TrajectoryIterate arc;
    arc.r.assign(31, apdg::Vec3::Zero());
    arc.v.assign(31, apdg::Vec3::Zero());
    arc.m.assign(31, sc.bc.m0);
    arc.T.assign(31, apdg::Vec3::Zero());
    arc.Gamma.assign(31, 0.0);
    arc.dt = 0.5;
    const auto ver = apdg::verify_fine_grid(arc, sc.bc, sc.vehicle, sc.weights, true);
    double rk4 = 0.0;
    for (const auto& smp : ver.samples) {
        const apdg::Vec3 r = sc.bc.r0 + smp.t * sc.bc.v0 + 0.5 * smp.t * smp.t * sc.vehicle.g;
        rk4 = std::max(rk4, (smp.r - r).norm());
    }
    ok = ok && rk4 <= 1e-6 && ver.samples.size() == 301;
    d << fmt(", RK4 ballistic %.1e m", rk4);

    report(8, ok, "property suites", d.str());
}

} // namespace

int main()
{
    const CorpusStats corpus = run_corpus();
    criterion_1_2(corpus);
    criterion_3();
    const apdg::ScResult cold = criterion_4();
    criterion_5(cold);
    criterion_6();
    criterion_7();
    criterion_8(corpus);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
