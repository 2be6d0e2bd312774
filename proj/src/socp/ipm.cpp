#include "socp/ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "socp/error.hpp"

namespace socp {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double inf_norm(std::span<const double> v)
{
    double m = 0.0;
    for (const double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

double scalar_step(double v, double dv)
{
    return dv < 0.0 ? -v / dv : std::numeric_limits<double>::infinity();
}

double step_to_boundary(const ConeLayout& layout, const HsdState& z, const NewtonDirection& d)
{
    return std::min({max_step(layout, z.x, d.dx), max_step(layout, z.s, d.ds),
                     scalar_step(z.tau, d.dtau), scalar_step(z.kappa, d.dkappa)});
}

bool interior(const ConeLayout& layout, const HsdState& z)
{
    return z.tau > 0.0 && z.kappa > 0.0 && in_cone(layout, z.x, true) && in_cone(layout, z.s, true);
}

} // namespace

std::string to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::Optimal:
        return "optimal";
    case SolveStatus::PrimalInfeasible:
        return "primal infeasible";
    case SolveStatus::DualInfeasible:
        return "dual infeasible";
    case SolveStatus::MaxIterations:
        return "max iterations";
    case SolveStatus::NumericalFailure:
        return "numerical failure";
    }
    return "unknown";
}

void SolverSettings::validate() const
{
    if (!(delta0 > 0.0 && delta0 < 1.0) || !(delta1 > 0.0 && delta1 < 1.0)) {
        throw DimensionError("SolverSettings: delta0 and delta1 must lie in (0, 1)");
    }
    if (!(eps_feas > 0.0) || !(eps_gap > 0.0) || !(eps_inf > 0.0)) {
        throw DimensionError("SolverSettings: tolerances must be positive");
    }
    if (max_iterations < 1 || (iteration_cap && *iteration_cap < 1)) {
        throw DimensionError("SolverSettings: iteration limits must be positive");
    }
}

HsdState cold_start(const ConeLayout& layout, std::size_t p)
{
    HsdState z;
    z.x = unit_vector(layout);
    z.s = z.x;
    z.y.assign(p, 0.0);
    z.kappa = 1.0;
    z.tau = 1.0;
    return z;
}

WarmStart warm_start(std::span<const double> x_o, std::span<const double> y_o,
                     std::span<const double> s_o, const SocpProblem& problem,
                     const SolverSettings& settings)
{
    const ConeLayout& layout = problem.layout;
    if (x_o.size() != layout.dim() || s_o.size() != layout.dim() || y_o.size() != problem.p()) {
        throw DimensionError("warm_start: previous point does not match the problem layout");
    }
    WarmStart out;
    out.lambda = std::max(1.0 - 1.0 / (problem.A.norm_inf() + inf_norm(problem.b)), settings.lambda0);
    if (!in_cone(layout, x_o, false) || !in_cone(layout, s_o, false)) {
        out.state = cold_start(layout, problem.p());
        out.fell_back = true;
        return out;
    }
    const double lam = out.lambda;
    const Vec e = unit_vector(layout);
    HsdState& z = out.state;
    z.x.resize(layout.dim());
    z.s.resize(layout.dim());
    for (std::size_t j = 0; j < layout.dim(); ++j) {
        z.x[j] = lam * x_o[j] + (1.0 - lam) * e[j];
        z.s[j] = lam * s_o[j] + (1.0 - lam) * e[j];
    }
    z.y.resize(y_o.size());
    for (std::size_t i = 0; i < y_o.size(); ++i) {
        z.y[i] = lam * y_o[i];
    }
    z.kappa = std::max(dot(x_o, s_o) / static_cast<double>(layout.cone_count()), 1e-10);
    z.tau = 1.0;
    if (!interior(layout, z)) {
        out.state = cold_start(layout, problem.p());
        out.fell_back = true;
    }
    return out;
}

CorrectorTerms corrector_terms(const NewtonDirection& predictor, const NtScaling& scaling, bool literal)
{
    const ConeLayout& layout = scaling.layout;
    CorrectorTerms t;
    if (literal) {
        t.e_xs = arrow_apply(layout, predictor.dx, predictor.dx);
    } else {
        const Vec dx = apply_scaling(scaling, predictor.dx, ScalingMode::DInverse);
        const Vec ds = apply_scaling(scaling, predictor.ds, ScalingMode::D);
        t.e_xs = arrow_apply(layout, dx, ds);
    }
    t.e_kt = predictor.dkappa * predictor.dtau;
    return t;
}

StopCheck stopping_test(const HsdState& z, const SocpProblem& problem, const SolverSettings& settings)
{
    const std::size_t n = problem.n();
    const std::size_t p = problem.p();
    StopCheck out;

    Vec ax(p);
    problem.A.multiply(z.x, ax);
    Vec aty(n);
    problem.A.multiply_transpose(z.y, aty);

    double rp = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        rp = std::max(rp, std::abs(ax[i] - problem.b[i] * z.tau));
    }
    double rd = 0.0;
    double rd_hom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        rd = std::max(rd, std::abs(aty[j] + z.s[j] - problem.c[j] * z.tau));
        rd_hom = std::max(rd_hom, std::abs(aty[j] + z.s[j]));
    }
    const double cx = dot(problem.c, z.x);
    const double by = dot(problem.b, z.y);

    out.primal_residual = rp / (z.tau * (1.0 + inf_norm(problem.b)));
    out.dual_residual = rd / (z.tau * (1.0 + inf_norm(problem.c)));
    out.gap = std::abs(cx - by) / (z.tau + std::abs(by));

    if (out.primal_residual <= settings.eps_feas && out.dual_residual <= settings.eps_feas &&
        out.gap <= settings.eps_gap) {
        out.status = StopStatus::Optimal;
        return out;
    }
    if (z.tau <= settings.eps_inf * std::max(1.0, z.kappa)) {
        const double a_norm = problem.A.norm_inf();
        if (by > 0.0 && rd_hom <= settings.eps_feas * inf_norm(z.y) * a_norm) {
            out.status = StopStatus::PrimalInfeasible;
        } else if (cx < 0.0 && inf_norm(ax) <= settings.eps_feas * inf_norm(z.x) * a_norm) {
            out.status = StopStatus::DualInfeasible;
        }
    }
    return out;
}

SolveOutcome solve(const SocpProblem& problem, const HsdState& init, const SolverSettings& settings,
                   KktSystem* kkt)
{
    const auto start = std::chrono::steady_clock::now();
    problem.validate();
    settings.validate();
    const ConeLayout& layout = problem.layout;
    if (init.x.size() != layout.dim() || init.s.size() != layout.dim() || init.y.size() != problem.p()) {
        throw DimensionError("solve: initial point does not match the problem");
    }
    if (!interior(layout, init)) {
        throw NumericalError("solve: initial point is not strictly interior");
    }

    std::optional<KktSystem> owned;
    if (kkt == nullptr) {
        owned.emplace(problem.A, layout, settings.kkt);
        kkt = &*owned;
    } else {
        if (!(kkt->layout() == layout)) {
            throw DimensionError("solve: KKT system built for a different layout");
        }
        kkt->update_a(problem.A);
    }
    const std::size_t fact0 = kkt->factorizations();
    const std::size_t solve0 = kkt->solves();

    SolveOutcome out;
    HsdState z = init;
    const int limit = settings.iteration_cap ? std::min(settings.max_iterations, *settings.iteration_cap)
                                             : settings.max_iterations;
    StopCheck check;
    bool done = false;
    const Vec zero(layout.dim(), 0.0);

    try {
        for (int it = 0; it < limit && !done; ++it) {
            const NtScaling scal = compute_nt_scaling(layout, z.x, z.s);
            kkt->assemble(scal, problem.b, problem.c, z.kappa / z.tau);

            const RhsBundle rhs_p = compute_rhs(problem, z, scal, zero, 0.0, 0.0);
            const NewtonDirection dp = kkt->solve_newton(rhs_p, problem.b, problem.c);
            if (settings.on_newton) {
                settings.on_newton({it, NewtonPhase::Predictor, problem, z, scal, rhs_p, dp});
            }
            const double alpha_p = std::min(step_to_boundary(layout, z, dp), settings.delta0);

            const CorrectorTerms terms = corrector_terms(dp, scal, settings.literal_corrector);
            const double nu = std::min(settings.delta1, (1.0 - alpha_p) * (1.0 - alpha_p)) * (1.0 - alpha_p);
            const RhsBundle rhs_c = compute_rhs(problem, z, scal, terms.e_xs, terms.e_kt, nu);
            const NewtonDirection dc = kkt->solve_newton(rhs_c, problem.b, problem.c);
            if (settings.on_newton) {
                settings.on_newton({it, NewtonPhase::Corrector, problem, z, scal, rhs_c, dc});
            }
            // Scaling the boundary step keeps the update strictly inside; halving
            // guards the interior margin against roundoff near convergence.
            double alpha_c = settings.delta0 * std::min(step_to_boundary(layout, z, dc), 1.0);
            if (!(alpha_c > 0.0)) {
                throw NumericalError("solve: zero step length");
            }
            HsdState next = z;
            for (int halving = 0;; ++halving) {
                for (std::size_t j = 0; j < layout.dim(); ++j) {
                    next.x[j] = z.x[j] + alpha_c * dc.dx[j];
                    next.s[j] = z.s[j] + alpha_c * dc.ds[j];
                }
                for (std::size_t i = 0; i < z.y.size(); ++i) {
                    next.y[i] = z.y[i] + alpha_c * dc.dy[i];
                }
                next.kappa = z.kappa + alpha_c * dc.dkappa;
                next.tau = z.tau + alpha_c * dc.dtau;
                if (interior(layout, next)) {
                    break;
                }
                if (halving == 8) {
                    throw NumericalError("solve: iterate left the cone interior");
                }
                alpha_c *= 0.5;
            }
            z = std::move(next);
            out.iterations = it + 1;
            if (settings.on_iteration) {
                const double mu = (dot(z.x, z.s) + z.tau * z.kappa) / static_cast<double>(layout.cone_count() + 1);
                settings.on_iteration({it, z, mu, alpha_p, alpha_c});
            }

            check = stopping_test(z, problem, settings);
            switch (check.status) {
            case StopStatus::Optimal:
                out.status = SolveStatus::Optimal;
                done = true;
                break;
            case StopStatus::PrimalInfeasible:
                out.status = SolveStatus::PrimalInfeasible;
                done = true;
                break;
            case StopStatus::DualInfeasible:
                out.status = SolveStatus::DualInfeasible;
                done = true;
                break;
            case StopStatus::Continue:
                break;
            }
        }
        if (!done) {
            out.status = SolveStatus::MaxIterations;
        }
    } catch (const NumericalError& e) {
        out.status = SolveStatus::NumericalFailure;
        out.message = e.what();
        check = stopping_test(z, problem, settings);
    }

    out.final_state = z;
    out.primal_residual = check.primal_residual;
    out.dual_residual = check.dual_residual;
    out.gap = check.gap;
    const bool normalize = out.status == SolveStatus::Optimal || out.status == SolveStatus::MaxIterations ||
                           out.status == SolveStatus::NumericalFailure;
    if (normalize) {
        out.x = z.x;
        out.y = z.y;
        out.s = z.s;
        for (auto& v : out.x) {
            v /= z.tau;
        }
        for (auto& v : out.y) {
            v /= z.tau;
        }
        for (auto& v : out.s) {
            v /= z.tau;
        }
        out.objective = dot(problem.c, out.x);
    } else {
        // Infeasibility certificates are reported unnormalized.
        out.x = z.x;
        out.y = z.y;
        out.s = z.s;
    }
    out.usable = out.status == SolveStatus::Optimal ||
                 (out.status == SolveStatus::MaxIterations && settings.iteration_cap.has_value());
    out.factorizations = kkt->factorizations() - fact0;
    out.kkt_solves = kkt->solves() - solve0;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

} // namespace socp
