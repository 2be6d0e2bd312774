#include "socp/kkt.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

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

} // namespace

Vec RhsBundle::w0() const
{
    const std::size_t n = w2.size();
    const std::size_t p = w1.size();
    Vec out(2 * n + p + 2);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = -w2[i];
        out[n + p + i] = w4_hat[i];
    }
    std::copy(w1.begin(), w1.end(), out.begin() + static_cast<std::ptrdiff_t>(n));
    out[2 * n + p] = w5 / tau;
    out[2 * n + p + 1] = w3;
    return out;
}

RhsBundle compute_rhs(const SocpProblem& problem, const HsdState& z, const NtScaling& scaling,
                      std::span<const double> e_xs, double e_kt, double nu)
{
    const ConeLayout& layout = problem.layout;
    const std::size_t n = problem.n();
    const std::size_t p = problem.p();
    if (z.x.size() != n || z.s.size() != n || z.y.size() != p || e_xs.size() != n) {
        throw DimensionError("compute_rhs: iterate does not match the problem");
    }
    if (!(z.tau > 0.0) || !(z.kappa > 0.0) || !in_cone(layout, z.x, true) || !in_cone(layout, z.s, true)) {
        throw NumericalError("compute_rhs: iterate is not strictly interior");
    }

    RhsBundle r;
    r.kappa = z.kappa;
    r.tau = z.tau;
    r.mu = (dot(z.x, z.s) + z.tau * z.kappa) / static_cast<double>(layout.cone_count() + 1);
    const double damp = -(1.0 - nu);

    r.w1.assign(p, 0.0);
    problem.A.multiply(z.x, r.w1);
    for (std::size_t i = 0; i < p; ++i) {
        r.w1[i] = damp * (r.w1[i] - problem.b[i] * z.tau);
    }

    r.w2.assign(n, 0.0);
    problem.A.multiply_transpose(z.y, r.w2);
    for (std::size_t j = 0; j < n; ++j) {
        r.w2[j] = damp * (-r.w2[j] + problem.c[j] * z.tau - z.s[j]);
    }

    r.w3 = damp * (dot(problem.b, z.y) - dot(problem.c, z.x) - z.kappa);

    const Vec xbar = apply_scaling(scaling, z.x, ScalingMode::DInverse);
    const Vec sbar = apply_scaling(scaling, z.s, ScalingMode::D);
    const Vec e = unit_vector(layout);
    const Vec xs = arrow_apply(layout, xbar, sbar);
    r.w4.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        r.w4[j] = r.mu * nu * e[j] - xs[j] - e_xs[j];
    }
    r.w5 = r.mu * nu - z.kappa * z.tau - e_kt;

    r.w4_hat = apply_scaling(scaling, arrow_solve(layout, xbar, r.w4), ScalingMode::D);
    return r;
}

KktSystem::KktSystem(const SparseMat& A, const ConeLayout& layout, KktOptions options)
    : KktSystem(A, layout, nullptr, options)
{
}

KktSystem::KktSystem(const SparseMat& A, const ConeLayout& layout,
                     std::shared_ptr<const SymbolicFactorization> symbolic, KktOptions options)
    : options_(options), layout_(layout)
{
    build_pattern(A);
    if (!symbolic) {
        symbolic = std::make_shared<const SymbolicFactorization>(symbolic_ldl(matrix_, structured_order(A)));
    }
    if (symbolic->dim != matrix_.rows() ||
        symbolic->matrix_nnz != static_cast<std::int64_t>(matrix_.nnz())) {
        throw DimensionError("KktSystem: symbolic analysis does not match the matrix pattern");
    }
    symbolic_ = std::move(symbolic);
    numeric_.emplace(symbolic_);
    reg_.delta = options_.delta_reg;
    reg_.signs = pivot_signs();
    const std::size_t dim = static_cast<std::size_t>(matrix_.rows());
    work_rhs_.assign(dim, 0.0);
    work_sol_.assign(dim, 0.0);
    scaled_rhs_.assign(dim, 0.0);
    scaled_sol_.assign(dim, 0.0);
    row_scale_.assign(dim, 1.0);
    residual_weight_.assign(dim, 1.0);
    scaled_ = matrix_;
    bc_top_.assign(dim, 0.0);
    u1_xys_.assign(2 * n_ + p_, 0.0);
}

void KktSystem::build_pattern(const SparseMat& A)
{
    if (layout_.dim() == 0) {
        throw DimensionError("KktSystem: empty cone layout");
    }
    if (A.cols() != static_cast<std::int32_t>(layout_.dim()) || A.symmetric()) {
        throw DimensionError("KktSystem: A does not match the cone layout");
    }
    n_ = layout_.dim();
    p_ = static_cast<std::size_t>(A.rows());

    // Row numbering of the s~ block.
    s_row_.assign(n_, 0);
    aux_row_.assign(layout_.soc_count(), -1);
    auto next = static_cast<std::int32_t>(n_ + p_);
    for (std::size_t j = 0; j < layout_.linear_count(); ++j) {
        s_row_[j] = next++;
    }
    aux_count_ = 0;
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        const std::size_t off = layout_.soc_offset(k);
        for (std::size_t j = 0; j < layout_.soc_dim(k); ++j) {
            s_row_[off + j] = next++;
        }
        if (is_sparsified(layout_.soc_dim(k))) {
            aux_row_[k] = next++;
            ++aux_count_;
        }
    }
    const std::int32_t dim = next;

    std::vector<Triplet> t;
    const auto a_cp = A.col_ptr();
    const auto a_ri = A.row_idx();
    for (std::int32_t col = 0; col < A.cols(); ++col) {
        for (std::int32_t q = a_cp[col]; q < a_cp[col + 1]; ++q) {
            t.push_back({col, static_cast<std::int32_t>(n_) + a_ri[q], 1.0});
        }
    }
    for (std::size_t j = 0; j < n_; ++j) {
        t.push_back({static_cast<std::int32_t>(j), s_row_[j], 1.0});
    }
    for (std::size_t j = 0; j < layout_.linear_count(); ++j) {
        t.push_back({s_row_[j], s_row_[j], 1.0});
    }
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        const std::size_t off = layout_.soc_offset(k);
        const std::size_t nk = layout_.soc_dim(k);
        if (aux_row_[k] < 0) {
            for (std::size_t i = 0; i < nk; ++i) {
                for (std::size_t j = i; j < nk; ++j) {
                    t.push_back({s_row_[off + i], s_row_[off + j], 1.0});
                }
            }
        } else {
            for (std::size_t i = 0; i < nk; ++i) {
                t.push_back({s_row_[off + i], s_row_[off + i], 1.0});
                t.push_back({s_row_[off + i], aux_row_[k], 1.0});
            }
            t.push_back({aux_row_[k], aux_row_[k], 1.0});
        }
    }
    matrix_ = SparseMat::from_triplets(dim, dim, t, true, SparseMat::Zeros::Keep);

    auto pos = [&](std::int32_t r, std::int32_t c) {
        const std::int64_t at = matrix_.find(r, c);
        if (at < 0) {
            throw NumericalError("KktSystem: internal pattern lookup failed");
        }
        return at;
    };
    a_pos_.clear();
    for (std::int32_t col = 0; col < A.cols(); ++col) {
        for (std::int32_t q = a_cp[col]; q < a_cp[col + 1]; ++q) {
            a_pos_.push_back(pos(col, static_cast<std::int32_t>(n_) + a_ri[q]));
        }
    }
    auto values = matrix_.values();
    std::fill(values.begin(), values.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        values[pos(static_cast<std::int32_t>(j), s_row_[j])] = 1.0;
    }
    update_a(A);

    block_pos_.clear();
    for (std::size_t j = 0; j < layout_.linear_count(); ++j) {
        block_pos_.push_back(pos(s_row_[j], s_row_[j]));
    }
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        const std::size_t off = layout_.soc_offset(k);
        const std::size_t nk = layout_.soc_dim(k);
        if (aux_row_[k] < 0) {
            for (std::size_t i = 0; i < nk; ++i) {
                for (std::size_t j = i; j < nk; ++j) {
                    block_pos_.push_back(pos(s_row_[off + i], s_row_[off + j]));
                }
            }
        } else {
            for (std::size_t i = 0; i < nk; ++i) {
                block_pos_.push_back(pos(s_row_[off + i], s_row_[off + i]));
                block_pos_.push_back(pos(s_row_[off + i], aux_row_[k]));
            }
            block_pos_.push_back(pos(aux_row_[k], aux_row_[k]));
        }
    }
}

Permutation KktSystem::structured_order(const SparseMat& A) const
{
    // Compressed graph: one node per cone, then one per row of A.
    const std::size_t l = layout_.linear_count();
    const std::size_t groups = layout_.cone_count();
    std::vector<std::size_t> group_of(n_);
    std::vector<std::size_t> group_start(groups + 1);
    for (std::size_t j = 0; j < l; ++j) {
        group_of[j] = j;
        group_start[j] = j;
    }
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        group_start[l + k] = layout_.soc_offset(k);
        for (std::size_t j = 0; j < layout_.soc_dim(k); ++j) {
            group_of[layout_.soc_offset(k) + j] = l + k;
        }
    }
    group_start[groups] = n_;

    // Row-wise copy of the pattern of A.
    std::vector<std::vector<std::int32_t>> row_cols(p_);
    std::vector<Triplet> t;
    const auto a_cp = A.col_ptr();
    const auto a_ri = A.row_idx();
    for (std::int32_t col = 0; col < A.cols(); ++col) {
        for (std::int32_t q = a_cp[col]; q < a_cp[col + 1]; ++q) {
            row_cols[static_cast<std::size_t>(a_ri[q])].push_back(col);
            t.push_back({static_cast<std::int32_t>(group_of[static_cast<std::size_t>(col)]),
                         static_cast<std::int32_t>(groups) + a_ri[q], 1.0});
        }
    }
    const auto nodes = static_cast<std::int32_t>(groups + p_);
    for (std::int32_t v = 0; v < nodes; ++v) {
        t.push_back({v, v, 1.0});
    }
    const Permutation coarse = amd_order(SparseMat::from_triplets(nodes, nodes, t, true));

    Permutation perm;
    perm.reserve(static_cast<std::size_t>(matrix_.rows()));
    std::vector<char> done(n_, 0);
    std::vector<std::int32_t> match_col(n_, -1);
    std::vector<std::uint32_t> seen(n_, 0);
    std::uint32_t stamp = 0;

    // Augmenting path from row i over eliminated columns.
    std::function<bool(std::size_t)> augment = [&](std::size_t i) {
        for (const std::int32_t j : row_cols[i]) {
            const auto ju = static_cast<std::size_t>(j);
            if (!done[ju] || seen[ju] == stamp) {
                continue;
            }
            seen[ju] = stamp;
            if (match_col[ju] < 0 || augment(static_cast<std::size_t>(match_col[ju]))) {
                match_col[ju] = static_cast<std::int32_t>(i);
                return true;
            }
        }
        return false;
    };
    auto try_row = [&](std::size_t i) {
        ++stamp;
        if (augment(i)) {
            perm.push_back(static_cast<std::int32_t>(n_ + i));
            return true;
        }
        return false;
    };

    std::vector<std::size_t> deferred;
    for (const std::int32_t node : coarse) {
        const auto v = static_cast<std::size_t>(node);
        if (v >= groups) {
            if (!try_row(v - groups)) {
                deferred.push_back(v - groups);
            }
            continue;
        }
        for (std::size_t j = group_start[v]; j < group_start[v + 1]; ++j) {
            perm.push_back(s_row_[j]);
        }
        if (v >= l && aux_row_[v - l] >= 0) {
            perm.push_back(aux_row_[v - l]);
        }
        for (std::size_t j = group_start[v]; j < group_start[v + 1]; ++j) {
            perm.push_back(static_cast<std::int32_t>(j));
            done[j] = 1;
        }
        std::erase_if(deferred, [&](std::size_t i) { return try_row(i); });
    }
    // Rows never matched mean A is structurally rank deficient; they go last.
    for (const std::size_t i : deferred) {
        perm.push_back(static_cast<std::int32_t>(n_ + i));
    }
    return perm;
}

std::vector<std::int8_t> KktSystem::pivot_signs() const
{
    std::vector<std::int8_t> signs(static_cast<std::size_t>(matrix_.rows()), 1);
    for (std::size_t j = 0; j < n_; ++j) {
        signs[j] = -1;
    }
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        if (aux_row_[k] >= 0) {
            signs[static_cast<std::size_t>(s_row_[layout_.soc_offset(k)])] = -1;
        }
    }
    return signs;
}

void KktSystem::update_a(const SparseMat& A)
{
    if (A.nnz() != a_pos_.size() || A.rows() != static_cast<std::int32_t>(p_) ||
        A.cols() != static_cast<std::int32_t>(n_)) {
        throw DimensionError("KktSystem::update_a: pattern of A changed");
    }
    auto values = matrix_.values();
    const auto a_vals = A.values();
    for (std::size_t q = 0; q < a_pos_.size(); ++q) {
        values[a_pos_[q]] = a_vals[q];
    }
}

void KktSystem::assemble(const NtScaling& scaling, std::span<const double> b,
                         std::span<const double> c, double kappa_over_tau)
{
    if (!(scaling.layout == layout_) || b.size() != p_ || c.size() != n_) {
        throw DimensionError("KktSystem::assemble: size mismatch");
    }
    auto values = matrix_.values();
    std::size_t at = 0;
    const std::size_t l = layout_.linear_count();
    for (std::size_t j = 0; j < l; ++j) {
        values[block_pos_[at++]] = 1.0 / (scaling.theta[j] * scaling.theta[j]);
    }
    const double sqrt2 = std::sqrt(2.0);
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        const std::size_t nk = layout_.soc_dim(k);
        const double th2 = scaling.theta[l + k] * scaling.theta[l + k];
        const auto pk = scaling.p_block(k);
        if (aux_row_[k] < 0) {
            for (std::size_t i = 0; i < nk; ++i) {
                for (std::size_t j = i; j < nk; ++j) {
                    double v = 2.0 * pk[i] * pk[j];
                    if (i == j) {
                        v += i == 0 ? -1.0 : 1.0;
                    }
                    values[block_pos_[at++]] = v / th2;
                }
            }
        } else {
            for (std::size_t i = 0; i < nk; ++i) {
                values[block_pos_[at++]] = (i == 0 ? -1.0 : 1.0) / th2;
                values[block_pos_[at++]] = sqrt2 * pk[i] / th2;
            }
            values[block_pos_[at++]] = -1.0 / th2;
        }
    }

    // Equilibration keeps the cone blocks independent of theta.
    std::fill(row_scale_.begin(), row_scale_.end(), 1.0);
    for (std::size_t j = 0; j < l; ++j) {
        row_scale_[j] = 1.0 / scaling.theta[j];
        row_scale_[static_cast<std::size_t>(s_row_[j])] = scaling.theta[j];
    }
    for (std::size_t k = 0; k < layout_.soc_count(); ++k) {
        const double th = scaling.theta[l + k];
        const std::size_t off = layout_.soc_offset(k);
        for (std::size_t j = off; j < off + layout_.soc_dim(k); ++j) {
            row_scale_[j] = 1.0 / th;
            row_scale_[static_cast<std::size_t>(s_row_[j])] = th;
        }
        if (aux_row_[k] >= 0) {
            const auto aux = static_cast<std::size_t>(aux_row_[k]);
            row_scale_[aux] = th;
            // An auxiliary-row residual r enters the unlifted rows as sqrt2 p r.
            double pmax = 0.0;
            for (const double v : scaling.p_block(k)) {
                pmax = std::max(pmax, std::abs(v));
            }
            residual_weight_[aux] = std::max(1.0, std::sqrt(2.0) * pmax);
        }
    }
    const auto cp = matrix_.col_ptr();
    const auto ri = matrix_.row_idx();
    auto scaled = scaled_.values();
    for (std::int32_t col = 0; col < matrix_.cols(); ++col) {
        const double sc = row_scale_[static_cast<std::size_t>(col)];
        for (std::int32_t q = cp[col]; q < cp[col + 1]; ++q) {
            scaled[q] = values[q] * sc * row_scale_[static_cast<std::size_t>(ri[q])];
        }
    }

    kappa_over_tau_ = kappa_over_tau;
    reg_.delta = options_.delta_reg;
    refactor();

    solve_bc_column(b, c);
}

void KktSystem::solve_bc_column(std::span<const double> b, std::span<const double> c)
{
    // B u = (-c, -b, 0)
    std::fill(work_rhs_.begin(), work_rhs_.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        work_rhs_[j] = -c[j];
    }
    for (std::size_t i = 0; i < p_; ++i) {
        work_rhs_[n_ + i] = -b[i];
    }
    solve(work_rhs_, bc_top_);
    for (std::size_t j = 0; j < n_ + p_; ++j) {
        u1_xys_[j] = bc_top_[j];
    }
    for (std::size_t j = 0; j < n_; ++j) {
        u1_xys_[n_ + p_ + j] = bc_top_[s_row_[j]];
    }
}

void KktSystem::refactor()
{
    numeric_->factor(scaled_, reg_);
    ++factorizations_;
}

RefineResult KktSystem::solve(std::span<const double> rhs, std::span<double> out)
{
    const std::size_t dim = row_scale_.size();
    if (rhs.size() != dim || out.size() != dim) {
        throw DimensionError("KktSystem::solve: size mismatch");
    }
    // out += S F^-1 S r, where F factors the equilibrated matrix S B S.
    auto apply_inverse = [&](std::span<const double> r, bool accumulate) {
        for (std::size_t i = 0; i < dim; ++i) {
            scaled_sol_[i] = r[i] * row_scale_[i];
        }
        numeric_->solve_in_place(scaled_sol_);
        for (std::size_t i = 0; i < dim; ++i) {
            const double v = scaled_sol_[i] * row_scale_[i];
            out[i] = accumulate ? out[i] + v : v;
        }
    };
    // Residuals are taken against B itself, so the tolerance holds unscaled;
    // auxiliary rows are weighted by their effect on the unlifted system.
    auto residual = [&] {
        matrix_.multiply(out, scaled_rhs_);
        double inf = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            scaled_rhs_[i] = rhs[i] - scaled_rhs_[i];
            inf = std::max(inf, std::abs(scaled_rhs_[i]) * residual_weight_[i]);
        }
        return inf;
    };

    double rhs_inf = 0.0;
    for (const double v : rhs) {
        rhs_inf = std::max(rhs_inf, std::abs(v));
    }
    const double tol = 1e-11 * (1.0 + rhs_inf);

    apply_inverse(rhs, false);
    RefineResult r;
    r.residual_inf = residual();
    if (!std::isfinite(r.residual_inf)) {
        throw NumericalError("KktSystem::solve: non-finite residual");
    }
    // Sweeps stop once the residual stops improving and the best iterate is
    // kept: near the roundoff floor the residual only wanders. Failing to reach
    // the tolerance is reported through `converged`, not thrown.
    best_sol_.assign(out.begin(), out.end());
    double best = r.residual_inf;
    int growth = 0;
    while (r.residual_inf > tol && r.sweeps < options_.max_refine && growth < 2) {
        apply_inverse(scaled_rhs_, true);
        ++r.sweeps;
        const double previous = r.residual_inf;
        r.residual_inf = residual();
        if (!std::isfinite(r.residual_inf)) {
            throw NumericalError("KktSystem::solve: non-finite residual");
        }
        growth = r.residual_inf > previous ? growth + 1 : 0;
        if (r.residual_inf < best) {
            best = r.residual_inf;
            best_sol_.assign(out.begin(), out.end());
        }
    }
    if (best < r.residual_inf) {
        std::copy(best_sol_.begin(), best_sol_.end(), out.begin());
        r.residual_inf = best;
    }
    r.converged = r.residual_inf <= tol;
    ++solves_;
    last_sweeps_ = r.sweeps;
    return r;
}

NewtonDirection KktSystem::solve_newton(const RhsBundle& rhs, std::span<const double> b,
                                        std::span<const double> c)
{
    if (rhs.w2.size() != n_ || rhs.w1.size() != p_ || rhs.w4_hat.size() != n_) {
        throw DimensionError("KktSystem::solve_newton: right-hand side size mismatch");
    }
    // col2 of R2 is (-c, b, 0, -1, -1/2).
    auto col2_dot = [&](std::span<const double> xy, double kap, double tau) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            sum -= c[j] * xy[j];
        }
        for (std::size_t i = 0; i < p_; ++i) {
            sum += b[i] * xy[n_ + i];
        }
        return sum - kap - 0.5 * tau;
    };
    const double u0_kappa = rhs.w5 / rhs.tau;
    const double u0_tau = rhs.w3;
    const double u1_kappa = kappa_over_tau_;
    const double u1_tau = -0.5;

    for (int attempt = 0;; ++attempt) {
        std::fill(work_rhs_.begin(), work_rhs_.end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            work_rhs_[j] = -rhs.w2[j];
            work_rhs_[s_row_[j]] = rhs.w4_hat[j];
        }
        for (std::size_t i = 0; i < p_; ++i) {
            work_rhs_[n_ + i] = rhs.w1[i];
        }
        solve(work_rhs_, work_sol_);

        const double r2u1 = col2_dot(u1_xys_, u1_kappa, u1_tau);
        const double r2u0 = col2_dot(work_sol_, u0_kappa, u0_tau);

        // M = I + R2^T (u1, u2) = [[1/2, 1], [r2u1, 1/2]]
        const double det = 0.25 - r2u1;
        if (!std::isfinite(det) || std::abs(det) <= 1e-14 * (0.25 + std::abs(r2u1))) {
            if (attempt > 0) {
                throw NumericalError("KktSystem::solve_newton: singular rank-2 correction");
            }
            reg_.delta *= 2.0;
            refactor();
            solve_bc_column(b, c);
            continue;
        }
        // (a, g) = M^{-1} R2^T u0 with R2^T u0 = (u0_tau, r2u0)
        const double a = (0.5 * u0_tau - r2u0) / det;
        const double g = (0.5 * r2u0 - r2u1 * u0_tau) / det;

        NewtonDirection d;
        d.dx.resize(n_);
        d.dy.resize(p_);
        d.ds.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            d.dx[j] = work_sol_[j] - a * u1_xys_[j];
            d.ds[j] = work_sol_[s_row_[j]] - a * u1_xys_[n_ + p_ + j];
        }
        for (std::size_t i = 0; i < p_; ++i) {
            d.dy[i] = work_sol_[n_ + i] - a * u1_xys_[n_ + i];
        }
        d.dkappa = u0_kappa - a * u1_kappa;
        d.dtau = u0_tau - a * u1_tau - g;
        return d;
    }
}

double newton_residual(const SocpProblem& problem, const NtScaling& scaling, const RhsBundle& rhs,
                       const NewtonDirection& dir)
{
    const std::size_t n = problem.n();
    const std::size_t p = problem.p();
    const Vec w0 = rhs.w0();
    Vec r(w0.size(), 0.0);

    Vec aty(n);
    problem.A.multiply_transpose(dir.dy, aty);
    for (std::size_t j = 0; j < n; ++j) {
        r[j] = aty[j] + dir.ds[j] - problem.c[j] * dir.dtau;
    }
    Vec ax(p);
    problem.A.multiply(dir.dx, ax);
    for (std::size_t i = 0; i < p; ++i) {
        r[n + i] = ax[i] - problem.b[i] * dir.dtau;
    }
    Vec d2s(n);
    apply_d_squared(scaling, dir.ds, d2s);
    for (std::size_t j = 0; j < n; ++j) {
        r[n + p + j] = dir.dx[j] + d2s[j];
    }
    r[2 * n + p] = dir.dkappa + rhs.kappa / rhs.tau * dir.dtau;
    r[2 * n + p + 1] = -dot(problem.c, dir.dx) + dot(problem.b, dir.dy) - dir.dkappa;

    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        m = std::max(m, std::abs(r[i] - w0[i]));
    }
    return m;
}

SparseMat build_normal_equations_baseline(const SparseMat& A, const NtScaling& scaling)
{
    const ConeLayout& layout = scaling.layout;
    const auto n = static_cast<int>(layout.dim());
    if (A.cols() != n) {
        throw DimensionError("build_normal_equations_baseline: A does not match the layout");
    }
    using Sp = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    std::vector<Eigen::Triplet<double, int>> at;
    for (const auto& t : A.to_triplets()) {
        at.emplace_back(t.row, t.col, t.value);
    }
    Sp a(A.rows(), n);
    a.setFromTriplets(at.begin(), at.end());

    // D^2 with every SOC block stored densely, zeros included.
    std::vector<Eigen::Triplet<double, int>> dt;
    const std::size_t l = layout.linear_count();
    for (std::size_t j = 0; j < l; ++j) {
        dt.emplace_back(static_cast<int>(j), static_cast<int>(j), 1.0 / (scaling.theta[j] * scaling.theta[j]));
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t nk = layout.soc_dim(k);
        const double th2 = scaling.theta[l + k] * scaling.theta[l + k];
        const auto pk = scaling.p_block(k);
        for (std::size_t i = 0; i < nk; ++i) {
            for (std::size_t j = 0; j < nk; ++j) {
                double v = 2.0 * pk[i] * pk[j];
                if (i == j) {
                    v += i == 0 ? -1.0 : 1.0;
                }
                dt.emplace_back(static_cast<int>(off + i), static_cast<int>(off + j), v / th2);
            }
        }
    }
    Sp d2(n, n);
    d2.setFromTriplets(dt.begin(), dt.end());
    const Sp prod = Sp(a * d2) * Sp(a.transpose());

    std::vector<Triplet> out;
    for (int col = 0; col < prod.outerSize(); ++col) {
        for (Sp::InnerIterator it(prod, col); it; ++it) {
            if (it.row() <= col) {
                out.push_back({static_cast<std::int32_t>(it.row()), col, it.value()});
            }
        }
    }
    return SparseMat::from_triplets(A.rows(), A.rows(), out, true, SparseMat::Zeros::Keep);
}

} // namespace socp
