#pragma once

// Dense reference implementation of the predictor-corrector method: every
// scaling matrix is formed explicitly and each Newton system is the original
// 5-block unsymmetric system solved by LU.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "socp/kkt.hpp"
#include "socp/ldl.hpp"
#include "socp/problem.hpp"

namespace testing_support {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DenseCone {
    std::size_t offset;
    std::size_t dim;
    bool linear;
};

inline std::vector<DenseCone> dense_cones(const socp::ConeLayout& layout)
{
    std::vector<DenseCone> out;
    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        out.push_back({i, 1, true});
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        out.push_back({layout.soc_offset(k), layout.soc_dim(k), false});
    }
    return out;
}

inline MatrixXd dense_q(std::size_t dim)
{
    MatrixXd q = -MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    q(0, 0) = 1.0;
    return q;
}

/// Block-diagonal D = (Theta G)^{-1} formed densely from (x, s).
inline MatrixXd dense_d(const socp::ConeLayout& layout, const VectorXd& x, const VectorXd& s)
{
    const auto n = static_cast<Eigen::Index>(layout.dim());
    MatrixXd d = MatrixXd::Zero(n, n);
    for (const auto& cone : dense_cones(layout)) {
        const auto off = static_cast<Eigen::Index>(cone.offset);
        const auto k = static_cast<Eigen::Index>(cone.dim);
        const VectorXd xi = x.segment(off, k);
        const VectorXd si = s.segment(off, k);
        const MatrixXd q = dense_q(cone.dim);
        const double xqx = xi.dot(q * xi);
        const double sqs = si.dot(q * si);
        const double theta = std::sqrt(std::sqrt(sqs / xqx));
        MatrixXd g = MatrixXd::Ones(1, 1);
        if (!cone.linear) {
            const VectorXd qv = (si / theta + theta * q * xi) / std::sqrt(2.0 * (xi.dot(si) + std::sqrt(xqx * sqs)));
            VectorXd e = VectorXd::Zero(k);
            e(0) = 1.0;
            g = -q + (e + qv) * (e + qv).transpose() / (1.0 + qv(0));
        }
        d.block(off, off, k, k) = (theta * g).inverse();
    }
    return d;
}

/// mat(h) formed densely.
inline MatrixXd dense_arrow(const socp::ConeLayout& layout, const VectorXd& h)
{
    const auto n = static_cast<Eigen::Index>(layout.dim());
    MatrixXd m = MatrixXd::Zero(n, n);
    for (const auto& cone : dense_cones(layout)) {
        const auto off = static_cast<Eigen::Index>(cone.offset);
        const auto k = static_cast<Eigen::Index>(cone.dim);
        for (Eigen::Index i = 0; i < k; ++i) {
            m(off + i, off + i) = h(off);
        }
        for (Eigen::Index i = 1; i < k; ++i) {
            m(off, off + i) = h(off + i);
            m(off + i, off) = h(off + i);
        }
    }
    return m;
}

inline bool dense_in_cone(const socp::ConeLayout& layout, const VectorXd& v)
{
    for (const auto& cone : dense_cones(layout)) {
        const auto off = static_cast<Eigen::Index>(cone.offset);
        const auto k = static_cast<Eigen::Index>(cone.dim);
        if (cone.linear) {
            if (v(off) <= 0.0) {
                return false;
            }
        } else if (v(off) <= v.segment(off + 1, k - 1).norm()) {
            return false;
        }
    }
    return true;
}

/// Largest step keeping v + a dv in the (open) cone, by bisection.
inline double dense_max_step(const socp::ConeLayout& layout, const VectorXd& v, const VectorXd& dv)
{
    double hi = 1.0;
    while (dense_in_cone(layout, v + hi * dv)) {
        hi *= 2.0;
        if (hi > 1e12) {
            return std::numeric_limits<double>::infinity();
        }
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dense_in_cone(layout, v + mid * dv) ? lo : hi) = mid;
    }
    return lo;
}

struct DenseResult {
    bool optimal = false;
    double objective = 0.0;
    int iterations = 0;
};

inline DenseResult dense_reference_solve(const socp::SocpProblem& prob, int max_iter = 60)
{
    const auto n = static_cast<Eigen::Index>(prob.n());
    const auto p = static_cast<Eigen::Index>(prob.p());
    MatrixXd a = MatrixXd::Zero(p, n);
    for (const auto& t : prob.A.to_triplets()) {
        a(t.row, t.col) = t.value;
    }
    const VectorXd b = Eigen::Map<const VectorXd>(prob.b.data(), p);
    const VectorXd c = Eigen::Map<const VectorXd>(prob.c.data(), n);
    VectorXd e = VectorXd::Zero(n);
    for (const auto& cone : dense_cones(prob.layout)) {
        e(static_cast<Eigen::Index>(cone.offset)) = 1.0;
    }
    VectorXd x = e;
    VectorXd s = e;
    VectorXd y = VectorXd::Zero(p);
    double kappa = 1.0;
    double tau = 1.0;
    const double k1 = static_cast<double>(prob.layout.cone_count() + 1);
    const Eigen::Index dim = 2 * n + p + 2;

    DenseResult res;
    for (int it = 0; it < max_iter; ++it) {
        const MatrixXd d = dense_d(prob.layout, x, s);
        const MatrixXd dinv = d.inverse();
        const VectorXd xbar = dinv * x;
        const VectorXd sbar = d * s;
        const MatrixXd xb = dense_arrow(prob.layout, xbar);
        const MatrixXd sb = dense_arrow(prob.layout, sbar);
        const double mu = (x.dot(s) + tau * kappa) / k1;

        MatrixXd m = MatrixXd::Zero(dim, dim);
        // Columns: dx [0,n), dy [n,n+p), ds [n+p, 2n+p), dkappa, dtau.
        const Eigen::Index cy = n;
        const Eigen::Index cs = n + p;
        const Eigen::Index ck = 2 * n + p;
        const Eigen::Index ct = ck + 1;
        m.block(0, 0, p, n) = a;
        m.block(0, ct, p, 1) = -b;
        m.block(p, cy, n, p) = -a.transpose();
        m.block(p, cs, n, n) = -MatrixXd::Identity(n, n);
        m.block(p, ct, n, 1) = c;
        m.block(p + n, 0, 1, n) = -c.transpose();
        m.block(p + n, cy, 1, p) = b.transpose();
        m(p + n, ck) = -1.0;
        m.block(p + n + 1, 0, n, n) = sb * dinv;
        m.block(p + n + 1, cs, n, n) = xb * d;
        m(dim - 1, ck) = tau;
        m(dim - 1, ct) = kappa;
        const Eigen::PartialPivLU<MatrixXd> lu(m);

        auto rhs = [&](double nu, const VectorXd& exs, double ekt) {
            VectorXd r(dim);
            r.segment(0, p) = -(1.0 - nu) * (a * x - b * tau);
            r.segment(p, n) = -(1.0 - nu) * (-a.transpose() * y + c * tau - s);
            r(p + n) = -(1.0 - nu) * (b.dot(y) - c.dot(x) - kappa);
            r.segment(p + n + 1, n) = mu * nu * e - xb * sbar - exs;
            r(dim - 1) = mu * nu - kappa * tau - ekt;
            return r;
        };
        auto step = [&](const VectorXd& u) {
            double a_max = std::min(dense_max_step(prob.layout, x, u.segment(0, n)),
                                    dense_max_step(prob.layout, s, u.segment(cs, n)));
            if (u(ck) < 0.0) {
                a_max = std::min(a_max, -kappa / u(ck));
            }
            if (u(ct) < 0.0) {
                a_max = std::min(a_max, -tau / u(ct));
            }
            return a_max;
        };

        const VectorXd up = lu.solve(rhs(0.0, VectorXd::Zero(n), 0.0));
        const double ap = std::min(step(up), 0.995);
        const VectorXd dxs = dinv * up.segment(0, n);
        const VectorXd dss = d * up.segment(cs, n);
        const VectorXd exs = dense_arrow(prob.layout, dxs) * dss;
        const double nu = std::min(0.9, (1.0 - ap) * (1.0 - ap)) * (1.0 - ap);
        const VectorXd uc = lu.solve(rhs(nu, exs, up(ck) * up(ct)));
        const double ac = 0.995 * std::min(step(uc), 1.0);

        x += ac * uc.segment(0, n);
        y += ac * uc.segment(cy, p);
        s += ac * uc.segment(cs, n);
        kappa += ac * uc(ck);
        tau += ac * uc(ct);
        res.iterations = it + 1;

        const double rp = (a * x - b * tau).lpNorm<Eigen::Infinity>() / (tau * (1.0 + b.lpNorm<Eigen::Infinity>()));
        const double rd = (a.transpose() * y + s - c * tau).lpNorm<Eigen::Infinity>() /
                          (tau * (1.0 + c.lpNorm<Eigen::Infinity>()));
        const double gap = std::abs(c.dot(x) - b.dot(y)) / (tau + std::abs(b.dot(y)));
        if (rp <= 1e-8 && rd <= 1e-8 && gap <= 1e-8) {
            res.optimal = true;
            res.objective = c.dot(x) / tau;
            return res;
        }
    }
    res.objective = c.dot(x) / tau;
    return res;
}

inline Eigen::MatrixXd to_dense(const socp::SparseMat& m)
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (const auto& t : m.to_triplets()) {
        d(t.row, t.col) = t.value;
        if (m.symmetric()) {
            d(t.col, t.row) = t.value;
        }
    }
    return d;
}

// Reconstructs P^T L D L^T P densely in original indexing.
inline Eigen::MatrixXd reconstruct(const socp::NumericFactorization& f)
{
    const auto& sym = f.symbolic();
    const int n = sym.dim;
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
    for (int j = 0; j < n; ++j) {
        for (int q = sym.l_col_ptr[j]; q < sym.l_col_ptr[j + 1]; ++q) {
            l(sym.l_row_idx[q], j) = f.l_values()[q];
        }
    }
    Eigen::VectorXd d(n);
    for (int j = 0; j < n; ++j) {
        d(j) = f.d()[j];
    }
    const Eigen::MatrixXd c = l * d.asDiagonal() * l.transpose();
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(sym.perm[i], sym.perm[j]) = c(i, j);
        }
    }
    return out;
}


// Dense copy of rows/cols [first, first + len) of the symmetric matrix.
inline Eigen::MatrixXd dense_block(const socp::SparseMat& m, std::int32_t first, std::int32_t len)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(len, len);
    for (const auto& t : m.to_triplets()) {
        if (t.row >= first && t.row < first + len && t.col >= first && t.col < first + len) {
            out(t.row - first, t.col - first) = t.value;
            out(t.col - first, t.row - first) = t.value;
        }
    }
    return out;
}

// Dense 5-block system (B0 u = w0) solved by LU.
/// Dense B0 in the stacked (x, y, s, kappa, tau) ordering.
inline Eigen::MatrixXd dense_newton_matrix(const socp::SocpProblem& prob, const socp::NtScaling& scal,
                                           const socp::RhsBundle& rhs)
{
    const auto n = static_cast<Eigen::Index>(prob.n());
    const auto p = static_cast<Eigen::Index>(prob.p());
    const Eigen::Index dim = 2 * n + p + 2;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, n);
    for (const auto& t : prob.A.to_triplets()) {
        a(t.row, t.col) = t.value;
    }
    Eigen::MatrixXd d2(n, n);
    socp::Vec col(prob.n());
    socp::Vec out(prob.n());
    for (Eigen::Index j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[static_cast<std::size_t>(j)] = 1.0;
        socp::apply_d_squared(scal, col, out);
        for (Eigen::Index i = 0; i < n; ++i) {
            d2(i, j) = out[static_cast<std::size_t>(i)];
        }
    }
    Eigen::MatrixXd b0 = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::Map<const Eigen::VectorXd> b(prob.b.data(), p);
    const Eigen::Map<const Eigen::VectorXd> c(prob.c.data(), n);
    b0.block(0, n, n, p) = a.transpose();
    b0.block(0, n + p, n, n) = Eigen::MatrixXd::Identity(n, n);
    b0.block(0, dim - 1, n, 1) = -c;
    b0.block(n, 0, p, n) = a;
    b0.block(n, dim - 1, p, 1) = -b;
    b0.block(n + p, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
    b0.block(n + p, n + p, n, n) = d2;
    b0(dim - 2, dim - 2) = 1.0;
    b0(dim - 2, dim - 1) = rhs.kappa / rhs.tau;
    b0.block(dim - 1, 0, 1, n) = -c.transpose();
    b0.block(dim - 1, n, 1, p) = b.transpose();
    b0(dim - 1, dim - 2) = -1.0;
    return b0;
}

inline Eigen::VectorXd dense_newton(const socp::SocpProblem& prob, const socp::NtScaling& scal, const socp::RhsBundle& rhs)
{
    const socp::Vec w0 = rhs.w0();
    return dense_newton_matrix(prob, scal, rhs)
        .partialPivLu()
        .solve(Eigen::Map<const Eigen::VectorXd>(w0.data(), static_cast<Eigen::Index>(w0.size())));
}

inline Eigen::VectorXd stack(const socp::NewtonDirection& d)
{
    const auto n = static_cast<Eigen::Index>(d.dx.size());
    const auto p = static_cast<Eigen::Index>(d.dy.size());
    Eigen::VectorXd u(2 * n + p + 2);
    for (Eigen::Index j = 0; j < n; ++j) {
        u(j) = d.dx[static_cast<std::size_t>(j)];
        u(n + p + j) = d.ds[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        u(n + i) = d.dy[static_cast<std::size_t>(i)];
    }
    u(2 * n + p) = d.dkappa;
    u(2 * n + p + 1) = d.dtau;
    return u;
}

} // namespace testing_support
