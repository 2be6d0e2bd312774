#include "socp/cones.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "socp/error.hpp"

namespace socp {

namespace {

constexpr double kInteriorMargin = 1e-13;

void check_len(const ConeLayout& layout, std::size_t len, const char* what)
{
    if (len != layout.dim()) {
        throw DimensionError(std::string(what) + ": length " + std::to_string(len) +
                             " does not match cone dimension " + std::to_string(layout.dim()));
    }
}

double tail_norm(std::span<const double> v)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        sum += v[i] * v[i];
    }
    return std::sqrt(sum);
}

double tail_dot(std::span<const double> a, std::span<const double> b)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

// v^T Q v computed as (v_1 - |v~|)(v_1 + |v~|) to avoid cancellation.
double lorentz_norm_sq(std::span<const double> v)
{
    const double t = tail_norm(v);
    return (v[0] - t) * (v[0] + t);
}

} // namespace

ConeLayout::ConeLayout(std::size_t linear, std::vector<std::size_t> soc_dims) : linear_(linear)
{
    std::size_t first = 0;
    while (first < soc_dims.size() && soc_dims[first] == 1) {
        ++linear_;
        ++first;
    }
    dim_ = linear_;
    for (std::size_t i = first; i < soc_dims.size(); ++i) {
        if (soc_dims[i] < 2) {
            throw DimensionError("second-order cone " + std::to_string(i) + " has dimension " +
                                 std::to_string(soc_dims[i]) +
                                 "; 1-dimensional cones must precede all larger ones");
        }
        soc_dims_.push_back(soc_dims[i]);
        soc_offsets_.push_back(dim_);
        dim_ += soc_dims[i];
    }
}

Vec unit_vector(const ConeLayout& layout)
{
    Vec e(layout.dim(), 0.0);
    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        e[i] = 1.0;
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        e[layout.soc_offset(k)] = 1.0;
    }
    return e;
}

bool in_cone(const ConeLayout& layout, std::span<const double> v, bool strict)
{
    check_len(layout, v.size(), "in_cone");
    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        const double margin = strict ? kInteriorMargin * (1.0 + std::abs(v[i])) : 0.0;
        if (strict ? !(v[i] > margin) : !(v[i] >= 0.0)) {
            return false;
        }
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const auto block = v.subspan(layout.soc_offset(k), layout.soc_dim(k));
        const double t = tail_norm(block);
        if (strict) {
            const double margin = kInteriorMargin * (1.0 + std::hypot(block[0], t));
            if (!(block[0] - t > margin)) {
                return false;
            }
        } else if (!(block[0] >= t)) {
            return false;
        }
    }
    return true;
}

void arrow_apply(const ConeLayout& layout, std::span<const double> h, std::span<const double> v,
                 std::span<double> out)
{
    check_len(layout, h.size(), "arrow_apply");
    check_len(layout, v.size(), "arrow_apply");
    check_len(layout, out.size(), "arrow_apply");
    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        out[i] = h[i] * v[i];
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t n = layout.soc_dim(k);
        const auto hb = h.subspan(off, n);
        const auto vb = v.subspan(off, n);
        out[off] = hb[0] * vb[0] + tail_dot(hb, vb);
        for (std::size_t j = 1; j < n; ++j) {
            out[off + j] = hb[j] * vb[0] + hb[0] * vb[j];
        }
    }
}

Vec arrow_apply(const ConeLayout& layout, std::span<const double> h, std::span<const double> v)
{
    Vec out(layout.dim());
    arrow_apply(layout, h, v, out);
    return out;
}

void arrow_solve(const ConeLayout& layout, std::span<const double> h, std::span<const double> v,
                 std::span<double> out)
{
    check_len(layout, h.size(), "arrow_solve");
    check_len(layout, v.size(), "arrow_solve");
    check_len(layout, out.size(), "arrow_solve");
    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        if (h[i] == 0.0) {
            throw NumericalError("arrow_solve: singular linear block at " + std::to_string(i));
        }
        out[i] = v[i] / h[i];
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t n = layout.soc_dim(k);
        const auto hb = h.subspan(off, n);
        const auto vb = v.subspan(off, n);
        const double det = lorentz_norm_sq(hb);
        if (hb[0] == 0.0 || det == 0.0) {
            throw NumericalError("arrow_solve: singular arrowhead block for cone " + std::to_string(k));
        }
        const double head = (hb[0] * vb[0] - tail_dot(hb, vb)) / det;
        out[off] = head;
        for (std::size_t j = 1; j < n; ++j) {
            out[off + j] = (vb[j] - hb[j] * head) / hb[0];
        }
    }
}

Vec arrow_solve(const ConeLayout& layout, std::span<const double> h, std::span<const double> v)
{
    Vec out(layout.dim());
    arrow_solve(layout, h, v, out);
    return out;
}

std::span<const double> NtScaling::q_block(std::size_t soc) const
{
    return std::span<const double>(q).subspan(layout.soc_offset(soc) - layout.linear_count(),
                                               layout.soc_dim(soc));
}

std::span<const double> NtScaling::p_block(std::size_t soc) const
{
    return std::span<const double>(p).subspan(layout.soc_offset(soc) - layout.linear_count(),
                                              layout.soc_dim(soc));
}

NtScaling compute_nt_scaling(const ConeLayout& layout, std::span<const double> x,
                             std::span<const double> s)
{
    check_len(layout, x.size(), "compute_nt_scaling");
    check_len(layout, s.size(), "compute_nt_scaling");

    NtScaling scal;
    scal.layout = layout;
    scal.theta.resize(layout.cone_count());
    scal.q.resize(layout.dim() - layout.linear_count());
    scal.p.resize(scal.q.size());

    const std::size_t l = layout.linear_count();
    for (std::size_t i = 0; i < l; ++i) {
        if (!(x[i] > 0.0) || !(s[i] > 0.0)) {
            throw NumericalError("compute_nt_scaling: linear cone " + std::to_string(i) +
                                 " is not strictly interior");
        }
        scal.theta[i] = std::sqrt(s[i] / x[i]);
    }

    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t n = layout.soc_dim(k);
        const auto xb = x.subspan(off, n);
        const auto sb = s.subspan(off, n);
        const double xqx = lorentz_norm_sq(xb);
        const double sqs = lorentz_norm_sq(sb);
        if (!(xqx > 0.0) || !(sqs > 0.0) || !(xb[0] > 0.0) || !(sb[0] > 0.0)) {
            throw NumericalError("compute_nt_scaling: cone " + std::to_string(k) +
                                 " is not strictly interior");
        }
        const double theta = std::sqrt(std::sqrt(sqs / xqx));
        double xs = xb[0] * sb[0];
        xs += tail_dot(xb, sb);
        const double denom_sq = 2.0 * (xs + std::sqrt(xqx * sqs));
        if (!(denom_sq > 0.0)) {
            throw NumericalError("compute_nt_scaling: degenerate pair in cone " + std::to_string(k));
        }
        const double inv_denom = 1.0 / std::sqrt(denom_sq);

        double* q = scal.q.data() + (off - l);
        double* p = scal.p.data() + (off - l);
        q[0] = (sb[0] / theta + theta * xb[0]) * inv_denom;
        for (std::size_t j = 1; j < n; ++j) {
            q[j] = (sb[j] / theta - theta * xb[j]) * inv_denom;
        }
        p[0] = q[0];
        for (std::size_t j = 1; j < n; ++j) {
            p[j] = -q[j];
        }
        scal.theta[l + k] = theta;
    }
    return scal;
}

void apply_scaling(const NtScaling& scal, std::span<const double> v, ScalingMode mode,
                   std::span<double> out)
{
    const ConeLayout& layout = scal.layout;
    check_len(layout, v.size(), "apply_scaling");
    check_len(layout, out.size(), "apply_scaling");
    const std::size_t l = layout.linear_count();
    const bool inverse = mode == ScalingMode::DInverse;

    for (std::size_t i = 0; i < l; ++i) {
        out[i] = inverse ? scal.theta[i] * v[i] : v[i] / scal.theta[i];
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t n = layout.soc_dim(k);
        const double theta = scal.theta[l + k];
        // D^{-1} = theta G uses w = q; D = G^{-1} / theta uses w = Q q. Both have w_1 = q_1.
        const auto w = inverse ? scal.q_block(k) : scal.p_block(k);
        const auto vb = v.subspan(off, n);
        const double factor = inverse ? theta : 1.0 / theta;
        const double ew_dot_v = vb[0] + w[0] * vb[0] + tail_dot(w, vb);
        const double coef = ew_dot_v / (1.0 + w[0]);
        out[off] = factor * (-vb[0] + (1.0 + w[0]) * coef);
        for (std::size_t j = 1; j < n; ++j) {
            out[off + j] = factor * (vb[j] + w[j] * coef);
        }
    }
}

Vec apply_scaling(const NtScaling& scaling, std::span<const double> v, ScalingMode mode)
{
    Vec out(v.size());
    apply_scaling(scaling, v, mode, out);
    return out;
}

void apply_d_squared(const NtScaling& scal, std::span<const double> v, std::span<double> out)
{
    const ConeLayout& layout = scal.layout;
    check_len(layout, v.size(), "apply_d_squared");
    check_len(layout, out.size(), "apply_d_squared");
    const std::size_t l = layout.linear_count();
    for (std::size_t i = 0; i < l; ++i) {
        out[i] = v[i] / (scal.theta[i] * scal.theta[i]);
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t n = layout.soc_dim(k);
        const double inv_t2 = 1.0 / (scal.theta[l + k] * scal.theta[l + k]);
        const auto p = scal.p_block(k);
        const auto vb = v.subspan(off, n);
        const double pv = 2.0 * (p[0] * vb[0] + tail_dot(p, vb));
        out[off] = inv_t2 * (-vb[0] + p[0] * pv);
        for (std::size_t j = 1; j < n; ++j) {
            out[off + j] = inv_t2 * (vb[j] + p[j] * pv);
        }
    }
}

double max_step(const ConeLayout& layout, std::span<const double> v, std::span<const double> dv)
{
    check_len(layout, v.size(), "max_step");
    check_len(layout, dv.size(), "max_step");
    constexpr double inf = std::numeric_limits<double>::infinity();
    double alpha = inf;

    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        if (dv[i] < 0.0) {
            alpha = std::min(alpha, -v[i] / dv[i]);
        }
    }

    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        const std::size_t n = layout.soc_dim(k);
        const auto vb = v.subspan(off, n);
        const auto db = dv.subspan(off, n);
        // (v + t d)^T Q (v + t d) = a t^2 + 2 b t + c, c > 0 for interior v.
        const double a = lorentz_norm_sq(db);
        const double b = vb[0] * db[0] - tail_dot(vb, db);
        const double c = lorentz_norm_sq(vb);
        double root = inf;
        if (a == 0.0) {
            if (b < 0.0) {
                root = -c / (2.0 * b);
            }
        } else {
            const double disc = b * b - a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double qq = -(b + (b >= 0.0 ? sq : -sq));
                const double r1 = qq / a;
                const double r2 = qq != 0.0 ? c / qq : inf;
                if (r1 > 0.0) {
                    root = std::min(root, r1);
                }
                if (r2 > 0.0) {
                    root = std::min(root, r2);
                }
            }
        }
        // The head can only turn negative after the quadratic has vanished,
        // except through roundoff when v sits on the boundary.
        if (db[0] < 0.0) {
            root = std::min(root, -vb[0] / db[0]);
        }
        alpha = std::min(alpha, std::max(root, 0.0));
    }
    return alpha;
}

} // namespace socp
