#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace socp {

using Vec = std::vector<double>;

/**
 * Cartesian product K = K_L^l x K_S^{n_1} x ... x K_S^{n_m}.
 *
 * Linear cones occupy the first l entries of every solver vector, followed by
 * the second-order cones in the order given. A second-order cone of dimension
 * one is the same set as a linear cone, so leading 1-dimensional SOCs are
 * folded into the linear block at construction.
 */
class ConeLayout {
public:
    ConeLayout() = default;
    ConeLayout(std::size_t linear, std::vector<std::size_t> soc_dims);

    std::size_t linear_count() const { return linear_; }
    std::size_t soc_count() const { return soc_dims_.size(); }
    const std::vector<std::size_t>& soc_dims() const { return soc_dims_; }
    std::size_t soc_dim(std::size_t i) const { return soc_dims_[i]; }
    std::size_t soc_offset(std::size_t i) const { return soc_offsets_[i]; }

    /// Total vector length n.
    std::size_t dim() const { return dim_; }
    /// Number of cones l + m, the barrier degree of K.
    std::size_t cone_count() const { return linear_ + soc_dims_.size(); }

    bool operator==(const ConeLayout& other) const = default;

private:
    std::size_t linear_ = 0;
    std::vector<std::size_t> soc_dims_;
    std::vector<std::size_t> soc_offsets_;
    std::size_t dim_ = 0;
};

/// The identity element e: ones on linear cones, (1, 0, ..., 0) on each SOC.
Vec unit_vector(const ConeLayout& layout);

/// v in K (strict = false) or v in int K (strict = true). Strict membership
/// requires a margin above 1e-13 * (1 + |v|) on every cone.
bool in_cone(const ConeLayout& layout, std::span<const double> v, bool strict);

/// out = mat(h) v. `out` may not alias `v`.
void arrow_apply(const ConeLayout& layout, std::span<const double> h,
                 std::span<const double> v, std::span<double> out);
Vec arrow_apply(const ConeLayout& layout, std::span<const double> h, std::span<const double> v);

/// out = mat(h)^{-1} v. Throws NumericalError if a block of mat(h) is singular.
void arrow_solve(const ConeLayout& layout, std::span<const double> h,
                 std::span<const double> v, std::span<double> out);
Vec arrow_solve(const ConeLayout& layout, std::span<const double> h, std::span<const double> v);

/**
 * Nesterov-Todd scaling of a strictly interior pair (x, s).
 *
 * Per cone the scaling is theta * G with G = 1 on linear cones and the
 * hyperbolic reflection -Q + (e + q)(e + q)^T / (1 + q_1) on SOCs, where
 * q^T Q q = 1. D = (Theta G)^{-1}; the pair maps to D^{-1} x = D s.
 * G is never formed: every product is applied through its rank-1 structure.
 */
struct NtScaling {
    ConeLayout layout;
    Vec theta; ///< one entry per cone, linear cones first
    Vec q;     ///< concatenated SOC blocks (length n - l)
    Vec p;     ///< Q q, cached

    std::span<const double> q_block(std::size_t soc) const;
    std::span<const double> p_block(std::size_t soc) const;
};

NtScaling compute_nt_scaling(const ConeLayout& layout, std::span<const double> x,
                             std::span<const double> s);

enum class ScalingMode { D, DInverse };

/// out = D v or D^{-1} v.
void apply_scaling(const NtScaling& scaling, std::span<const double> v, ScalingMode mode,
                   std::span<double> out);
Vec apply_scaling(const NtScaling& scaling, std::span<const double> v, ScalingMode mode);

/// out = D^2 v = theta^{-2} (-Q + 2 p p^T) v per cone.
void apply_d_squared(const NtScaling& scaling, std::span<const double> v, std::span<double> out);

/// sup{alpha >= 0 : v + alpha dv in K}; +infinity when the ray never leaves K.
double max_step(const ConeLayout& layout, std::span<const double> v, std::span<const double> dv);

} // namespace socp
