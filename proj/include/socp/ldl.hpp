#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "socp/sparse.hpp"

namespace socp {

/// perm[new] = old: the k-th pivot eliminates original row/column perm[k].
using Permutation = std::vector<std::int32_t>;

Permutation identity_permutation(std::int32_t dim);

/// Approximate minimum degree ordering of a square symmetric pattern.
Permutation amd_order(const SparseMat& pattern);

/**
 * Symbolic LDL^T analysis of P A P^T.
 *
 * Besides the elimination tree and the pattern of L it records the complete
 * sequence of operand positions the numeric phase executes, so refactoring a
 * matrix with the same pattern never searches the pattern again.
 *
 * Program layout, per pivot k:
 *  - scatter entries [scatter_ptr[k], scatter_ptr[k+1]): add matrix value
 *    `scatter_src[e]` into work row `scatter_row[e]` (row <= k, new indices);
 *  - update entries [program_ptr[k], program_ptr[k+1]), in topological order:
 *    column j = `program_col[t]` of L contributes through positions
 *    [l_col_ptr[j], program_pos[t]), then L(k, j) is written at program_pos[t].
 */
struct SymbolicFactorization {
    static constexpr std::uint32_t kFormatVersion = 1;

    std::int32_t dim = 0;
    std::int64_t matrix_nnz = 0;
    Permutation perm;
    std::vector<std::int32_t> parent;
    std::vector<std::int32_t> l_col_ptr{0};
    std::vector<std::int32_t> l_row_idx;

    std::vector<std::int32_t> scatter_ptr{0};
    std::vector<std::int32_t> scatter_src;
    std::vector<std::int32_t> scatter_row;

    std::vector<std::int32_t> program_ptr{0};
    std::vector<std::int32_t> program_col;
    std::vector<std::int32_t> program_pos;

    std::size_t l_nnz() const { return l_row_idx.size(); }

    bool operator==(const SymbolicFactorization&) const = default;
};

/// `pattern` must be square and stored symmetric (upper triangle).
SymbolicFactorization symbolic_ldl(const SparseMat& pattern, const Permutation& perm);

/// Little-endian: "FSYM", u32 version, u32 dim, u64 matrix_nnz, u32 l_nnz,
/// u32 scatter_len, u32 program_len, then perm, parent (-1 as 0xFFFFFFFF),
/// l_col_ptr, l_row_idx, scatter_ptr, scatter_src, scatter_row, program_ptr,
/// program_col, program_pos as u32 arrays, and a trailing CRC-32 of all
/// preceding bytes.
std::vector<std::uint8_t> serialize(const SymbolicFactorization& symbolic);
SymbolicFactorization deserialize(std::span<const std::uint8_t> bytes);

struct Regularization {
    double delta = 1e-8;
    /// Expected pivot sign per ORIGINAL index (+1, -1, or 0 for "no
    /// expectation"). Empty means no expectation for any pivot.
    std::vector<std::int8_t> signs;
};

/**
 * Numeric LDL^T with dynamic regularization.
 *
 * A pivot d whose expected sign is s != 0 is replaced by s * delta when
 * s * d < delta. A pivot without expectation is pushed to +-delta, keeping
 * its sign, when |d| < delta. The factorization then satisfies
 * P (A + E) P^T = L D L^T with E diagonal.
 *
 * All buffers are sized at construction; `factor` performs no allocation.
 */
class NumericFactorization {
public:
    explicit NumericFactorization(std::shared_ptr<const SymbolicFactorization> symbolic);

    void factor(const SparseMat& matrix, const Regularization& reg);

    /// x <- (P^T L D L^T P)^{-1} x
    void solve_in_place(std::span<double> x) const;

    const SymbolicFactorization& symbolic() const { return *symbolic_; }
    std::span<const double> l_values() const { return l_values_; }
    /// Pivots in elimination order.
    std::span<const double> d() const { return d_; }
    /// E_kk added at pivot k (elimination order); zero where none applied.
    std::span<const double> regularization() const { return applied_; }
    std::size_t regularized_pivots() const { return regularized_count_; }
    std::size_t factor_count() const { return factor_count_; }

private:
    std::shared_ptr<const SymbolicFactorization> symbolic_;
    std::vector<double> l_values_;
    std::vector<double> d_;
    std::vector<double> applied_;
    std::vector<std::int8_t> pivot_sign_;
    mutable std::vector<double> work_;
    std::size_t regularized_count_ = 0;
    std::size_t factor_count_ = 0;
};

struct RefineResult {
    int sweeps = 0;
    double residual_inf = 0.0;
    bool converged = false;
};

/**
 * Solves `matrix * x = rhs` with the regularized factorization and up to
 * `max_refine` sweeps of iterative refinement against the original matrix.
 * Stops once |r|_inf <= 1e-11 (1 + |rhs|_inf). Throws NumericalError when
 * the residual grows on two consecutive sweeps.
 */
RefineResult solve_refined(const NumericFactorization& fact, const SparseMat& matrix,
                           std::span<const double> rhs, std::span<double> x, int max_refine = 3);

} // namespace socp
