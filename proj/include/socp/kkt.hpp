#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "socp/cones.hpp"
#include "socp/ldl.hpp"
#include "socp/problem.hpp"
#include "socp/sparse.hpp"

namespace socp {

/// Right-hand side terms of the scaled Newton system.
struct RhsBundle {
    Vec w1;       ///< p
    Vec w2;       ///< n
    double w3 = 0.0;
    Vec w4;       ///< n
    double w5 = 0.0;
    Vec w4_hat;   ///< D mat(xbar)^{-1} w4
    double mu = 0.0;
    double kappa = 1.0;
    double tau = 1.0;

    /// (-w2, w1, w4_hat, w5 / tau, w3), length 2n + p + 2.
    Vec w0() const;
};

struct NewtonDirection {
    Vec dx;
    Vec dy;
    Vec ds;
    double dkappa = 0.0;
    double dtau = 0.0;
};

/**
 * w1..w5 at the iterate z for centering weight nu and second-order terms
 * (e_xs, e_kt). mu = (x^T s + tau kappa) / (l + m + 1).
 */
RhsBundle compute_rhs(const SocpProblem& problem, const HsdState& z, const NtScaling& scaling,
                      std::span<const double> e_xs, double e_kt, double nu);

struct KktOptions {
    double delta_reg = 1e-8;
    int max_refine = 3;
};

/**
 * Symmetric Newton matrix
 *
 *     B = [ 0   A^T  I^T ]
 *         [ A   0    0   ]
 *         [ I   0    D^  ]
 *
 * ordered (x, y, s~). Linear cones and SOCs of dimension below 4 keep their
 * D^2 block; larger SOCs are lifted to the (n_i + 1)-square arrow block
 *
 *     theta^{-2} [ -Q        sqrt2 p ]
 *                [ sqrt2 p^T   -1    ]
 *
 * whose auxiliary row follows the cone's own rows. The pattern, its ordering
 * and the symbolic analysis are fixed at construction.
 *
 * The elimination order keeps every pivot sign known in advance: each cone's
 * rows are eliminated together (s~ rows, auxiliary row, then x rows), and a
 * row of A is eliminated only once it can be matched to a distinct x column
 * already eliminated. Groups and rows of A are sequenced by minimum degree on
 * the compressed graph. Pivots are then negative on x and on the leading row
 * of each lifted SOC block, positive elsewhere.
 *
 * The factorized matrix is B equilibrated per cone: s~ and auxiliary rows of
 * a cone scaled by theta, its x rows by 1 / theta. matrix() returns B itself.
 */
class KktSystem {
public:
    KktSystem(const SparseMat& A, const ConeLayout& layout, KktOptions options = {});
    /// Reuses a previously computed (e.g. deserialized) symbolic analysis.
    KktSystem(const SparseMat& A, const ConeLayout& layout,
              std::shared_ptr<const SymbolicFactorization> symbolic, KktOptions options = {});

    static bool is_sparsified(std::size_t soc_dim) { return soc_dim >= 4; }

    std::size_t n() const { return n_; }
    std::size_t p() const { return p_; }
    std::size_t aux_count() const { return aux_count_; }
    std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
    /// Stored nonzeros of the full symmetric matrix.
    std::size_t nnz() const { return matrix_.nnz_full(); }

    const SparseMat& matrix() const { return matrix_; }
    const std::shared_ptr<const SymbolicFactorization>& symbolic() const { return symbolic_; }
    const NumericFactorization& factorization() const { return *numeric_; }
    const ConeLayout& layout() const { return layout_; }

    /// Row of B holding s_j (j in [0, n)); auxiliary rows are skipped.
    std::int32_t s_row(std::size_t j) const { return s_row_[j]; }

    /// Replaces the values of A. The pattern must equal the one used at construction.
    void update_a(const SparseMat& A);

    /// Writes the scaling blocks, factorizes, and solves the b/c column of the
    /// rank-2 correction, which depends on the scaling only.
    void assemble(const NtScaling& scaling, std::span<const double> b, std::span<const double> c,
                  double kappa_over_tau);

    /// Solves B v = rhs with iterative refinement (both of dimension dim()).
    /// Returns the sweep with the smallest residual; throws NumericalError
    /// only when the residual is not finite.
    RefineResult solve(std::span<const double> rhs, std::span<double> out);

    /// Full Newton direction of the 5-block system via the rank-2 correction.
    NewtonDirection solve_newton(const RhsBundle& rhs, std::span<const double> b,
                                 std::span<const double> c);

    std::size_t factorizations() const { return factorizations_; }
    std::size_t solves() const { return solves_; }
    int last_refine_sweeps() const { return last_sweeps_; }

private:
    void build_pattern(const SparseMat& A);
    Permutation structured_order(const SparseMat& A) const;
    std::vector<std::int8_t> pivot_signs() const;
    void refactor();
    void solve_bc_column(std::span<const double> b, std::span<const double> c);

    KktOptions options_;
    ConeLayout layout_;
    std::size_t n_ = 0;
    std::size_t p_ = 0;
    std::size_t aux_count_ = 0;
    std::vector<std::int32_t> s_row_;
    std::vector<std::int32_t> aux_row_;      ///< per SOC, -1 when not lifted
    std::vector<std::int64_t> a_pos_;        ///< position of each stored A entry in B
    std::vector<std::int64_t> block_pos_;    ///< cone block entries, in assembly order
    SparseMat matrix_;
    SparseMat scaled_;
    Vec row_scale_;
    Vec residual_weight_;  ///< sqrt2 |p|_inf on auxiliary rows, 1 elsewhere
    std::shared_ptr<const SymbolicFactorization> symbolic_;
    std::optional<NumericFactorization> numeric_;
    Regularization reg_;
    Vec bc_top_;     ///< u1 restricted to (x, y, s~)
    Vec u1_xys_;     ///< u1 restricted to (x, y, s)
    double kappa_over_tau_ = 1.0;
    Vec work_rhs_;
    Vec work_sol_;
    Vec scaled_rhs_;
    Vec scaled_sol_;
    std::vector<double> best_sol_;
    std::size_t factorizations_ = 0;
    std::size_t solves_ = 0;
    int last_sweeps_ = 0;
};

/// |B0 u - w0|_inf for the unsymmetric 5-block system.
double newton_residual(const SocpProblem& problem, const NtScaling& scaling, const RhsBundle& rhs,
                       const NewtonDirection& dir);

/// A D^2 A^T with every SOC block of D^2 kept dense (upper triangle stored).
SparseMat build_normal_equations_baseline(const SparseMat& A, const NtScaling& scaling);

} // namespace socp
