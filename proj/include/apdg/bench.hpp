#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "apdg/params.hpp"
#include "socp/ipm.hpp"

namespace apdg {

/// Sizes of the first SC subproblem and of both Newton-system representations.
struct SparsityRow {
    int k_f = 0;
    bool drag = true;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t l = 0;
    std::size_t m = 0;
    std::size_t dim_b = 0;
    std::size_t nnz_b = 0;        ///< both triangles
    std::size_t dim_baseline = 0; ///< A D^2 A^T is p x p
    std::size_t nnz_baseline = 0; ///< both triangles
    socp::SolveStatus status = socp::SolveStatus::NumericalFailure;
    int iterations = 0;
    double median_seconds = 0.0; ///< subproblem construction and cold solve
};

/// `repeats` = 0 skips the timed solves.
SparsityRow sparsity_row(const Scenario& scenario, int k_f, int repeats);

void write_sparsity_csv(std::ostream& out, const std::vector<SparsityRow>& rows);

} // namespace apdg
