#pragma once

#include <iosfwd>

#include "socp/cones.hpp"
#include "socp/sparse.hpp"

namespace socp {

/// minimize c^T x  s.t.  A x = b,  x in K.
struct SocpProblem {
    SparseMat A; ///< p x n
    Vec b;
    Vec c;
    ConeLayout layout;

    std::size_t n() const { return layout.dim(); }
    std::size_t p() const { return b.size(); }

    /// Throws DimensionError when A, b, c and the layout disagree.
    void validate() const;
};

/// Iterate of the homogeneous self-dual embedding.
struct HsdState {
    Vec x;
    Vec y;
    Vec s;
    double kappa = 1.0;
    double tau = 1.0;
};

/**
 * Standard-form text:
 *
 *     socp n p l m
 *     n_1 ... n_m
 *     nnz
 *     row col value      (nnz lines, 0-based entries of A)
 *     b_1 ... b_p
 *     c_1 ... c_n
 *
 * Whitespace between tokens is free. Throws FormatError on malformed input.
 */
SocpProblem read_problem(std::istream& in);
void write_problem(std::ostream& out, const SocpProblem& problem);

} // namespace socp
