#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <span>
#include <vector>

namespace socp {

struct Triplet {
    std::int32_t row;
    std::int32_t col;
    double value;
};

/**
 * Compressed sparse column matrix.
 *
 * Symmetric matrices keep only the upper triangle (row <= col) and set
 * `symmetric()`; products then account for the mirrored lower part.
 */
class SparseMat {
public:
    enum class Zeros { Drop, Keep };

    SparseMat() = default;

    /// Duplicates are summed. With `Zeros::Drop` entries that sum to zero are
    /// removed; `Zeros::Keep` preserves them as structural nonzeros. For a
    /// symmetric matrix, lower-triangle triplets are mirrored into the upper one.
    static SparseMat from_triplets(std::int32_t rows, std::int32_t cols,
                                   std::span<const Triplet> triplets, bool symmetric,
                                   Zeros zeros = Zeros::Drop);

    std::int32_t rows() const { return rows_; }
    std::int32_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }
    bool symmetric() const { return symmetric_; }

    /// Stored entries when symmetric, counted once per triangle.
    std::size_t nnz_full() const;

    std::span<const std::int32_t> col_ptr() const { return col_ptr_; }
    std::span<const std::int32_t> row_idx() const { return row_idx_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Index of entry (row, col) in the value array, or -1 if not stored.
    std::int64_t find(std::int32_t row, std::int32_t col) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y = A^T x
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;

    /// Row-sum infinity norm (of the full matrix when symmetric).
    double norm_inf() const;
    double norm_frobenius() const;

    std::vector<Triplet> to_triplets() const;

private:
    std::int32_t rows_ = 0;
    std::int32_t cols_ = 0;
    bool symmetric_ = false;
    std::vector<std::int32_t> col_ptr_{0};
    std::vector<std::int32_t> row_idx_;
    std::vector<double> values_;
};

/// Coordinate text: header "dim nnz", then one "row col value" line per stored
/// entry, 0-based, values in shortest round-trip decimal.
void write_coordinate(std::ostream& out, const SparseMat& mat);
/// Reads a square coordinate file. `symmetric` selects upper-triangle storage.
SparseMat read_coordinate(std::istream& in, bool symmetric);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

} // namespace socp
