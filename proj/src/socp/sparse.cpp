#include "socp/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "socp/error.hpp"

namespace socp {

SparseMat SparseMat::from_triplets(std::int32_t rows, std::int32_t cols,
                                   std::span<const Triplet> triplets, bool symmetric, Zeros zeros)
{
    if (rows < 0 || cols < 0) {
        throw DimensionError("from_triplets: negative dimension");
    }
    if (symmetric && rows != cols) {
        throw DimensionError("from_triplets: symmetric matrix must be square");
    }
    std::vector<Triplet> entries(triplets.begin(), triplets.end());
    for (auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
            throw DimensionError("from_triplets: entry (" + std::to_string(t.row) + ", " +
                                 std::to_string(t.col) + ") out of range");
        }
        if (symmetric && t.row > t.col) {
            std::swap(t.row, t.col);
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });

    SparseMat m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.symmetric_ = symmetric;
    m.col_ptr_.assign(static_cast<std::size_t>(cols) + 1, 0);
    m.row_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());

    std::size_t i = 0;
    while (i < entries.size()) {
        const auto [row, col, first] = entries[i];
        double sum = first;
        std::size_t j = i + 1;
        while (j < entries.size() && entries[j].row == row && entries[j].col == col) {
            sum += entries[j].value;
            ++j;
        }
        if (sum != 0.0 || zeros == Zeros::Keep) {
            m.row_idx_.push_back(row);
            m.values_.push_back(sum);
            ++m.col_ptr_[static_cast<std::size_t>(col) + 1];
        }
        i = j;
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(cols); ++c) {
        m.col_ptr_[c + 1] += m.col_ptr_[c];
    }
    return m;
}

std::size_t SparseMat::nnz_full() const
{
    if (!symmetric_) {
        return nnz();
    }
    std::size_t count = 0;
    for (std::int32_t c = 0; c < cols_; ++c) {
        for (std::int32_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
            count += row_idx_[p] == c ? 1 : 2;
        }
    }
    return count;
}

std::int64_t SparseMat::find(std::int32_t row, std::int32_t col) const
{
    if (symmetric_ && row > col) {
        std::swap(row, col);
    }
    const auto begin = row_idx_.begin() + col_ptr_[col];
    const auto end = row_idx_.begin() + col_ptr_[col + 1];
    const auto it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) {
        return -1;
    }
    return it - row_idx_.begin();
}

void SparseMat::multiply(std::span<const double> x, std::span<double> y) const
{
    if (x.size() != static_cast<std::size_t>(cols_) || y.size() != static_cast<std::size_t>(rows_)) {
        throw DimensionError("SparseMat::multiply: size mismatch");
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (std::int32_t c = 0; c < cols_; ++c) {
        for (std::int32_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
            const std::int32_t r = row_idx_[p];
            y[r] += values_[p] * x[c];
            if (symmetric_ && r != c) {
                y[c] += values_[p] * x[r];
            }
        }
    }
}

void SparseMat::multiply_transpose(std::span<const double> x, std::span<double> y) const
{
    if (symmetric_) {
        multiply(x, y);
        return;
    }
    if (x.size() != static_cast<std::size_t>(rows_) || y.size() != static_cast<std::size_t>(cols_)) {
        throw DimensionError("SparseMat::multiply_transpose: size mismatch");
    }
    for (std::int32_t c = 0; c < cols_; ++c) {
        double sum = 0.0;
        for (std::int32_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
            sum += values_[p] * x[row_idx_[p]];
        }
        y[c] = sum;
    }
}

double SparseMat::norm_inf() const
{
    std::vector<double> row_sum(static_cast<std::size_t>(rows_), 0.0);
    for (std::int32_t c = 0; c < cols_; ++c) {
        for (std::int32_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
            const std::int32_t r = row_idx_[p];
            row_sum[r] += std::abs(values_[p]);
            if (symmetric_ && r != c) {
                row_sum[c] += std::abs(values_[p]);
            }
        }
    }
    return row_sum.empty() ? 0.0 : *std::max_element(row_sum.begin(), row_sum.end());
}

double SparseMat::norm_frobenius() const
{
    double sum = 0.0;
    for (std::int32_t c = 0; c < cols_; ++c) {
        for (std::int32_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
            const double v2 = values_[p] * values_[p];
            sum += (symmetric_ && row_idx_[p] != c) ? 2.0 * v2 : v2;
        }
    }
    return std::sqrt(sum);
}

std::vector<Triplet> SparseMat::to_triplets() const
{
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::int32_t c = 0; c < cols_; ++c) {
        for (std::int32_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
            out.push_back({row_idx_[p], c, values_[p]});
        }
    }
    return out;
}

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_coordinate(std::ostream& out, const SparseMat& mat)
{
    if (mat.rows() != mat.cols()) {
        throw DimensionError("write_coordinate: matrix must be square");
    }
    out << mat.rows() << ' ' << mat.nnz() << '\n';
    for (const auto& t : mat.to_triplets()) {
        out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
    }
}

SparseMat read_coordinate(std::istream& in, bool symmetric)
{
    long long dim = -1;
    long long nnz = -1;
    if (!(in >> dim >> nnz) || dim < 0 || nnz < 0) {
        throw FormatError("coordinate file: bad header, expected \"dim nnz\"");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        long long r = 0;
        long long c = 0;
        std::string token;
        if (!(in >> r >> c >> token)) {
            throw FormatError("coordinate file: truncated at entry " + std::to_string(k));
        }
        double v = 0.0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
            throw FormatError("coordinate file: bad value '" + token + "'");
        }
        if (r < 0 || r >= dim || c < 0 || c >= dim) {
            throw FormatError("coordinate file: index out of range at entry " + std::to_string(k));
        }
        entries.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c), v});
    }
    const auto n = static_cast<std::int32_t>(dim);
    return SparseMat::from_triplets(n, n, entries, symmetric, SparseMat::Zeros::Keep);
}

} // namespace socp
