#include "socp/ldl.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "socp/error.hpp"

namespace socp {

Permutation identity_permutation(std::int32_t dim)
{
    Permutation perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), 0);
    return perm;
}

Permutation amd_order(const SparseMat& pattern)
{
    if (pattern.rows() != pattern.cols()) {
        throw DimensionError("amd_order: matrix must be square");
    }
    const std::int32_t n = pattern.rows();
    if (n == 0) {
        return {};
    }
    std::vector<Eigen::Triplet<double, int>> entries;
    entries.reserve(pattern.nnz() * 2);
    const auto cp = pattern.col_ptr();
    const auto ri = pattern.row_idx();
    for (std::int32_t c = 0; c < n; ++c) {
        for (std::int32_t p = cp[c]; p < cp[c + 1]; ++p) {
            entries.emplace_back(ri[p], c, 1.0);
            if (pattern.symmetric() && ri[p] != c) {
                entries.emplace_back(c, ri[p], 1.0);
            }
        }
    }
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> mat(n, n);
    mat.setFromTriplets(entries.begin(), entries.end());

    Eigen::AMDOrdering<int> ordering;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
    ordering(mat, pinv);
    // Eigen returns the inverse permutation: pinv.indices()[new] = old.
    return Permutation(pinv.indices().data(), pinv.indices().data() + n);
}

SymbolicFactorization symbolic_ldl(const SparseMat& pattern, const Permutation& perm)
{
    if (pattern.rows() != pattern.cols() || !pattern.symmetric()) {
        throw DimensionError("symbolic_ldl: expected a square symmetric (upper) matrix");
    }
    const std::int32_t n = pattern.rows();
    if (perm.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("symbolic_ldl: permutation length mismatch");
    }
    std::vector<std::int32_t> pinv(static_cast<std::size_t>(n), -1);
    for (std::int32_t k = 0; k < n; ++k) {
        const std::int32_t old = perm[k];
        if (old < 0 || old >= n || pinv[old] != -1) {
            throw DimensionError("symbolic_ldl: not a permutation");
        }
        pinv[old] = k;
    }

    SymbolicFactorization sym;
    sym.dim = n;
    sym.matrix_nnz = static_cast<std::int64_t>(pattern.nnz());
    sym.perm = perm;

    // Upper triangle of C = P A P^T, column by column, remembering where each
    // value lives in the source matrix.
    const auto cp = pattern.col_ptr();
    const auto ri = pattern.row_idx();
    std::vector<std::int32_t> count(static_cast<std::size_t>(n) + 1, 0);
    for (std::int32_t c = 0; c < n; ++c) {
        for (std::int32_t p = cp[c]; p < cp[c + 1]; ++p) {
            const std::int32_t i = pinv[ri[p]];
            const std::int32_t j = pinv[c];
            ++count[std::max(i, j) + 1];
        }
    }
    sym.scatter_ptr.assign(count.begin(), count.end());
    for (std::int32_t k = 0; k < n; ++k) {
        sym.scatter_ptr[k + 1] += sym.scatter_ptr[k];
    }
    sym.scatter_src.resize(pattern.nnz());
    sym.scatter_row.resize(pattern.nnz());
    {
        std::vector<std::int32_t> next(sym.scatter_ptr.begin(), sym.scatter_ptr.end() - 1);
        for (std::int32_t c = 0; c < n; ++c) {
            for (std::int32_t p = cp[c]; p < cp[c + 1]; ++p) {
                const std::int32_t i = pinv[ri[p]];
                const std::int32_t j = pinv[c];
                const std::int32_t col = std::max(i, j);
                const std::int32_t slot = next[col]++;
                sym.scatter_src[slot] = p;
                sym.scatter_row[slot] = std::min(i, j);
            }
        }
        // Sort each column by row so the program is independent of input order.
        for (std::int32_t k = 0; k < n; ++k) {
            const auto b = static_cast<std::size_t>(sym.scatter_ptr[k]);
            const auto e = static_cast<std::size_t>(sym.scatter_ptr[k + 1]);
            std::vector<std::pair<std::int32_t, std::int32_t>> col;
            for (std::size_t t = b; t < e; ++t) {
                col.emplace_back(sym.scatter_row[t], sym.scatter_src[t]);
            }
            std::sort(col.begin(), col.end());
            for (std::size_t t = b; t < e; ++t) {
                sym.scatter_row[t] = col[t - b].first;
                sym.scatter_src[t] = col[t - b].second;
            }
        }
    }

    // Elimination tree and column counts.
    sym.parent.assign(static_cast<std::size_t>(n), -1);
    std::vector<std::int32_t> flag(static_cast<std::size_t>(n), -1);
    std::vector<std::int32_t> lnz(static_cast<std::size_t>(n), 0);
    for (std::int32_t k = 0; k < n; ++k) {
        flag[k] = k;
        for (std::int32_t t = sym.scatter_ptr[k]; t < sym.scatter_ptr[k + 1]; ++t) {
            std::int32_t i = sym.scatter_row[t];
            for (; i < k && flag[i] != k; i = sym.parent[i]) {
                if (sym.parent[i] == -1) {
                    sym.parent[i] = k;
                }
                ++lnz[i];
                flag[i] = k;
            }
        }
    }
    sym.l_col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::int32_t k = 0; k < n; ++k) {
        sym.l_col_ptr[k + 1] = sym.l_col_ptr[k] + lnz[k];
    }
    sym.l_row_idx.assign(static_cast<std::size_t>(sym.l_col_ptr[n]), 0);

    // Replay the up-looking elimination once to record operand positions.
    std::vector<std::int32_t> filled(static_cast<std::size_t>(n), 0);
    std::vector<std::int32_t> stack(static_cast<std::size_t>(n));
    std::fill(flag.begin(), flag.end(), -1);
    sym.program_ptr.assign(1, 0);
    sym.program_col.clear();
    sym.program_pos.clear();
    sym.program_col.reserve(sym.l_nnz());
    sym.program_pos.reserve(sym.l_nnz());
    for (std::int32_t k = 0; k < n; ++k) {
        std::int32_t top = n;
        flag[k] = k;
        for (std::int32_t t = sym.scatter_ptr[k]; t < sym.scatter_ptr[k + 1]; ++t) {
            std::int32_t i = sym.scatter_row[t];
            std::int32_t len = 0;
            for (; i < k && flag[i] != k; i = sym.parent[i]) {
                stack[len++] = i;
                flag[i] = k;
            }
            while (len > 0) {
                stack[--top] = stack[--len];
            }
        }
        for (std::int32_t t = top; t < n; ++t) {
            const std::int32_t j = stack[t];
            const std::int32_t pos = sym.l_col_ptr[j] + filled[j]++;
            sym.l_row_idx[pos] = k;
            sym.program_col.push_back(j);
            sym.program_pos.push_back(pos);
        }
        sym.program_ptr.push_back(static_cast<std::int32_t>(sym.program_col.size()));
    }
    return sym;
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'Y', 'M'};

class ByteWriter {
public:
    void raw(const void* data, std::size_t len)
    {
        const auto* b = static_cast<const std::uint8_t*>(data);
        bytes_.insert(bytes_.end(), b, b + len);
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void array(const std::vector<std::int32_t>& v)
    {
        for (const auto x : v) {
            u32(static_cast<std::uint32_t>(x));
        }
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 8;
        return v;
    }
    std::vector<std::int32_t> array(std::size_t len)
    {
        need(4 * len);
        std::vector<std::int32_t> v(len);
        for (auto& x : v) {
            x = static_cast<std::int32_t>(u32());
        }
        return v;
    }
    void need(std::size_t len) const
    {
        if (pos_ + len > bytes_.size()) {
            throw FormatError("symbolic factorization: truncated input");
        }
    }
    std::size_t pos() const { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
        crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

} // namespace

std::vector<std::uint8_t> serialize(const SymbolicFactorization& sym)
{
    ByteWriter w;
    w.raw(kMagic, sizeof(kMagic));
    w.u32(SymbolicFactorization::kFormatVersion);
    w.u32(static_cast<std::uint32_t>(sym.dim));
    w.u64(static_cast<std::uint64_t>(sym.matrix_nnz));
    w.u32(static_cast<std::uint32_t>(sym.l_row_idx.size()));
    w.u32(static_cast<std::uint32_t>(sym.scatter_src.size()));
    w.u32(static_cast<std::uint32_t>(sym.program_col.size()));
    w.array(sym.perm);
    w.array(sym.parent);
    w.array(sym.l_col_ptr);
    w.array(sym.l_row_idx);
    w.array(sym.scatter_ptr);
    w.array(sym.scatter_src);
    w.array(sym.scatter_row);
    w.array(sym.program_ptr);
    w.array(sym.program_col);
    w.array(sym.program_pos);
    const std::uint32_t crc = crc_of(w.bytes());
    w.u32(crc);
    return std::move(w.bytes());
}

SymbolicFactorization deserialize(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("symbolic factorization: bad magic");
    }
    if (bytes.size() < 12) {
        throw FormatError("symbolic factorization: truncated input");
    }
    const std::uint32_t stored_crc = static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
                                     static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
                                     static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
                                     static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
    const auto body = bytes.first(bytes.size() - 4);

    ByteReader r(body);
    r.array(1); // magic
    const std::uint32_t version = r.u32();
    if (version != SymbolicFactorization::kFormatVersion) {
        throw FormatError("symbolic factorization: unsupported version " + std::to_string(version));
    }
    if (crc_of(body) != stored_crc) {
        throw FormatError("symbolic factorization: checksum mismatch");
    }

    SymbolicFactorization sym;
    sym.dim = static_cast<std::int32_t>(r.u32());
    sym.matrix_nnz = static_cast<std::int64_t>(r.u64());
    const std::size_t l_nnz = r.u32();
    const std::size_t scatter_len = r.u32();
    const std::size_t program_len = r.u32();
    const auto n = static_cast<std::size_t>(sym.dim);
    sym.perm = r.array(n);
    sym.parent = r.array(n);
    sym.l_col_ptr = r.array(n + 1);
    sym.l_row_idx = r.array(l_nnz);
    sym.scatter_ptr = r.array(n + 1);
    sym.scatter_src = r.array(scatter_len);
    sym.scatter_row = r.array(scatter_len);
    sym.program_ptr = r.array(n + 1);
    sym.program_col = r.array(program_len);
    sym.program_pos = r.array(program_len);
    if (r.pos() != body.size()) {
        throw FormatError("symbolic factorization: trailing bytes");
    }
    return sym;
}

NumericFactorization::NumericFactorization(std::shared_ptr<const SymbolicFactorization> symbolic)
    : symbolic_(std::move(symbolic))
{
    const auto n = static_cast<std::size_t>(symbolic_->dim);
    l_values_.assign(symbolic_->l_nnz(), 0.0);
    d_.assign(n, 0.0);
    applied_.assign(n, 0.0);
    pivot_sign_.assign(n, 0);
    work_.assign(n, 0.0);
}

void NumericFactorization::factor(const SparseMat& matrix, const Regularization& reg)
{
    const SymbolicFactorization& sym = *symbolic_;
    if (matrix.rows() != sym.dim || matrix.cols() != sym.dim ||
        static_cast<std::int64_t>(matrix.nnz()) != sym.matrix_nnz) {
        throw DimensionError("NumericFactorization: matrix pattern does not match the symbolic analysis");
    }
    const std::int32_t n = sym.dim;
    const bool have_signs = !reg.signs.empty();
    if (have_signs && reg.signs.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("NumericFactorization: sign pattern length mismatch");
    }

    const auto values = matrix.values();
    const std::int32_t* lp = sym.l_col_ptr.data();
    const std::int32_t* li = sym.l_row_idx.data();
    double* lx = l_values_.data();
    double* y = work_.data();
    regularized_count_ = 0;

    for (std::int32_t k = 0; k < n; ++k) {
        for (std::int32_t e = sym.scatter_ptr[k]; e < sym.scatter_ptr[k + 1]; ++e) {
            y[sym.scatter_row[e]] += values[sym.scatter_src[e]];
        }
        double dk = y[k];
        y[k] = 0.0;
        for (std::int32_t t = sym.program_ptr[k]; t < sym.program_ptr[k + 1]; ++t) {
            const std::int32_t j = sym.program_col[t];
            const std::int32_t pos = sym.program_pos[t];
            const double yj = y[j];
            y[j] = 0.0;
            for (std::int32_t q = lp[j]; q < pos; ++q) {
                y[li[q]] -= lx[q] * yj;
            }
            const double lkj = yj / d_[j];
            dk -= lkj * yj;
            lx[pos] = lkj;
        }

        const std::int8_t sign = have_signs ? reg.signs[sym.perm[k]] : 0;
        double fixed = dk;
        if (sign != 0) {
            if (sign * dk < reg.delta) {
                fixed = sign * reg.delta;
            }
        } else if (std::abs(dk) < reg.delta) {
            fixed = dk < 0.0 ? -reg.delta : reg.delta;
        }
        applied_[k] = fixed - dk;
        if (fixed != dk) {
            ++regularized_count_;
        }
        d_[k] = fixed;
    }
    ++factor_count_;
}

void NumericFactorization::solve_in_place(std::span<double> x) const
{
    const SymbolicFactorization& sym = *symbolic_;
    const std::int32_t n = sym.dim;
    if (x.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("NumericFactorization::solve_in_place: size mismatch");
    }
    double* y = work_.data();
    for (std::int32_t k = 0; k < n; ++k) {
        y[k] = x[sym.perm[k]];
    }
    const std::int32_t* lp = sym.l_col_ptr.data();
    const std::int32_t* li = sym.l_row_idx.data();
    const double* lx = l_values_.data();
    for (std::int32_t j = 0; j < n; ++j) {
        const double yj = y[j];
        for (std::int32_t q = lp[j]; q < lp[j + 1]; ++q) {
            y[li[q]] -= lx[q] * yj;
        }
    }
    for (std::int32_t j = 0; j < n; ++j) {
        y[j] /= d_[j];
    }
    for (std::int32_t j = n - 1; j >= 0; --j) {
        double yj = y[j];
        for (std::int32_t q = lp[j]; q < lp[j + 1]; ++q) {
            yj -= lx[q] * y[li[q]];
        }
        y[j] = yj;
    }
    for (std::int32_t k = 0; k < n; ++k) {
        x[sym.perm[k]] = y[k];
        y[k] = 0.0;
    }
}

RefineResult solve_refined(const NumericFactorization& fact, const SparseMat& matrix,
                           std::span<const double> rhs, std::span<double> x, int max_refine)
{
    const auto n = static_cast<std::size_t>(matrix.rows());
    if (rhs.size() != n || x.size() != n || fact.symbolic().dim != matrix.rows()) {
        throw DimensionError("solve_refined: size mismatch");
    }
    std::copy(rhs.begin(), rhs.end(), x.begin());
    fact.solve_in_place(x);

    double rhs_inf = 0.0;
    for (const double v : rhs) {
        rhs_inf = std::max(rhs_inf, std::abs(v));
    }
    const double tol = 1e-11 * (1.0 + rhs_inf);

    std::vector<double> r(n);
    auto residual = [&] {
        matrix.multiply(x, r);
        double inf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = rhs[i] - r[i];
            inf = std::max(inf, std::abs(r[i]));
        }
        return inf;
    };

    RefineResult result;
    result.residual_inf = residual();
    int growth = 0;
    while (result.residual_inf > tol && result.sweeps < max_refine) {
        fact.solve_in_place(r);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += r[i];
        }
        ++result.sweeps;
        const double previous = result.residual_inf;
        result.residual_inf = residual();
        if (!std::isfinite(result.residual_inf)) {
            throw NumericalError("solve_refined: non-finite residual");
        }
        growth = result.residual_inf > previous ? growth + 1 : 0;
        if (growth >= 2) {
            throw NumericalError("solve_refined: iterative refinement diverged");
        }
    }
    result.converged = result.residual_inf <= tol;
    return result;
}

} // namespace socp
