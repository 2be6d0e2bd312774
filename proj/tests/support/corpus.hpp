#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "socp/problem.hpp"

namespace testing_support {

using socp::Vec;

inline Vec random_interior(const socp::ConeLayout& layout, std::mt19937_64& rng, double margin_lo = 0.1,
                           double margin_hi = 2.0)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(margin_lo, margin_hi);
    Vec v(layout.dim());
    for (std::size_t i = 0; i < layout.linear_count(); ++i) {
        v[i] = pos(rng);
    }
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        const std::size_t off = layout.soc_offset(k);
        double norm2 = 0.0;
        for (std::size_t j = 1; j < layout.soc_dim(k); ++j) {
            v[off + j] = u(rng);
            norm2 += v[off + j] * v[off + j];
        }
        v[off] = std::sqrt(norm2) + pos(rng);
    }
    return v;
}

inline Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(n);
    for (auto& x : v) {
        x = u(rng);
    }
    return v;
}

/// Random SOCP with n <= max_n whose primal and dual both have strictly
/// interior feasible points, so an optimum exists.
inline socp::SocpProblem random_feasible_socp(std::uint64_t seed, std::size_t max_n = 30)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> lin(0, 6);
    std::uniform_int_distribution<int> soc_count(0, 4);
    std::uniform_int_distribution<int> soc_dim(2, 8);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::size_t l = static_cast<std::size_t>(lin(rng));
    std::vector<std::size_t> dims;
    std::size_t n = l;
    const int m = soc_count(rng);
    for (int k = 0; k < m; ++k) {
        const auto d = static_cast<std::size_t>(soc_dim(rng));
        if (n + d > max_n) {
            break;
        }
        dims.push_back(d);
        n += d;
    }
    if (n < 2) {
        l += 2 - n;
        n = 2;
    }
    socp::SocpProblem prob;
    prob.layout = socp::ConeLayout(l, dims);

    std::uniform_int_distribution<std::size_t> rows(1, std::max<std::size_t>(1, n / 2));
    const std::size_t p = rows(rng);
    std::vector<socp::Triplet> t;
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < p; ++i) {
        // A diagonal-ish entry keeps A full row rank.
        t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>((i * 7) % n), 2.0 + coin(rng)});
        for (std::size_t j = 0; j < n; ++j) {
            if (coin(rng) < 0.4) {
                t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), g(rng)});
            }
        }
    }
    prob.A = socp::SparseMat::from_triplets(static_cast<std::int32_t>(p), static_cast<std::int32_t>(n), t, false);

    const Vec x0 = random_interior(prob.layout, rng);
    const Vec s0 = random_interior(prob.layout, rng);
    const Vec y0 = random_vec(p, rng);
    prob.b.assign(p, 0.0);
    prob.A.multiply(x0, prob.b);
    prob.c.assign(n, 0.0);
    prob.A.multiply_transpose(y0, prob.c);
    for (std::size_t j = 0; j < n; ++j) {
        prob.c[j] += s0[j];
    }
    return prob;
}

} // namespace testing_support
