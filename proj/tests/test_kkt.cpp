#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "socp/error.hpp"
#include "socp/ipm.hpp"
#include "socp/kkt.hpp"
#include "support/corpus.hpp"
#include "support/dense_reference.hpp"

using namespace socp;
using namespace testing_support;

namespace {

SparseMat row_matrix(std::size_t n)
{
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < n; ++j) {
        t.push_back({0, static_cast<std::int32_t>(j), 1.0 + static_cast<double>(j)});
    }
    return SparseMat::from_triplets(1, static_cast<std::int32_t>(n), t, false);
}

} // namespace

TEST_CASE("threshold rule for sparsified blocks")
{
    CHECK_FALSE(KktSystem::is_sparsified(2));
    CHECK_FALSE(KktSystem::is_sparsified(3));
    CHECK(KktSystem::is_sparsified(4));

    // One SOC of dimension 4: 3*4 + 1 = 13 block entries instead of 16.
    const KktSystem four(row_matrix(4), ConeLayout(0, {4}));
    CHECK(four.aux_count() == 1);
    CHECK(four.dim() == 2 * 4 + 1 + 1);
    // A^T twice, I twice, block 13.
    CHECK(four.nnz() == 2 * 4 + 2 * 4 + 13);

    const KktSystem three(row_matrix(3), ConeLayout(0, {3}));
    CHECK(three.aux_count() == 0);
    CHECK(three.nnz() == 2 * 3 + 2 * 3 + 9);

    CHECK_THROWS_AS(KktSystem(SparseMat::from_triplets(1, 0, {}, false), ConeLayout(0, {})), DimensionError);
}

TEST_CASE("assembled scaling blocks")
{
    {
        const ConeLayout layout(1, {});
        KktSystem sys(row_matrix(1), layout);
        const NtScaling scal = compute_nt_scaling(layout, Vec{4}, Vec{1});
        sys.assemble(scal, Vec{1}, Vec{0}, 1.0);
        CHECK(sys.matrix().values()[sys.matrix().find(sys.s_row(0), sys.s_row(0))] == doctest::Approx(4.0));
    }
    {
        const ConeLayout layout(0, {2});
        KktSystem sys(row_matrix(2), layout);
        const Vec e = unit_vector(layout);
        sys.assemble(compute_nt_scaling(layout, e, e), Vec{1}, Vec{0, 0}, 1.0);
        const Eigen::MatrixXd blk = dense_block(sys.matrix(), sys.s_row(0), 2);
        CHECK((blk - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-14);
    }
}

TEST_CASE("sparsified and dense scaling blocks agree")
{
    std::mt19937_64 rng(17);
    for (std::size_t nk = 2; nk <= 16; ++nk) {
        const ConeLayout layout(0, {nk});
        KktSystem sys(row_matrix(nk), layout);
        CHECK(KktSystem::is_sparsified(nk) == (sys.aux_count() == 1));
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_interior(layout, rng);
            const Vec s = random_interior(layout, rng);
            const NtScaling scal = compute_nt_scaling(layout, x, s);
            sys.assemble(scal, Vec{0}, Vec(nk, 0.0), 1.0);
            const auto len = static_cast<std::int32_t>(nk + sys.aux_count());
            const Eigen::MatrixXd blk = dense_block(sys.matrix(), sys.s_row(0), len);

            const Eigen::MatrixXd d = dense_d(layout, Eigen::Map<const Eigen::VectorXd>(x.data(), nk),
                                              Eigen::Map<const Eigen::VectorXd>(s.data(), nk));
            const Eigen::MatrixXd d2 = d * d;
            const Vec h1v = random_vec(nk, rng);
            const Eigen::Map<const Eigen::VectorXd> h1(h1v.data(), static_cast<Eigen::Index>(nk));
            const Eigen::VectorXd h2 = d2 * h1;
            Eigen::VectorXd r = Eigen::VectorXd::Zero(len);
            r.head(static_cast<Eigen::Index>(nk)) = h2;
            const Eigen::VectorXd sol = blk.fullPivLu().solve(r);
            const double err = (sol.head(static_cast<Eigen::Index>(nk)) - h1).lpNorm<Eigen::Infinity>();
            worst = std::max(worst, err / (1.0 + h1.lpNorm<Eigen::Infinity>()));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("right-hand side terms")
{
    const SocpProblem prob = random_feasible_socp(3);
    const HsdState z = cold_start(prob.layout, prob.p());
    const NtScaling scal = compute_nt_scaling(prob.layout, z.x, z.s);
    const Vec zero(prob.n(), 0.0);
    const RhsBundle r0 = compute_rhs(prob, z, scal, zero, 0.0, 0.0);
    CHECK(r0.mu == doctest::Approx(1.0));

    const RhsBundle r1 = compute_rhs(prob, z, scal, zero, 0.0, 1.0);
    for (const double v : r1.w1) {
        CHECK(v == 0.0);
    }
    for (const double v : r1.w2) {
        CHECK(v == 0.0);
    }
    CHECK(r1.w3 == 0.0);

    // Direct evaluation on a random interior iterate.
    std::mt19937_64 rng(4);
    HsdState w;
    w.x = random_interior(prob.layout, rng);
    w.s = random_interior(prob.layout, rng);
    w.y = random_vec(prob.p(), rng);
    w.kappa = 0.7;
    w.tau = 1.3;
    const NtScaling sw = compute_nt_scaling(prob.layout, w.x, w.s);
    const Vec exs = random_vec(prob.n(), rng, 0.1);
    const double nu = 0.3;
    const RhsBundle r = compute_rhs(prob, w, sw, exs, 0.05, nu);

    const auto n = static_cast<Eigen::Index>(prob.n());
    const Eigen::Map<const Eigen::VectorXd> x(w.x.data(), n);
    const Eigen::Map<const Eigen::VectorXd> s(w.s.data(), n);
    const Eigen::MatrixXd d = dense_d(prob.layout, x, s);
    const Eigen::VectorXd xbar = d.inverse() * x;
    const Eigen::VectorXd sbar = d * s;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (const auto& cone : dense_cones(prob.layout)) {
        e(static_cast<Eigen::Index>(cone.offset)) = 1.0;
    }
    const double mu = (x.dot(s) + w.kappa * w.tau) / static_cast<double>(prob.layout.cone_count() + 1);
    const Eigen::VectorXd w4 = mu * nu * e - dense_arrow(prob.layout, xbar) * sbar -
                               Eigen::Map<const Eigen::VectorXd>(exs.data(), n);
    const Eigen::VectorXd w4_hat = d * dense_arrow(prob.layout, xbar).inverse() * w4;
    CHECK(r.mu == doctest::Approx(mu).epsilon(1e-13));
    for (Eigen::Index j = 0; j < n; ++j) {
        CHECK(r.w4[static_cast<std::size_t>(j)] == doctest::Approx(w4(j)).epsilon(1e-11));
        CHECK(r.w4_hat[static_cast<std::size_t>(j)] == doctest::Approx(w4_hat(j)).epsilon(1e-9));
    }
    CHECK(r.w5 == doctest::Approx(mu * nu - 0.7 * 1.3 - 0.05));
}

TEST_CASE("Newton direction matches the dense 5-block solve")
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const SocpProblem prob = random_feasible_socp(seed);
        std::mt19937_64 rng(seed * 31);
        HsdState z;
        z.x = random_interior(prob.layout, rng);
        z.s = random_interior(prob.layout, rng);
        z.y = random_vec(prob.p(), rng);
        z.kappa = 0.5 + static_cast<double>(seed % 5) * 0.3;
        z.tau = 0.8 + static_cast<double>(seed % 3) * 0.4;
        const NtScaling scal = compute_nt_scaling(prob.layout, z.x, z.s);
        KktSystem sys(prob.A, prob.layout);
        sys.assemble(scal, prob.b, prob.c, z.kappa / z.tau);

        const Vec exs = random_vec(prob.n(), rng, 0.05);
        const RhsBundle rhs = compute_rhs(prob, z, scal, exs, 0.01, 0.2);
        const NewtonDirection dir = sys.solve_newton(rhs, prob.b, prob.c);
        const Eigen::VectorXd ref = dense_newton(prob, scal, rhs);
        const Eigen::VectorXd got = stack(dir);
        CHECK((got - ref).lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + ref.lpNorm<Eigen::Infinity>()));

        const Vec w0 = rhs.w0();
        double w0n = 0.0;
        for (const double v : w0) {
            w0n = std::max(w0n, std::abs(v));
        }
        CHECK(newton_residual(prob, scal, rhs, dir) <= 1e-9 * (1.0 + w0n));
    }
}

TEST_CASE("scalar Newton system")
{
    SocpProblem prob;
    prob.layout = ConeLayout(1, {});
    prob.A = SparseMat::from_triplets(1, 1, std::vector<Triplet>{{0, 0, 1.0}}, false);
    prob.b = {0.0};
    prob.c = {0.0};
    const HsdState z = cold_start(prob.layout, 1);
    const NtScaling scal = compute_nt_scaling(prob.layout, z.x, z.s);
    KktSystem sys(prob.A, prob.layout);
    sys.assemble(scal, prob.b, prob.c, 1.0);
    const RhsBundle rhs = compute_rhs(prob, z, scal, Vec{0.0}, 0.0, 0.0);
    const NewtonDirection dir = sys.solve_newton(rhs, prob.b, prob.c);
    CHECK(std::isfinite(dir.dx[0]));
    CHECK(std::isfinite(dir.dtau));
    CHECK(newton_residual(prob, scal, rhs, dir) <= 1e-12);
    CHECK(sys.factorizations() == 1);
}

TEST_CASE("normal-equations baseline")
{
    // Rows with disjoint supports and a diagonal scaling give a diagonal product.
    const ConeLayout layout(4, {});
    const SparseMat a = SparseMat::from_triplets(
        2, 4, std::vector<Triplet>{{0, 0, 1.0}, {0, 1, 2.0}, {1, 2, 3.0}, {1, 3, -1.0}}, false);
    const Vec x{1, 2, 3, 4};
    const Vec s{4, 3, 2, 1};
    const SparseMat ne = build_normal_equations_baseline(a, compute_nt_scaling(layout, x, s));
    CHECK(ne.nnz() == 2);
    CHECK(ne.find(0, 1) == -1);
    // x/s on the diagonal of D^2 for linear cones.
    CHECK(ne.values()[ne.find(0, 0)] == doctest::Approx(1.0 * 1.0 / 4.0 + 4.0 * 2.0 / 3.0));

    // Agreement with a dense product for a random problem.
    const SocpProblem prob = random_feasible_socp(12);
    std::mt19937_64 rng(1);
    const Vec xx = random_interior(prob.layout, rng);
    const Vec ss = random_interior(prob.layout, rng);
    const SparseMat ne2 = build_normal_equations_baseline(prob.A, compute_nt_scaling(prob.layout, xx, ss));
    const auto n = static_cast<Eigen::Index>(prob.n());
    const Eigen::MatrixXd d = dense_d(prob.layout, Eigen::Map<const Eigen::VectorXd>(xx.data(), n),
                                      Eigen::Map<const Eigen::VectorXd>(ss.data(), n));
    Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(prob.p()), n);
    for (const auto& t : prob.A.to_triplets()) {
        ad(t.row, t.col) = t.value;
    }
    const Eigen::MatrixXd ref = ad * d * d * ad.transpose();
    for (const auto& t : ne2.to_triplets()) {
        CHECK(t.value == doctest::Approx(ref(t.row, t.col)).epsilon(1e-9));
    }
}
