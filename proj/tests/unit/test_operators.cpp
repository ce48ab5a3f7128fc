#include "crt/operators.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace crt;

namespace {

SpherePoint random_point(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    cplx a{n(rng), n(rng)}, b{n(rng), n(rng)};
    const double r = std::sqrt(std::norm(a) + std::norm(b));
    return {a / r, b / r};
}

SpherePoint random_point_off_pole(std::mt19937_64& rng, double min_distance)
{
    for (;;) {
        const auto q = random_point(rng);
        if (q.pole_distance() > min_distance) return q;
    }
}

SpectralFunction random_function(const Basis& basis, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    auto v = basis.zero();
    for (int j = 0; j < basis.rank(); ++j) v.coefficients[j] = {n(rng), n(rng)};
    return v;
}

} // namespace

TEST(Operators, HeisenbergDerivativeExamples)
{
    const HeisenbergPoint x{{0.4, -0.7}, 1.3};
    auto z = [](const HeisenbergPoint& p) { return p.z; };
    auto zbar = [](const HeisenbergPoint& p) { return std::conj(p.z); };
    auto w = [](const HeisenbergPoint& p) { return p.w(); };
    EXPECT_LT(std::abs(heisenberg_derivative(HeisenbergOp::Zbar, z, x)), 1e-10);
    EXPECT_LT(std::abs(heisenberg_derivative(HeisenbergOp::Zbar, w, x)), 1e-9);
    EXPECT_LT(std::abs(heisenberg_derivative(HeisenbergOp::Zbar, zbar, x) - 1.0), 1e-10);
    // exact partials of w: d/dz = i zbar, d/dzbar = i z, d/dt = 1
    const Partials pw{kI * std::conj(x.z), kI * x.z, 1.0};
    EXPECT_EQ(heisenberg_derivative(HeisenbergOp::Zbar, pw, x), cplx{});
    EXPECT_LT(std::abs(heisenberg_derivative(HeisenbergOp::ZbarStar, pw, x) + heisenberg_derivative(HeisenbergOp::Z, pw, x)),
              1e-15);
}

TEST(Operators, MuIsUnimodular)
{
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto q = random_point_off_pole(rng, 1e-6);
        worst = std::max(worst, std::abs(std::abs(mu_factor(q)) - 1.0));
    }
    EXPECT_LT(worst, 1e-10);
    EXPECT_LT(std::abs(mu_factor({{0, 0}, {1, 0}}) + 1.0), 1e-15);
    EXPECT_THROW(mu_factor(kPole), PoleProximity);
}

TEST(Operators, ConformalIdentity)
{
    const auto basis = Basis::build(4);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const auto v = random_function(*basis, rng);
        const auto lv = lbar_on_monomials(*basis, to_monomials(*basis, v));
        auto f = [&](const SpherePoint& q) { return evaluate(*basis, v, q); };
        double err = 0.0, scale = 0.0;
        for (int i = 0; i < 20; ++i) {
            const auto q = random_point_off_pole(rng, 0.2);
            const cplx spectral = mu_factor(q) * evaluate_monomials(*basis, lv, q);
            const cplx chart = zbar_hat_via_heisenberg(f, q);
            err = std::max(err, std::abs(spectral - chart));
            scale = std::max(scale, std::abs(spectral));
        }
        EXPECT_LT(err / scale, 1e-6);
    }
}

TEST(Operators, LbarMatrixIsExactAndShiftsBidegree)
{
    const auto basis = Basis::build(5);
    const auto exact = lbar_matrix_exact(*basis);
    const auto grid_assembled = lbar_matrix(*basis, default_grid(5));
    EXPECT_LT((exact.entries - grid_assembled.entries).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 0; i < basis->rank(); ++i)
        for (int j = 0; j < basis->rank(); ++j) {
            const auto [pi, qi] = basis->bidegree(i);
            const auto [pj, qj] = basis->bidegree(j);
            if (pi != pj + 1 || qi != qj - 1) {
                EXPECT_LT(std::abs(exact.entries(i, j)), 1e-12);
            }
        }
    // Lbar* = -L on the sphere
    const auto l = l_matrix_exact(*basis);
    EXPECT_LT((exact.entries.adjoint() + l.entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operators, LbarExamples)
{
    const auto basis = Basis::build(2);
    auto apply = [&](MonomialIndex m) {
        Eigen::VectorXcd mono = Eigen::VectorXcd::Zero(basis->monomial_count());
        mono[basis->monomial_position(m)] = 1.0;
        return lbar_on_monomials(*basis, mono);
    };
    auto e = [&](MonomialIndex m) {
        Eigen::VectorXcd mono = Eigen::VectorXcd::Zero(basis->monomial_count());
        mono[basis->monomial_position(m)] = 1.0;
        return mono;
    };
    EXPECT_EQ(apply({0, 0, 1, 0}), Eigen::VectorXcd(-e({0, 1, 0, 0})));
    EXPECT_EQ(apply({0, 0, 0, 1}), e({1, 0, 0, 0}));
    EXPECT_EQ(apply({1, 1, 0, 0}).norm(), 0.0);
}

TEST(Operators, GalerkinMatchesExactAndIsStable)
{
    const int n = 4;
    const auto basis = Basis::build(n);
    const auto gal = zbar_hat_galerkin(*basis, default_grid(n));
    EXPECT_LT(gal.refinement_change, 1e-10);
    EXPECT_EQ(gal.grid.id(), default_grid(n).id());
    EXPECT_LT((gal.zbar.entries - lbar_matrix_exact(*basis).entries).cwiseAbs().maxCoeff(), 1e-12);
    for (int j = 0; j < basis->rank(); ++j)
        if (basis->bidegree(j).second == 0) {
            EXPECT_LT(gal.zbar.entries.col(j).norm(), 1e-12);
        }
}

TEST(Operators, DiscreteAdjointPairing)
{
    const int n = 3;
    const auto basis = Basis::build(n);
    const auto grid = default_grid(n);
    const auto gal = zbar_hat_galerkin(*basis, grid);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_function(*basis, rng);
        const FormCoefficient g{random_function(*basis, rng)};
        const cplx lhs = inner(grid, apply_zbar_hat(*basis, f, grid), g.sample(*basis, grid));
        const cplx rhs = g.twisted.coefficients.dot(gal.zbar.entries * f.coefficients);
        const SpectralFunction star{gal.zbar_star.entries * g.twisted.coefficients, n, basis->id()};
        const cplx rhs2 = inner(grid, synthesize(*basis, f, grid), synthesize(*basis, star, grid));
        EXPECT_LT(std::abs(lhs - rhs), 1e-8 * std::abs(lhs));
        EXPECT_LT(std::abs(lhs - rhs2), 1e-8 * std::abs(lhs));
    }
}

TEST(Operators, AdjointFormulaThroughHeisenberg)
{
    const auto basis = Basis::build(3);
    std::mt19937_64 rng(8);
    const FormCoefficient g{random_function(*basis, rng)};
    const auto star = apply_zbar_hat_star(*basis, g);
    auto gfn = [&](const SpherePoint& q) { return g.evaluate(*basis, q); };
    double err = 0.0, spread = 0.0, scale = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto q = random_point_off_pole(rng, 0.3);
        const cplx ref = evaluate(*basis, star, q);
        std::array<cplx, 3> via{};
        for (int k = 0; k < 3; ++k) via[static_cast<std::size_t>(k)] = zbar_hat_star_via_heisenberg(gfn, q, k);
        for (const auto& v : via) err = std::max(err, std::abs(v - ref));
        spread = std::max({spread, std::abs(via[0] - via[1]), std::abs(via[0] - via[2])});
        scale = std::max(scale, std::abs(ref));
    }
    EXPECT_LT(err / scale, 1e-4);
    EXPECT_LT(spread / scale, 1e-6);
}

TEST(Operators, FormNormConstant)
{
    EXPECT_NEAR(std::abs(levi_form_value({{1.1, 0.4}, -2.0})), 2.0, 1e-8);
    EXPECT_NEAR(form_norm_constant(), 0.5, 1e-8);
}
