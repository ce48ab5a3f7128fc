#include "crt/basis.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace crt;

namespace {

// Lbar F = (1/2)(X_d F + i X_{id} F) with the tangent direction d = (-conj zeta2, conj zeta1).
cplx lbar_by_differences(const std::function<cplx(const SpherePoint&)>& f, const SpherePoint& q, double h)
{
    auto along = [&](cplx scale) {
        const cplx d1 = -scale * std::conj(q.zeta2), d2 = scale * std::conj(q.zeta1);
        auto at = [&](double e) {
            cplx z1 = q.zeta1 + e * d1, z2 = q.zeta2 + e * d2;
            const double r = std::sqrt(std::norm(z1) + std::norm(z2));
            return f({z1 / r, z2 / r});
        };
        return (at(h) - at(-h)) / (2.0 * h);
    };
    return 0.5 * (along(1.0) + kI * along(kI));
}

SpherePoint random_point(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    cplx a{n(rng), n(rng)}, b{n(rng), n(rng)};
    const double r = std::sqrt(std::norm(a) + std::norm(b));
    return {a / r, b / r};
}

} // namespace

TEST(Basis, MomentFormula)
{
    EXPECT_NEAR(monomial_moment({0, 0}, {0, 0}), kSphereMeasure, 1e-12);
    EXPECT_NEAR(monomial_moment({1, 0}, {1, 0}), kSphereMeasure / 2.0, 1e-12);
    EXPECT_NEAR(monomial_moment({2, 3}, {2, 3}), kSphereMeasure * 2.0 * 6.0 / 720.0, 1e-12);
    EXPECT_EQ(monomial_moment({1, 0}, {0, 1}), 0.0);
}

class BasisRank : public ::testing::TestWithParam<int> {};

TEST_P(BasisRank, DimensionAndOrthonormality)
{
    const int n = GetParam();
    const auto basis = Basis::build(n);
    EXPECT_EQ(basis->rank(), restricted_dimension(n));
    EXPECT_EQ(basis->monomial_count() - basis->rank(), basis->diagnostics().discarded);

    const Eigen::MatrixXd t = basis->transform();
    const Eigen::MatrixXd gram = t.transpose() * basis->monomial_gram() * t;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-12);

    // the same statement measured by the quadrature rule instead of exact moments
    const auto grid = default_grid(n);
    Eigen::MatrixXcd samples(static_cast<Eigen::Index>(grid.size()), basis->rank());
    for (int j = 0; j < basis->rank(); ++j) samples.col(j) = synthesize(*basis, basis->unit(j), grid).values;
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(grid.weights().data(), static_cast<Eigen::Index>(grid.size()));
    const Eigen::MatrixXcd q = samples.adjoint() * w.asDiagonal() * samples;
    EXPECT_LT((q - Eigen::MatrixXcd::Identity(q.rows(), q.cols())).cwiseAbs().maxCoeff(), 1e-11);
}

INSTANTIATE_TEST_SUITE_P(Degrees, BasisRank, ::testing::Values(0, 1, 2, 3, 4, 6, 8));

TEST(Basis, BidegreeIsConsistentWithCharge)
{
    const auto basis = Basis::build(5);
    std::map<std::pair<int, int>, int> count;
    for (int j = 0; j < basis->rank(); ++j) {
        const auto [k1, k2] = basis->charge(j);
        const auto [p, q] = basis->bidegree(j);
        EXPECT_EQ(p - q, k1 + k2);
        ++count[{p, q}];
    }
    // harmonic space of bidegree (p, q) has dimension p + q + 1
    for (const auto& [pq, c] : count) EXPECT_EQ(c, pq.first + pq.second + 1);
}

TEST(Basis, SynthesisAnalysisRoundTrip)
{
    const auto basis = Basis::build(4);
    const auto grid = default_grid(4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    auto v = basis->zero();
    for (int j = 0; j < basis->rank(); ++j) v.coefficients[j] = {n(rng), n(rng)};
    const auto g = synthesize(*basis, v, grid);
    const auto back = analyze(*basis, g, grid);
    EXPECT_LT((back.function.coefficients - v.coefficients).norm(), 1e-12 * v.norm());
    EXPECT_LT(back.residual_norm, 1e-11 * v.norm());

    // pointwise evaluation agrees with synthesis
    for (std::size_t i = 0; i < grid.size(); i += 37)
        EXPECT_LT(std::abs(evaluate(*basis, v, grid.nodes()[i]) - g.values[static_cast<Eigen::Index>(i)]), 1e-11);
}

TEST(Basis, AnalysisDetectsOutOfSpaceContent)
{
    const auto basis = Basis::build(2);
    const auto grid = default_grid(2);
    const auto g = GridFunction::sample(grid, [](const SpherePoint& q) { return std::pow(q.zeta1, 3); });
    const auto a = analyze(*basis, g, grid);
    EXPECT_LT(a.function.norm(), 1e-12);
    EXPECT_GT(a.residual_norm, 0.1);
}

TEST(Basis, ProjectionOfMonomialWithSphereRelation)
{
    // |zeta1|^2 + |zeta2|^2 is the constant 1 on the sphere
    const auto basis = Basis::build(2);
    Eigen::VectorXcd mono = Eigen::VectorXcd::Zero(basis->monomial_count());
    mono[basis->monomial_position({1, 0, 1, 0})] = 1.0;
    mono[basis->monomial_position({0, 1, 0, 1})] = 1.0;
    const auto f = from_monomials(*basis, mono);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(std::abs(evaluate(*basis, f, random_point(rng)) - 1.0), 0.0, 1e-12);
}

TEST(Basis, MismatchedBasisIsRejected)
{
    const auto b2 = Basis::build(2);
    const auto b3 = Basis::build(3);
    EXPECT_THROW(synthesize(*b2, b3->zero(), default_grid(3)), BasisMismatch);
    EXPECT_THROW((void)(b2->zero() + b3->zero()), BasisMismatch);
    EXPECT_THROW(synthesize(*b3, b3->zero(), build_grid(3, 6)), InvalidConfig);
}

TEST(Basis, TangentialFieldsOnMonomialsMatchDifferences)
{
    const auto basis = Basis::build(4);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n;
    Eigen::VectorXcd mono(basis->monomial_count());
    for (int m = 0; m < basis->monomial_count(); ++m) mono[m] = {n(rng), n(rng)};
    const auto lbar = lbar_on_monomials(*basis, mono);
    const auto l = l_on_monomials(*basis, mono);
    auto f = [&](const SpherePoint& q) { return evaluate_monomials(*basis, mono, q); };
    auto fbar = [&](const SpherePoint& q) { return std::conj(evaluate_monomials(*basis, mono, q)); };
    for (int i = 0; i < 10; ++i) {
        const auto q = random_point(rng);
        const cplx fd = lbar_by_differences(f, q, 1e-5);
        const cplx exact = evaluate_monomials(*basis, lbar, q);
        EXPECT_LT(std::abs(fd - exact), 1e-7 * (1.0 + std::abs(exact)));
        // L F = conj(Lbar conj F)
        const cplx fd_l = std::conj(lbar_by_differences(fbar, q, 1e-5));
        EXPECT_LT(std::abs(fd_l - evaluate_monomials(*basis, l, q)), 1e-7 * (1.0 + std::abs(fd_l)));
    }
}
