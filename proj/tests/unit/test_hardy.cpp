#include "crt/hardy.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace crt;

namespace {

SpectralFunction random_function(const Basis& basis, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    auto v = basis.zero();
    for (int j = 0; j < basis.rank(); ++j) v.coefficients[j] = {n(rng), n(rng)};
    return v;
}

GridFunction samples_of(const QuadratureGrid& grid, cplx (*f)(const SpherePoint&))
{
    return GridFunction::sample(grid, f);
}

class HardyTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() { complex_ = std::make_unique<SphereComplex>(4); }
    static void TearDownTestSuite() { complex_.reset(); }
    static std::unique_ptr<SphereComplex> complex_;
};

std::unique_ptr<SphereComplex> HardyTest::complex_;

} // namespace

TEST_F(HardyTest, ProjectionsAreOrthogonalProjectors)
{
    const auto& p = complex_->projections();
    for (const auto* m : {&p.pi_hat.entries, &p.pi_hat_1.entries}) {
        EXPECT_LT((*m * *m - *m).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((m->adjoint() - *m).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_EQ(complex_->hardy_rank(), hardy_dimension(4));
    EXPECT_EQ(complex_->h1_rank(), hardy_dimension(4));
}

TEST_F(HardyTest, HardyRangeIsBidegreeZeroQ)
{
    const auto& basis = complex_->basis();
    const auto& p = complex_->projections().pi_hat.entries;
    for (int j = 0; j < basis.rank(); ++j) {
        const double expected = basis.bidegree(j).second == 0 ? 1.0 : 0.0;
        EXPECT_NEAR(std::abs(p(j, j)), expected, 1e-12);
    }
}

TEST_F(HardyTest, SzegoExamples)
{
    const auto& basis = complex_->basis();
    const auto z1 = monomial_function(basis, {1, 0, 0, 0});
    EXPECT_LT((complex_->szego_project(z1) - z1).norm(), 1e-12);
    EXPECT_LT(complex_->szego_project(monomial_function(basis, {0, 0, 0, 1})).norm(), 1e-12);
    const auto proj = complex_->szego_project(monomial_function(basis, {1, 0, 1, 0}));
    for (const auto& q : {SpherePoint{{0.6, 0}, {0, 0.8}}, SpherePoint{{0, 0}, {1, 0}}})
        EXPECT_LT(std::abs(evaluate(basis, proj, q) - 0.5), 1e-10);
    const auto other = Basis::build(3);
    EXPECT_THROW((void)complex_->szego_project(other->zero()), BasisMismatch);
}

TEST(Hardy, KernelProjectionAgreesWithGram)
{
    const SphereComplex c(4);
    const auto& grid = c.grid();
    const auto& basis = c.basis();
    const auto one = samples_of(grid, [](const SpherePoint&) { return cplx{1.0}; });
    EXPECT_LT(sphere_l2_norm(grid, c.szego_kernel_project(one) - one) / sphere_l2_norm(grid, one), 1e-12);

    const auto zb1 = samples_of(grid, [](const SpherePoint& q) { return std::conj(q.zeta1); });
    EXPECT_LT(sphere_l2_norm(grid, c.szego_kernel_project(zb1)) / sphere_l2_norm(grid, zb1), 1e-6);

    std::mt19937_64 rng(3);
    const auto v = random_function(basis, rng);
    const auto g = synthesize(basis, v, grid);
    const auto by_kernel = c.szego_kernel_project(g);
    const auto by_gram = synthesize(basis, c.szego_project(v), grid);
    EXPECT_LT(sphere_l2_norm(grid, by_kernel - by_gram) / sphere_l2_norm(grid, g), 1e-6);
}

TEST_F(HardyTest, H1BasisIsAnnihilatedAndStable)
{
    const auto& basis = complex_->basis();
    for (const auto& g : complex_->h1_kernel_basis()) {
        EXPECT_LT(apply_zbar_hat_star(basis, g).norm(), 1e-7);
        // twisted coefficient is antiholomorphic
        for (int j = 0; j < basis.rank(); ++j)
            if (basis.bidegree(j).first != 0) {
                EXPECT_LT(std::abs(g.twisted.coefficients[j]), 1e-10);
            }
    }
    const SphereComplex finer(4, refined(default_grid(4)));
    EXPECT_EQ(finer.h1_rank(), complex_->h1_rank());
}

TEST_F(HardyTest, SolveK1ManufacturedAndIdentities)
{
    const auto& basis = complex_->basis();
    const auto& grid = complex_->grid();
    const auto zb1 = monomial_function(basis, {0, 0, 1, 0});
    const auto data = apply_zbar_hat(basis, zb1, grid);
    const auto sol = complex_->solve_k1(data);
    EXPECT_LT((sol.u - zb1).norm(), 1e-8);
    EXPECT_FALSE(sol.diagnostics.precondition_violated);

    const auto zero = complex_->solve_k1(GridFunction::zeros(grid));
    EXPECT_EQ(zero.u.norm(), 0.0);

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        // a random form coefficient with its H_1 part removed
        FormCoefficient g{random_function(basis, rng)};
        g.twisted = g.twisted - complex_->szego_project_forms(g).twisted;
        const auto s = complex_->solve_k1(g.sample(basis, grid));
        EXPECT_LT(s.diagnostics.relative_residual, 1e-8);
        EXPECT_LT(complex_->szego_project(s.u).norm(), 1e-10 * s.u.norm());
    }

    const auto h1 = complex_->h1_kernel_basis().front();
    const auto bad = complex_->solve_k1(h1.sample(basis, grid));
    EXPECT_TRUE(bad.diagnostics.precondition_violated);
    EXPECT_NEAR(bad.diagnostics.relative_residual, 1.0, 1e-8);
}

TEST_F(HardyTest, SolveKManufacturedAndIdentities)
{
    const auto& basis = complex_->basis();
    const auto& grid = complex_->grid();
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        FormCoefficient g{random_function(basis, rng)};
        g.twisted = g.twisted - complex_->szego_project_forms(g).twisted;
        const auto f = synthesize(basis, apply_zbar_hat_star(basis, g), grid);
        const auto s = complex_->solve_k(f);
        EXPECT_LT((s.u.twisted - g.twisted).norm(), 1e-6 * g.twisted.norm());
        EXPECT_LT(s.diagnostics.relative_residual, 1e-8);
        EXPECT_LT(complex_->szego_project_forms(s.u).twisted.norm(), 1e-10 * s.u.twisted.norm());
    }
    const auto hardy = samples_of(grid, [](const SpherePoint& q) { return q.zeta1; });
    EXPECT_TRUE(complex_->solve_k(hardy).diagnostics.precondition_violated);
    EXPECT_EQ(complex_->solve_k(GridFunction::zeros(grid)).u.twisted.norm(), 0.0);
}
