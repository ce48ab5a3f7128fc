#include "crt/transfer.hpp"

#include <gtest/gtest.h>

using namespace crt;

namespace {

class TransferTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() { complex_ = std::make_unique<SphereComplex>(4); }
    static void TearDownTestSuite() { complex_.reset(); }
    static std::unique_ptr<SphereComplex> complex_;
};

std::unique_ptr<SphereComplex> TransferTest::complex_;

} // namespace

TEST_F(TransferTest, Thm1ManufacturedZetaBar1)
{
    const auto& c = *complex_;
    const auto v = monomial_function(c.basis(), {0, 0, 1, 0});
    const auto f = thm1_data_for(c.basis_ptr(), v);
    TransferOptions opt;
    opt.seed = 3;
    const auto [sol, report] = solve_thm1(c, f, opt);
    EXPECT_LT(report.sphere_residual, 1e-8);
    EXPECT_LT(report.h1_residual_max, 1e-5);
    EXPECT_FALSE(report.precondition_violated);
    EXPECT_LT(report.norm_identity_error, 1e-3);
    EXPECT_LT((sol.u_hat() - v).norm(), 1e-8);
    // u = h^{-1} zetabar1 o chart
    for (const auto& x : testkit::random_heisenberg_points(5, 200)) {
        const auto q = heisenberg_to_sphere(x);
        const cplx expected = std::conj(q.zeta1) / cr_weight(q);
        EXPECT_LT(std::abs(sol(x) - expected), 1e-6 * std::max(1.0, std::abs(expected)));
    }
}

TEST_F(TransferTest, Thm1RandomAndSamplesInput)
{
    const auto& c = *complex_;
    const auto v = random_non_hardy(c, 11);
    TransferOptions opt;
    opt.h1_norm = false;
    const auto [sol, report] = solve_thm1(c, thm1_data_for(c.basis_ptr(), v), opt);
    EXPECT_LT((sol.u_hat() - v).norm(), 1e-6 * v.norm());
    EXPECT_LT(report.h1_residual_max, 1e-5);

    const auto samples = apply_zbar_hat(c.basis(), v, c.grid());
    const auto [sol2, report2] = solve_thm1(c, samples, opt);
    EXPECT_LT((sol2.u_hat() - v).norm(), 1e-6 * v.norm());
    EXPECT_LT(report2.h1_residual_max, 1e-5);
}

TEST_F(TransferTest, StepHalvingShowsSecondOrder)
{
    const auto& c = *complex_;
    const auto v = random_non_hardy(c, 21);
    const auto f = thm1_data_for(c.basis_ptr(), v);
    TransferOptions opt;
    opt.h1_norm = false;
    const auto [sol, report] = solve_thm1(c, f, opt);
    const auto points = testkit::random_heisenberg_points(6, 200);
    const double coarse = h1_residual(sol, f, points, 1e-5).max;
    const double fine = h1_residual(sol, f, points, 5e-6).max;
    // O(step^2) differences: the residual drops by about 4
    EXPECT_GT(coarse / fine, 2.5) << coarse << " " << fine;
    EXPECT_LT(coarse / fine, 6.0) << coarse << " " << fine;
}

TEST_F(TransferTest, Thm1ZeroAndViolating)
{
    const auto& c = *complex_;
    const auto [sol, report] = solve_thm1(c, HeisenbergFunction([](const HeisenbergPoint&) { return cplx{}; }));
    EXPECT_EQ(sol.u_hat().norm(), 0.0);
    EXPECT_EQ(report.sphere_residual, 0.0);
    EXPECT_EQ(report.h1_residual_max, 0.0);
    EXPECT_EQ(report.norm_l2_h1, 0.0);

    const auto g = c.h1_kernel_basis().front();
    TransferOptions opt;
    opt.h1_norm = false;
    const auto [bad, r] = solve_thm1(c, thm1_data_from_form(c.basis_ptr(), g), opt);
    EXPECT_TRUE(r.precondition_violated);
    EXPECT_GT(r.precondition_component, 0.9);
}

TEST_F(TransferTest, Thm2ManufacturedAndConjugation)
{
    const auto& c = *complex_;
    const auto g = random_non_h1(c, 17);
    const auto f = thm2_data_for(c.basis_ptr(), g);
    TransferOptions opt;
    opt.seed = 4;
    const auto [sol, report] = solve_thm2(c, f, opt);
    EXPECT_LT((sol.u_hat() - g.twisted).norm(), 1e-6 * g.twisted.norm());
    EXPECT_LT(report.sphere_residual, 1e-8);
    EXPECT_LT(report.h1_residual_max, 1e-5);
    EXPECT_LT(report.norm_identity_error, 1e-3);

    // Zbar* u = f  <=>  Zbar conj(u) = -conj(f)
    const HeisenbergFunction mirrored = [&](const HeisenbergPoint& x) { return -std::conj(f(x)); };
    TransferOptions quick;
    quick.h1_norm = false;
    const auto [w, wr] = solve_thm1(c, mirrored, quick);
    for (const auto& x : testkit::random_heisenberg_points(8, 50))
        EXPECT_LT(std::abs(sol(x) - std::conj(w(x))), 1e-5 * std::max(1.0, std::abs(sol(x))));
}

TEST_F(TransferTest, Thm2ViolatingAndZero)
{
    const auto& c = *complex_;
    TransferOptions opt;
    opt.h1_norm = false;
    const auto hardy = monomial_function(c.basis(), {1, 1, 0, 0});
    const auto [sol, r] = solve_thm2(c, hardy_weighted(c.basis_ptr(), hardy), opt);
    EXPECT_TRUE(r.precondition_violated);
    const auto [zero, zr] = solve_thm2(c, HeisenbergFunction([](const HeisenbergPoint&) { return cplx{}; }), opt);
    EXPECT_EQ(zero.u_hat().norm(), 0.0);
}

TEST_F(TransferTest, KernelTransfers)
{
    const auto& c = *complex_;
    // h^{-2} (Hardy) is in ker Zbar
    std::mt19937_64 rng(2);
    const auto u = c.szego_project(testkit::random_spectral(c.basis(), rng));
    const auto f = hardy_weighted(c.basis_ptr(), u);
    double worst = 0.0, scale = 0.0;
    for (const auto& x : testkit::random_heisenberg_points(1, 50)) {
        worst = std::max(worst, std::abs(testkit::finite_difference(testkit::FdTag::Zbar, f, x)));
        scale = std::max(scale, std::abs(f(x)));
    }
    EXPECT_LT(worst / scale, 1e-5);

    // conj(h) G^{-3} g is in ker Zbar* for g in H_1
    for (const auto& g : c.h1_kernel_basis()) {
        auto basis = c.basis_ptr();
        auto w = [&](const HeisenbergPoint& x) {
            const auto q = heisenberg_to_sphere(x);
            return std::conj(cr_weight(q)) * std::pow(conformal_factor(q), -3) * g.evaluate(*basis, q);
        };
        double err = 0.0, sc = 0.0;
        for (const auto& x : testkit::random_heisenberg_points(2, 50)) {
            err = std::max(err, std::abs(testkit::finite_difference(testkit::FdTag::ZbarStar, w, x)));
            sc = std::max(sc, std::abs(w(x)));
        }
        EXPECT_LT(err / sc, 1e-4);
    }
}

TEST(Transfer, NormIdentity)
{
    const auto grid = default_grid(4);
    for (double p : {4.0 / 3.0, 2.0, 4.0}) {
        // sphere side G^{4/p} f = 1 + Re zeta1
        const HeisenbergFunction f = [p](const HeisenbergPoint& x) {
            const auto q = heisenberg_to_sphere(x);
            return std::pow(conformal_factor(q), -4.0 / p) * (1.0 + 0.5 * q.zeta1.real());
        };
        EXPECT_LT(norm_identity_check(f, p, grid), 1e-3) << p;
    }
    EXPECT_EQ(norm_identity_check([](const HeisenbergPoint&) { return cplx{}; }, 2.0, grid), 0.0);
}
