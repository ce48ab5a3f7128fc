#include "crt/quadrature.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace crt;

namespace {

// Beta-function form of int zeta^a zetabar^a over S^3 (theta_hat ^ d theta_hat units).
double beta_moment(int a1, int a2)
{
    return kSphereDensity * 2.0 * std::numbers::pi * std::numbers::pi * std::tgamma(a1 + 1.0) *
           std::tgamma(a2 + 1.0) / std::tgamma(a1 + a2 + 2.0);
}

} // namespace

TEST(Quadrature, Layout)
{
    const auto g = build_grid(6, 12);
    EXPECT_EQ(g.size(), 6u * 12 * 12);
    EXPECT_EQ(g.exactness_degree(), 11);
    EXPECT_EQ(g.id(), "hopf:6x12");
    for (const auto& q : g.nodes()) EXPECT_NEAR(q.norm_squared(), 1.0, 1e-14);
    EXPECT_GT(g.min_pole_distance(), 0.0);
    EXPECT_THROW(build_grid(1, 12), InvalidConfig);
    EXPECT_THROW(build_grid(4, 3), InvalidConfig);
    EXPECT_EQ(refined(g).id(), "hopf:12x24");
    EXPECT_EQ(default_grid(3).id(), "hopf:10x20");
}

TEST(Quadrature, TotalMeasure)
{
    const auto g = build_grid(4, 8);
    const auto one = GridFunction::sample(g, [](const SpherePoint&) { return cplx{1.0}; });
    EXPECT_NEAR(integrate(g, one).real(), 16.0 * std::numbers::pi * std::numbers::pi, 1e-11);
}

TEST(Quadrature, MonomialMomentsUpToExactness)
{
    const auto g = build_grid(5, 10);
    const int d = g.exactness_degree();
    for (int a1 = 0; a1 <= d; ++a1)
        for (int a2 = 0; a1 + a2 <= d; ++a2)
            for (int b1 = 0; a1 + a2 + b1 <= d; ++b1)
                for (int b2 = 0; a1 + a2 + b1 + b2 <= d; ++b2) {
                    const auto f = GridFunction::sample(g, [&](const SpherePoint& q) {
                        return std::pow(q.zeta1, a1) * std::pow(q.zeta2, a2) * std::pow(std::conj(q.zeta1), b1) *
                               std::pow(std::conj(q.zeta2), b2);
                    });
                    const double exact = (a1 == b1 && a2 == b2) ? beta_moment(a1, a2) : 0.0;
                    EXPECT_LT(std::abs(integrate(g, f) - exact), 1e-11) << a1 << a2 << b1 << b2;
                }
}

TEST(Quadrature, GridMismatchIsRejected)
{
    const auto g1 = build_grid(4, 8);
    const auto g2 = build_grid(4, 12);
    const auto f1 = GridFunction::zeros(g1);
    const auto f2 = GridFunction::zeros(g2);
    EXPECT_THROW(inner(g1, f1, f2), GridMismatch);
    EXPECT_THROW((void)(f1 + f2), GridMismatch);
    EXPECT_THROW(integrate(g2, f1), GridMismatch);
    EXPECT_THROW(sphere_lp_norm(g1, f1, 0.5), InvalidConfig);
}

TEST(Quadrature, AngularTransformRoundTrip)
{
    const auto g = build_grid(4, 12);
    const auto charges = charges_up_to(4);
    Eigen::MatrixXcd radial = Eigen::MatrixXcd::Random(static_cast<Eigen::Index>(charges.size()), g.n_s());
    const auto f = angular_synthesis(g, radial, charges);
    const auto back = angular_analysis(g, f, charges);
    const double scale = 4.0 * std::numbers::pi * std::numbers::pi;
    EXPECT_LT((back / scale - radial).norm(), 1e-12 * radial.norm());
    EXPECT_THROW(angular_analysis(g, f, charges_up_to(6)), InvalidConfig);
}

TEST(Quadrature, LpNormOfConstant)
{
    const auto g = build_grid(3, 8);
    const auto two = GridFunction::sample(g, [](const SpherePoint&) { return cplx{2.0}; });
    const double mu = 16.0 * std::numbers::pi * std::numbers::pi;
    EXPECT_NEAR(sphere_lp_norm(g, two, 4.0), 2.0 * std::pow(mu, 0.25), 1e-12);
    EXPECT_NEAR(sphere_l2_norm(g, two), 2.0 * std::sqrt(mu), 1e-11);
}
