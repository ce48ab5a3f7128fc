#pragma once

// Charts and weights relating the Heisenberg group H^1 = C x R to the CR
// sphere S^3 minus the pole p = (0, -1).
//
//   z = zeta1 / (1 + zeta2),   w := t + i|z|^2 = i (1 - zeta2) / (1 + zeta2)
//   zeta2 = (i - w) / (i + w), zeta1 = 2 i z / (i + w)
//
// G = 1/|1 + zeta2| is the conformal factor (theta = G^2 theta_hat) and
// h = 1/(1 + zeta2) is a CR function with |h| = G.

#include "crt/detail/numeric.hpp"
#include "crt/errors.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace crt {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// Density of theta ^ d theta in (x, y, t) coordinates on H^1.
///
/// theta = dt + i(z dzbar - zbar dz) = dt + 2x dy - 2y dx, so
/// d theta = 4 dx ^ dy and theta ^ d theta = 4 dx ^ dy ^ dt.
/// The orientation sign is dropped; only |density| is used.
inline constexpr double kHeisenbergDensity = 4.0;

/// Density of theta_hat ^ d theta_hat relative to the round measure on S^3.
///
/// In Hopf coordinates zeta1 = sqrt(1-s) e^{i xi1}, zeta2 = sqrt(s) e^{i xi2}:
/// theta_hat = 2((1-s) d xi1 + s d xi2), theta_hat ^ d theta_hat =
/// 4 ds ^ d xi1 ^ d xi2 (up to orientation), while d sigma = (1/2) ds d xi1 d xi2.
inline constexpr double kSphereDensity = 8.0;

/// Total theta_hat ^ d theta_hat measure of S^3: 8 * 2 pi^2.
inline constexpr double kSphereMeasure = kSphereDensity * 2.0 * std::numbers::pi * std::numbers::pi;

inline constexpr double kPoleTolerance = 1e-8;
inline constexpr double kSphereNormTolerance = 1e-12;

struct HeisenbergPoint {
    cplx z{};
    double t = 0.0;

    /// w = t + i|z|^2, the second coordinate of the point on the Siegel boundary.
    [[nodiscard]] cplx w() const { return {t, std::norm(z)}; }
    [[nodiscard]] bool finite() const
    {
        return std::isfinite(z.real()) && std::isfinite(z.imag()) && std::isfinite(t);
    }
};

struct SpherePoint {
    cplx zeta1{};
    cplx zeta2{1.0, 0.0};

    [[nodiscard]] double norm_squared() const { return std::norm(zeta1) + std::norm(zeta2); }
    [[nodiscard]] double pole_distance() const { return std::abs(1.0 + zeta2); }

    /// Validating constructor: |zeta1|^2 + |zeta2|^2 = 1 within 1e-12.
    static SpherePoint checked(cplx zeta1, cplx zeta2)
    {
        SpherePoint q{zeta1, zeta2};
        if (!(std::abs(q.norm_squared() - 1.0) <= kSphereNormTolerance)) {
            std::ostringstream msg;
            msg << "point (" << zeta1 << ", " << zeta2 << ") is not on S^3";
            throw InvalidPoint(msg.str());
        }
        return q;
    }
};

/// The pole p = (0, -1) removed by the stereographic identification.
inline constexpr SpherePoint kPole{cplx{0.0, 0.0}, cplx{-1.0, 0.0}};

namespace detail {

inline void require_off_pole(const SpherePoint& q, double pole_tolerance)
{
    if (!(q.pole_distance() >= pole_tolerance)) {
        std::ostringstream msg;
        msg << "|1 + zeta2| = " << q.pole_distance() << " below pole tolerance " << pole_tolerance;
        throw PoleProximity(msg.str());
    }
}

} // namespace detail

inline HeisenbergPoint sphere_to_heisenberg(const SpherePoint& q, double pole_tolerance = kPoleTolerance)
{
    detail::require_off_pole(q, pole_tolerance);
    const cplx denom = 1.0 + q.zeta2;
    const cplx z = q.zeta1 / denom;
    const cplx w = kI * (1.0 - q.zeta2) / denom;
    return {z, w.real()};
}

inline SpherePoint heisenberg_to_sphere(const HeisenbergPoint& x)
{
    if (!x.finite()) throw InvalidPoint("Heisenberg point has non-finite coordinates");
    const cplx w = x.w();
    const cplx denom = kI + w;
    return {2.0 * kI * x.z / denom, (kI - w) / denom};
}

inline double conformal_factor(const SpherePoint& q, double pole_tolerance = kPoleTolerance)
{
    detail::require_off_pole(q, pole_tolerance);
    return 1.0 / std::abs(1.0 + q.zeta2);
}

inline cplx cr_weight(const SpherePoint& q, double pole_tolerance = kPoleTolerance)
{
    detail::require_off_pole(q, pole_tolerance);
    return 1.0 / (1.0 + q.zeta2);
}

// ---------------------------------------------------------------------------
// Quadrature on H^1

/// Product rule on the box |x|, |y| <= R, |t| <= R^2.
///
/// Each half-axis [0, L] is cut into panels [0, 1/2], [1/2, 1], [1, 2], ...
/// doubling until L, with `nodes_per_panel` Gauss-Legendre nodes in each.
/// With the defaults the x and y axes carry 96 nodes.
struct BoxRule {
    double radius = 12.0;
    int nodes_per_panel = 8;
    double first_panel = 0.5;
};

struct AxisRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline AxisRule graded_axis(double half_length, int nodes_per_panel, double first_panel)
{
    if (half_length <= 0.0 || nodes_per_panel < 1 || first_panel <= 0.0)
        throw InvalidConfig("graded_axis: invalid box parameters");
    std::vector<double> edges{0.0};
    for (double e = first_panel; e < half_length; e *= 2.0) edges.push_back(e);
    edges.push_back(half_length);

    AxisRule rule;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const auto g = detail::gauss_legendre(nodes_per_panel, edges[k], edges[k + 1]);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            rule.nodes.push_back(-g.nodes[i]);
            rule.weights.push_back(g.weights[i]);
            rule.nodes.push_back(g.nodes[i]);
            rule.weights.push_back(g.weights[i]);
        }
    }
    return rule;
}

struct BoxIntegral {
    double total = 0.0;
    double outer_shell = 0.0; ///< part of `total` from nodes outside the half-size box
};

/// Integrates a nonnegative integrand F(x, y, t) dx dy dt over the box.
template <class Integrand>
BoxIntegral integrate_box(Integrand&& integrand, const BoxRule& box)
{
    const auto xr = graded_axis(box.radius, box.nodes_per_panel, box.first_panel);
    const auto tr = graded_axis(box.radius * box.radius, box.nodes_per_panel, box.first_panel);
    const std::size_t nx = xr.nodes.size();
    std::vector<double> slab_total(nx, 0.0), slab_shell(nx, 0.0);
    const double half_r = 0.5 * box.radius;
    const double quarter_t = 0.25 * box.radius * box.radius;

    detail::parallel_for(nx, [&](std::size_t i) {
        std::vector<double> inner, shell;
        inner.reserve(nx * tr.nodes.size());
        shell.reserve(nx * tr.nodes.size());
        const double x = xr.nodes[i];
        for (std::size_t j = 0; j < nx; ++j) {
            const double y = xr.nodes[j];
            const double wxy = xr.weights[i] * xr.weights[j];
            for (std::size_t k = 0; k < tr.nodes.size(); ++k) {
                const double t = tr.nodes[k];
                const double v = wxy * tr.weights[k] * integrand(x, y, t);
                const bool outer = std::abs(x) > half_r || std::abs(y) > half_r || std::abs(t) > quarter_t;
                (outer ? shell : inner).push_back(v);
            }
        }
        const double s = detail::pairwise_sum(shell);
        slab_shell[i] = s;
        slab_total[i] = detail::pairwise_sum(inner) + s;
    });
    return {detail::pairwise_sum(slab_total), detail::pairwise_sum(slab_shell)};
}

struct LpNorm {
    double value = 0.0;
    double tail_estimate = 0.0; ///< outer-shell share of the p-th power, a proxy for the truncated tail
};

inline void require_supported_exponent(double p)
{
    constexpr std::array<double, 3> supported{4.0 / 3.0, 2.0, 4.0};
    for (double s : supported)
        if (std::abs(p - s) < 1e-12) return;
    throw InvalidConfig("only p in {4/3, 2, 4} is supported");
}

/// (int_{H^1} |f|^p theta ^ d theta)^{1/p} by the graded box rule.
///
/// Throws NonIntegrable when the outer shell carries more than 10% of the total.
template <class Fn>
LpNorm h1_lp_norm(Fn&& f, double p, const BoxRule& box = {})
{
    require_supported_exponent(p);
    const auto integral = integrate_box(
        [&](double x, double y, double t) {
            const cplx v = f(HeisenbergPoint{{x, y}, t});
            return kHeisenbergDensity * std::pow(std::abs(v), p);
        },
        box);
    if (integral.total <= 0.0) return {0.0, 0.0};
    if (integral.outer_shell > 0.1 * integral.total) {
        std::ostringstream msg;
        msg << "outer shell carries " << integral.outer_shell / integral.total
            << " of the L^" << p << " mass; integrand does not decay";
        throw NonIntegrable(msg.str());
    }
    const double value = std::pow(integral.total, 1.0 / p);
    const double tail = value * (std::pow(1.0 + integral.outer_shell / integral.total, 1.0 / p) - 1.0);
    return {value, tail};
}

} // namespace crt
