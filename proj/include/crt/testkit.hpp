#pragma once

// Independent oracles: finite differences, Monte Carlo sphere integrals,
// exterior-algebra densities, random generators and the cutoff family
// concentrating at a point of S^3.

#include "crt/basis.hpp"
#include "crt/detail/numeric.hpp"
#include "crt/errors.hpp"
#include "crt/geometry.hpp"
#include "crt/operators.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace crt::testkit {

// ---------------------------------------------------------------------------
// Random inputs

inline SpherePoint random_sphere_point(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    for (;;) {
        const cplx a{n(rng), n(rng)}, b{n(rng), n(rng)};
        const double r = std::sqrt(std::norm(a) + std::norm(b));
        if (r > 1e-8) return {a / r, b / r};
    }
}

inline SpherePoint random_sphere_point(std::mt19937_64& rng, double min_pole_distance)
{
    for (;;) {
        const auto q = random_sphere_point(rng);
        if (q.pole_distance() > min_pole_distance) return q;
    }
}

/// Uniform in |x|, |y| <= z_bound, |t| <= t_bound.
inline HeisenbergPoint random_heisenberg_point(std::mt19937_64& rng, double z_bound = 2.0, double t_bound = 4.0)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {{z_bound * u(rng), z_bound * u(rng)}, t_bound * u(rng)};
}

inline std::vector<HeisenbergPoint> random_heisenberg_points(std::uint64_t seed, int count, double z_bound = 2.0,
                                                            double t_bound = 4.0)
{
    std::mt19937_64 rng(seed);
    std::vector<HeisenbergPoint> out;
    for (int i = 0; i < count; ++i) out.push_back(random_heisenberg_point(rng, z_bound, t_bound));
    return out;
}

/// Gaussian coefficients on every basis vector.
inline SpectralFunction random_spectral(const Basis& basis, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    auto v = basis.zero();
    for (int j = 0; j < basis.rank(); ++j) v.coefficients[j] = {n(rng), n(rng)};
    return v;
}

// ---------------------------------------------------------------------------
// Finite differences

enum class FdTag { d_dz, d_dzbar, d_dt, Zbar, Z, ZbarStar };

inline FdTag parse_fd_tag(const std::string& s)
{
    if (s == "d_dz") return FdTag::d_dz;
    if (s == "d_dzbar") return FdTag::d_dzbar;
    if (s == "d_dt") return FdTag::d_dt;
    if (s == "Zbar") return FdTag::Zbar;
    if (s == "Z") return FdTag::Z;
    if (s == "ZbarStar" || s == "Zbar_star") return FdTag::ZbarStar;
    throw InvalidConfig("unknown finite-difference tag '" + s + "'");
}

inline constexpr double kMinStep = 1e-7;
inline constexpr double kMaxStep = 1e-3;

/// Central-difference application of a chart-side operator, O(step^2).
template <class Fn>
cplx finite_difference(FdTag tag, Fn&& f, const HeisenbergPoint& x, double step = 1e-5)
{
    if (!(step >= kMinStep && step <= kMaxStep)) throw InvalidConfig("finite_difference: step outside [1e-7, 1e-3]");
    const auto p = central_partials(std::forward<Fn>(f), x, step);
    switch (tag) {
    case FdTag::d_dz: return p.d_dz;
    case FdTag::d_dzbar: return p.d_dzbar;
    case FdTag::d_dt: return p.d_dt;
    case FdTag::Zbar: return heisenberg_derivative(HeisenbergOp::Zbar, p, x);
    case FdTag::Z: return heisenberg_derivative(HeisenbergOp::Z, p, x);
    case FdTag::ZbarStar: return heisenberg_derivative(HeisenbergOp::ZbarStar, p, x);
    }
    return {};
}

/// Lbar F on S^3 by differences along the tangent directions d and i d,
/// d = (-conj zeta2, conj zeta1): Lbar F = (X_d F + i X_{id} F) / 2.
/// One Richardson step removes the O(h^2) term.
template <class Fn>
cplx sphere_lbar_difference(Fn&& f, const SpherePoint& q, double h = 1e-3)
{
    auto central = [&](double step) {
        auto along = [&](cplx scale) {
            const cplx d1 = -scale * std::conj(q.zeta2), d2 = scale * std::conj(q.zeta1);
            auto at = [&](double e) {
                const cplx z1 = q.zeta1 + e * d1, z2 = q.zeta2 + e * d2;
                const double r = std::sqrt(std::norm(z1) + std::norm(z2));
                return cplx(f(SpherePoint{z1 / r, z2 / r}));
            };
            return (at(step) - at(-step)) / (2.0 * step);
        };
        return 0.5 * (along(1.0) + kI * along(kI));
    };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

// ---------------------------------------------------------------------------
// Monte Carlo on S^3

struct MonteCarloEstimate {
    cplx estimate{};
    double standard_error = 0.0;
};

/// Uniform sampling on S^3 of int fn theta_hat ^ d theta_hat. Samples are
/// drawn in fixed chunks whose streams depend only on (seed, chunk), so the
/// result does not depend on the number of worker threads.
template <class Fn>
MonteCarloEstimate monte_carlo_integral(Fn&& fn, long long n_samples, std::uint64_t seed)
{
    constexpr long long kChunk = 1 << 15;
    const auto chunks = static_cast<std::size_t>((n_samples + kChunk - 1) / kChunk);
    std::vector<cplx> sums(chunks);
    std::vector<double> squares(chunks);
    crt::detail::parallel_for(chunks, [&](std::size_t c) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(c)};
        std::mt19937_64 rng(seq);
        const long long begin = static_cast<long long>(c) * kChunk;
        const long long end = std::min(n_samples, begin + kChunk);
        cplx s{};
        double s2 = 0.0;
        for (long long i = begin; i < end; ++i) {
            const cplx v = fn(random_sphere_point(rng));
            s += v;
            s2 += std::norm(v);
        }
        sums[c] = s;
        squares[c] = s2;
    });
    const double n = static_cast<double>(n_samples);
    const cplx mean = crt::detail::pairwise_sum(sums) / n;
    const double second = crt::detail::pairwise_sum(squares) / n;
    const double variance = std::max(0.0, second - std::norm(mean));
    return {kSphereMeasure * mean, kSphereMeasure * std::sqrt(variance / n)};
}

/// |estimate - exact| in standard errors; a zero-variance estimate must match exactly.
inline double sigma_distance(const MonteCarloEstimate& mc, cplx exact)
{
    const double diff = std::abs(mc.estimate - exact);
    if (mc.standard_error > 0.0) return diff / mc.standard_error;
    return diff <= 1e-12 * std::max(1.0, std::abs(exact)) ? 0.0 : std::numeric_limits<double>::infinity();
}

/// Monte Carlo estimate of int zeta^a zetabar^b theta_hat ^ d theta_hat.
inline MonteCarloEstimate monte_carlo_moment(std::array<int, 2> a, std::array<int, 2> b, long long n_samples,
                                             std::uint64_t seed)
{
    if (n_samples < 10000) throw InvalidConfig("monte_carlo_moment: need at least 1e4 samples");
    return monte_carlo_integral(
        [&](const SpherePoint& q) {
            return std::pow(q.zeta1, a[0]) * std::pow(q.zeta2, a[1]) * std::pow(std::conj(q.zeta1), b[0]) *
                   std::pow(std::conj(q.zeta2), b[1]);
        },
        n_samples, seed);
}

// ---------------------------------------------------------------------------
// Exterior-algebra density oracles

namespace detail {

using Vec3 = std::array<double, 3>;

// (alpha ^ d alpha)(e_0, e_1, e_2) for a 1-form given by its coefficient
// vector field a(p) in coordinates, with d alpha(e_i, e_j) = d_i a_j - d_j a_i.
template <class Coefficients>
double contact_volume(Coefficients&& a, const Vec3& p, double h)
{
    std::array<Vec3, 3> grad{}; // grad[i][j] = d_i a_j
    for (std::size_t i = 0; i < 3; ++i) {
        Vec3 plus = p, minus = p;
        plus[i] += h;
        minus[i] -= h;
        const Vec3 ap = a(plus), am = a(minus);
        for (std::size_t j = 0; j < 3; ++j) grad[i][j] = (ap[j] - am[j]) / (2.0 * h);
    }
    auto d = [&](std::size_t i, std::size_t j) { return grad[i][j] - grad[j][i]; };
    const Vec3 a0 = a(p);
    return a0[0] * d(1, 2) - a0[1] * d(0, 2) + a0[2] * d(0, 1);
}

inline std::array<cplx, 2> hopf(const Vec3& p)
{
    return {std::sqrt(1.0 - p[0]) * std::polar(1.0, p[1]), std::sqrt(p[0]) * std::polar(1.0, p[2])};
}

// Tangent vectors d/ds, d/dxi1, d/dxi2 of the Hopf parametrization in C^2.
inline std::array<std::array<cplx, 2>, 3> hopf_tangents(const Vec3& p, double h)
{
    std::array<std::array<cplx, 2>, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        Vec3 plus = p, minus = p;
        plus[i] += h;
        minus[i] -= h;
        const auto a = hopf(plus), b = hopf(minus);
        for (std::size_t k = 0; k < 2; ++k) out[i][k] = (a[k] - b[k]) / (2.0 * h);
    }
    return out;
}

} // namespace detail

/// |theta ^ d theta| / (dx dy dt) at a point of H^1, theta = dt + 2x dy - 2y dx.
inline double heisenberg_density_oracle(const HeisenbergPoint& x, double h = 1e-4)
{
    auto theta = [](const detail::Vec3& p) { return detail::Vec3{-2.0 * p[1], 2.0 * p[0], 1.0}; };
    return std::abs(detail::contact_volume(theta, {x.z.real(), x.z.imag(), x.t}, h));
}

/// theta_hat(v) = i sum_j (zeta_j conj v_j - conj zeta_j v_j) for a tangent vector v.
inline double theta_hat(const std::array<cplx, 2>& zeta, const std::array<cplx, 2>& v)
{
    cplx acc{};
    for (std::size_t j = 0; j < 2; ++j) acc += kI * (zeta[j] * std::conj(v[j]) - std::conj(zeta[j]) * v[j]);
    return acc.real();
}

/// Round-measure density sqrt(det J^T J) of the Hopf parametrization at (s, xi1, xi2).
inline double hopf_round_density(double s, double xi1, double xi2, double h = 1e-6)
{
    const auto t = detail::hopf_tangents({s, xi1, xi2}, h);
    Eigen::Matrix3d gram;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 2; ++k) acc += (std::conj(t[i][k]) * t[j][k]).real();
            gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    return std::sqrt(gram.determinant());
}

/// |theta_hat ^ d theta_hat| per ds dxi1 dxi2 at (s, xi1, xi2).
inline double hopf_contact_density(double s, double xi1, double xi2, double h = 1e-4)
{
    auto coefficients = [h](const detail::Vec3& p) {
        const auto zeta = detail::hopf(p);
        const auto t = detail::hopf_tangents(p, 0.01 * h);
        return detail::Vec3{theta_hat(zeta, t[0]), theta_hat(zeta, t[1]), theta_hat(zeta, t[2])};
    };
    return std::abs(detail::contact_volume(coefficients, {s, xi1, xi2}, h));
}

/// Density of theta_hat ^ d theta_hat relative to the round measure.
inline double sphere_density_oracle(double s, double xi1, double xi2)
{
    return hopf_contact_density(s, xi1, xi2) / hopf_round_density(s, xi1, xi2);
}

/// |det d(Phi o hopf)| * rho_H / (round density) at (s, xi1, xi2); the
/// conformal relation predicts G^4 * rho_S.
inline double chart_volume_ratio(double s, double xi1, double xi2, double h = 1e-6)
{
    auto chart = [](const detail::Vec3& p) {
        const auto z = detail::hopf(p);
        const auto x = sphere_to_heisenberg({z[0], z[1]});
        return detail::Vec3{x.z.real(), x.z.imag(), x.t};
    };
    Eigen::Matrix3d jac;
    for (std::size_t i = 0; i < 3; ++i) {
        detail::Vec3 plus{s, xi1, xi2}, minus{s, xi1, xi2};
        plus[i] += h;
        minus[i] -= h;
        const auto a = chart(plus), b = chart(minus);
        for (std::size_t j = 0; j < 3; ++j)
            jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (a[j] - b[j]) / (2.0 * h);
    }
    return std::abs(jac.determinant()) * heisenberg_density_oracle({}) / hopf_round_density(s, xi1, xi2);
}

// ---------------------------------------------------------------------------
// Cutoff family

/// chi = phi(rho_c / epsilon), with rho_c the Heisenberg gauge in the chart
/// centered at c and phi a smooth step, 1 on [0, 1] and 0 on [2, inf).
struct CutoffProfile {
    double epsilon = 0.125;
    SpherePoint center = kPole;
};

namespace detail {

inline double bump_tail(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

inline double bump_tail_derivative(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

inline void require_profile(const CutoffProfile& c)
{
    if (!(c.epsilon > 0.0 && c.epsilon < 0.25)) throw InvalidConfig("cutoff epsilon must lie in (0, 1/4)");
}

/// Unitary V with V c = (0, 1); the chart of V zeta is centered at c.
inline std::array<std::array<cplx, 2>, 2> centering_unitary(const SpherePoint& c)
{
    return {{{-c.zeta2, c.zeta1}, {std::conj(c.zeta1), std::conj(c.zeta2)}}};
}

} // namespace detail

inline double smooth_step(double r)
{
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double a = detail::bump_tail(2.0 - r), b = detail::bump_tail(r - 1.0);
    return a / (a + b);
}

inline double smooth_step_derivative(double r)
{
    if (r <= 1.0 || r >= 2.0) return 0.0;
    const double a = detail::bump_tail(2.0 - r), b = detail::bump_tail(r - 1.0);
    const double da = -detail::bump_tail_derivative(2.0 - r), db = detail::bump_tail_derivative(r - 1.0);
    return (da * b - a * db) / ((a + b) * (a + b));
}

/// rho_c(zeta) = (|1 - <zeta, c>| / |1 + <zeta, c>|)^{1/2}.
inline double cutoff_gauge(const SpherePoint& center, const SpherePoint& q)
{
    const cplx x = q.zeta1 * std::conj(center.zeta1) + q.zeta2 * std::conj(center.zeta2);
    return std::sqrt(std::abs(1.0 - x) / std::abs(1.0 + x));
}

inline double cutoff_value(const CutoffProfile& c, const SpherePoint& q)
{
    detail::require_profile(c);
    return smooth_step(cutoff_gauge(c.center, q) / c.epsilon);
}

/// Lbar chi; |Zbar_hat chi| = |Lbar chi| = |Z_hat chi| since |mu| = 1 and chi is real.
inline cplx cutoff_lbar(const CutoffProfile& c, const SpherePoint& q)
{
    detail::require_profile(c);
    const double rho = cutoff_gauge(c.center, q);
    const double r = rho / c.epsilon;
    if (r <= 1.0 || r >= 2.0) return {};
    const cplx x = q.zeta1 * std::conj(c.center.zeta1) + q.zeta2 * std::conj(c.center.zeta2);
    const cplx xb = std::conj(x);
    const cplx lbar_xb = q.zeta1 * c.center.zeta2 - q.zeta2 * c.center.zeta1;
    const cplx lbar_rho = -0.5 * rho * lbar_xb / (1.0 - xb * xb);
    return smooth_step_derivative(r) / c.epsilon * lbar_rho;
}

struct CutoffSample {
    double value = 0.0;
    double max_first_derivative_estimate = 0.0; ///< |Zbar_hat chi| + |Z_hat chi| at the point
};

inline CutoffSample cutoff_value_and_derivative_bound(const CutoffProfile& c, const SpherePoint& q)
{
    return {cutoff_value(c, q), 2.0 * std::abs(cutoff_lbar(c, q))};
}

/// Point of S^3 at chart coordinates x of the chart centered at c.
inline SpherePoint centered_chart_point(const SpherePoint& center, const HeisenbergPoint& x)
{
    const auto v = detail::centering_unitary(center);
    const auto p = heisenberg_to_sphere(x);
    // zeta = V^H p
    return {std::conj(v[0][0]) * p.zeta1 + std::conj(v[1][0]) * p.zeta2,
            std::conj(v[0][1]) * p.zeta1 + std::conj(v[1][1]) * p.zeta2};
}

/// Sampled sup of |Zbar_hat chi| over dilates of fixed normalized points in the
/// gauge shell 1 <= rho <= 2 of the centered chart.
inline double cutoff_derivative_sup(const CutoffProfile& c, int samples = 4000, std::uint64_t seed = 1)
{
    detail::require_profile(c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sup = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double r = 1.0 + u(rng);
        const double a = std::sqrt(u(rng)); // |z0| = r a
        const double phase = 2.0 * std::numbers::pi * u(rng);
        const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
        const cplx z0 = r * a * std::polar(1.0, phase);
        const double t0 = sign * r * r * std::sqrt(std::max(0.0, 1.0 - std::pow(a, 4)));
        const HeisenbergPoint x{c.epsilon * z0, c.epsilon * c.epsilon * t0};
        sup = std::max(sup, std::abs(cutoff_lbar(c, centered_chart_point(c.center, x))));
    }
    return sup;
}

/// ||Zbar_hat chi||_{L^4(S^3)} by a product Gauss rule on the centered chart box
/// |x|, |y| <= 2 eps, |t| <= 4 eps^2, with theta_hat ^ d theta_hat = 4 |1 + p2|^4 dx dy dt.
inline double cutoff_zbar_l4_norm(const CutoffProfile& c, int panels = 8, int nodes_per_panel = 8)
{
    detail::require_profile(c);
    auto axis = [&](double half) {
        std::vector<double> nodes, weights;
        for (int k = 0; k < panels; ++k) {
            const double a = -half + 2.0 * half * k / panels, b = -half + 2.0 * half * (k + 1) / panels;
            const auto g = crt::detail::gauss_legendre(nodes_per_panel, a, b);
            nodes.insert(nodes.end(), g.nodes.begin(), g.nodes.end());
            weights.insert(weights.end(), g.weights.begin(), g.weights.end());
        }
        return std::pair{nodes, weights};
    };
    const auto [xn, xw] = axis(2.0 * c.epsilon);
    const auto [tn, tw] = axis(4.0 * c.epsilon * c.epsilon);
    std::vector<double> slab(xn.size());
    crt::detail::parallel_for(xn.size(), [&](std::size_t i) {
        std::vector<double> terms;
        terms.reserve(xn.size() * tn.size());
        for (std::size_t j = 0; j < xn.size(); ++j)
            for (std::size_t k = 0; k < tn.size(); ++k) {
                const HeisenbergPoint x{{xn[i], xn[j]}, tn[k]};
                const auto p = heisenberg_to_sphere(x);
                const double density = kHeisenbergDensity * std::pow(std::abs(1.0 + p.zeta2), 4);
                const double v = std::abs(cutoff_lbar(c, centered_chart_point(c.center, x)));
                terms.push_back(xw[i] * xw[j] * tw[k] * density * std::pow(v, 4));
            }
        slab[i] = crt::detail::pairwise_sum(terms);
    });
    return std::pow(crt::detail::pairwise_sum(slab), 0.25);
}

} // namespace crt::testkit
