#pragma once

// First-order CR operators on H^1 and S^3.
//
// On H^1:  Zbar = d/dzbar - i z d/dt,  Z = d/dz + i zbar d/dt,  Zbar* = -Z.
// On S^3 the smooth field Lbar = zeta1 d/dzetabar2 - zeta2 d/dzetabar1 spans
// T^{0,1}, and the pushed-forward Zbar_hat = G Zbar equals mu * Lbar with the
// unimodular factor
//
//   mu = -G h conj(h)^{-2} = -(1 + zetabar2)^2 / (|1 + zeta2| (1 + zeta2)).
//
// mu has a phase singularity at the pole, so a (0,1)-form coefficient g is
// stored twisted: g = mu * p with p a polynomial. Then Zbar_hat u = mu * (Lbar u)
// has twisted coefficient Lbar u, Zbar_hat*(mu p) = -L p, and the form inner
// product is <mu p, mu q> = <p, q>.

#include "crt/basis.hpp"
#include "crt/errors.hpp"
#include "crt/geometry.hpp"
#include "crt/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <concepts>
#include <functional>
#include <string>

namespace crt {

enum class HeisenbergOp { Zbar, Z, ZbarStar };

inline std::string to_string(HeisenbergOp op)
{
    switch (op) {
    case HeisenbergOp::Zbar: return "Zbar";
    case HeisenbergOp::Z: return "Z";
    case HeisenbergOp::ZbarStar: return "Zbar_star";
    }
    return "?";
}

/// Wirtinger partials of a function at a point of H^1.
struct Partials {
    cplx d_dz{};
    cplx d_dzbar{};
    cplx d_dt{};
};

inline cplx heisenberg_derivative(HeisenbergOp op, const Partials& p, const HeisenbergPoint& x)
{
    switch (op) {
    case HeisenbergOp::Zbar: return p.d_dzbar - kI * x.z * p.d_dt;
    case HeisenbergOp::Z: return p.d_dz + kI * std::conj(x.z) * p.d_dt;
    case HeisenbergOp::ZbarStar: return -(p.d_dz + kI * std::conj(x.z) * p.d_dt);
    }
    return {};
}

/// Central-difference Wirtinger partials, O(step^2).
template <class Fn>
Partials central_partials(Fn&& f, const HeisenbergPoint& x, double step)
{
    auto at = [&](double dx, double dy, double dt) { return cplx(f(HeisenbergPoint{x.z + cplx{dx, dy}, x.t + dt})); };
    const cplx fx = (at(step, 0, 0) - at(-step, 0, 0)) / (2.0 * step);
    const cplx fy = (at(0, step, 0) - at(0, -step, 0)) / (2.0 * step);
    const cplx ft = (at(0, 0, step) - at(0, 0, -step)) / (2.0 * step);
    return {0.5 * (fx - kI * fy), 0.5 * (fx + kI * fy), ft};
}

/// Operator applied to an evaluable function through central differences.
template <class Fn>
    requires std::invocable<Fn&, const HeisenbergPoint&>
cplx heisenberg_derivative(HeisenbergOp op, Fn&& f, const HeisenbergPoint& x, double step = 1e-5)
{
    return heisenberg_derivative(op, central_partials(std::forward<Fn>(f), x, step), x);
}

/// Unimodular factor with Zbar_hat = mu * Lbar.
inline cplx mu_factor(const SpherePoint& q, double pole_tolerance = kPoleTolerance)
{
    const cplx h = cr_weight(q, pole_tolerance);
    const double g = std::abs(h);
    const cplx hb = std::conj(h);
    return -g * h / (hb * hb);
}

inline GridFunction mu_samples(const QuadratureGrid& grid)
{
    return GridFunction::sample(grid, [](const SpherePoint& q) { return mu_factor(q); });
}

/// Galerkin matrix on the orthonormal basis of degree <= N.
struct OperatorMatrix {
    Eigen::MatrixXcd entries;
    std::string tag;
    int degree = 0;
    std::string grid_id; ///< empty for matrices computed from exact moments

    [[nodiscard]] OperatorMatrix adjoint(std::string adjoint_tag) const
    {
        return {entries.adjoint(), std::move(adjoint_tag), degree, grid_id};
    }
};

namespace detail {

template <class MonomialMap>
OperatorMatrix exact_matrix(const Basis& basis, MonomialMap&& apply, std::string tag)
{
    const int r = basis.rank();
    const Eigen::MatrixXd gt = basis.monomial_gram() * basis.transform();
    Eigen::MatrixXcd m(r, r);
    for (int j = 0; j < r; ++j) {
        const Eigen::VectorXcd image = apply(basis, Eigen::VectorXcd(basis.transform().col(j).cast<cplx>()));
        m.col(j) = gt.transpose().cast<cplx>() * image;
    }
    return {m, std::move(tag), basis.degree(), ""};
}

} // namespace detail

/// Lbar on the truncated space from symbolic differentiation of monomials and exact moments.
inline OperatorMatrix lbar_matrix_exact(const Basis& basis)
{
    return detail::exact_matrix(
        basis, [](const Basis& b, const Eigen::VectorXcd& v) { return lbar_on_monomials(b, v); }, "Lbar:exact");
}

inline OperatorMatrix l_matrix_exact(const Basis& basis)
{
    return detail::exact_matrix(
        basis, [](const Basis& b, const Eigen::VectorXcd& v) { return l_on_monomials(b, v); }, "L:exact");
}

/// Lbar assembled by quadrature: entries <Lbar e_j, e_i>_grid.
inline OperatorMatrix lbar_matrix(const Basis& basis, const QuadratureGrid& grid)
{
    const int r = basis.rank();
    Eigen::MatrixXcd m(r, r);
    for (int j = 0; j < r; ++j) {
        const Eigen::VectorXcd mono = basis.transform().col(j).cast<cplx>();
        const auto samples = synthesize_monomials(basis, lbar_on_monomials(basis, mono), grid);
        m.col(j) = analyze(basis, samples, grid).function.coefficients;
    }
    return {m, "Lbar", basis.degree(), grid.id()};
}

/// Samples of Zbar_hat v = mu * Lbar v.
inline GridFunction apply_zbar_hat(const Basis& basis, const SpectralFunction& v, const QuadratureGrid& grid)
{
    basis.require(v);
    if (grid.min_pole_distance() < kPoleTolerance) throw PoleProximity("apply_zbar_hat: grid node at the pole");
    const auto lv = synthesize_monomials(basis, lbar_on_monomials(basis, to_monomials(basis, v)), grid);
    return mu_samples(grid) * lv;
}

/// A (0,1)-form coefficient mu * p with p on the truncated space.
struct FormCoefficient {
    SpectralFunction twisted;

    [[nodiscard]] cplx evaluate(const Basis& basis, const SpherePoint& q) const
    {
        return mu_factor(q) * crt::evaluate(basis, twisted, q);
    }

    [[nodiscard]] GridFunction sample(const Basis& basis, const QuadratureGrid& grid) const
    {
        return mu_samples(grid) * synthesize(basis, twisted, grid);
    }
};

/// Zbar_hat* of a form coefficient, as a truncated function: -L p.
inline SpectralFunction apply_zbar_hat_star(const Basis& basis, const FormCoefficient& g)
{
    basis.require(g.twisted);
    const auto mono = l_on_monomials(basis, to_monomials(basis, g.twisted));
    return (-1.0) * from_monomials(basis, mono);
}

struct GalerkinOptions {
    double stability_tolerance = 1e-10;
    int max_enlargements = 2;
};

struct Galerkin {
    OperatorMatrix zbar;
    OperatorMatrix zbar_star;
    double refinement_change = 0.0; ///< max entry change between the grid and its refinement
    QuadratureGrid grid;            ///< grid the entries were taken from after any enlargement
};

namespace detail {

// A_ij = <mu Lbar e_j, mu e_i>_grid, assembled from samples of mu.
inline Eigen::MatrixXcd zbar_entries(const Basis& basis, const QuadratureGrid& grid)
{
    const int r = basis.rank();
    const auto mu = mu_samples(grid);
    const auto mu2 = mu * conj(mu);
    Eigen::MatrixXcd m(r, r);
    for (int j = 0; j < r; ++j) {
        const Eigen::VectorXcd mono = basis.transform().col(j).cast<cplx>();
        const auto image = mu2 * synthesize_monomials(basis, lbar_on_monomials(basis, mono), grid);
        m.col(j) = analyze(basis, image, grid).function.coefficients;
    }
    return m;
}

} // namespace detail

/// Galerkin realization of Zbar_hat (and its discrete adjoint) with the
/// twisted test functions mu e_i. Entries are checked against a grid of
/// twice the resolution; the grid is enlarged up to max_enlargements times
/// before failing.
inline Galerkin zbar_hat_galerkin(const Basis& basis, const QuadratureGrid& grid, const GalerkinOptions& opt = {})
{
    QuadratureGrid current = grid;
    for (int attempt = 0; attempt <= opt.max_enlargements; ++attempt) {
        const auto fine = refined(current);
        const Eigen::MatrixXcd a = detail::zbar_entries(basis, current);
        const Eigen::MatrixXcd b = detail::zbar_entries(basis, fine);
        const double change = (a - b).cwiseAbs().maxCoeff();
        if (change < opt.stability_tolerance) {
            OperatorMatrix zbar{a, "Zbar_hat", basis.degree(), current.id()};
            return {zbar, zbar.adjoint("Zbar_hat_star"), change, current};
        }
        current = fine;
    }
    throw NumericalFailure("zbar_hat_galerkin: entries not stable under grid doubling");
}

/// Pointwise Zbar_hat* through H^1: conj(h)^{-k} G^4 Zbar*(conj(h)^k G^{-3} g),
/// with g given on the sphere and the H^1 derivative by central differences.
template <class Fn>
cplx zbar_hat_star_via_heisenberg(Fn&& g, const SpherePoint& q, int k, double step = 1e-5)
{
    auto weighted = [&](const HeisenbergPoint& x) {
        const auto p = heisenberg_to_sphere(x);
        const cplx hb = std::conj(cr_weight(p));
        return std::pow(hb, k) * std::pow(conformal_factor(p), -3) * cplx(g(p));
    };
    const auto x = sphere_to_heisenberg(q);
    const cplx hb = std::conj(cr_weight(q));
    return std::pow(hb, -k) * std::pow(conformal_factor(q), 4) *
           heisenberg_derivative(HeisenbergOp::ZbarStar, weighted, x, step);
}

/// Zbar_hat through H^1: G * Zbar(f o Phi^{-1}) by central differences.
template <class Fn>
cplx zbar_hat_via_heisenberg(Fn&& f, const SpherePoint& q, double step = 1e-5)
{
    auto pulled = [&](const HeisenbergPoint& x) { return cplx(f(heisenberg_to_sphere(x))); };
    return conformal_factor(q) * heisenberg_derivative(HeisenbergOp::Zbar, pulled, sphere_to_heisenberg(q), step);
}

/// d theta(Z, i Zbar) at a point of H^1, with d theta from central differences
/// of the coefficients of theta = dt + 2x dy - 2y dx.
inline cplx levi_form_value(const HeisenbergPoint& x, double step = 1e-5)
{
    // theta evaluated on a real direction v = (vx, vy, vt) at (px, py, pt)
    auto theta = [](const std::array<double, 3>& p, const std::array<cplx, 3>& v) {
        return v[2] + 2.0 * p[0] * v[1] - 2.0 * p[1] * v[0];
    };
    // components in the frame d/dx, d/dy, d/dt
    const cplx zb = std::conj(x.z);
    const std::array<cplx, 3> z_field{0.5, -0.5 * kI, kI * zb};
    const std::array<cplx, 3> zbar_field{0.5, 0.5 * kI, -kI * x.z};
    std::array<cplx, 3> izbar;
    for (int i = 0; i < 3; ++i) izbar[static_cast<std::size_t>(i)] = kI * zbar_field[static_cast<std::size_t>(i)];

    // d alpha(U, V) = U(alpha(V)) - V(alpha(U)) - alpha([U, V]); evaluate with V, U frozen
    // at the point (coordinate-constant extension), so the bracket term vanishes.
    const std::array<double, 3> p0{x.z.real(), x.z.imag(), x.t};
    auto directional = [&](const std::array<cplx, 3>& u, const std::array<cplx, 3>& v) {
        cplx acc{};
        for (int a = 0; a < 3; ++a) {
            auto plus = p0, minus = p0;
            plus[static_cast<std::size_t>(a)] += step;
            minus[static_cast<std::size_t>(a)] -= step;
            acc += u[static_cast<std::size_t>(a)] * (theta(plus, v) - theta(minus, v)) / (2.0 * step);
        }
        return acc;
    };
    return directional(z_field, izbar) - directional(izbar, z_field);
}

/// c_omega = |omega_hat|^2, the squared length of the (0,1)-form dual to Zbar_hat.
inline double form_norm_constant()
{
    return 1.0 / std::abs(levi_form_value(HeisenbergPoint{{0.3, -0.2}, 0.7}));
}

} // namespace crt
