#pragma once

// Solving Zbar u = f and Zbar* u = f on H^1 by transfer to S^3.
//
// Thm1:  Zbar_hat(h u) = h G f.  Solve v_hat = K_1(h G f), then u = h^{-1} v_hat.
// Thm2:  Zbar_hat*(conj(h)^{-2} G^3 u) = conj(h)^{-2} G^4 f.  Solve the form
//        u_hat = K(conj(h)^{-2} G^4 f), then u = conj(h)^2 G^{-3} u_hat.

#include "crt/basis.hpp"
#include "crt/errors.hpp"
#include "crt/geometry.hpp"
#include "crt/hardy.hpp"
#include "crt/operators.hpp"
#include "crt/quadrature.hpp"
#include "crt/testkit.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace crt {

using HeisenbergFunction = std::function<cplx(const HeisenbergPoint&)>;

enum class Recipe { Thm1, Thm2 };

inline std::string to_string(Recipe r) { return r == Recipe::Thm1 ? "Thm1" : "Thm2"; }

/// Heisenberg-side solution stored as sphere coefficients plus a weight recipe.
class TransferSolution {
public:
    TransferSolution(std::shared_ptr<const Basis> basis, SpectralFunction u_hat, Recipe recipe, std::string grid_id)
        : basis_(std::move(basis)), u_hat_(std::move(u_hat)), recipe_(recipe), grid_id_(std::move(grid_id))
    {
        mono_ = to_monomials(*basis_, u_hat_);
    }

    [[nodiscard]] const SpectralFunction& u_hat() const { return u_hat_; }
    [[nodiscard]] Recipe recipe() const { return recipe_; }
    [[nodiscard]] int degree() const { return u_hat_.degree; }
    [[nodiscard]] const std::string& grid_id() const { return grid_id_; }
    [[nodiscard]] const Basis& basis() const { return *basis_; }

    /// Sphere-side factor: v_hat for Thm1, the form coefficient mu * p for Thm2.
    [[nodiscard]] cplx sphere_value(const SpherePoint& q) const
    {
        const cplx p = evaluate_monomials(*basis_, mono_, q);
        return recipe_ == Recipe::Thm1 ? p : mu_factor(q) * p;
    }

    /// u at a point of H^1: h^{-1} v_hat (Thm1) or conj(h)^2 G^{-3} u_hat (Thm2).
    [[nodiscard]] cplx operator()(const HeisenbergPoint& x) const
    {
        const auto q = heisenberg_to_sphere(x);
        const cplx h = cr_weight(q);
        if (recipe_ == Recipe::Thm1) return sphere_value(q) / h;
        const cplx hb = std::conj(h);
        return hb * hb * std::pow(conformal_factor(q), -3) * sphere_value(q);
    }

private:
    std::shared_ptr<const Basis> basis_;
    SpectralFunction u_hat_;
    Recipe recipe_;
    std::string grid_id_;
    Eigen::VectorXcd mono_;
};

struct ResidualStats {
    double max = 0.0;
    double rms = 0.0;
};

struct TransferReport {
    double sphere_residual = 0.0; ///< relative residual of the sphere solve
    double h1_residual_max = 0.0;
    double h1_residual_rms = 0.0;
    double precondition_component = 0.0;
    bool precondition_violated = false;
    double norm_l2_h1 = 0.0;        ///< ||f||_{L^2(H^1)} by box quadrature
    double norm_l2_s3 = 0.0;        ///< ||sphere data||_{L^2(S^3)} on the grid
    double norm_identity_error = 0.0; ///< |norm_l2_h1 - norm_l2_s3| / norm_l2_s3
    double norm_l4_h1_u = 0.0;      ///< ||u||_{L^4(H^1)} = ||G u||_{L^4(S^3)}
    double truncation_residual = 0.0;
    int n = 0;
    std::string grid;
    std::uint64_t seed = 0;
    double elapsed_ms = 0.0;
    std::string recipe;
};

struct TransferOptions {
    std::uint64_t seed = 0;
    int h1_points = 200;
    double fd_step = 1e-5;
    double z_bound = 2.0;
    double t_bound = 4.0;
    bool h1_norm = true; ///< compute ||f||_{L^2(H^1)} by box quadrature
    BoxRule box{};
};

/// Relative residual of Zbar u = f (Thm1) or Zbar* u = f (Thm2) by central
/// differences, normalized by max |f| over the points (absolute when f vanishes there).
inline ResidualStats h1_residual(const TransferSolution& sol, const HeisenbergFunction& f,
                                 const std::vector<HeisenbergPoint>& points, double step = 1e-5)
{
    if (points.empty()) return {};
    const HeisenbergOp op = sol.recipe() == Recipe::Thm1 ? HeisenbergOp::Zbar : HeisenbergOp::ZbarStar;
    std::vector<double> err(points.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const cplx fx = f(points[i]);
        scale = std::max(scale, std::abs(fx));
        err[i] = std::abs(heisenberg_derivative(op, sol, points[i], step) - fx);
    }
    if (scale == 0.0) scale = 1.0;
    ResidualStats s;
    double sq = 0.0;
    for (double e : err) {
        s.max = std::max(s.max, e / scale);
        sq += (e / scale) * (e / scale);
    }
    s.rms = std::sqrt(sq / static_cast<double>(err.size()));
    return s;
}

/// |(int_{H^1} |f|^p)^{1/p} - ||G^{4/p} f o Phi||_{L^p(S^3)}| / RHS; 0 when both vanish.
inline double norm_identity_check(const HeisenbergFunction& f, double p, const QuadratureGrid& grid,
                                  const BoxRule& box = {})
{
    require_supported_exponent(p);
    const auto sphere = GridFunction::sample(grid, [&](const SpherePoint& q) {
        return std::pow(conformal_factor(q), 4.0 / p) * f(sphere_to_heisenberg(q));
    });
    const double rhs = sphere_lp_norm(grid, sphere, p);
    const double lhs = h1_lp_norm(f, p, box).value;
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(lhs - rhs) / rhs;
}

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline void fill_common(TransferReport& r, const SphereComplex& c, const SolveDiagnostics& d,
                        const TransferOptions& opt, Recipe recipe)
{
    r.sphere_residual = d.relative_residual;
    r.precondition_component = d.precondition_component;
    r.precondition_violated = d.precondition_violated;
    r.norm_l2_s3 = d.data_norm;
    r.truncation_residual = d.truncation_residual;
    r.n = c.degree();
    r.grid = c.grid().id();
    r.seed = opt.seed;
    r.recipe = to_string(recipe);
}

inline void finish_report(TransferReport& r, const SphereComplex& c, const TransferSolution& sol,
                          const HeisenbergFunction& f, const TransferOptions& opt)
{
    const auto points = testkit::random_heisenberg_points(opt.seed, opt.h1_points, opt.z_bound, opt.t_bound);
    const auto stats = h1_residual(sol, f, points, opt.fd_step);
    r.h1_residual_max = stats.max;
    r.h1_residual_rms = stats.rms;
    if (opt.h1_norm) {
        r.norm_l2_h1 = h1_lp_norm(f, 2.0, opt.box).value;
        r.norm_identity_error = r.norm_l2_s3 > 0.0 ? std::abs(r.norm_l2_h1 - r.norm_l2_s3) / r.norm_l2_s3 : 0.0;
    }
    // |G u| = |v_hat| (Thm1) and |G u| = |p| (Thm2) on the sphere
    const auto gu = GridFunction::sample(c.grid(), [&](const SpherePoint& q) {
        return conformal_factor(q) * sol(sphere_to_heisenberg(q));
    });
    r.norm_l4_h1_u = sphere_lp_norm(c.grid(), gu, 4.0);
}

// f reconstructed from the truncated sphere data, for samples-only input.
inline HeisenbergFunction thm1_data_from_samples(const SphereComplex& c, const GridFunction& ghat)
{
    const auto b = analyze(c.basis(), conj(mu_samples(c.grid())) * ghat, c.grid()).function;
    auto mono = std::make_shared<Eigen::VectorXcd>(to_monomials(c.basis(), b));
    auto basis = c.basis_ptr();
    return [basis, mono](const HeisenbergPoint& x) {
        const auto q = heisenberg_to_sphere(x);
        return mu_factor(q) * evaluate_monomials(*basis, *mono, q) / (cr_weight(q) * conformal_factor(q));
    };
}

inline HeisenbergFunction thm2_data_from_samples(const SphereComplex& c, const GridFunction& fhat)
{
    const auto b = analyze(c.basis(), fhat, c.grid()).function;
    auto mono = std::make_shared<Eigen::VectorXcd>(to_monomials(c.basis(), b));
    auto basis = c.basis_ptr();
    return [basis, mono](const HeisenbergPoint& x) {
        const auto q = heisenberg_to_sphere(x);
        const cplx hb = std::conj(cr_weight(q));
        return hb * hb * std::pow(conformal_factor(q), -4) * evaluate_monomials(*basis, *mono, q);
    };
}

} // namespace detail

/// Sphere data h G f of the first pipeline.
inline GridFunction thm1_sphere_data(const QuadratureGrid& grid, const HeisenbergFunction& f)
{
    return GridFunction::sample(grid, [&](const SpherePoint& q) {
        return cr_weight(q) * conformal_factor(q) * f(sphere_to_heisenberg(q));
    });
}

/// Sphere data conj(h)^{-2} G^4 f of the second pipeline.
inline GridFunction thm2_sphere_data(const QuadratureGrid& grid, const HeisenbergFunction& f)
{
    return GridFunction::sample(grid, [&](const SpherePoint& q) {
        const cplx hb = std::conj(cr_weight(q));
        return std::pow(conformal_factor(q), 4) / (hb * hb) * f(sphere_to_heisenberg(q));
    });
}

using TransferResult = std::pair<TransferSolution, TransferReport>;

inline TransferResult solve_thm1_samples(const SphereComplex& c, const GridFunction& ghat, const HeisenbergFunction& f,
                                         const TransferOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    const auto s = c.solve_k1(ghat);
    TransferSolution sol(c.basis_ptr(), s.u, Recipe::Thm1, c.grid().id());
    TransferReport r;
    detail::fill_common(r, c, s.diagnostics, opt, Recipe::Thm1);
    detail::finish_report(r, c, sol, f, opt);
    r.elapsed_ms = detail::elapsed_ms(start);
    return {std::move(sol), r};
}

/// Zbar u = f with f given on H^1.
inline TransferResult solve_thm1(const SphereComplex& c, const HeisenbergFunction& f, const TransferOptions& opt = {})
{
    return solve_thm1_samples(c, thm1_sphere_data(c.grid(), f), f, opt);
}

/// Zbar u = f with the sphere samples h G f given directly.
inline TransferResult solve_thm1(const SphereComplex& c, const GridFunction& ghat, const TransferOptions& opt = {})
{
    require_on_grid(ghat, c.grid());
    return solve_thm1_samples(c, ghat, detail::thm1_data_from_samples(c, ghat), opt);
}

inline TransferResult solve_thm2_samples(const SphereComplex& c, const GridFunction& fhat, const HeisenbergFunction& f,
                                         const TransferOptions& opt)
{
    const auto start = std::chrono::steady_clock::now();
    const auto s = c.solve_k(fhat);
    TransferSolution sol(c.basis_ptr(), s.u.twisted, Recipe::Thm2, c.grid().id());
    TransferReport r;
    detail::fill_common(r, c, s.diagnostics, opt, Recipe::Thm2);
    detail::finish_report(r, c, sol, f, opt);
    r.elapsed_ms = detail::elapsed_ms(start);
    return {std::move(sol), r};
}

/// Zbar* u = f with f given on H^1.
inline TransferResult solve_thm2(const SphereComplex& c, const HeisenbergFunction& f, const TransferOptions& opt = {})
{
    return solve_thm2_samples(c, thm2_sphere_data(c.grid(), f), f, opt);
}

/// Zbar* u = f with the sphere samples conj(h)^{-2} G^4 f given directly.
inline TransferResult solve_thm2(const SphereComplex& c, const GridFunction& fhat, const TransferOptions& opt = {})
{
    require_on_grid(fhat, c.grid());
    return solve_thm2_samples(c, fhat, detail::thm2_data_from_samples(c, fhat), opt);
}

// ---------------------------------------------------------------------------
// Seeded test families

/// Data f := h^{-1} G^{-1} Zbar_hat v_hat for a known v_hat.
inline HeisenbergFunction thm1_data_for(std::shared_ptr<const Basis> basis, const SpectralFunction& v_hat)
{
    auto mono = std::make_shared<Eigen::VectorXcd>(lbar_on_monomials(*basis, to_monomials(*basis, v_hat)));
    return [basis, mono](const HeisenbergPoint& x) {
        const auto q = heisenberg_to_sphere(x);
        return mu_factor(q) * evaluate_monomials(*basis, *mono, q) / (cr_weight(q) * conformal_factor(q));
    };
}

/// Data f := conj(h)^2 G^{-4} Zbar_hat*(mu p) for a known twisted form coefficient p.
inline HeisenbergFunction thm2_data_for(std::shared_ptr<const Basis> basis, const FormCoefficient& g)
{
    auto mono = std::make_shared<Eigen::VectorXcd>(to_monomials(*basis, apply_zbar_hat_star(*basis, g)));
    return [basis, mono](const HeisenbergPoint& x) {
        const auto q = heisenberg_to_sphere(x);
        const cplx hb = std::conj(cr_weight(q));
        return hb * hb * std::pow(conformal_factor(q), -4) * evaluate_monomials(*basis, *mono, q);
    };
}

/// Data f := h^{-1} G^{-1} g for a form coefficient g (e.g. an element of H_1).
inline HeisenbergFunction thm1_data_from_form(std::shared_ptr<const Basis> basis, const FormCoefficient& g)
{
    auto mono = std::make_shared<Eigen::VectorXcd>(to_monomials(*basis, g.twisted));
    return [basis, mono](const HeisenbergPoint& x) {
        const auto q = heisenberg_to_sphere(x);
        return mu_factor(q) * evaluate_monomials(*basis, *mono, q) / (cr_weight(q) * conformal_factor(q));
    };
}

/// Data f := h^{-2} u for a sphere function u (a Hardy polynomial gives an element of ker Zbar).
inline HeisenbergFunction hardy_weighted(std::shared_ptr<const Basis> basis, const SpectralFunction& u)
{
    auto mono = std::make_shared<Eigen::VectorXcd>(to_monomials(*basis, u));
    return [basis, mono](const HeisenbergPoint& x) {
        const auto q = heisenberg_to_sphere(x);
        const cplx h = cr_weight(q);
        return evaluate_monomials(*basis, *mono, q) / (h * h);
    };
}

/// Random v_hat with Pi v_hat = 0.
inline SpectralFunction random_non_hardy(const SphereComplex& c, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const auto v = testkit::random_spectral(c.basis(), rng);
    return v - c.szego_project(v);
}

/// Random twisted form coefficient with Pi_1 g = 0.
inline FormCoefficient random_non_h1(const SphereComplex& c, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const FormCoefficient g{testkit::random_spectral(c.basis(), rng)};
    return {g.twisted - c.szego_project_forms(g).twisted};
}

} // namespace crt
