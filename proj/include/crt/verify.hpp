#pragma once

// Acceptance checks shared by the CLI `verify` command and the acceptance runner.

#include "crt/transfer.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace crt::verify {

struct Metric {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool strict = false; ///< require value < tolerance instead of <=

    [[nodiscard]] bool passed() const
    {
        if (!std::isfinite(value)) return false;
        return strict ? value < tolerance : value <= tolerance;
    }
};

struct CheckResult {
    int id = 0;
    std::string name;
    std::vector<Metric> metrics;
    std::string detail; ///< failure reason when a check threw
    double elapsed_ms = 0.0;

    [[nodiscard]] bool passed() const
    {
        if (!detail.empty()) return false;
        for (const auto& m : metrics)
            if (!m.passed()) return false;
        return !metrics.empty();
    }
};

struct VerifyConfig {
    int n = 6; ///< degree used by the solver-based checks
    std::uint64_t seed = 7;
    std::map<std::string, double> tolerances; ///< overrides of default_tolerances()
    std::set<int> only;                        ///< empty: run all checks
};

inline const std::map<std::string, double>& default_tolerances()
{
    static const std::map<std::string, double> t{
        {"geometry.round_trip", 1e-10},
        {"basis.rank_mismatch", 0.0},
        {"basis.mc_sigma", 4.0},
        {"quadrature.moment", 1e-12},
        {"operators.conformal", 1e-6},
        {"operators.cr_weight", 1e-8},
        {"operators.adjoint_formula", 1e-4},
        {"operators.adjoint_k_spread", 1e-6},
        {"operators.integration_by_parts", 1e-6},
        {"hardy.projector", 1e-10},
        {"hardy.kernel_vs_gram", 1e-6},
        {"hardy.szego_example", 1e-10},
        {"hardy.solve_residual", 1e-8},
        {"hardy.relative_normalization", 1e-10},
        {"transfer.sphere_residual", 1e-8},
        {"transfer.recovery", 1e-6},
        {"transfer.h1_residual", 1e-5},
        {"transfer.norm_identity", 1e-3},
        {"transfer.conjugation", 1e-5},
        {"transfer.hardy_kernel", 1e-5},
        {"transfer.h1_kernel", 1e-4},
        {"testkit.cutoff_ratio", 2.0},
        {"convergence.decrease_ratio", 1.0},
        {"convergence.galerkin", 1e-10},
    };
    return t;
}

inline const std::map<int, std::string>& check_names()
{
    static const std::map<int, std::string> names{
        {1, "geometry round trip"},
        {2, "Gram rank law"},
        {3, "quadrature exactness"},
        {4, "conformal identity"},
        {5, "CR weights"},
        {6, "adjoint formula"},
        {7, "Heisenberg adjoint"},
        {8, "Szego projections"},
        {9, "relative solution operators"},
        {10, "Thm1 pipeline"},
        {11, "Thm2 pipeline"},
        {12, "kernel transfers"},
        {13, "cutoff scaling"},
        {14, "convergence"},
    };
    return names;
}

namespace detail {

class Context {
public:
    explicit Context(const VerifyConfig& cfg) : cfg_(cfg)
    {
        for (const auto& [key, value] : cfg.tolerances)
            if (!default_tolerances().contains(key)) throw ConfigError("unknown tolerance key: " + key);
        if (cfg.n < 1 || cfg.n > 8) throw ConfigError("verify needs 1 <= n <= 8");
    }

    [[nodiscard]] double tol(const std::string& key) const
    {
        if (const auto it = cfg_.tolerances.find(key); it != cfg_.tolerances.end()) return it->second;
        return default_tolerances().at(key);
    }

    [[nodiscard]] Metric metric(const std::string& key, double value, bool strict = false) const
    {
        return {key, value, tol(key), strict};
    }

    [[nodiscard]] const SphereComplex& complex() const
    {
        if (!complex_) complex_ = std::make_unique<SphereComplex>(cfg_.n);
        return *complex_;
    }

    [[nodiscard]] std::uint64_t seed() const { return cfg_.seed; }
    [[nodiscard]] int n() const { return cfg_.n; }

private:
    VerifyConfig cfg_;
    mutable std::unique_ptr<SphereComplex> complex_;
};

inline double relative(double err, double scale) { return scale > 0.0 ? err / scale : err; }

inline SpectralFunction random_function(const Basis& basis, std::mt19937_64& rng)
{
    return testkit::random_spectral(basis, rng);
}

inline std::vector<Metric> check_round_trip(const Context& ctx)
{
    std::mt19937_64 rng(ctx.seed());
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto q = testkit::random_sphere_point(rng, 1e-6);
        const auto back = heisenberg_to_sphere(sphere_to_heisenberg(q, 1e-6));
        worst = std::max({worst, std::abs(back.zeta1 - q.zeta1), std::abs(back.zeta2 - q.zeta2)});
    }
    return {ctx.metric("geometry.round_trip", worst)};
}

inline std::vector<Metric> check_gram_rank(const Context& ctx)
{
    // moments first, against sampling
    const std::vector<std::pair<std::array<int, 2>, std::array<int, 2>>> pairs{
        {{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}, {{1, 0}, {0, 1}},
        {{2, 0}, {2, 0}}, {{1, 1}, {1, 1}}, {{1, 0}, {0, 0}}, {{0, 2}, {0, 2}},
    };
    double sigmas = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [a, b] = pairs[k];
        const auto mc = testkit::monte_carlo_moment(a, b, 200000, ctx.seed() + k);
        const double exact = a == b ? monomial_moment(a, a) : 0.0;
        sigmas = std::max(sigmas, testkit::sigma_distance(mc, exact));
    }
    double mismatch = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const auto basis = Basis::build(n);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis->monomial_gram(), Eigen::EigenvaluesOnly);
        const auto& ev = eig.eigenvalues();
        int rank = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev[i] > Basis::kRankThreshold * ev.maxCoeff()) ++rank;
        const int expected = (n + 1) * (n + 2) * (2 * n + 3) / 6;
        mismatch = std::max({mismatch, std::abs(double(rank - expected)), std::abs(double(basis->rank() - expected))});
    }
    return {ctx.metric("basis.mc_sigma", sigmas), ctx.metric("basis.rank_mismatch", mismatch)};
}

inline std::vector<Metric> check_quadrature(const Context& ctx)
{
    double worst = 0.0;
    for (int n : {2, 4, 6}) {
        const auto grid = default_grid(n);
        const auto monomials = monomials_up_to(2 * n);
        std::vector<double> errors(monomials.size());
        crt::detail::parallel_for(monomials.size(), [&](std::size_t k) {
            const auto& m = monomials[k];
            const auto f = GridFunction::sample(grid, [&](const SpherePoint& q) {
                return std::pow(q.zeta1, m.a1) * std::pow(q.zeta2, m.a2) * std::pow(std::conj(q.zeta1), m.b1) *
                       std::pow(std::conj(q.zeta2), m.b2);
            });
            const std::array<int, 2> a{m.a1, m.a2}, b{m.b1, m.b2};
            const double exact = a == b ? monomial_moment(a, a) : 0.0;
            // Cauchy-Schwarz scale keeps vanishing moments on a relative footing
            const double scale = std::sqrt(monomial_moment(a, a) * monomial_moment(b, b));
            errors[k] = std::abs(integrate(grid, f) - exact) / scale;
        });
        for (double e : errors) worst = std::max(worst, e);
    }
    return {ctx.metric("quadrature.moment", worst)};
}

inline std::vector<Metric> check_conformal(const Context& ctx)
{
    const int n = std::min(ctx.n(), 4);
    const auto basis = Basis::build(n);
    std::mt19937_64 rng(ctx.seed());
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto v = random_function(*basis, rng);
        const auto lv = lbar_on_monomials(*basis, to_monomials(*basis, v));
        const auto mono = to_monomials(*basis, v);
        auto f = [&](const SpherePoint& q) { return evaluate_monomials(*basis, mono, q); };
        double err = 0.0, scale = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto q = testkit::random_sphere_point(rng, 0.2);
            const cplx spectral = mu_factor(q) * evaluate_monomials(*basis, lv, q);
            err = std::max(err, std::abs(spectral - zbar_hat_via_heisenberg(f, q)));
            scale = std::max(scale, std::abs(spectral));
        }
        worst = std::max(worst, relative(err, scale));
    }
    return {ctx.metric("operators.conformal", worst)};
}

inline std::vector<Metric> check_cr_weights(const Context& ctx)
{
    const auto grid = default_grid(ctx.n());
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) {
        for (const auto& q : grid.nodes()) {
            const double g = conformal_factor(q);
            auto hk = [k](const SpherePoint& p) { return std::pow(cr_weight(p), k); };
            const double step = 1e-3 * std::min(1.0, q.pole_distance());
            // |Zbar_hat F| = |Lbar F|; compared with the size k G^{k+1} of a first derivative of h^k
            const double v = std::abs(testkit::sphere_lbar_difference(hk, q, step)) / (k * std::pow(g, k + 1));
            worst = std::max(worst, v);
        }
    }
    return {ctx.metric("operators.cr_weight", worst)};
}

inline std::vector<Metric> check_adjoint_formula(const Context& ctx)
{
    const auto basis = Basis::build(std::min(ctx.n(), 4));
    std::mt19937_64 rng(ctx.seed());
    double err = 0.0, spread = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const FormCoefficient g{random_function(*basis, rng)};
        const auto star = apply_zbar_hat_star(*basis, g);
        auto gfn = [&](const SpherePoint& q) { return g.evaluate(*basis, q); };
        double e = 0.0, s = 0.0, scale = 0.0;
        for (int i = 0; i < 40; ++i) {
            const auto q = testkit::random_sphere_point(rng, 0.3);
            const cplx ref = evaluate(*basis, star, q);
            std::array<cplx, 3> via{};
            for (int k = 0; k < 3; ++k) via[static_cast<std::size_t>(k)] = zbar_hat_star_via_heisenberg(gfn, q, k);
            for (const auto& v : via) e = std::max(e, std::abs(v - ref));
            s = std::max({s, std::abs(via[0] - via[1]), std::abs(via[0] - via[2])});
            scale = std::max(scale, std::abs(ref));
        }
        err = std::max(err, relative(e, scale));
        spread = std::max(spread, relative(s, scale));
    }
    return {ctx.metric("operators.adjoint_formula", err), ctx.metric("operators.adjoint_k_spread", spread)};
}

/// Tensor bump supported in the box |x - cx|, |y - cy| < r, |t - ct| < r^2.
struct BoxBump {
    HeisenbergPoint center;
    double radius = 1.0;

    [[nodiscard]] static double profile(double s) { return std::abs(s) >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s * s)); }

    [[nodiscard]] double operator()(const HeisenbergPoint& x) const
    {
        return profile((x.z.real() - center.z.real()) / radius) * profile((x.z.imag() - center.z.imag()) / radius) *
               profile((x.t - center.t) / (radius * radius));
    }

    /// Exact partials of bump * poly, given the partials of poly.
    [[nodiscard]] Partials partials(const HeisenbergPoint& x, cplx poly, const Partials& dpoly) const
    {
        auto log_slope = [](double s) { return std::abs(s) >= 1.0 ? 0.0 : -2.0 * s / ((1.0 - s * s) * (1.0 - s * s)); };
        const double b = (*this)(x);
        const double gx = log_slope((x.z.real() - center.z.real()) / radius) / radius;
        const double gy = log_slope((x.z.imag() - center.z.imag()) / radius) / radius;
        const double gt = log_slope((x.t - center.t) / (radius * radius)) / (radius * radius);
        const cplx bz = 0.5 * b * cplx(gx, -gy), bzb = 0.5 * b * cplx(gx, gy);
        return {bz * poly + b * dpoly.d_dz, bzb * poly + b * dpoly.d_dzbar, b * gt * poly + b * dpoly.d_dt};
    }

    [[nodiscard]] std::array<std::pair<double, double>, 3> support() const
    {
        const double r2 = radius * radius;
        return {{{center.z.real() - radius, center.z.real() + radius},
                 {center.z.imag() - radius, center.z.imag() + radius},
                 {center.t - r2, center.t + r2}}};
    }
};

inline AxisRule panel_rule(double lo, double hi, int panels, int nodes)
{
    AxisRule rule;
    const auto gl = crt::detail::gauss_legendre(nodes, 0.0, 1.0);
    const double w = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            rule.nodes.push_back(lo + w * (p + gl.nodes[i]));
            rule.weights.push_back(w * gl.weights[i]);
        }
    return rule;
}

inline std::vector<Metric> check_heisenberg_adjoint(const Context& ctx)
{
    std::mt19937_64 rng(ctx.seed());
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> shift(-0.3, 0.3);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        const cplx a{normal(rng), normal(rng)}, b{normal(rng), normal(rng)};
        const cplx c{normal(rng), normal(rng)}, d{normal(rng), normal(rng)};
        const BoxBump bu{{{shift(rng), shift(rng)}, shift(rng)}, 0.8};
        const BoxBump bv{{{shift(rng), shift(rng)}, shift(rng)}, 0.8};
        // u = bu (a + b z + t zbar), v = bv (c + d zbar + t)
        auto u = [&](const HeisenbergPoint& x) { return bu(x) * (a + b * x.z + x.t * std::conj(x.z)); };
        auto v = [&](const HeisenbergPoint& x) { return bv(x) * (c + d * std::conj(x.z) + x.t); };
        auto du = [&](const HeisenbergPoint& x) {
            return bu.partials(x, a + b * x.z + x.t * std::conj(x.z), {b, x.t, std::conj(x.z)});
        };
        auto dv = [&](const HeisenbergPoint& x) { return bv.partials(x, c + d * std::conj(x.z) + x.t, {0.0, d, 1.0}); };

        // both integrands vanish outside the overlap of the supports
        std::array<AxisRule, 3> axes;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto [lu, hu] = bu.support()[k];
            const auto [lv, hv] = bv.support()[k];
            axes[k] = panel_rule(std::max(lu, lv), std::min(hu, hv), 24, 8);
        }
        const std::size_t nx = axes[0].nodes.size(), ny = axes[1].nodes.size(), nt = axes[2].nodes.size();
        std::vector<cplx> lhs(nx), rhs(nx);
        crt::detail::parallel_for(nx, [&](std::size_t i) {
            std::vector<cplx> l, r;
            l.reserve(ny * nt);
            r.reserve(ny * nt);
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nt; ++k) {
                    const HeisenbergPoint x{{axes[0].nodes[i], axes[1].nodes[j]}, axes[2].nodes[k]};
                    const double w = axes[0].weights[i] * axes[1].weights[j] * axes[2].weights[k];
                    l.push_back(w * heisenberg_derivative(HeisenbergOp::Zbar, du(x), x) * std::conj(v(x)));
                    r.push_back(w * u(x) * std::conj(-heisenberg_derivative(HeisenbergOp::Z, dv(x), x)));
                }
            lhs[i] = crt::detail::pairwise_sum(l);
            rhs[i] = crt::detail::pairwise_sum(r);
        });
        const cplx L = crt::detail::pairwise_sum(lhs), R = crt::detail::pairwise_sum(rhs);
        worst = std::max(worst, std::abs(L - R) / std::abs(L));
    }
    return {ctx.metric("operators.integration_by_parts", worst)};
}

inline std::vector<Metric> check_szego(const Context& ctx)
{
    const auto& c = ctx.complex();
    double proj = 0.0;
    for (const auto* m : {&c.projections().pi_hat.entries, &c.projections().pi_hat_1.entries}) {
        proj = std::max(proj, (*m * *m - *m).cwiseAbs().maxCoeff());
        proj = std::max(proj, (m->adjoint() - *m).cwiseAbs().maxCoeff());
    }

    const SphereComplex small(std::min(ctx.n(), 4));
    std::mt19937_64 rng(ctx.seed());
    double kernel = 0.0;
    for (int trial = 0; trial < 2; ++trial) {
        const auto v = random_function(small.basis(), rng);
        const auto g = synthesize(small.basis(), v, small.grid());
        const auto by_kernel = small.szego_kernel_project(g);
        const auto by_gram = synthesize(small.basis(), small.szego_project(v), small.grid());
        kernel = std::max(kernel, sphere_l2_norm(small.grid(), by_kernel - by_gram) / sphere_l2_norm(small.grid(), g));
    }

    double example = 0.0;
    if (c.degree() >= 2) {
        const auto p = c.szego_project(monomial_function(c.basis(), {1, 0, 1, 0}));
        std::mt19937_64 prng(ctx.seed() + 1);
        for (int i = 0; i < 20; ++i)
            example = std::max(example, std::abs(evaluate(c.basis(), p, testkit::random_sphere_point(prng)) - 0.5));
    }
    return {ctx.metric("hardy.projector", proj), ctx.metric("hardy.kernel_vs_gram", kernel),
            ctx.metric("hardy.szego_example", example)};
}

inline std::vector<Metric> check_solution_operators(const Context& ctx)
{
    const auto& c = ctx.complex();
    const auto& basis = c.basis();
    std::mt19937_64 rng(ctx.seed());
    double residual = 0.0, normalization = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        FormCoefficient g{random_function(basis, rng)};
        g.twisted = g.twisted - c.szego_project_forms(g).twisted;
        const auto s1 = c.solve_k1(g.sample(basis, c.grid()));
        residual = std::max(residual, s1.diagnostics.relative_residual);
        normalization = std::max(normalization, c.szego_project(s1.u).norm() / s1.u.norm());

        auto v = random_function(basis, rng);
        v = v - c.szego_project(v);
        const auto s2 = c.solve_k(synthesize(basis, v, c.grid()));
        residual = std::max(residual, s2.diagnostics.relative_residual);
        normalization = std::max(normalization, c.szego_project_forms(s2.u).twisted.norm() / s2.u.twisted.norm());
    }
    return {ctx.metric("hardy.solve_residual", residual), ctx.metric("hardy.relative_normalization", normalization)};
}

inline double recovery_at_points(const TransferSolution& sol, const std::function<cplx(const HeisenbergPoint&)>& exact,
                                 std::uint64_t seed, int count)
{
    double err = 0.0;
    for (const auto& x : testkit::random_heisenberg_points(seed, count)) {
        const cplx e = exact(x);
        err = std::max(err, std::abs(sol(x) - e) / std::max(1.0, std::abs(e)));
    }
    return err;
}

inline std::vector<Metric> check_thm1(const Context& ctx)
{
    const auto& c = ctx.complex();
    auto basis = c.basis_ptr();
    TransferOptions opt;
    opt.seed = ctx.seed();
    double sphere = 0.0, recovery = 0.0, h1 = 0.0, norm = 0.0;
    std::vector<SpectralFunction> cases{monomial_function(c.basis(), {0, 0, 1, 0}), random_non_hardy(c, ctx.seed())};
    for (const auto& v : cases) {
        const auto [sol, report] = solve_thm1(c, thm1_data_for(basis, v), opt);
        sphere = std::max(sphere, report.sphere_residual);
        h1 = std::max(h1, report.h1_residual_max);
        norm = std::max(norm, report.norm_identity_error);
        recovery = std::max(recovery, (sol.u_hat() - v).norm() / v.norm());
        const auto mono = to_monomials(*basis, v);
        recovery = std::max(recovery, recovery_at_points(
                                          sol,
                                          [&](const HeisenbergPoint& x) {
                                              const auto q = heisenberg_to_sphere(x);
                                              return evaluate_monomials(*basis, mono, q) / cr_weight(q);
                                          },
                                          ctx.seed() + 1, 200));
    }
    return {ctx.metric("transfer.sphere_residual", sphere), ctx.metric("transfer.recovery", recovery),
            ctx.metric("transfer.h1_residual", h1), ctx.metric("transfer.norm_identity", norm)};
}

inline std::vector<Metric> check_thm2(const Context& ctx)
{
    const auto& c = ctx.complex();
    auto basis = c.basis_ptr();
    TransferOptions opt;
    opt.seed = ctx.seed();
    const auto g = random_non_h1(c, ctx.seed());
    const auto f = thm2_data_for(basis, g);
    const auto [sol, report] = solve_thm2(c, f, opt);
    const double recovery = (sol.u_hat() - g.twisted).norm() / g.twisted.norm();

    const HeisenbergFunction mirrored = [&](const HeisenbergPoint& x) { return -std::conj(f(x)); };
    TransferOptions quick = opt;
    quick.h1_norm = false;
    const auto [w, wr] = solve_thm1(c, mirrored, quick);
    double conj = 0.0;
    for (const auto& x : testkit::random_heisenberg_points(ctx.seed() + 2, 50)) {
        const cplx u = sol(x);
        conj = std::max(conj, std::abs(u - std::conj(w(x))) / std::max(1.0, std::abs(u)));
    }
    return {ctx.metric("transfer.sphere_residual", report.sphere_residual), ctx.metric("transfer.recovery", recovery),
            ctx.metric("transfer.h1_residual", report.h1_residual_max),
            ctx.metric("transfer.norm_identity", report.norm_identity_error), ctx.metric("transfer.conjugation", conj)};
}

template <class Fn>
double kernel_fd_residual(testkit::FdTag tag, Fn&& f, std::uint64_t seed)
{
    double err = 0.0, scale = 0.0;
    for (const auto& x : testkit::random_heisenberg_points(seed, 50)) {
        err = std::max(err, std::abs(testkit::finite_difference(tag, f, x)));
        scale = std::max(scale, std::abs(f(x)));
    }
    return relative(err, scale);
}

inline std::vector<Metric> check_kernel_transfers(const Context& ctx)
{
    const auto& c = ctx.complex();
    auto basis = c.basis_ptr();
    std::mt19937_64 rng(ctx.seed());
    const auto u = c.szego_project(random_function(c.basis(), rng));
    const double hardy = kernel_fd_residual(testkit::FdTag::Zbar, hardy_weighted(basis, u), ctx.seed());

    double h1 = 0.0;
    for (const auto& g : c.h1_kernel_basis()) {
        auto w = [&](const HeisenbergPoint& x) {
            const auto q = heisenberg_to_sphere(x);
            return std::conj(cr_weight(q)) * std::pow(conformal_factor(q), -3) * g.evaluate(*basis, q);
        };
        h1 = std::max(h1, kernel_fd_residual(testkit::FdTag::ZbarStar, w, ctx.seed() + 1));
    }
    return {ctx.metric("transfer.hardy_kernel", hardy), ctx.metric("transfer.h1_kernel", h1)};
}

inline std::vector<Metric> check_cutoff(const Context& ctx)
{
    std::vector<double> c_values, l4;
    for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const testkit::CutoffProfile profile{eps, kPole};
        c_values.push_back(eps * testkit::cutoff_derivative_sup(profile, 4000, ctx.seed()));
        l4.push_back(testkit::cutoff_zbar_l4_norm(profile));
    }
    const auto [cmin, cmax] = std::minmax_element(c_values.begin(), c_values.end());
    const auto [lmin, lmax] = std::minmax_element(l4.begin(), l4.end());
    return {{"testkit.cutoff_ratio:sup", *cmax / *cmin, ctx.tol("testkit.cutoff_ratio")},
            {"testkit.cutoff_ratio:l4", *lmax / *lmin, ctx.tol("testkit.cutoff_ratio")}};
}

inline std::vector<Metric> check_convergence(const Context& ctx)
{
    double ratio = 0.0, galerkin = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int n : {2, 4, 6, 8}) {
        const auto basis = Basis::build(n);
        const auto grid = default_grid(n);
        const auto g = GridFunction::sample(grid, [](const SpherePoint& q) { return cplx{std::exp(q.zeta1.real())}; });
        const double r = analyze(*basis, g, grid).residual_norm / sphere_l2_norm(grid, g);
        if (std::isfinite(previous)) ratio = std::max(ratio, r / previous);
        previous = r;
        galerkin = std::max(galerkin, zbar_hat_galerkin(*basis, grid).refinement_change);
    }
    return {ctx.metric("convergence.decrease_ratio", ratio, true), ctx.metric("convergence.galerkin", galerkin)};
}

} // namespace detail

inline std::vector<CheckResult> run(const VerifyConfig& cfg)
{
    const detail::Context ctx(cfg);
    using Fn = std::vector<Metric> (*)(const detail::Context&);
    const std::map<int, Fn> checks{
        {1, detail::check_round_trip},        {2, detail::check_gram_rank},
        {3, detail::check_quadrature},        {4, detail::check_conformal},
        {5, detail::check_cr_weights},        {6, detail::check_adjoint_formula},
        {7, detail::check_heisenberg_adjoint}, {8, detail::check_szego},
        {9, detail::check_solution_operators}, {10, detail::check_thm1},
        {11, detail::check_thm2},             {12, detail::check_kernel_transfers},
        {13, detail::check_cutoff},           {14, detail::check_convergence},
    };
    for (int id : cfg.only)
        if (!checks.contains(id)) throw ConfigError("no check with id " + std::to_string(id));

    std::vector<CheckResult> out;
    for (const auto& [id, fn] : checks) {
        if (!cfg.only.empty() && !cfg.only.contains(id)) continue;
        CheckResult r;
        r.id = id;
        r.name = check_names().at(id);
        const auto start = std::chrono::steady_clock::now();
        try {
            r.metrics = fn(ctx);
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace crt::verify
