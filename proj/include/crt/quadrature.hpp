#pragma once

// Product quadrature on S^3 in Hopf coordinates
//   zeta1 = sqrt(1 - s) e^{i xi1},  zeta2 = sqrt(s) e^{i xi2},
// Gauss-Legendre in s on (0, 1), trapezoidal in xi1, xi2 on [0, 2 pi).
// Weights are in units of theta_hat ^ d theta_hat = 4 ds d xi1 d xi2.
//
// A monomial zeta^a zetabar^b restricted to the grid is
//   (1-s)^{(a1+b1)/2} s^{(a2+b2)/2} e^{i(a1-b1) xi1} e^{i(a2-b2) xi2},
// so the rule is exact for total degree d whenever d < n_angle (the angular
// sums vanish) and d/2 <= 2 n_s - 1 (the radial polynomial is integrated
// exactly). The recorded exactness degree is min(n_angle - 1, 2 n_s - 1).

#include "crt/detail/numeric.hpp"
#include "crt/errors.hpp"
#include "crt/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace crt {

class QuadratureGrid {
public:
    QuadratureGrid() = default;

    [[nodiscard]] int n_s() const { return n_s_; }
    [[nodiscard]] int n_angle() const { return n_angle_; }
    [[nodiscard]] int exactness_degree() const { return exactness_; }
    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    [[nodiscard]] const std::vector<SpherePoint>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] const std::vector<double>& s_nodes() const { return s_nodes_; }
    [[nodiscard]] const std::vector<double>& s_weights() const { return s_weights_; }

    /// Flat node index of (s-node, xi1-node, xi2-node).
    [[nodiscard]] std::size_t index(int is, int j1, int j2) const
    {
        return (static_cast<std::size_t>(is) * n_angle_ + j1) * n_angle_ + j2;
    }

    /// Smallest |1 + zeta2| over the nodes.
    [[nodiscard]] double min_pole_distance() const
    {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& q : nodes_) d = std::min(d, q.pole_distance());
        return d;
    }

    friend QuadratureGrid build_grid(int n_s, int n_angle);

private:
    int n_s_ = 0;
    int n_angle_ = 0;
    int exactness_ = 0;
    std::string id_;
    std::vector<double> s_nodes_, s_weights_;
    std::vector<SpherePoint> nodes_;
    std::vector<double> weights_;
};

inline QuadratureGrid build_grid(int n_s, int n_angle)
{
    if (n_s < 2 || n_angle < 4)
        throw InvalidConfig("build_grid: need n_s >= 2 and n_angle >= 4");

    QuadratureGrid g;
    g.n_s_ = n_s;
    g.n_angle_ = n_angle;
    g.exactness_ = std::min(n_angle - 1, 2 * n_s - 1);
    g.id_ = "hopf:" + std::to_string(n_s) + "x" + std::to_string(n_angle);

    const auto rule = detail::gauss_legendre(n_s, 0.0, 1.0);
    g.s_nodes_ = rule.nodes;
    g.s_weights_ = rule.weights;

    const double dxi = 2.0 * std::numbers::pi / n_angle;
    std::vector<cplx> phase(static_cast<std::size_t>(n_angle));
    for (int j = 0; j < n_angle; ++j) phase[static_cast<std::size_t>(j)] = std::polar(1.0, j * dxi);

    g.nodes_.reserve(static_cast<std::size_t>(n_s) * n_angle * n_angle);
    g.weights_.reserve(g.nodes_.capacity());
    for (int is = 0; is < n_s; ++is) {
        const double s = rule.nodes[static_cast<std::size_t>(is)];
        if (!(s > 0.0 && s < 1.0)) throw NumericalFailure("build_grid: Gauss node on the s-interval endpoint");
        const double r1 = std::sqrt(1.0 - s), r2 = std::sqrt(s);
        const double w = 4.0 * rule.weights[static_cast<std::size_t>(is)] * dxi * dxi;
        for (int j1 = 0; j1 < n_angle; ++j1)
            for (int j2 = 0; j2 < n_angle; ++j2) {
                g.nodes_.push_back({r1 * phase[static_cast<std::size_t>(j1)], r2 * phase[static_cast<std::size_t>(j2)]});
                g.weights_.push_back(w);
            }
    }
    return g;
}

/// Grid for truncation degree N: n_s = 2N + 4, n_angle = 4N + 8 (exact to 4N + 7).
inline QuadratureGrid default_grid(int degree)
{
    if (degree < 0) throw InvalidConfig("default_grid: negative degree");
    return build_grid(2 * degree + 4, 4 * degree + 8);
}

/// Same layout at twice the resolution in every direction.
inline QuadratureGrid refined(const QuadratureGrid& grid)
{
    return build_grid(2 * grid.n_s(), 2 * grid.n_angle());
}

/// Complex samples aligned with a named grid.
struct GridFunction {
    Eigen::VectorXcd values;
    std::string grid_id;

    GridFunction() = default;
    GridFunction(Eigen::VectorXcd v, std::string id) : values(std::move(v)), grid_id(std::move(id)) {}

    static GridFunction zeros(const QuadratureGrid& grid)
    {
        return {Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.size())), grid.id()};
    }

    /// Samples fn(q) at every node.
    template <class Fn>
    static GridFunction sample(const QuadratureGrid& grid, Fn&& fn)
    {
        GridFunction g = zeros(grid);
        const auto& nodes = grid.nodes();
        for (std::size_t i = 0; i < nodes.size(); ++i) g.values[static_cast<Eigen::Index>(i)] = fn(nodes[i]);
        return g;
    }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b)
{
    if (a.grid_id != b.grid_id || a.values.size() != b.values.size())
        throw GridMismatch("grid functions live on '" + a.grid_id + "' and '" + b.grid_id + "'");
}

inline void require_on_grid(const GridFunction& g, const QuadratureGrid& grid)
{
    if (g.grid_id != grid.id() || static_cast<std::size_t>(g.values.size()) != grid.size())
        throw GridMismatch("grid function on '" + g.grid_id + "' used with grid '" + grid.id() + "'");
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b)
{
    require_same_grid(a, b);
    return {a.values + b.values, a.grid_id};
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b)
{
    require_same_grid(a, b);
    return {a.values - b.values, a.grid_id};
}

/// Pointwise product.
inline GridFunction operator*(const GridFunction& a, const GridFunction& b)
{
    require_same_grid(a, b);
    return {a.values.cwiseProduct(b.values), a.grid_id};
}

inline GridFunction operator*(cplx c, const GridFunction& a) { return {c * a.values, a.grid_id}; }

inline GridFunction conj(const GridFunction& a) { return {a.values.conjugate(), a.grid_id}; }

/// Discrete integral sum_i w_i g_i.
inline cplx integrate(const QuadratureGrid& grid, const GridFunction& g)
{
    require_on_grid(g, grid);
    std::vector<cplx> terms(grid.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = grid.weights()[i] * g.values[static_cast<Eigen::Index>(i)];
    return detail::pairwise_sum(terms);
}

/// Discrete <f, g> = sum_i w_i f_i conj(g_i).
inline cplx inner(const QuadratureGrid& grid, const GridFunction& f, const GridFunction& g)
{
    require_on_grid(f, grid);
    require_same_grid(f, g);
    std::vector<cplx> terms(grid.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        terms[i] = grid.weights()[i] * f.values[k] * std::conj(g.values[k]);
    }
    return detail::pairwise_sum(terms);
}

/// (sum_i w_i |g_i|^p)^{1/p}.
inline double sphere_lp_norm(const QuadratureGrid& grid, const GridFunction& g, double p)
{
    if (!(p >= 1.0)) throw InvalidConfig("sphere_lp_norm: p must be >= 1");
    require_on_grid(g, grid);
    std::vector<double> terms(grid.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = grid.weights()[i] * std::pow(std::abs(g.values[static_cast<Eigen::Index>(i)]), p);
    return std::pow(detail::pairwise_sum(terms), 1.0 / p);
}

inline double sphere_l2_norm(const QuadratureGrid& grid, const GridFunction& g)
{
    return sphere_lp_norm(grid, g, 2.0);
}

// ---------------------------------------------------------------------------
// Angular Fourier structure of the grid.

/// Angular frequency pair (k1, k2) = (a1 - b1, a2 - b2) of a monomial.
using Charge = std::pair<int, int>;

/// All charges with |k1| + |k2| <= max_degree, in a fixed order.
inline std::vector<Charge> charges_up_to(int max_degree)
{
    std::vector<Charge> out;
    for (int k1 = -max_degree; k1 <= max_degree; ++k1)
        for (int k2 = -max_degree; k2 <= max_degree; ++k2)
            if (std::abs(k1) + std::abs(k2) <= max_degree) out.emplace_back(k1, k2);
    return out;
}

/// Per-s-node angular samples collapsed onto a set of charges.
///
/// radial(c, is) = sum_{j1,j2} g(is, j1, j2) e^{-i(k1 xi1 + k2 xi2)} (2 pi / n)^2
/// so that <g, R(s) e^{i k.xi}>_grid = sum_is 4 w_is radial(c, is) conj(R(s_is)).
inline Eigen::MatrixXcd angular_analysis(const QuadratureGrid& grid, const GridFunction& g,
                                         const std::vector<Charge>& charges)
{
    require_on_grid(g, grid);
    const int n = grid.n_angle();
    const double dxi = 2.0 * std::numbers::pi / n;
    int kmax = 0;
    for (const auto& [k1, k2] : charges) kmax = std::max({kmax, std::abs(k1), std::abs(k2)});
    if (2 * kmax >= n) throw InvalidConfig("angular_analysis: charges alias on this grid");

    auto twiddle = [&](int k, int j) { return std::polar(1.0, -k * j * dxi); };
    const int nk = 2 * kmax + 1;
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(charges.size()), grid.n_s());
    Eigen::MatrixXcd tw(nk, n);
    for (int k = -kmax; k <= kmax; ++k)
        for (int j = 0; j < n; ++j) tw(k + kmax, j) = twiddle(k, j);

    for (int is = 0; is < grid.n_s(); ++is) {
        // partial[k2][j1] = sum_j2 g e^{-i k2 xi2}
        Eigen::MatrixXcd partial(nk, n);
        for (int j1 = 0; j1 < n; ++j1) {
            const auto base = static_cast<Eigen::Index>(grid.index(is, j1, 0));
            for (int k = 0; k < nk; ++k) {
                cplx acc{};
                for (int j2 = 0; j2 < n; ++j2) acc += g.values[base + j2] * tw(k, j2);
                partial(k, j1) = acc;
            }
        }
        for (std::size_t c = 0; c < charges.size(); ++c) {
            const auto [k1, k2] = charges[c];
            cplx acc{};
            for (int j1 = 0; j1 < n; ++j1) acc += partial(k2 + kmax, j1) * tw(k1 + kmax, j1);
            out(static_cast<Eigen::Index>(c), is) = acc * dxi * dxi;
        }
    }
    return out;
}

/// Inverse of the above: g(is, j1, j2) = sum_c radial(c, is) e^{i(k1 xi1 + k2 xi2)}.
inline GridFunction angular_synthesis(const QuadratureGrid& grid, const Eigen::MatrixXcd& radial,
                                      const std::vector<Charge>& charges)
{
    const int n = grid.n_angle();
    const double dxi = 2.0 * std::numbers::pi / n;
    int kmax = 0;
    for (const auto& [k1, k2] : charges) kmax = std::max({kmax, std::abs(k1), std::abs(k2)});
    const int nk = 2 * kmax + 1;
    Eigen::MatrixXcd tw(nk, n);
    for (int k = -kmax; k <= kmax; ++k)
        for (int j = 0; j < n; ++j) tw(k + kmax, j) = std::polar(1.0, k * j * dxi);

    GridFunction g = GridFunction::zeros(grid);
    for (int is = 0; is < grid.n_s(); ++is) {
        // per_k2[k2][j1] = sum_{k1} radial(k1,k2) e^{i k1 xi1}
        Eigen::MatrixXcd per_k2 = Eigen::MatrixXcd::Zero(nk, n);
        for (std::size_t c = 0; c < charges.size(); ++c) {
            const cplx r = radial(static_cast<Eigen::Index>(c), is);
            if (r == cplx{}) continue;
            const auto [k1, k2] = charges[c];
            for (int j1 = 0; j1 < n; ++j1) per_k2(k2 + kmax, j1) += r * tw(k1 + kmax, j1);
        }
        for (int j1 = 0; j1 < n; ++j1) {
            const auto base = static_cast<Eigen::Index>(grid.index(is, j1, 0));
            for (int j2 = 0; j2 < n; ++j2) {
                cplx acc{};
                for (int k = 0; k < nk; ++k) acc += per_k2(k, j1) * tw(k, j2);
                g.values[base + j2] = acc;
            }
        }
    }
    return g;
}

} // namespace crt
