#pragma once

// Restricted polynomials of degree <= N on S^3.
//
// The spanning set is every monomial zeta1^a1 zeta2^a2 zetabar1^b1 zetabar2^b2
// with a1+a2+b1+b2 <= N. On the sphere these are linearly dependent through
// |zeta1|^2 + |zeta2|^2 = 1; the orthonormal basis is obtained from the exact
// Gram matrix (closed-form moments) by a rank-revealing, degree-graded
// Gram-Schmidt inside each charge block (k1, k2) = (a1 - b1, a2 - b2).
// Distinct charges are exactly orthogonal, and ordering by degree makes each
// basis vector a spherical harmonic of a single bidegree (p, q).

#include "crt/errors.hpp"
#include "crt/geometry.hpp"
#include "crt/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace crt {

struct MonomialIndex {
    int a1 = 0, a2 = 0, b1 = 0, b2 = 0;

    [[nodiscard]] int degree() const { return a1 + a2 + b1 + b2; }
    [[nodiscard]] std::pair<int, int> bidegree() const { return {a1 + a2, b1 + b2}; }
    [[nodiscard]] Charge charge() const { return {a1 - b1, a2 - b2}; }
    friend auto operator<=>(const MonomialIndex&, const MonomialIndex&) = default;
};

/// Dimension of restricted polynomials of degree <= N on S^3.
constexpr int restricted_dimension(int degree)
{
    return (degree + 1) * (degree + 2) * (2 * degree + 3) / 6;
}

/// Dimension of holomorphic polynomials of degree <= N in two variables.
constexpr int hardy_dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// int_{S^3} zeta^a zetabar^b theta_hat ^ d theta_hat.
///
/// Zero unless a == b; otherwise rho_S * 2 pi^2 * a1! a2! / (a1 + a2 + 1)!.
inline double monomial_moment(std::array<int, 2> a, std::array<int, 2> b)
{
    if (a != b) return 0.0;
    // a1! a2! / (a1+a2+1)! = 1 / ((a1+a2+1) * binom(a1+a2, a1))
    const int n = a[0] + a[1];
    double binom = 1.0;
    for (int k = 1; k <= a[0]; ++k) binom = binom * (n - a[0] + k) / k;
    return kSphereMeasure / ((n + 1) * binom);
}

/// <m, n> = int m conj(n) for two monomials.
inline double monomial_inner(const MonomialIndex& m, const MonomialIndex& n)
{
    return monomial_moment({m.a1 + n.b1, m.a2 + n.b2}, {m.b1 + n.a1, m.b2 + n.a2});
}

/// Value of a monomial at a point, from precomputed powers.
class MonomialEvaluator {
public:
    MonomialEvaluator(const SpherePoint& q, int degree)
    {
        for (auto* p : {&z1_, &z2_, &c1_, &c2_}) p->assign(static_cast<std::size_t>(degree) + 1, cplx{1.0, 0.0});
        for (int k = 1; k <= degree; ++k) {
            const auto i = static_cast<std::size_t>(k);
            z1_[i] = z1_[i - 1] * q.zeta1;
            z2_[i] = z2_[i - 1] * q.zeta2;
            c1_[i] = c1_[i - 1] * std::conj(q.zeta1);
            c2_[i] = c2_[i - 1] * std::conj(q.zeta2);
        }
    }

    [[nodiscard]] cplx operator()(const MonomialIndex& m) const
    {
        return z1_[static_cast<std::size_t>(m.a1)] * z2_[static_cast<std::size_t>(m.a2)] *
               c1_[static_cast<std::size_t>(m.b1)] * c2_[static_cast<std::size_t>(m.b2)];
    }

private:
    std::vector<cplx> z1_, z2_, c1_, c2_;
};

/// Truncated function: coefficients on an orthonormal basis of degree <= N.
struct SpectralFunction {
    Eigen::VectorXcd coefficients;
    int degree = 0;
    std::string basis_id;

    [[nodiscard]] double norm() const { return coefficients.norm(); }
};

inline void require_same_basis(const SpectralFunction& a, const SpectralFunction& b)
{
    if (a.basis_id != b.basis_id || a.coefficients.size() != b.coefficients.size())
        throw BasisMismatch("spectral functions on '" + a.basis_id + "' and '" + b.basis_id + "'");
}

inline SpectralFunction operator+(const SpectralFunction& a, const SpectralFunction& b)
{
    require_same_basis(a, b);
    return {a.coefficients + b.coefficients, a.degree, a.basis_id};
}

inline SpectralFunction operator-(const SpectralFunction& a, const SpectralFunction& b)
{
    require_same_basis(a, b);
    return {a.coefficients - b.coefficients, a.degree, a.basis_id};
}

inline SpectralFunction operator*(cplx c, const SpectralFunction& a)
{
    return {c * a.coefficients, a.degree, a.basis_id};
}

struct BasisDiagnostics {
    int monomial_count = 0;
    int rank = 0;
    int discarded = 0;
    double smallest_kept_ratio = 1.0;    ///< smallest accepted residual eigenvalue / largest Gram diagonal
    double largest_discarded_ratio = 0.0; ///< largest rejected residual eigenvalue / largest Gram diagonal
};

class Basis {
public:
    /// Relative eigenvalue cut separating genuine directions from the sphere relation.
    static constexpr double kRankThreshold = 1e-10;

    static std::shared_ptr<const Basis> build(int degree);

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int rank() const { return static_cast<int>(vectors_.size()); }
    [[nodiscard]] int monomial_count() const { return static_cast<int>(monomials_.size()); }
    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] const std::vector<MonomialIndex>& monomials() const { return monomials_; }
    [[nodiscard]] const BasisDiagnostics& diagnostics() const { return diagnostics_; }

    /// Monomial -> orthonormal transform: e_j = sum_m transform(m, j) monomial_m.
    [[nodiscard]] const Eigen::MatrixXd& transform() const { return transform_; }

    /// Charge and bidegree of basis vector j.
    [[nodiscard]] Charge charge(int j) const { return vectors_[static_cast<std::size_t>(j)].charge; }
    [[nodiscard]] std::pair<int, int> bidegree(int j) const
    {
        const auto& v = vectors_[static_cast<std::size_t>(j)];
        return {v.p, v.q};
    }

    [[nodiscard]] int monomial_position(const MonomialIndex& m) const
    {
        const auto it = lookup_.find(m);
        return it == lookup_.end() ? -1 : it->second;
    }

    /// Exact Gram matrix of the monomial spanning set.
    [[nodiscard]] Eigen::MatrixXd monomial_gram() const
    {
        const auto n = static_cast<Eigen::Index>(monomials_.size());
        Eigen::MatrixXd g(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                g(i, j) = monomial_inner(monomials_[static_cast<std::size_t>(i)], monomials_[static_cast<std::size_t>(j)]);
        return g;
    }

    [[nodiscard]] SpectralFunction zero() const
    {
        return {Eigen::VectorXcd::Zero(rank()), degree_, id_};
    }

    [[nodiscard]] SpectralFunction unit(int j) const
    {
        auto v = zero();
        v.coefficients[j] = 1.0;
        return v;
    }

    void require(const SpectralFunction& v) const
    {
        if (v.basis_id != id_ || v.coefficients.size() != rank())
            throw BasisMismatch("spectral function on '" + v.basis_id + "' used with basis '" + id_ + "'");
    }

    /// Radial profiles R_j(s) of every basis vector at the s-nodes of a grid:
    /// e_j = R_j(s) e^{i(k1 xi1 + k2 xi2)}.
    [[nodiscard]] Eigen::MatrixXd radial_table(const std::vector<double>& s_values) const
    {
        Eigen::MatrixXd table = Eigen::MatrixXd::Zero(rank(), static_cast<Eigen::Index>(s_values.size()));
        for (std::size_t is = 0; is < s_values.size(); ++is) {
            const auto mono = monomial_radial(s_values[is]);
            for (int j = 0; j < rank(); ++j) {
                double acc = 0.0;
                for (int m : vectors_[static_cast<std::size_t>(j)].support)
                    acc += transform_(m, j) * mono[static_cast<std::size_t>(m)];
                table(j, static_cast<Eigen::Index>(is)) = acc;
            }
        }
        return table;
    }

    /// Radial factor (1-s)^{(a1+b1)/2} s^{(a2+b2)/2} of every monomial.
    [[nodiscard]] std::vector<double> monomial_radial(double s) const
    {
        std::vector<double> out(monomials_.size());
        const double r1 = std::sqrt(1.0 - s), r2 = std::sqrt(s);
        for (std::size_t m = 0; m < monomials_.size(); ++m) {
            const auto& mi = monomials_[m];
            out[m] = std::pow(r1, mi.a1 + mi.b1) * std::pow(r2, mi.a2 + mi.b2);
        }
        return out;
    }

    [[nodiscard]] const std::vector<Charge>& charges() const { return charges_; }
    [[nodiscard]] int charge_slot(int j) const { return vectors_[static_cast<std::size_t>(j)].charge_slot; }
    [[nodiscard]] int monomial_charge_slot(int m) const { return monomial_slot_[static_cast<std::size_t>(m)]; }

private:
    struct VectorInfo {
        Charge charge;
        int charge_slot = 0;
        int p = 0, q = 0;
        std::vector<int> support; ///< monomials of its charge block
    };

    int degree_ = 0;
    std::string id_;
    std::vector<MonomialIndex> monomials_;
    std::map<MonomialIndex, int> lookup_;
    std::vector<int> monomial_slot_;
    std::vector<Charge> charges_;
    std::vector<VectorInfo> vectors_;
    Eigen::MatrixXd transform_;
    BasisDiagnostics diagnostics_;
};

/// All monomials of total degree <= N, ordered by degree.
inline std::vector<MonomialIndex> monomials_up_to(int degree)
{
    std::vector<MonomialIndex> out;
    for (int d = 0; d <= degree; ++d)
        for (int a1 = 0; a1 <= d; ++a1)
            for (int a2 = 0; a1 + a2 <= d; ++a2)
                for (int b1 = 0; a1 + a2 + b1 <= d; ++b1) out.push_back({a1, a2, b1, d - a1 - a2 - b1});
    return out;
}

inline std::shared_ptr<const Basis> Basis::build(int degree)
{
    if (degree < 0) throw InvalidConfig("Basis::build: negative degree");
    auto basis = std::make_shared<Basis>();
    Basis& b = *basis;
    b.degree_ = degree;
    b.id_ = "restricted-poly:" + std::to_string(degree);
    b.monomials_ = monomials_up_to(degree);
    b.charges_ = charges_up_to(degree);
    std::map<Charge, int> charge_slot;
    for (std::size_t c = 0; c < b.charges_.size(); ++c) charge_slot[b.charges_[c]] = static_cast<int>(c);
    for (std::size_t m = 0; m < b.monomials_.size(); ++m) {
        b.lookup_[b.monomials_[m]] = static_cast<int>(m);
        b.monomial_slot_.push_back(charge_slot.at(b.monomials_[m].charge()));
    }

    const auto count = static_cast<Eigen::Index>(b.monomials_.size());
    double scale = 0.0;
    for (const auto& m : b.monomials_) scale = std::max(scale, monomial_inner(m, m));
    const double cut = kRankThreshold * scale;

    std::vector<Eigen::VectorXd> columns;
    double smallest_kept = std::numeric_limits<double>::infinity();
    double largest_dropped = 0.0;

    for (std::size_t c = 0; c < b.charges_.size(); ++c) {
        std::vector<int> block;
        for (std::size_t m = 0; m < b.monomials_.size(); ++m)
            if (b.monomial_slot_[m] == static_cast<int>(c)) block.push_back(static_cast<int>(m));
        if (block.empty()) continue;
        const auto nb = static_cast<Eigen::Index>(block.size());
        Eigen::MatrixXd gram(nb, nb);
        for (Eigen::Index i = 0; i < nb; ++i)
            for (Eigen::Index j = 0; j < nb; ++j)
                gram(i, j) = monomial_inner(b.monomials_[static_cast<std::size_t>(block[static_cast<std::size_t>(i)])],
                                            b.monomials_[static_cast<std::size_t>(block[static_cast<std::size_t>(j)])]);

        Eigen::MatrixXd accepted(nb, 0); // orthonormal columns, block coordinates
        auto project_out = [&](Eigen::MatrixXd& x) {
            if (accepted.cols() == 0) return;
            x -= accepted * (accepted.transpose() * gram * x);
        };

        int d = 0;
        for (std::size_t start = 0; start < block.size();) {
            d = b.monomials_[static_cast<std::size_t>(block[start])].degree();
            std::size_t stop = start;
            while (stop < block.size() && b.monomials_[static_cast<std::size_t>(block[stop])].degree() == d) ++stop;
            const auto ng = static_cast<Eigen::Index>(stop - start);
            Eigen::MatrixXd x = Eigen::MatrixXd::Zero(nb, ng);
            for (Eigen::Index k = 0; k < ng; ++k) x(static_cast<Eigen::Index>(start) + k, k) = 1.0;
            project_out(x);
            project_out(x);

            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * gram * x);
            const auto& lambda = eig.eigenvalues();
            Eigen::MatrixXd fresh(nb, 0);
            for (Eigen::Index k = 0; k < ng; ++k) {
                if (lambda[k] > cut) {
                    smallest_kept = std::min(smallest_kept, lambda[k] / scale);
                    fresh.conservativeResize(Eigen::NoChange, fresh.cols() + 1);
                    fresh.col(fresh.cols() - 1) = x * eig.eigenvectors().col(k) / std::sqrt(lambda[k]);
                } else {
                    largest_dropped = std::max(largest_dropped, std::abs(lambda[k]) / scale);
                }
            }
            if (fresh.cols() > 0) {
                // second pass restores orthogonality lost to rounding
                project_out(fresh);
                Eigen::LLT<Eigen::MatrixXd> llt(fresh.transpose() * gram * fresh);
                fresh = llt.matrixU().solve<Eigen::OnTheRight>(fresh);
                Eigen::MatrixXd grown(nb, accepted.cols() + fresh.cols());
                grown << accepted, fresh;
                accepted = grown;
                const auto [k1, k2] = b.charges_[c];
                for (Eigen::Index k = 0; k < fresh.cols(); ++k) {
                    VectorInfo info;
                    info.charge = b.charges_[c];
                    info.charge_slot = static_cast<int>(c);
                    info.p = (d + k1 + k2) / 2;
                    info.q = (d - k1 - k2) / 2;
                    info.support = block;
                    b.vectors_.push_back(info);
                    Eigen::VectorXd full = Eigen::VectorXd::Zero(count);
                    for (Eigen::Index i = 0; i < nb; ++i) full(block[static_cast<std::size_t>(i)]) = fresh(i, k);
                    columns.push_back(full);
                }
            }
            start = stop;
        }
    }

    b.transform_.resize(count, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) b.transform_.col(static_cast<Eigen::Index>(j)) = columns[j];

    b.diagnostics_.monomial_count = static_cast<int>(count);
    b.diagnostics_.rank = static_cast<int>(columns.size());
    b.diagnostics_.discarded = static_cast<int>(count) - b.diagnostics_.rank;
    b.diagnostics_.smallest_kept_ratio = smallest_kept;
    b.diagnostics_.largest_discarded_ratio = largest_dropped;

    if (b.diagnostics_.rank != restricted_dimension(degree))
        throw NumericalFailure("Basis::build: discarded " + std::to_string(b.diagnostics_.discarded) +
                               " directions, expected " + std::to_string(count - restricted_dimension(degree)));
    return basis;
}

// ---------------------------------------------------------------------------
// Coefficient transforms

/// Monomial coefficients of a spectral function.
inline Eigen::VectorXcd to_monomials(const Basis& basis, const SpectralFunction& v)
{
    basis.require(v);
    return basis.transform().cast<cplx>() * v.coefficients;
}

/// Exact orthogonal projection of a monomial combination (degree <= N) onto the basis.
inline SpectralFunction from_monomials(const Basis& basis, const Eigen::VectorXcd& mono)
{
    if (mono.size() != basis.monomial_count()) throw BasisMismatch("from_monomials: wrong coefficient length");
    const Eigen::MatrixXd gt = basis.monomial_gram() * basis.transform();
    return {gt.transpose().cast<cplx>() * mono, basis.degree(), basis.id()};
}

/// Spectral function of a single monomial.
inline SpectralFunction monomial_function(const Basis& basis, const MonomialIndex& m)
{
    const int pos = basis.monomial_position(m);
    if (pos < 0) throw InvalidConfig("monomial_function: monomial exceeds the basis degree");
    Eigen::VectorXcd mono = Eigen::VectorXcd::Zero(basis.monomial_count());
    mono[pos] = 1.0;
    return from_monomials(basis, mono);
}

/// Pointwise value of a monomial combination.
inline cplx evaluate_monomials(const Basis& basis, const Eigen::VectorXcd& mono, const SpherePoint& q)
{
    const MonomialEvaluator eval(q, basis.degree());
    cplx acc{};
    for (int m = 0; m < basis.monomial_count(); ++m)
        if (mono[m] != cplx{}) acc += mono[m] * eval(basis.monomials()[static_cast<std::size_t>(m)]);
    return acc;
}

inline cplx evaluate(const Basis& basis, const SpectralFunction& v, const SpherePoint& q)
{
    return evaluate_monomials(basis, to_monomials(basis, v), q);
}

namespace detail {

inline void require_resolving_grid(const Basis& basis, const QuadratureGrid& grid)
{
    if (grid.exactness_degree() < 2 * basis.degree())
        throw InvalidConfig("grid '" + grid.id() + "' is exact to degree " + std::to_string(grid.exactness_degree()) +
                            ", need " + std::to_string(2 * basis.degree()));
}

} // namespace detail

/// Samples of a monomial combination at every grid node.
inline GridFunction synthesize_monomials(const Basis& basis, const Eigen::VectorXcd& mono, const QuadratureGrid& grid)
{
    detail::require_resolving_grid(basis, grid);
    const auto& charges = basis.charges();
    Eigen::MatrixXcd radial = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(charges.size()), grid.n_s());
    for (int is = 0; is < grid.n_s(); ++is) {
        const auto r = basis.monomial_radial(grid.s_nodes()[static_cast<std::size_t>(is)]);
        for (int m = 0; m < basis.monomial_count(); ++m)
            if (mono[m] != cplx{}) radial(basis.monomial_charge_slot(m), is) += mono[m] * r[static_cast<std::size_t>(m)];
    }
    return angular_synthesis(grid, radial, charges);
}

inline GridFunction synthesize(const Basis& basis, const SpectralFunction& v, const QuadratureGrid& grid)
{
    basis.require(v);
    detail::require_resolving_grid(basis, grid);
    const auto table = basis.radial_table(grid.s_nodes());
    Eigen::MatrixXcd radial = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.charges().size()), grid.n_s());
    for (int j = 0; j < basis.rank(); ++j) {
        if (v.coefficients[j] == cplx{}) continue;
        radial.row(basis.charge_slot(j)) += v.coefficients[j] * table.row(j).cast<cplx>();
    }
    return angular_synthesis(grid, radial, basis.charges());
}

struct Analysis {
    SpectralFunction function;
    double residual_norm = 0.0; ///< ||g - synthesize(function)|| on the grid
};

/// Orthogonal projection of grid samples onto the truncated space, by discrete inner products.
inline Analysis analyze(const Basis& basis, const GridFunction& g, const QuadratureGrid& grid)
{
    detail::require_resolving_grid(basis, grid);
    require_on_grid(g, grid);
    const auto radial = angular_analysis(grid, g, basis.charges());
    const auto table = basis.radial_table(grid.s_nodes());
    SpectralFunction v = basis.zero();
    for (int j = 0; j < basis.rank(); ++j) {
        cplx acc{};
        const int slot = basis.charge_slot(j);
        for (int is = 0; is < grid.n_s(); ++is)
            acc += 4.0 * grid.s_weights()[static_cast<std::size_t>(is)] * radial(slot, is) * table(j, is);
        v.coefficients[j] = acc;
    }
    const double residual = sphere_l2_norm(grid, g - synthesize(basis, v, grid));
    return {v, residual};
}

// ---------------------------------------------------------------------------
// Tangential vector fields on monomials.
//
//   Lbar = zeta1 d/dzetabar2 - zeta2 d/dzetabar1   (type (0,1), shifts (p,q) -> (p+1,q-1))
//   L    = zetabar1 d/dzeta2 - zetabar2 d/dzeta1   (its conjugate)
// Both preserve total degree, so they act exactly on degree <= N.

inline Eigen::VectorXcd lbar_on_monomials(const Basis& basis, const Eigen::VectorXcd& mono)
{
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(basis.monomial_count());
    for (int m = 0; m < basis.monomial_count(); ++m) {
        if (mono[m] == cplx{}) continue;
        const auto mi = basis.monomials()[static_cast<std::size_t>(m)];
        if (mi.b2 > 0) out[basis.monomial_position({mi.a1 + 1, mi.a2, mi.b1, mi.b2 - 1})] += double(mi.b2) * mono[m];
        if (mi.b1 > 0) out[basis.monomial_position({mi.a1, mi.a2 + 1, mi.b1 - 1, mi.b2})] -= double(mi.b1) * mono[m];
    }
    return out;
}

inline Eigen::VectorXcd l_on_monomials(const Basis& basis, const Eigen::VectorXcd& mono)
{
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(basis.monomial_count());
    for (int m = 0; m < basis.monomial_count(); ++m) {
        if (mono[m] == cplx{}) continue;
        const auto mi = basis.monomials()[static_cast<std::size_t>(m)];
        if (mi.a2 > 0) out[basis.monomial_position({mi.a1, mi.a2 - 1, mi.b1 + 1, mi.b2})] += double(mi.a2) * mono[m];
        if (mi.a1 > 0) out[basis.monomial_position({mi.a1 - 1, mi.a2, mi.b1, mi.b2 + 1})] -= double(mi.a1) * mono[m];
    }
    return out;
}

} // namespace crt
