#pragma once

// Hardy space H (kernel of Zbar_hat), the form kernel H_1 (kernel of
// Zbar_hat*), their Szego projections, and the relative solution operators
// K_1 (right inverse of Zbar_hat with Pi K_1 = 0) and K (right inverse of
// Zbar_hat* with Pi_1 K = 0), all on the truncated space of degree <= N.

#include "crt/basis.hpp"
#include "crt/detail/numeric.hpp"
#include "crt/errors.hpp"
#include "crt/operators.hpp"
#include "crt/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <memory>
#include <string>
#include <vector>

namespace crt {

GridFunction szego_kernel_project(const QuadratureGrid& grid, const GridFunction& g, int kernel_degree = -1);

struct ProjectionPair {
    OperatorMatrix pi_hat;   ///< onto Hardy polynomials
    OperatorMatrix pi_hat_1; ///< onto twisted coefficients of H_1
};

struct SolveDiagnostics {
    double residual = 0.0;               ///< ||Zbar_hat u - g|| (or the adjoint) on the grid
    double relative_residual = 0.0;      ///< residual / ||data||
    double precondition_component = 0.0; ///< ||kernel part of data|| / ||data||
    bool precondition_violated = false;
    double data_norm = 0.0;
    double truncation_residual = 0.0; ///< part of the data outside the truncated space
    double sigma_max = 0.0;
    double sigma_min_kept = 0.0;
    double sigma_max_discarded = 0.0;
    int kernel_dimension = 0;
};

struct FunctionSolve {
    SpectralFunction u;
    SolveDiagnostics diagnostics;
};

struct FormSolve {
    FormCoefficient u;
    SolveDiagnostics diagnostics;
};

struct HardyOptions {
    double kernel_cut = 1e-8;         ///< relative singular-value cut for the null space of Zbar_hat*
    double precondition_tol = 1e-6;
    GalerkinOptions galerkin{};
};

/// Truncated CR complex on S^3: basis, grid, Galerkin matrices, projections and factorizations.
class SphereComplex {
public:
    SphereComplex(int degree, const QuadratureGrid& grid, const HardyOptions& options = {})
        : basis_(Basis::build(degree)), options_(options)
    {
        detail::require_resolving_grid(*basis_, grid);
        auto gal = zbar_hat_galerkin(*basis_, grid, options.galerkin);
        grid_ = gal.grid;
        galerkin_change_ = gal.refinement_change;
        zbar_ = gal.zbar;
        zbar_star_ = gal.zbar_star;
        build_hardy();
        build_h1();
        build_solvers();
    }

    explicit SphereComplex(int degree, const HardyOptions& options = {})
        : SphereComplex(degree, default_grid(degree), options)
    {
    }

    [[nodiscard]] const Basis& basis() const { return *basis_; }
    [[nodiscard]] std::shared_ptr<const Basis> basis_ptr() const { return basis_; }
    [[nodiscard]] const QuadratureGrid& grid() const { return grid_; }
    [[nodiscard]] int degree() const { return basis_->degree(); }
    [[nodiscard]] const OperatorMatrix& zbar() const { return zbar_; }
    [[nodiscard]] const OperatorMatrix& zbar_star() const { return zbar_star_; }
    [[nodiscard]] const ProjectionPair& projections() const { return projections_; }
    [[nodiscard]] double galerkin_refinement_change() const { return galerkin_change_; }
    [[nodiscard]] const HardyOptions& options() const { return options_; }
    [[nodiscard]] const Eigen::VectorXd& zbar_star_singular_values() const { return star_sigma_; }

    /// Orthogonal projection onto Hardy polynomials.
    [[nodiscard]] SpectralFunction szego_project(const SpectralFunction& v) const
    {
        basis_->require(v);
        return {projections_.pi_hat.entries * v.coefficients, v.degree, v.basis_id};
    }

    /// Orthogonal projection of a form coefficient onto H_1.
    [[nodiscard]] FormCoefficient szego_project_forms(const FormCoefficient& g) const
    {
        basis_->require(g.twisted);
        return {{projections_.pi_hat_1.entries * g.twisted.coefficients, g.twisted.degree, g.twisted.basis_id}};
    }

    /// Orthonormal basis of H_1 (numerical null space of the Zbar_hat* Galerkin matrix).
    [[nodiscard]] std::vector<FormCoefficient> h1_kernel_basis() const
    {
        std::vector<FormCoefficient> out;
        for (Eigen::Index k = 0; k < h1_.cols(); ++k)
            out.push_back({{h1_.col(k), degree(), basis_->id()}});
        return out;
    }

    [[nodiscard]] int hardy_rank() const { return static_cast<int>(hardy_.cols()); }
    [[nodiscard]] int h1_rank() const { return static_cast<int>(h1_.cols()); }

    /// K_1: minimal-norm u with Pi u = 0 minimizing ||Zbar_hat u - g_hat||.
    [[nodiscard]] FunctionSolve solve_k1(const GridFunction& ghat) const
    {
        require_on_grid(ghat, grid_);
        const auto mu = mu_samples(grid_);
        const auto an = analyze(*basis_, conj(mu) * ghat, grid_);
        const Eigen::VectorXcd& b = an.function.coefficients;

        FunctionSolve out{basis_->zero(), {}};
        auto& d = out.diagnostics;
        d.data_norm = sphere_l2_norm(grid_, ghat);
        d.truncation_residual = an.residual_norm;
        d.kernel_dimension = h1_rank();
        fill_spectrum(d);
        if (d.data_norm == 0.0) return out;

        d.precondition_component = (projections_.pi_hat_1.entries * b).norm() / d.data_norm;
        d.precondition_violated = d.precondition_component > options_.precondition_tol;
        const Eigen::VectorXcd c = k1_solver_.solve(b);
        out.u.coefficients = hardy_complement_ * c;
        d.residual = sphere_l2_norm(grid_, apply_zbar_hat(*basis_, out.u, grid_) - ghat);
        d.relative_residual = d.residual / d.data_norm;
        return out;
    }

    /// K: minimal-norm form u with Pi_1 u = 0 minimizing ||Zbar_hat* u - f_hat||.
    [[nodiscard]] FormSolve solve_k(const GridFunction& fhat) const
    {
        require_on_grid(fhat, grid_);
        const auto an = analyze(*basis_, fhat, grid_);
        const Eigen::VectorXcd& b = an.function.coefficients;

        FormSolve out{{basis_->zero()}, {}};
        auto& d = out.diagnostics;
        d.data_norm = sphere_l2_norm(grid_, fhat);
        d.truncation_residual = an.residual_norm;
        d.kernel_dimension = hardy_rank();
        fill_spectrum(d);
        if (d.data_norm == 0.0) return out;

        d.precondition_component = (projections_.pi_hat.entries * b).norm() / d.data_norm;
        d.precondition_violated = d.precondition_component > options_.precondition_tol;
        const Eigen::VectorXcd c = k_solver_.solve(b);
        out.u.twisted.coefficients = h1_complement_ * c;
        const SpectralFunction image{zbar_star_.entries * out.u.twisted.coefficients, degree(), basis_->id()};
        d.residual = sphere_l2_norm(grid_, synthesize(*basis_, image, grid_) - fhat);
        d.relative_residual = d.residual / d.data_norm;
        return out;
    }

    /// Szego projection of samples through the reproducing kernel
    /// c * sum_{k <= K} (k + 1) <zeta, eta>^k of Hardy polynomials of degree <= K,
    /// the truncation of c (1 - <zeta, eta>)^{-2}; c is fixed by reproducing constants.
    [[nodiscard]] GridFunction szego_kernel_project(const GridFunction& g, int kernel_degree = -1) const
    {
        return crt::szego_kernel_project(grid_, g, kernel_degree);
    }

private:
    static Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd& x)
    {
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
        return qr.householderQ() * Eigen::MatrixXcd::Identity(x.rows(), x.cols());
    }

    // Orthonormal complement of the span of orthonormal columns q.
    static Eigen::MatrixXcd complement(const Eigen::MatrixXcd& q)
    {
        const auto n = q.rows();
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(q);
        const Eigen::MatrixXcd full = qr.householderQ();
        return full.rightCols(n - q.cols());
    }

    void build_hardy()
    {
        // holomorphic monomials projected exactly into the orthonormal basis
        Eigen::MatrixXcd span(basis_->rank(), hardy_dimension(degree()));
        int col = 0;
        for (int d = 0; d <= degree(); ++d)
            for (int a1 = 0; a1 <= d; ++a1)
                span.col(col++) = monomial_function(*basis_, {a1, d - a1, 0, 0}).coefficients;
        hardy_ = orthonormal_columns(span);
        projections_.pi_hat = {hardy_ * hardy_.adjoint(), "Pi_hat", degree(), ""};
        hardy_complement_ = complement(hardy_);
    }

    void build_h1()
    {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(zbar_star_.entries, Eigen::ComputeFullV);
        star_sigma_ = svd.singularValues();
        const double cut = options_.kernel_cut * star_sigma_[0];
        int kept = 0;
        while (kept < star_sigma_.size() && star_sigma_[kept] >= cut) ++kept;
        h1_ = svd.matrixV().rightCols(basis_->rank() - kept);
        projections_.pi_hat_1 = {h1_ * h1_.adjoint(), "Pi_hat_1", degree(), grid_.id()};
        h1_complement_ = svd.matrixV().leftCols(kept);
    }

    void build_solvers()
    {
        k1_solver_.setThreshold(options_.kernel_cut);
        k1_solver_.compute(zbar_.entries * hardy_complement_);
        k_solver_.setThreshold(options_.kernel_cut);
        k_solver_.compute(zbar_star_.entries * h1_complement_);
    }

    void fill_spectrum(SolveDiagnostics& d) const
    {
        const auto n = star_sigma_.size();
        const auto kept = n - h1_.cols();
        d.sigma_max = n > 0 ? star_sigma_[0] : 0.0;
        d.sigma_min_kept = kept > 0 ? star_sigma_[kept - 1] : 0.0;
        d.sigma_max_discarded = kept < n ? star_sigma_[kept] : 0.0;
    }

    std::shared_ptr<const Basis> basis_;
    HardyOptions options_;
    QuadratureGrid grid_;
    double galerkin_change_ = 0.0;
    OperatorMatrix zbar_, zbar_star_;
    ProjectionPair projections_;
    Eigen::MatrixXcd hardy_, hardy_complement_;
    Eigen::MatrixXcd h1_, h1_complement_;
    Eigen::VectorXd star_sigma_;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> k1_solver_, k_solver_;
};

inline GridFunction szego_kernel_project(const QuadratureGrid& grid, const GridFunction& g, int kernel_degree)
{
    require_on_grid(g, grid);
    const int kd = kernel_degree >= 0 ? kernel_degree : grid.exactness_degree() / 2;
    const auto& nodes = grid.nodes();
    const std::size_t n = nodes.size();

    auto kernel_row = [&](std::size_t i, const Eigen::VectorXcd& values) {
        const auto& zi = nodes[i];
        std::vector<cplx> terms(n);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& eta = nodes[j];
            const cplx x = zi.zeta1 * std::conj(eta.zeta1) + zi.zeta2 * std::conj(eta.zeta2);
            cplx acc = 0.0;
            for (int k = kd; k >= 0; --k) acc = acc * x + double(k + 1); // Horner
            terms[j] = grid.weights()[j] * acc * values[static_cast<Eigen::Index>(j)];
        }
        return detail::pairwise_sum(terms);
    };

    // calibration: the kernel must reproduce the constant 1
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(n));
    const cplx c = 1.0 / kernel_row(0, ones);

    GridFunction out = GridFunction::zeros(grid);
    detail::parallel_for(n, [&](std::size_t i) { out.values[static_cast<Eigen::Index>(i)] = c * kernel_row(i, g.values); });
    return out;
}

} // namespace crt
