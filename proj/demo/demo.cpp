// Solves Zbar u = f on the Heisenberg group for data with a known answer,
// then the adjoint problem, and prints what the pipelines report.

#include "crt/transfer.hpp"

#include <cstdio>

using namespace crt;

int main()
{
    const SphereComplex c(4);
    std::printf("basis %s: %d functions, Hardy rank %d, H_1 rank %d, grid %s\n", c.basis().id().c_str(),
                c.basis().rank(), c.hardy_rank(), c.h1_rank(), c.grid().id().c_str());

    // u = h^{-1} zetabar1, pulled back to H^1
    const auto v = monomial_function(c.basis(), {0, 0, 1, 0});
    const auto [sol, report] = solve_thm1(c, thm1_data_for(c.basis_ptr(), v));
    std::printf("Zbar u = f:   sphere residual %.2e, H^1 residual %.2e, |f|_L2(H^1) %.6f vs %.6f on S^3\n",
                report.sphere_residual, report.h1_residual_max, report.norm_l2_h1, report.norm_l2_s3);
    const HeisenbergPoint x{{0.3, -0.2}, 0.7};
    std::printf("  u(%g%+gi, %g) = %.10f%+.10fi\n", x.z.real(), x.z.imag(), x.t, sol(x).real(), sol(x).imag());

    const auto g = random_non_h1(c, 1);
    const auto [sol2, report2] = solve_thm2(c, thm2_data_for(c.basis_ptr(), g));
    std::printf("Zbar* u = f:  sphere residual %.2e, H^1 residual %.2e, recovered to %.2e\n", report2.sphere_residual,
                report2.h1_residual_max, (sol2.u_hat() - g.twisted).norm() / g.twisted.norm());

    // data in the range of the kernel is flagged, not rejected
    const auto [bad, report3] = solve_thm1(c, thm1_data_from_form(c.basis_ptr(), c.h1_kernel_basis().front()));
    std::printf("H_1 data:     precondition component %.3f, violated=%s\n", report3.precondition_component,
                report3.precondition_violated ? "yes" : "no");
}
