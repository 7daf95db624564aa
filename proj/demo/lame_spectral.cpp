// Roots of the Lame polynomials l_1, l_2 and the branch-point configurations they label.
#include <cstdio>

#include <gtorus/crit.hpp>

using namespace gtorus;

int main()
{
    for (cplx tau : {cplx(0., 1.), cplx(0., 2.), cplx(0.45, 1.2)}) {
        const LatticeData L(tau);
        std::printf("tau = %.4f%+.4fi\n", tau.real(), tau.imag());
        for (int n : {1, 2}) {
            std::printf("  n = %d, roots of l_n:\n", n);
            for (auto B : lame_roots(L, n)) {
                std::printf("    B = %+.10f%+.10fi   |l_n(B)| = %.1e\n", B.real(), B.imag(), std::abs(lame_poly(B, L, n)));
            }
            std::printf("  trivial critical points of G_%d:\n", n);
            for (const auto &r : find_trivial(L, n).records) {
                std::printf("    B = %+.8f%+.8fi  a =", r.B.real(), r.B.imag());
                for (const auto &p : r.config.points()) {
                    std::printf(" %.6f%+.6fi", p.z.real(), p.z.imag());
                }
                std::printf("  det = %+.6e\n", r.det_numeric);
            }
        }
        // a generic point of Y_2 and its monodromy data
        const auto y = solve_yn_from_B(cplx(1.3, 0.4), L, 2);
        const auto md = monodromy_rs(y[0], L);
        std::printf("  Y_2 at B = 1.3+0.4i: (r,s) = (%.6f%+.6fi, %.6f%+.6fi), wedge deviation %.1e\n\n", md.raw_r.real(),
                    md.raw_r.imag(), md.raw_s.real(), md.raw_s.imag(), wedge_check(y[0], L));
    }
}
