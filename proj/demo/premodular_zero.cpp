// Zeros of the pre-modular forms: tau as a function of (r,s), and (r,s) at a fixed tau.
#include <cstdio>

#include <gtorus/premodular.hpp>

using namespace gtorus;

int main()
{
    const auto z = find_tau_zero(1. / 3., 1. / 3., cplx(0.4, 0.9), 1);
    std::printf("Z_{1/3,1/3}(tau) = 0 at tau = %.14f%+.14fi (residual %.1e, |dZ/dtau| = %.4f)\n", z.tau.real(), z.tau.imag(),
                z.residual, std::abs(z.derivative));
    std::printf("exp(i pi/3)                 = %.14f%+.14fi\n\n", hexagonal_tau().real(), hexagonal_tau().imag());

    const LatticeData L(cplx(0.45, 1.2));
    for (int n : {1, 2, 3}) {
        const auto rep = find_rs_zeros_all(L, n, 150);
        std::printf("tau = 0.45+1.2i, n = %d: %zu real zeros of Z^(%d) off the half lattice\n", n, rep.zeros.size(), n);
        for (const auto &w : rep.zeros) {
            std::printf("  (r,s) = (%.10f, %.10f)  triangle %d  |Z| = %.1e\n", w.r, w.s, static_cast<int>(w.box), w.residual);
        }
    }
}
