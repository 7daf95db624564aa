// Weierstrass data at the square and hexagonal lattices, plus one generic modulus.
#include <cstdio>

#include <gtorus/elliptic.hpp>

using namespace gtorus;

static void show(const char *label, cplx tau)
{
    const LatticeData L(tau);
    const cplx z(0.3, 0.2);
    std::printf("%s  tau = %.6f%+.6fi\n", label, tau.real(), tau.imag());
    std::printf("  g2   = %.12f%+.12fi\n", L.g2().real(), L.g2().imag());
    std::printf("  g3   = %.12f%+.12fi\n", L.g3().real(), L.g3().imag());
    std::printf("  eta1 = %.12f%+.12fi   eta2 = %.12f%+.12fi\n", L.eta1().real(), L.eta1().imag(), L.eta2().real(),
                L.eta2().imag());
    for (int k = 1; k <= 3; ++k) {
        std::printf("  e%d   = %.12f%+.12fi\n", k, L.e(k).real(), L.e(k).imag());
    }
    std::printf("  at z = 0.3+0.2i: wp = %.10f%+.10fi, wp' = %.10f%+.10fi\n", wp(z, L).real(), wp(z, L).imag(),
                wp_prime(z, L).real(), wp_prime(z, L).imag());
    std::printf("                   zeta = %.10f%+.10fi, sigma = %.10f%+.10fi\n", zeta_w(z, L).real(), zeta_w(z, L).imag(),
                sigma_w(z, L).real(), sigma_w(z, L).imag());
    std::printf("  Legendre residual %.2e, cubic residual %.2e\n\n", legendre_residual(L), cubic_residual(z, L));
}

int main()
{
    show("square   ", cplx(0., 1.));
    show("hexagonal", hexagonal_tau());
    show("generic  ", cplx(0.3, 1.1));
}
