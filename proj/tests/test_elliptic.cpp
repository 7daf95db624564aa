#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <gtorus/elliptic.hpp>
#include <gtorus/numdiff.hpp>

#include "oracle/lattice_sums.hpp"

using namespace gtorus;

namespace
{

double rel(cplx a, cplx b)
{
    return std::abs(a - b) / std::max(1., std::abs(b));
}

cplx random_f0(std::mt19937_64 &rng, double im_max)
{
    std::uniform_real_distribution<double> ux(0., 1.), uy(1e-2, im_max);
    for (;;) {
        const cplx t(ux(rng), uy(rng));
        if (std::abs(t - 0.5) >= 0.5) {
            return t;
        }
    }
}

cplx random_cell(std::mt19937_64 &rng, cplx tau)
{
    std::uniform_real_distribution<double> u(0.05, 0.95);
    return u(rng) + u(rng) * tau;
}

const std::vector<cplx> oracle_taus{cplx(0., 1.), hexagonal_tau(), cplx(0.3, 1.1), cplx(1., 2.), cplx(0.1, 0.6)};

} // namespace

TEST(Elliptic, RejectsNonPositiveImaginaryPart)
{
    EXPECT_THROW(LatticeData(cplx(0.3, 0.)), domain_error);
    EXPECT_THROW(LatticeData(cplx(0.3, -1.)), domain_error);
    EXPECT_THROW(make_lattice(cplx(NAN, 1.)), domain_error);
}

TEST(Elliptic, SquareLatticeSpecialValues)
{
    const LatticeData L(cplx(0., 1.));
    EXPECT_NEAR(std::abs(L.g3()), 0., 1e-10);
    EXPECT_NEAR(std::abs(L.eta1() - pi), 0., 1e-10);
    EXPECT_NEAR(std::abs(L.eta2() + I * pi), 0., 1e-10);
    EXPECT_NEAR(std::abs(wp((1. + I) / 2., L)), 0., 1e-10);
}

TEST(Elliptic, HexagonalLatticeHasZeroG2)
{
    EXPECT_NEAR(std::abs(LatticeData(hexagonal_tau()).g2()), 0., 1e-10);
}

TEST(Elliptic, InvariantsMatchEisensteinSums)
{
    for (cplx tau : {cplx(1., 2.), cplx(0.3, 1.1), cplx(0.1, 0.6)}) {
        const LatticeData L(tau);
        EXPECT_LT(rel(L.g2(), oracle::g2(tau)), 1e-8) << tau;
        EXPECT_LT(rel(L.g3(), oracle::g3(tau)), 1e-8) << tau;
        EXPECT_LT(rel(L.eta1(), oracle::eta1(tau)), 1e-8) << tau;
        EXPECT_LT(rel(L.eta2(), oracle::eta2(tau)), 1e-8) << tau;
    }
}

TEST(Elliptic, OracleAgreementOnGrid)
{
    for (cplx tau : oracle_taus) {
        const LatticeData L(tau);
        double worst = 0.;
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const cplx z = (i + 0.5) / 10. + (j + 0.5) / 10. * tau;
                worst = std::max({worst, rel(wp(z, L), oracle::wp(z, tau)), rel(wp_prime(z, L), oracle::wp_prime(z, tau)),
                                  rel(zeta_w(z, L), oracle::zeta(z, tau)), rel(sigma_w(z, L), oracle::sigma(z, tau))});
            }
        }
        EXPECT_LT(worst, 1e-8) << "tau = " << tau;
    }
}

TEST(Elliptic, Legendre)
{
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const LatticeData L(random_f0(rng, 4.));
        EXPECT_LT(legendre_residual(L), 1e-10) << L.tau();
    }
}

TEST(Elliptic, CubicODE)
{
    std::mt19937_64 rng(2);
    for (int t = 0; t < 5; ++t) {
        const LatticeData L(random_f0(rng, 3.));
        for (int k = 0; k < 100; ++k) {
            EXPECT_LT(cubic_residual(random_cell(rng, L.tau()), L), 1e-8);
        }
    }
}

TEST(Elliptic, BranchValues)
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        const LatticeData L(random_f0(rng, 3.));
        const double scale = 1. + std::abs(L.e(1)) + std::abs(L.e(2)) + std::abs(L.e(3));
        EXPECT_LT(std::abs(L.e(1) + L.e(2) + L.e(3)) / scale, 1e-12);
        for (int k = 1; k <= 3; ++k) {
            EXPECT_LT(std::abs(wp_prime(L.omega(k) / 2., L)) / scale, 1e-9);
            const cplx e = L.e(k);
            EXPECT_LT(std::abs(4. * e * e * e - L.g2() * e - L.g3()) / std::pow(scale, 3), 1e-12);
        }
    }
}

TEST(Elliptic, ParityAndPeriodicity)
{
    const LatticeData L(cplx(1., 2.));
    const cplx z(0.3, 0.2);
    EXPECT_LT(rel(wp(-z, L), wp(z, L)), 1e-12);
    EXPECT_LT(rel(wp_prime(-z, L), -wp_prime(z, L)), 1e-12);
    EXPECT_LT(rel(zeta_w(-z, L), -zeta_w(z, L)), 1e-12);
    EXPECT_LT(rel(sigma_w(-z, L), -sigma_w(z, L)), 1e-12);
    for (auto [m, n] : {std::pair{1, 0}, {0, 1}, {2, -3}}) {
        const cplx w = static_cast<double>(m) + static_cast<double>(n) * L.tau();
        EXPECT_LT(rel(wp(z + w, L), wp(z, L)), 1e-10);
        EXPECT_LT(rel(wp_prime(z + w, L), wp_prime(z, L)), 1e-10);
        EXPECT_LT(rel(zeta_w(z + w, L), zeta_w(z, L) + static_cast<double>(m) * L.eta1() + static_cast<double>(n) * L.eta2()),
                  1e-10);
    }
}

TEST(Elliptic, ZetaAtHalfPeriod)
{
    for (cplx tau : oracle_taus) {
        const LatticeData L(tau);
        EXPECT_LT(rel(zeta_w(0.5, L), L.eta1() / 2.), 1e-12);
        EXPECT_LT(rel(zeta_w(tau / 2., L), L.eta2() / 2.), 1e-12);
    }
}

TEST(Elliptic, SigmaTransformationLaw)
{
    std::mt19937_64 rng(4);
    for (int k = 0; k < 100; ++k) {
        const LatticeData L(random_f0(rng, 2.));
        const cplx z = random_cell(rng, L.tau());
        for (int j = 1; j <= 2; ++j) {
            const cplx w = L.omega(j), eta = j == 1 ? L.eta1() : L.eta2();
            const cplx lhs = sigma_w(z + w, L), rhs = -std::exp(eta * (z + w / 2.)) * sigma_w(z, L);
            EXPECT_LT(std::abs(lhs - rhs) / std::abs(rhs), 1e-8);
        }
    }
}

TEST(Elliptic, SigmaNearOrigin)
{
    const LatticeData L(cplx(0., 2.));
    EXPECT_EQ(sigma_w(0., L), cplx(0.));
    const double h = 1e-6;
    EXPECT_NEAR(std::abs((sigma_w(h, L) - sigma_w(-h, L)) / (2. * h) - 1.), 0., 1e-9);
    EXPECT_LT(rel(sigma_w(cplx(0.5, 0.5), L), oracle::sigma(cplx(0.5, 0.5), cplx(0., 2.))), 1e-8);
}

TEST(Elliptic, DerivativeChain)
{
    std::mt19937_64 rng(5);
    const double h = 1e-4;
    for (int k = 0; k < 20; ++k) {
        const LatticeData L(random_f0(rng, 2.));
        const cplx z = random_cell(rng, L.tau());
        auto d = [&](auto f) { return central_derivative([&](double x) { return f(z + x); }, 0., h); };
        const cplx dzeta = d([&](cplx w) { return zeta_w(w, L); });
        const cplx dwp = d([&](cplx w) { return wp(w, L); });
        const cplx dlogsigma = d([&](cplx w) { return std::log(sigma_w(w, L) / sigma_w(z, L)); });
        const cplx dwpp = d([&](cplx w) { return wp_prime(w, L); });
        EXPECT_LT(rel(dzeta, -wp(z, L)), 1e-6);
        EXPECT_LT(rel(dwp, wp_prime(z, L)), 1e-6);
        EXPECT_LT(rel(dlogsigma, zeta_w(z, L)), 1e-6);
        EXPECT_LT(rel(dwpp, wp_second(z, L)), 1e-6);
    }
}

TEST(Elliptic, PoleGuard)
{
    const LatticeData L(cplx(0.2, 1.3));
    const cplx lattice_point = 2. - L.tau();
    try {
        wp(lattice_point + 1e-10, L);
        FAIL() << "expected a pole error";
    } catch (const pole_error &e) {
        EXPECT_LT(std::abs(e.nearest_lattice_point() - lattice_point), 1e-9);
    }
    EXPECT_THROW(wp_prime(0., L), pole_error);
    EXPECT_THROW(zeta_w(L.tau(), L), pole_error);
    EXPECT_NO_THROW(sigma_w(L.tau(), L));

    const LatticeData loose(cplx(0.2, 1.3), EllipticOptions{1e-3});
    EXPECT_THROW(wp(1e-4, loose), pole_error);
    EXPECT_NO_THROW(wp(1e-4, L));
}

TEST(Elliptic, ReductionIsTransparent)
{
    // tau far outside the fundamental domain; invariants transform with weight 4 and 6
    const cplx tau(3.2, 0.15);
    const LatticeData L(tau);
    EXPECT_LT(legendre_residual(L), 1e-9);
    EXPECT_LT(rel(L.g2(), oracle::g2(tau)), 1e-7);
    EXPECT_LT(rel(wp(0.37 + 0.41 * tau, L), oracle::wp(0.37 + 0.41 * tau, tau)), 1e-7);
}
