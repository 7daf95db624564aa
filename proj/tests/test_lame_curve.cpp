#include <random>

#include <gtest/gtest.h>

#include <gtorus/lame_curve.hpp>

#include "oracle/lattice_sums.hpp"

using namespace gtorus;

namespace
{

std::vector<cplx> resolve(const std::vector<cplx> &seed, cplx B, const LatticeData &L)
{
    auto res = detail::polish_at_B(seed, B, L, NewtonOptions{1e-14, 1e-12, 50, 20});
    EXPECT_TRUE(res.converged) << "B = " << B;
    return res.x;
}

double max_abs(const std::vector<cplx> &v)
{
    double m = 0.;
    for (auto x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace

TEST(LameCurve, ResidualsForOnePointAreEmpty)
{
    const LatticeData L(cplx(0., 1.));
    EXPECT_TRUE(yn_residuals(Configuration::from_z({0.3}, L), L).empty());
    EXPECT_EQ(yn_partials({cplx(0.3)}, L).rows(), 0);
}

TEST(LameCurve, ResidualAtQuarterPeriodPair)
{
    const cplx tau(0., 1.);
    const LatticeData L(tau);
    const cplx a = 0.25;
    const auto g = yn_residuals(Configuration::from_z({a, -a}, L), L);
    ASSERT_EQ(g.size(), 1u);
    // g^1 = zeta(2a) + zeta(-a) - zeta(a) = zeta(2a) - 2 zeta(a)
    const cplx expect = oracle::zeta(2. * a, tau) - 2. * oracle::zeta(a, tau);
    EXPECT_LT(std::abs(g[0] - expect), 1e-9);
    // not on Y_2: the value is pi/2 - 2 zeta(1/4) != 0
    EXPECT_GT(std::abs(g[0]), 1e-3);
}

TEST(LameCurve, ResidualsAreOdd)
{
    const LatticeData L(cplx(0.3, 1.2));
    const std::vector<cplx> a{cplx(0.21, 0.33), cplx(0.6, 0.5), cplx(0.15, 0.9)};
    std::vector<cplx> m;
    for (auto z : a) {
        m.push_back(-z);
    }
    const auto gp = yn_residuals_raw(a, L), gm = yn_residuals_raw(m, L);
    for (std::size_t j = 0; j < gp.size(); ++j) {
        EXPECT_LT(std::abs(gp[j] + gm[j]), 1e-12);
    }
}

TEST(LameCurve, PartialsMatchFiniteDifferences)
{
    const LatticeData L(cplx(0.3, 1.2));
    const std::vector<cplx> a{cplx(0.21, 0.33), cplx(0.6, 0.5), cplx(0.15, 0.9)};
    const Eigen::MatrixXcd D = yn_partials(a, L);
    const double h = 1e-5;
    for (std::size_t k = 0; k < a.size(); ++k) {
        auto ap = a, am = a;
        ap[k] += h;
        am[k] -= h;
        const auto gp = yn_residuals_raw(ap, L), gm = yn_residuals_raw(am, L);
        for (std::size_t j = 0; j < gp.size(); ++j) {
            const cplx fd = (gp[j] - gm[j]) / (2. * h);
            EXPECT_LT(std::abs(fd - D(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))), 1e-6 * (1. + std::abs(fd)));
        }
    }
}

TEST(LameCurve, LamePolynomialNOneRootsAreBranchValues)
{
    const LatticeData L(cplx(0.2, 0.9));
    const auto roots = lame_roots(L, 1);
    ASSERT_EQ(roots.size(), 3u);
    for (int k = 1; k <= 3; ++k) {
        double best = HUGE_VAL;
        for (auto r : roots) {
            best = std::min(best, std::abs(r - L.e(k)));
        }
        EXPECT_LT(best, 1e-10);
        EXPECT_LT(std::abs(lame_poly(L.e(k), L, 1)), 1e-9);
    }
}

TEST(LameCurve, LamePolynomialNTwoSquareLattice)
{
    const LatticeData L(cplx(0., 1.));
    const cplx g2 = L.g2();
    for (cplx B : {cplx(0.7, -0.2), cplx(3.1, 1.4), cplx(-2., 0.5)}) {
        const cplx expect = (B * B - 3. * g2) * B * (B * B - 9. / 4. * g2);
        EXPECT_LT(std::abs(lame_poly(B, L, 2) - expect) / std::abs(expect), 1e-10);
    }
}

TEST(LameCurve, LameCoefficientsAgreeWithProductForm)
{
    const LatticeData L(cplx(0.41, 1.3));
    for (int n : {1, 2}) {
        const auto c = lame_coefficients(L, n);
        for (cplx B : {cplx(0.7, -0.2), cplx(3.1, 1.4)}) {
            EXPECT_LT(std::abs(poly_eval(c, B) - lame_poly(B, L, n)) / std::abs(lame_poly(B, L, n)), 1e-12);
        }
    }
    EXPECT_THROW(lame_coefficients(L, 3), capability_error);
    EXPECT_THROW(lame_poly(1., L, 4), capability_error);
}

TEST(LameCurve, LameNTwoHasFiveDistinctRootsOnRectangularTorus)
{
    const LatticeData L(cplx(0., 2.));
    const auto roots = lame_roots(L, 2);
    ASSERT_EQ(roots.size(), 5u);
    double sep = HUGE_VAL;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        EXPECT_LT(std::abs(lame_poly(roots[i], L, 2)), 1e-8);
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            sep = std::min(sep, std::abs(roots[i] - roots[j]));
        }
    }
    EXPECT_GT(sep, 1e-3);
}

TEST(LameCurve, WpInverse)
{
    const LatticeData L(cplx(0.35, 1.05));
    for (cplx x : {cplx(0.3, 0.4), cplx(-5., 2.), cplx(40., -10.), L.e(2) + 1e-6}) {
        const cplx a = wp_inverse(x, L);
        EXPECT_LT(std::abs(wp(a, L) - x), 1e-9 * (1. + std::abs(x)));
    }
    const cplx a0(0.27, 0.61);
    const cplx x = wp(a0, L), y = wp_prime(a0, L);
    const cplx a = wp_inverse(x, L, y);
    EXPECT_LT(L.lattice_distance(a - a0).first, 1e-9);
    const cplx b = wp_inverse(x, L, -y);
    EXPECT_LT(L.lattice_distance(b + a0).first, 1e-9);
}

TEST(LameCurve, SolveNOneIsWpInverse)
{
    const LatticeData L(cplx(0.1, 1.4));
    const cplx B(1.7, -0.6);
    const auto y = solve_yn_from_B(B, L, 1);
    EXPECT_LT(std::abs(wp(y[0].config[0].z, L) - B), 1e-10);
    EXPECT_LT(L.lattice_distance(y[0].config[0].z + y[1].config[0].z).first, 1e-12);
}

TEST(LameCurve, SolveNOneAtBranchValueGivesHalfPeriod)
{
    const LatticeData L(cplx(0., 1.3));
    const auto y = solve_yn_from_B(L.e(1), L, 1);
    EXPECT_LT(L.lattice_distance(y[0].config[0].z - 0.5).first, 1e-7);
    EXPECT_TRUE(is_branch_point(y[0], L));
}

TEST(LameCurve, SolveNTwoGivesDisjointPair)
{
    const LatticeData L(cplx(0., 2.));
    for (cplx B : {cplx(1.3, 0.4), cplx(-4., 2.5), cplx(12., -3.)}) {
        const auto y = solve_yn_from_B(B, L, 2);
        EXPECT_LT(max_abs(yn_residuals(y[0].config, L)), 1e-10);
        EXPECT_LT(std::abs(accessory_B(y[0].config.zs(), L) - B), 1e-10);
        EXPECT_LT(max_abs(yn_residuals(y[1].config, L)), 1e-10);
        EXPECT_TRUE(y[0].config.disjoint_from_negation(L, 1e-6));
        EXPECT_TRUE(y[1].config.same_multiset(y[0].config.negated(L), L));
        for (const auto &p : y[0].config.points()) {
            EXPECT_GT(L.lattice_distance(2. * p.z).first, 1e-6);
        }
    }
}

TEST(LameCurve, SolveNThreeByContinuation)
{
    const LatticeData L(cplx(0.2, 1.1));
    const cplx B(2.5, -1.);
    const auto y = solve_yn_from_B(B, L, 3);
    EXPECT_LT(max_abs(yn_residuals(y[0].config, L)), 1e-10);
    EXPECT_LT(std::abs(accessory_B(y[0].config.zs(), L) - B), 1e-10);
    EXPECT_FALSE(is_branch_point(y[0], L));
}

TEST(LameCurve, SolveRejectsBadInput)
{
    const LatticeData L(cplx(0., 1.));
    EXPECT_THROW(solve_yn_from_B(1., L, 0), domain_error);
    EXPECT_THROW(solve_yn_from_B(1., L, 2, Configuration::from_z({0.3}, L)), domain_error);
}

TEST(LameCurve, MonodromyHexagonalThird)
{
    const LatticeData L(hexagonal_tau());
    const cplx p = (1. + L.tau()) / 3.;
    const YnPoint y{Configuration::from_z({p}, L), wp(p, L), L.tau()};
    const auto md = monodromy_rs(y, L);
    EXPECT_TRUE(md.is_real);
    EXPECT_FALSE(md.branch);
    EXPECT_NEAR(md.r.real(), 1. / 3., 1e-12);
    EXPECT_NEAR(md.s.real(), 1. / 3., 1e-12);
    EXPECT_LT(md.residual, 1e-10);
    EXPECT_EQ(md.box, RsBox::delta0);
}

TEST(LameCurve, MonodromyShiftsAndNegation)
{
    const LatticeData L(cplx(0., 2.));
    const auto y = solve_yn_from_B(cplx(1.3, 0.4), L, 2);
    auto a = y[0].config.zs();
    const auto rs = raw_rs(a, L);
    a[0] += 1.;
    a[1] += L.tau();
    const auto shifted = raw_rs(a, L);
    EXPECT_LT(std::abs(shifted[0] - rs[0] - 1.), 1e-10);
    EXPECT_LT(std::abs(shifted[1] - rs[1] - 1.), 1e-10);

    const auto m0 = monodromy_rs(y[0], L), m1 = monodromy_rs(y[1], L);
    EXPECT_LT(std::abs(m0.r - m1.r) + std::abs(m0.s - m1.s), 1e-10);
    const auto neg = raw_rs(y[1].config.zs(), L);
    const cplx dr = neg[0] + rs[0], ds = neg[1] + rs[1];
    EXPECT_LT(std::abs(dr - std::round(dr.real())) + std::abs(ds - std::round(ds.real())), 1e-10);
    EXPECT_LT(m0.residual, 1e-10);
}

TEST(LameCurve, CanonicalRepresentative)
{
    const auto c = detail::canonical_rs(cplx(-0.3), cplx(1.2));
    // (0.7, 0.2) and its negative (0.3, 0.8): the one with s <= 1/2 wins
    EXPECT_NEAR(c[0].real(), 0.7, 1e-14);
    EXPECT_NEAR(c[1].real(), 0.2, 1e-14);
    EXPECT_EQ(rs_box(0.3, 0.3), RsBox::delta0);
    EXPECT_EQ(rs_box(0.8, 0.3), RsBox::delta1);
    EXPECT_EQ(rs_box(0.6, 0.2), RsBox::delta2);
    EXPECT_EQ(rs_box(0.1, 0.2), RsBox::delta3);
    EXPECT_EQ(rs_box(0.25, 0.25), RsBox::none);
}

TEST(LameCurve, BranchPointsOfYTwoAreLameRoots)
{
    const LatticeData L(cplx(0.1, 1.3));
    for (auto B : lame_roots(L, 2)) {
        const auto y = solve_yn_from_B(B, L, 2);
        EXPECT_TRUE(is_branch_point(y[0], L, 1e-5)) << "B = " << B;
        EXPECT_TRUE(monodromy_rs(y[0], L, 1e-5).is_real);
    }
}

TEST(LameCurve, DerivativesNOne)
{
    const LatticeData L(cplx(0.25, 1.1));
    const cplx B(0.9, 0.7);
    const auto y = solve_yn_from_B(B, L, 1);
    const auto D = curve_derivatives(y[0], L);
    const cplx a = y[0].config[0].z;
    EXPECT_LT(std::abs(D.a_prime[0] - 1. / wp_prime(a, L)), 1e-12 * std::abs(D.a_prime[0]));
    const cplx tau_r = -4. * pi * I * (L.eta1() + B) / wp_prime(a, L);
    EXPECT_LT(std::abs(D.tau_r - tau_r) / std::abs(tau_r), 1e-12);
    const cplx ratio = L.tau() - 2. * pi * I / (L.eta1() + B);
    EXPECT_LT(std::abs(D.tau_s / D.tau_r - ratio) / std::abs(ratio), 1e-10);
}

TEST(LameCurve, DerivativesMatchFiniteDifferencesNTwo)
{
    const LatticeData L(cplx(0., 2.));
    const cplx B(1.3, 0.4);
    const auto y = solve_yn_from_B(B, L, 2);
    const auto a0 = y[0].config.zs();
    const auto D = curve_derivatives(y[0], L);
    const double h = 1e-6;
    const auto ap = resolve(a0, B + h, L), am = resolve(a0, B - h, L);
    for (std::size_t k = 0; k < 2; ++k) {
        const cplx fd = (ap[k] - am[k]) / (2. * h);
        EXPECT_LT(std::abs(fd - D.a_prime[k]) / std::abs(D.a_prime[k]), 1e-6);
    }
    const double h2 = 1e-4;
    const auto rp = raw_rs(resolve(a0, B + h2, L), L), rm = raw_rs(resolve(a0, B - h2, L), L);
    const cplx rB = (rp[0] - rm[0]) / (2. * h2), sB = (rp[1] - rm[1]) / (2. * h2);
    EXPECT_LT(std::abs(rB - D.r_B) / std::abs(D.r_B), 1e-5);
    EXPECT_LT(std::abs(sB - D.s_B) / std::abs(D.s_B), 1e-5);

    // d0 = r_B + s_B tau; tau_s = -8 pi^2 r_B; tau_r = 8 pi^2 s_B
    EXPECT_LT(std::abs(D.d0 - (D.r_B + D.s_B * L.tau())), 1e-12 * (1. + std::abs(D.d0)));
    EXPECT_LT(std::abs(D.tau_s + 8. * pi * pi * D.r_B), 1e-12 * std::abs(D.tau_s));
    EXPECT_LT(std::abs(D.tau_r - 8. * pi * pi * D.s_B), 1e-12 * std::abs(D.tau_r));
    cplx c0 = 0.;
    for (std::size_t k = 0; k < 2; ++k) {
        c0 -= wp(a0[k], L) * D.a_prime[k];
    }
    EXPECT_LT(std::abs(c0 - D.c0), 1e-12 * (1. + std::abs(c0)));
}

TEST(LameCurve, TauDerivativesNeverBothVanish)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-6., 6.);
    for (int n : {1, 2}) {
        const LatticeData L(cplx(0.3, 1.4));
        for (int k = 0; k < 10; ++k) {
            const auto y = solve_yn_from_B(cplx(u(rng), u(rng)), L, n);
            const auto D = curve_derivatives(y[0], L);
            EXPECT_GT(std::abs(D.tau_r) + std::abs(D.tau_s), 1e-6);
        }
    }
}

TEST(LameCurve, DerivativesRefuseBranchPoints)
{
    const LatticeData L(cplx(0., 1.3));
    const YnPoint y{Configuration::from_z({0.5}, L), L.e(1), L.tau()};
    EXPECT_THROW(curve_derivatives(y, L), degenerate_error);
}

TEST(LameCurve, WedgeIdentity)
{
    {
        const LatticeData L(cplx(0., 1.));
        const auto y = solve_yn_from_B(2. * L.e(1), L, 1);
        EXPECT_LT(wedge_check(y[0], L), 1e-5);
    }
    {
        const LatticeData L(cplx(0., 2.));
        const auto y = solve_yn_from_B(cplx(1.3, 0.4), L, 2);
        EXPECT_LT(wedge_check(y[0], L), 1e-5);
        EXPECT_LT(wedge_check(y[1], L), 1e-5);
    }
}

TEST(LameCurve, WedgeResidualIsSecondOrderInStep)
{
    const LatticeData L(cplx(0., 2.));
    const auto y = solve_yn_from_B(cplx(1.3, 0.4), L, 2);
    const double e1 = wedge_check(y[0], L, 2e-3), e2 = wedge_check(y[0], L, 4e-3), e4 = wedge_check(y[0], L, 8e-3);
    EXPECT_NEAR(e2 / e1, 4., 0.6);
    EXPECT_NEAR(e4 / e2, 4., 0.6);
}

TEST(LameCurve, MonodromyIsLocallyInjective)
{
    const LatticeData L(cplx(0.15, 1.2));
    const cplx B0(0.8, -0.5);
    const auto y0 = solve_yn_from_B(B0, L, 2);
    std::vector<std::array<cplx, 2>> rs;
    for (int k = 0; k < 8; ++k) {
        const cplx B = B0 + 1e-2 * std::polar(1., 2. * pi * k / 8.);
        rs.push_back(raw_rs(resolve(y0[0].config.zs(), B, L), L));
    }
    for (std::size_t i = 0; i < rs.size(); ++i) {
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
            EXPECT_GT(std::abs(rs[i][0] - rs[j][0]) + std::abs(rs[i][1] - rs[j][1]), 1e-5);
        }
    }
}

TEST(LameCurve, ContinuationFollowsTheSheet)
{
    const LatticeData L(cplx(0., 1.5));
    const auto y0 = solve_yn_from_B(cplx(1., 1.), L, 2);
    const auto y1 = continue_in_B(y0[0], cplx(4., -2.), L);
    EXPECT_LT(max_abs(yn_residuals(y1.config, L)), 1e-10);
    EXPECT_LT(std::abs(accessory_B(y1.config.zs(), L) - cplx(4., -2.)), 1e-10);
}

TEST(LameCurve, SolvesNearTheCusp)
{
    // Im tau = 0.05: wp is exponentially close to e_1 over most of the (1, tau) cell and |B| ~ 1e3
    const LatticeData L(cplx(0., 0.05));
    const cplx x = L.e(1) + cplx(0.7, 0.3);
    const cplx a = wp_inverse(x, L);
    EXPECT_LT(std::abs(wp(a, L) - x) / std::abs(x), 1e-12);
    EXPECT_LT(std::abs(a), 1.);
    for (int n : {1, 2}) {
        const cplx B = static_cast<double>((2 * n - 1) * n) * x;
        const auto y = solve_yn_from_B(B, L, n);
        EXPECT_LT(std::abs(accessory_B(y[0].config.zs(), L) - B) / std::abs(B), 1e-12) << "n = " << n;
        const auto D = curve_derivatives(y[0], L);
        const double h = 1e-3;
        const auto yp = solve_yn_from_B(B + h, L, n, y[0].config), ym = solve_yn_from_B(B - h, L, n, y[0].config);
        const cplx fd = (yp[0].config[0].z - ym[0].config[0].z) / (2. * h);
        EXPECT_LT(std::abs(fd - D.a_prime[0]) / std::abs(D.a_prime[0]), 1e-5) << "n = " << n;
    }
}
