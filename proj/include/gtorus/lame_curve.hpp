#ifndef GTORUS_LAME_CURVE_HPP
#define GTORUS_LAME_CURVE_HPP

// The curve Y_n of configurations a = {a_1, ..., a_n} with
//
//   g^j(a) = sum_{k != j} ( zeta(a_j - a_k) + zeta(a_k) - zeta(a_j) ) = 0,   j < n,
//
// its accessory parameter B_a = (2n - 1) sum_j wp(a_j), the Lame polynomial
// (n <= 2), the B-parametrisation a(B) with its derivative, and the monodromy
// data (r, s) defined by
//
//   r + s tau = sum_j a_j,    r eta1 + s eta2 = sum_j zeta(a_j).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "elliptic.hpp"
#include "solvers.hpp"
#include "torus_green.hpp"

namespace gtorus
{

struct YnPoint {
    Configuration config;
    cplx B{};
    cplx tau{};
};

// Which of the four open triangles of [0,1] x [0,1/2] holds a real (r, s).
enum class RsBox { none = -1, delta0 = 0, delta1 = 1, delta2 = 2, delta3 = 3 };

inline RsBox rs_box(double r, double s)
{
    if (r > 0. && s > 0. && r < 0.5 && s < 0.5 && r + s > 0.5) {
        return RsBox::delta0;
    }
    if (r > 0.5 && r < 1. && s > 0. && s < 0.5) {
        if (r + s > 1.) {
            return RsBox::delta1;
        }
        if (r + s < 1.) {
            return RsBox::delta2;
        }
        return RsBox::none;
    }
    if (r > 0. && s > 0. && r + s < 0.5) {
        return RsBox::delta3;
    }
    return RsBox::none;
}

struct MonodromyData {
    // Canonical representative under (r, s) ~ +-(r, s) mod Z^2.
    cplx r{}, s{};
    // Values computed from the representatives actually stored in the configuration.
    cplx raw_r{}, raw_s{};
    bool is_real = false;
    // (r, s) in (1/2) Z^2: the configuration is a branch point of Y_n.
    bool branch = false;
    RsBox box = RsBox::none;
    // max residual of the two defining equations
    double residual = 0.;
};

struct CurveDerivatives {
    std::vector<cplx> a_prime;
    cplx c0{}, d0{};
    cplx r_B{}, s_B{};
    cplx tau_r{}, tau_s{};
};

// ---------------------------------------------------------------------------
// Residuals and partial derivatives.

inline std::vector<cplx> yn_residuals_raw(const std::vector<cplx> &a, const LatticeData &L)
{
    const std::size_t n = a.size();
    std::vector<cplx> za(n);
    for (std::size_t j = 0; j < n; ++j) {
        za[j] = zeta_w(a[j], L);
    }
    std::vector<cplx> g(n > 0 ? n - 1 : 0, 0.);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != j) {
                g[j] += zeta_w(a[j] - a[k], L) + za[k] - za[j];
            }
        }
    }
    return g;
}

inline std::vector<cplx> yn_residuals(const Configuration &c, const LatticeData &L)
{
    c.validate(L);
    return yn_residuals_raw(c.zs(), L);
}

// (n-1) x n matrix of dg^j/da_k.
inline Eigen::MatrixXcd yn_partials(const std::vector<cplx> &a, const LatticeData &L)
{
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(std::max<Eigen::Index>(n - 1, 0), n);
    std::vector<cplx> pa(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        pa[j] = wp(a[j], L);
    }
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            if (k == j) {
                continue;
            }
            const cplx pd = wp(a[uj] - a[uk], L);
            D(j, k) += pd - pa[uk];
            D(j, j) += pa[uj] - pd;
        }
    }
    return D;
}

inline cplx accessory_B(const std::vector<cplx> &a, const LatticeData &L)
{
    cplx acc = 0.;
    for (auto z : a) {
        acc += wp(z, L);
    }
    return static_cast<double>(2 * a.size() - 1) * acc;
}

// ---------------------------------------------------------------------------
// Lame polynomial.

// Coefficients (ascending) of l_1(B) = 4B^3 - g2 B - g3 and
// l_2(B) = (B^2 - 3 g2)(B^3 - 9/4 g2 B + 27/4 g3).
inline std::vector<cplx> lame_coefficients(const LatticeData &L, int n)
{
    const cplx g2 = L.g2(), g3 = L.g3();
    if (n == 1) {
        return {-g3, -g2, 0., 4.};
    }
    if (n == 2) {
        return {-81. / 4. * g2 * g3, 27. / 4. * g2 * g2, 27. / 4. * g3, -21. / 4. * g2, 0., 1.};
    }
    std::ostringstream oss;
    oss << "no explicit Lame polynomial for n = " << n << "; use is_branch_point on solved Y_n points instead";
    throw capability_error(oss.str());
}

inline cplx lame_poly(cplx B, const LatticeData &L, int n)
{
    const cplx g2 = L.g2(), g3 = L.g3();
    if (n == 1) {
        return 4. * B * B * B - g2 * B - g3;
    }
    if (n == 2) {
        return (B * B - 3. * g2) * (B * B * B - 9. / 4. * g2 * B + 27. / 4. * g3);
    }
    return poly_eval(lame_coefficients(L, n), B);
}

inline std::vector<cplx> lame_roots(const LatticeData &L, int n)
{
    return poly_roots(lame_coefficients(L, n));
}

// ---------------------------------------------------------------------------
// Inverse of wp.

// Some a with wp(a) = x; if y is given, additionally wp'(a) = y (requires y^2 = 4x^3 - g2 x - g3).
inline cplx wp_inverse(cplx x, const LatticeData &L, std::optional<cplx> y = {})
{
    // wp(a) = x has the two solutions +-a; y only selects the sign at the end.
    // Residual relative to |x| so large values near the cusp still converge.
    const double sx = 1. / (1. + std::abs(x));
    auto system = [&](const std::vector<cplx> &v) {
        Eigen::VectorXcd F(1);
        Eigen::MatrixXcd J(1, 1);
        F[0] = sx * (L.wp_unguarded(v[0]) - x);
        J(0, 0) = sx * L.wp_prime_unguarded(v[0]);
        return std::make_pair(F, J);
    };
    auto away_from_lattice = [&](const std::vector<cplx> &v) { return L.lattice_distance(v[0]).first > 1e-6; };

    std::vector<cplx> seeds;
    for (int k = 1; k <= 3; ++k) {
        const cplx ek = L.e(k);
        if (std::abs(x - ek) < 1e-3 * (1. + std::abs(ek))) {
            const cplx p2 = 6. * ek * ek - L.g2() / 2.;
            cplx delta = std::sqrt(2. * (x - ek) / p2);
            if (y && std::abs(p2 * delta - *y) > std::abs(-p2 * delta - *y)) {
                delta = -delta;
            }
            seeds.push_back(L.omega(k) / 2. + delta);
        }
    }
    {
        // seed grid over the cell of the reduced basis lambda*(1, tau'); the (1, tau) cell is a sliver near the cusp
        const auto &g = L.reduction();
        const cplx lambda = static_cast<double>(g[2]) * L.tau() + static_cast<double>(g[3]);
        const cplx w2 = lambda * L.reduced_tau();
        constexpr int grid = 12;
        std::vector<std::pair<double, cplx>> scored;
        for (int i = 0; i < grid; ++i) {
            for (int j = 0; j < grid; ++j) {
                const cplx a = (i + 0.5) / grid * lambda + (j + 0.5) / grid * w2;
                double score = std::abs(L.wp_unguarded(a) - x);
                if (y) {
                    score += std::abs(L.wp_prime_unguarded(a) - *y) / (1. + std::abs(*y));
                }
                scored.emplace_back(score, a);
            }
        }
        std::partial_sort(scored.begin(), scored.begin() + 4, scored.end(),
                          [](const auto &u, const auto &v) { return u.first < v.first; });
        for (int i = 0; i < 4; ++i) {
            seeds.push_back(scored[static_cast<std::size_t>(i)].second);
        }
    }
    NewtonResult best;
    best.residual = HUGE_VAL;
    for (auto s : seeds) {
        auto res = complex_newton(system, {s}, away_from_lattice, NewtonOptions{1e-13, 1e-9, 100, 40});
        if (res.residual < best.residual) {
            best = res;
        }
        if (res.converged) {
            break;
        }
    }
    if (!best.converged) {
        std::ostringstream oss;
        oss << "wp_inverse: no convergence for x = " << x;
        throw convergence_error(oss.str(), best.x, best.residual);
    }
    cplx a = L.reduce(best.x[0]);
    if (y && std::abs(L.wp_prime_unguarded(a) - *y) > std::abs(-L.wp_prime_unguarded(a) - *y)) {
        a = -a;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Solving Y_n at prescribed B.

namespace detail
{

inline bool admissible_configuration(const std::vector<cplx> &a, const LatticeData &L, double guard = 1e-6)
{
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (L.lattice_distance(a[j]).first < guard) {
            return false;
        }
        for (std::size_t k = j + 1; k < a.size(); ++k) {
            if (L.lattice_distance(a[j] - a[k]).first < guard) {
                return false;
            }
        }
    }
    return true;
}

// F = (g^1, ..., g^{n-1}, B_a - B), J = d F / d a.
inline std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> yn_at_B_system(const std::vector<cplx> &a, cplx B, const LatticeData &L)
{
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::VectorXcd F(n);
    Eigen::MatrixXcd J(n, n);
    // rows scaled by the natural size of zeta ~ |B|^(1/2) and wp ~ |B|, so the Newton tolerance is relative
    const double sg = 1. / (1. + std::sqrt(std::abs(B))), sb = 1. / (1. + std::abs(B));
    const auto g = yn_residuals_raw(a, L);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        F[j] = sg * g[static_cast<std::size_t>(j)];
    }
    if (n > 1) {
        J.topRows(n - 1) = sg * yn_partials(a, L);
    }
    F[n - 1] = sb * (accessory_B(a, L) - B);
    const double w = static_cast<double>(2 * n - 1);
    for (Eigen::Index k = 0; k < n; ++k) {
        J(n - 1, k) = sb * w * wp_prime(a[static_cast<std::size_t>(k)], L);
    }
    return {F, J};
}

inline NewtonResult polish_at_B(const std::vector<cplx> &seed, cplx B, const LatticeData &L, NewtonOptions opts = {})
{
    return complex_newton([&](const std::vector<cplx> &a) { return yn_at_B_system(a, B, L); }, seed,
                          [&](const std::vector<cplx> &a) { return admissible_configuration(a, L); }, opts);
}

} // namespace detail

// Y_n points with prescribed sum a_1 + ... + a_n = target. Unknowns a_1..a_{n-1};
// deterministic pseudo-random seeds. Returns distinct solutions found.
inline std::vector<std::vector<cplx>> yn_points_with_sum(cplx target, const LatticeData &L, int n, int nseeds = 64,
                                                         unsigned seed = 12345u, std::size_t max_solutions = 0)
{
    std::vector<std::vector<cplx>> found;
    if (n < 2) {
        found.push_back({target});
        return found;
    }
    const auto m = static_cast<std::size_t>(n - 1);
    auto expand = [&](const std::vector<cplx> &x) {
        std::vector<cplx> a(x);
        cplx last = target;
        for (auto v : x) {
            last -= v;
        }
        a.push_back(last);
        return a;
    };
    auto system = [&](const std::vector<cplx> &x) {
        const auto a = expand(x);
        const auto g = yn_residuals_raw(a, L);
        const Eigen::MatrixXcd D = yn_partials(a, L);
        const auto mm = static_cast<Eigen::Index>(m);
        Eigen::VectorXcd F(mm);
        Eigen::MatrixXcd J(mm, mm);
        for (Eigen::Index j = 0; j < mm; ++j) {
            F[j] = g[static_cast<std::size_t>(j)];
            for (Eigen::Index k = 0; k < mm; ++k) {
                J(j, k) = D(j, k) - D(j, mm);
            }
        }
        return std::make_pair(F, J);
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0., 1.);
    for (int t = 0; t < nseeds; ++t) {
        std::vector<cplx> x(m);
        for (auto &v : x) {
            v = U(rng) + U(rng) * L.tau();
        }
        auto res = complex_newton(system, x, [&](const std::vector<cplx> &v) { return detail::admissible_configuration(expand(v), L, 1e-5); });
        if (!res.converged) {
            continue;
        }
        auto a = expand(res.x);
        const auto cfg = Configuration::from_z(a, L);
        bool dup = false;
        for (const auto &f : found) {
            if (Configuration::from_z(f, L).same_multiset(cfg, L, 1e-6)) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            found.push_back(std::move(a));
            if (max_solutions != 0 && found.size() >= max_solutions) {
                break;
            }
        }
    }
    return found;
}

// Follow a Y_n point from y0.B to B along a straight path, predictor from a'(B).
YnPoint continue_in_B(const YnPoint &y0, cplx B, const LatticeData &L);

namespace detail
{

// Analytic starting configurations for n = 1, 2.
inline std::vector<cplx> analytic_seed(cplx B, const LatticeData &L, int n)
{
    if (n == 1) {
        return {wp_inverse(B, L)};
    }
    // n = 2: wp'(a1) = -wp'(a2) and wp(a1) + wp(a2) = B/3, so wp(a1), wp(a2) solve
    // X^2 - S X + S^2 - g2/4 = 0 with S = B/3.
    const cplx S = B / 3.;
    const cplx disc = std::sqrt(S * S - 4. * (S * S - L.g2() / 4.));
    const cplx x1 = (S + disc) / 2., x2 = (S - disc) / 2.;
    if (std::abs(x1 - x2) < 1e-9 * (1. + std::abs(S))) {
        const cplx a = wp_inverse(x1, L);
        return {a, -a};
    }
    const cplx y1 = std::sqrt(4. * x1 * x1 * x1 - L.g2() * x1 - L.g3());
    const cplx a1 = wp_inverse(x1, L, y1);
    const cplx a2 = wp_inverse(x2, L, -y1);
    return {a1, a2};
}

} // namespace detail

// Solve Y_n at accessory parameter B. Returns {a, -a}. With an empty seed, n <= 2
// uses the analytic seeds and n >= 3 continues from a Y_n point of prescribed sum.
inline std::array<YnPoint, 2> solve_yn_from_B(cplx B, const LatticeData &L, int n, const Configuration &seed = {})
{
    if (n < 1) {
        throw domain_error("solve_yn_from_B: n must be positive");
    }
    std::vector<cplx> start;
    if (seed.size() == static_cast<std::size_t>(n)) {
        start = seed.zs();
    } else if (seed.size() != 0) {
        throw domain_error("solve_yn_from_B: seed has the wrong number of points");
    } else if (n <= 2) {
        start = detail::analytic_seed(B, L, n);
    } else {
        const auto pts = yn_points_with_sum(0.2137 + 0.3311 * L.tau(), L, n, 200, 2024u, 1);
        if (pts.empty()) {
            throw convergence_error("solve_yn_from_B: could not locate a starting point on Y_n");
        }
        YnPoint y0{Configuration::from_z(pts.front(), L), accessory_B(pts.front(), L), L.tau()};
        const auto y = continue_in_B(y0, B, L);
        start = y.config.zs();
    }
    auto res = detail::polish_at_B(start, B, L);
    if (!res.converged) {
        std::ostringstream oss;
        oss << "solve_yn_from_B: Newton did not converge at B = " << B << " (residual " << res.residual << ")";
        throw convergence_error(oss.str(), res.x, res.residual);
    }
    YnPoint plus{Configuration::from_z(res.x, L), B, L.tau()};
    return {plus, YnPoint{plus.config.negated(L), B, L.tau()}};
}

// ---------------------------------------------------------------------------
// Monodromy data.

inline std::array<cplx, 2> raw_rs(const std::vector<cplx> &a, const LatticeData &L)
{
    cplx A = 0., Z = 0.;
    for (auto z : a) {
        A += z;
        Z += zeta_w(z, L);
    }
    const cplx two_pi_i = 2. * pi * I;
    return {(L.eta2() * A - L.tau() * Z) / (-two_pi_i), (L.eta1() * A - Z) / two_pi_i};
}

namespace detail
{

inline double frac(double x)
{
    double f = x - std::floor(x);
    return f >= 1. ? 0. : f;
}

// Representative of +-(r, s) mod Z^2 with Re r, Re s in [0, 1) and Re s <= 1/2 when possible.
inline std::array<cplx, 2> canonical_rs(cplx r, cplx s)
{
    auto red = [](cplx r0, cplx s0) {
        return std::array<cplx, 2>{cplx(frac(r0.real()), r0.imag()), cplx(frac(s0.real()), s0.imag())};
    };
    auto p = red(r, s), m = red(-r, -s);
    auto key = [](const std::array<cplx, 2> &v) {
        return std::array<double, 4>{v[1].real(), v[0].real(), v[1].imag(), v[0].imag()};
    };
    constexpr double eps = 1e-12;
    auto ks = key(p), km = key(m);
    for (std::size_t i = 0; i < 4; ++i) {
        if (std::abs(ks[i] - km[i]) > eps) {
            return ks[i] < km[i] ? p : m;
        }
    }
    return p;
}

inline bool in_half_lattice(cplx r, cplx s, double tol)
{
    auto near_half = [tol](cplx v) {
        return std::abs(v.imag()) < tol && std::abs(2. * v.real() - std::round(2. * v.real())) < 2. * tol;
    };
    return near_half(r) && near_half(s);
}

} // namespace detail

inline MonodromyData monodromy_rs(const YnPoint &y, const LatticeData &L, double real_tol = 1e-9)
{
    const auto a = y.config.zs();
    const auto rs = raw_rs(a, L);
    MonodromyData md;
    md.raw_r = rs[0];
    md.raw_s = rs[1];
    cplx A = 0., Z = 0.;
    for (auto z : a) {
        A += z;
        Z += zeta_w(z, L);
    }
    md.residual = std::max(std::abs(rs[0] + rs[1] * L.tau() - A), std::abs(rs[0] * L.eta1() + rs[1] * L.eta2() - Z));
    const auto c = detail::canonical_rs(rs[0], rs[1]);
    md.r = c[0];
    md.s = c[1];
    md.is_real = std::abs(md.r.imag()) < real_tol && std::abs(md.s.imag()) < real_tol;
    md.branch = detail::in_half_lattice(md.r, md.s, 1e-7);
    if (md.is_real) {
        md.box = rs_box(md.r.real(), md.s.real());
    }
    return md;
}

inline bool is_branch_point(const YnPoint &y, const LatticeData &L, double tol = 1e-7)
{
    return y.config.is_symmetric(L, tol);
}

// ---------------------------------------------------------------------------
// Derivatives along Y_n with B as local coordinate.

inline CurveDerivatives curve_derivatives(const YnPoint &y, const LatticeData &L)
{
    if (is_branch_point(y, L)) {
        throw degenerate_error("curve_derivatives: a = -a, B is not a local coordinate at a branch point of Y_n");
    }
    const auto a = y.config.zs();
    const auto n = static_cast<Eigen::Index>(a.size());
    const auto sys = detail::yn_at_B_system(a, y.B, L);
    const Eigen::MatrixXcd &M = sys.second;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    // same row scale as yn_at_B_system
    rhs[n - 1] = 1. / (1. + std::abs(y.B));
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
    lu.setThreshold(1e-11);
    if (lu.rank() < n) {
        throw degenerate_error("curve_derivatives: singular system for a'(B); the point is (numerically) a branch point of Y_n");
    }
    const Eigen::VectorXcd ap = lu.solve(rhs);
    CurveDerivatives D;
    D.a_prime.assign(ap.data(), ap.data() + n);
    for (Eigen::Index k = 0; k < n; ++k) {
        D.d0 += ap[k];
        D.c0 -= wp(a[static_cast<std::size_t>(k)], L) * ap[k];
    }
    const cplx two_pi_i = 2. * pi * I;
    D.s_B = (D.c0 - D.d0 * L.eta1()) / (-two_pi_i);
    D.r_B = (D.c0 * L.tau() - D.d0 * L.eta2()) / two_pi_i;
    D.tau_r = 4. * pi * I * (D.c0 - D.d0 * L.eta1());
    D.tau_s = -8. * pi * pi * D.r_B;
    return D;
}

inline YnPoint continue_in_B(const YnPoint &y0, cplx B, const LatticeData &L)
{
    YnPoint cur = y0;
    double t = 0., dt = 0.05;
    const cplx B0 = y0.B;
    int halvings = 0;
    while (t < 1.) {
        const double tn = std::min(1., t + dt);
        const cplx Bn = B0 + tn * (B - B0);
        std::vector<cplx> pred = cur.config.zs();
        try {
            const auto D = curve_derivatives(cur, L);
            for (std::size_t k = 0; k < pred.size(); ++k) {
                pred[k] += D.a_prime[k] * (Bn - cur.B);
            }
        } catch (const degenerate_error &) {
            // near a branch point: corrector only
        }
        auto res = detail::polish_at_B(pred, Bn, L, NewtonOptions{1e-12, 1e-10, 12, 10});
        const bool ok = res.converged && Configuration::from_z(res.x, L).same_multiset(cur.config, L, 0.5 + 10. * std::abs(Bn - cur.B)) ;
        if (!ok) {
            dt /= 2.;
            if (++halvings > 40) {
                std::ostringstream oss;
                oss << "continue_in_B: path to B = " << B << " stalled at t = " << t;
                throw convergence_error(oss.str(), cur.config.zs());
            }
            continue;
        }
        cur = YnPoint{Configuration::from_z(res.x, L), Bn, L.tau()};
        t = tn;
        dt = std::min(0.2, dt * 1.5);
    }
    return cur;
}

// Relative deviation of the finite-difference Jacobian det d(r,s)/d(tau,B) from 1/(8 pi^2).
inline double wedge_check(const YnPoint &y, const LatticeData &L, double h = 1e-4)
{
    const auto a0 = y.config.zs();
    auto rs_at = [&](cplx tau, cplx B) {
        const LatticeData Lt(tau, L.options());
        auto res = detail::polish_at_B(a0, B, Lt);
        if (!res.converged) {
            std::ostringstream oss;
            oss << "wedge_check: Y_n solve failed at tau = " << tau << ", B = " << B;
            throw convergence_error(oss.str(), res.x, res.residual);
        }
        return raw_rs(res.x, Lt);
    };
    const auto tp = rs_at(y.tau + h, y.B), tm = rs_at(y.tau - h, y.B);
    const auto bp = rs_at(y.tau, y.B + h), bm = rs_at(y.tau, y.B - h);
    const cplx r_tau = (tp[0] - tm[0]) / (2. * h), s_tau = (tp[1] - tm[1]) / (2. * h);
    const cplx r_B = (bp[0] - bm[0]) / (2. * h), s_B = (bp[1] - bm[1]) / (2. * h);
    const cplx det = r_tau * s_B - r_B * s_tau;
    const double target = 1. / (8. * pi * pi);
    return std::abs(det - target) / target;
}

} // namespace gtorus

#endif
