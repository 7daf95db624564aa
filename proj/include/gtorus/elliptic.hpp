#ifndef GTORUS_ELLIPTIC_HPP
#define GTORUS_ELLIPTIC_HPP

// Weierstrass functions for the lattice Z + Z*tau.
//
// The modular parameter is first moved into the standard SL(2,Z) fundamental
// domain, tau' = gamma(tau), so that Z + Z*tau = lambda*(Z + Z*tau') with
// lambda = c*tau + d. Every function is then evaluated on the reduced lattice
// through nome expansions in Q = exp(2*pi*i*tau'), where |Q| <= exp(-pi*sqrt(3)),
// and mapped back by homogeneity:
//
//   wp(z)    = lambda^-2 wp'(z/lambda)
//   zeta(z)  = lambda^-1 zeta'(z/lambda)
//   sigma(z) = lambda     sigma'(z/lambda)
//
// Arguments are reduced modulo the lattice to the cell centred at the origin
// before any series is summed; quasi-periodicity of zeta and sigma is applied
// exactly.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace gtorus
{

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0., 1.};

// tau = exp(i*pi/3), exactly representable halves.
inline cplx hexagonal_tau()
{
    return {0.5, std::sqrt(3.) / 2.};
}

struct EllipticOptions {
    // Minimum distance from the lattice at which wp, wp', zeta are evaluated.
    double pole_guard = 1e-8;
};

namespace detail
{

// exp(2*pi*i*x)
inline cplx e2pi(cplx x)
{
    return std::exp(2. * pi * I * x);
}

// Lattice Z + Z*tau with tau in the standard fundamental domain. All series live here.
class reduced_lattice
{
public:
    reduced_lattice() = default;

    explicit reduced_lattice(cplx tau) : m_tau(tau)
    {
        const double b = tau.imag();
        m_Q = e2pi(tau);
        // Terms of the z-dependent series are bounded by exp(-pi*n*Im(tau)) for reduced z.
        const auto nterms = static_cast<std::size_t>(std::ceil(46. / (pi * b))) + 4u;
        m_c.resize(nterms + 1);
        cplx Qn = 1.;
        cplx s1 = 0., s3 = 0., s5 = 0.;
        for (std::size_t n = 1; n <= nterms; ++n) {
            Qn *= m_Q;
            m_c[n] = 1. / (1. - Qn);
            const double dn = static_cast<double>(n);
            const cplx t = Qn * m_c[n];
            s1 += dn * t;
            s3 += dn * dn * dn * t;
            s5 += dn * dn * dn * dn * dn * t;
        }
        m_eta1 = pi * pi / 3. * (1. - 24. * s1);
        m_g2 = 4. * std::pow(pi, 4) / 3. * (1. + 240. * s3);
        m_g3 = 8. * std::pow(pi, 6) / 27. * (1. - 504. * s5);
        // Jacobi theta_1 normalisation: theta_1'(0) / (2 q^{1/4}), q = exp(i*pi*tau).
        const cplx q = std::exp(pi * I * tau);
        m_theta_prime = 0.;
        for (int n = 0; n < 12; ++n) {
            const cplx term = std::pow(q, n * (n + 1)) * static_cast<double>(2 * n + 1);
            m_theta_prime += (n % 2 == 0) ? term : -term;
        }
        m_eta2 = 2. * zeta(tau / 2.);
    }

    cplx tau() const
    {
        return m_tau;
    }
    cplx eta1() const
    {
        return m_eta1;
    }
    cplx eta2() const
    {
        return m_eta2;
    }
    cplx g2() const
    {
        return m_g2;
    }
    cplx g3() const
    {
        return m_g3;
    }

    // Split w = w0 + m + n*tau with w0 in the centred cell.
    std::pair<cplx, std::array<double, 2>> reduce(cplx w) const
    {
        const double y = w.imag() / m_tau.imag();
        const double x = w.real() - y * m_tau.real();
        const double m = std::round(x), n = std::round(y);
        return {w - m - n * m_tau, {m, n}};
    }

    // Quasi-period eta(m + n*tau).
    cplx eta_of(double m, double n) const
    {
        return m * m_eta1 + n * m_eta2;
    }

    // Distance from a reduced w0 to the nearest lattice point, and that point.
    std::pair<double, cplx> nearest_point(cplx w0) const
    {
        double best = std::abs(w0);
        cplx arg = 0.;
        for (int m = -1; m <= 1; ++m) {
            for (int n = -1; n <= 1; ++n) {
                const cplx p = static_cast<double>(m) + static_cast<double>(n) * m_tau;
                const double d = std::abs(w0 - p);
                if (d < best) {
                    best = d;
                    arg = p;
                }
            }
        }
        return {best, arg};
    }

    // The following take w already in the centred cell.

    cplx zeta(cplx w) const
    {
        auto [sp, sm] = sums(w, 0);
        // sum_n c_n Q^n sin(2 pi n w)
        const cplx s = (sp - sm) / (2. * I);
        return m_eta1 * w + pi * cot_pi(w) + 4. * pi * s;
    }

    cplx wp(cplx w) const
    {
        auto [sp, sm] = sums(w, 1);
        const cplx c = (sp + sm) / 2.;
        return -m_eta1 + pi * pi * inv_sin2_pi(w) - 8. * pi * pi * c;
    }

    cplx wp_prime(cplx w) const
    {
        auto [sp, sm] = sums(w, 2);
        const cplx s = (sp - sm) / (2. * I);
        return -2. * pi * pi * pi * cot_pi(w) * inv_sin2_pi(w) + 16. * pi * pi * pi * s;
    }

    // log sigma(w), defined modulo 2*pi*i.
    cplx log_sigma(cplx w) const
    {
        // sigma(w) = exp(eta1 w^2/2) sin(pi w) S(pi w) / (pi T) where
        // S(v) = sum (-1)^n q^{n(n+1)} sin((2n+1)v)/sin(v), T = theta_1'(0)/(2q^{1/4}).
        const bool flip = w.imag() < 0.;
        const cplx v = pi * (flip ? -w : w);
        const cplx x = std::exp(2. * I * v);
        cplx S = 1.;
        for (int n = 1; n < 12; ++n) {
            const cplx ratio = std::exp(pi * I * m_tau * static_cast<double>(n * (n + 1)) - 2. * I * v * static_cast<double>(n))
                               * (1. - std::pow(x, 2 * n + 1)) / (1. - x);
            S += (n % 2 == 0) ? ratio : -ratio;
        }
        // For large Im(v): log sin(v) = -i v + log(1 - x) + log(i/2)
        const cplx log_sin = v.imag() < 20. ? std::log(std::sin(v)) : -I * v + std::log(1. - x) + std::log(I / 2.);
        cplx res = m_eta1 * w * w / 2. + log_sin + std::log(S) - std::log(pi * m_theta_prime);
        if (flip) {
            res += I * pi;
        }
        return res;
    }

private:
    // sum_n n^k c_n E(n(tau+w)) and sum_n n^k c_n E(n(tau-w)), c_n = 1/(1-Q^n).
    std::pair<cplx, cplx> sums(cplx w, int k) const
    {
        const cplx up = e2pi(m_tau + w), dn = e2pi(m_tau - w);
        cplx pu = 1., pd = 1., sp = 0., sm = 0.;
        for (std::size_t n = 1; n < m_c.size(); ++n) {
            pu *= up;
            pd *= dn;
            double f = 1.;
            for (int i = 0; i < k; ++i) {
                f *= static_cast<double>(n);
            }
            sp += f * m_c[n] * pu;
            sm += f * m_c[n] * pd;
            if (std::abs(pu) + std::abs(pd) < 1e-18 / (f + 1.)) {
                break;
            }
        }
        return {sp, sm};
    }

    // cot(pi w); far from the real axis via u = exp(2 pi i w) with |u| <= 1.
    static cplx cot_pi(cplx w)
    {
        if (std::abs(w.imag()) < 6.) {
            return 1. / std::tan(pi * w);
        }
        if (w.imag() < 0.) {
            return -cot_pi(-w);
        }
        const cplx u = e2pi(w);
        return I * (u + 1.) / (u - 1.);
    }

    static cplx inv_sin2_pi(cplx w)
    {
        if (std::abs(w.imag()) < 6.) {
            const cplx sn = std::sin(pi * w);
            return 1. / (sn * sn);
        }
        if (w.imag() < 0.) {
            w = -w;
        }
        const cplx u = e2pi(w);
        return -4. * u / ((u - 1.) * (u - 1.));
    }

    cplx m_tau{0., 1.};
    cplx m_Q{};
    std::vector<cplx> m_c;
    cplx m_eta1{}, m_eta2{}, m_g2{}, m_g3{};
    cplx m_theta_prime{};
};

} // namespace detail

// Everything derived from tau for the lattice Z + Z*tau. Immutable; safe to share across threads.
class LatticeData
{
public:
    explicit LatticeData(cplx tau, EllipticOptions opts = {}) : m_tau(tau), m_opts(opts)
    {
        if (!(tau.imag() > 0.) || !std::isfinite(tau.real()) || !std::isfinite(tau.imag())) {
            std::ostringstream oss;
            oss << "lattice parameter must satisfy Im(tau) > 0, got " << tau;
            throw domain_error(oss.str());
        }
        // Reduce tau into the standard fundamental domain, tracking gamma.
        std::int64_t a = 1, b = 0, c = 0, d = 1;
        cplx t = tau;
        for (int it = 0; it < 200; ++it) {
            const auto k = static_cast<std::int64_t>(std::round(t.real()));
            t -= static_cast<double>(k);
            a -= k * c;
            b -= k * d;
            if (std::norm(t) < 1. - 1e-14) {
                t = -1. / t;
                std::int64_t na = -c, nb = -d;
                c = a;
                d = b;
                a = na;
                b = nb;
            } else {
                break;
            }
        }
        m_gamma = {a, b, c, d};
        m_lambda = static_cast<double>(c) * tau + static_cast<double>(d);
        m_red = detail::reduced_lattice(t);

        const cplx li = 1. / m_lambda;
        const double da = static_cast<double>(a), db = static_cast<double>(b), dc = static_cast<double>(c),
                     dd = static_cast<double>(d);
        m_eta1 = li * (da * m_red.eta1() - dc * m_red.eta2());
        m_eta2 = li * (dd * m_red.eta2() - db * m_red.eta1());
        m_g2 = std::pow(li, 4) * m_red.g2();
        m_g3 = std::pow(li, 6) * m_red.g3();
        m_omega = {1., tau, 1. + tau};
        for (std::size_t k = 0; k < 3; ++k) {
            m_e[k] = wp_unguarded(m_omega[k] / 2.);
        }
    }

    cplx tau() const
    {
        return m_tau;
    }
    // omega(1) = 1, omega(2) = tau, omega(3) = 1 + tau.
    cplx omega(int k) const
    {
        return m_omega.at(static_cast<std::size_t>(k - 1));
    }
    cplx eta1() const
    {
        return m_eta1;
    }
    cplx eta2() const
    {
        return m_eta2;
    }
    cplx g2() const
    {
        return m_g2;
    }
    cplx g3() const
    {
        return m_g3;
    }
    // e(k) = wp(omega_k / 2)
    cplx e(int k) const
    {
        return m_e.at(static_cast<std::size_t>(k - 1));
    }
    const EllipticOptions &options() const
    {
        return m_opts;
    }
    // The element of SL(2,Z) used for evaluation, as {a, b, c, d}.
    const std::array<std::int64_t, 4> &reduction() const
    {
        return m_gamma;
    }
    cplx reduced_tau() const
    {
        return m_red.tau();
    }

    // Real coordinates (r, s) with z = r + s*tau.
    std::array<double, 2> real_coords(cplx z) const
    {
        const double s = z.imag() / m_tau.imag();
        return {z.real() - s * m_tau.real(), s};
    }

    // Representative of z in the cell r, s in [-1/2, 1/2).
    cplx reduce(cplx z) const
    {
        auto [r, s] = real_coords(z);
        return z - std::round(r) - std::round(s) * m_tau;
    }

    // Distance from z to the lattice and the nearest lattice point.
    std::pair<double, cplx> lattice_distance(cplx z) const
    {
        const cplx w = z / m_lambda;
        auto [w0, mn] = m_red.reduce(w);
        auto [dist, p] = m_red.nearest_point(w0);
        return {dist * std::abs(m_lambda), m_lambda * (p + mn[0] + mn[1] * m_red.tau())};
    }

    // Unchecked evaluators; the free functions below add the pole guard.
    cplx wp_unguarded(cplx z) const
    {
        auto [w0, mn] = m_red.reduce(z / m_lambda);
        (void)mn;
        return m_red.wp(w0) / (m_lambda * m_lambda);
    }
    cplx wp_prime_unguarded(cplx z) const
    {
        auto [w0, mn] = m_red.reduce(z / m_lambda);
        (void)mn;
        return m_red.wp_prime(w0) / (m_lambda * m_lambda * m_lambda);
    }
    cplx zeta_unguarded(cplx z) const
    {
        auto [w0, mn] = m_red.reduce(z / m_lambda);
        return (m_red.zeta(w0) + m_red.eta_of(mn[0], mn[1])) / m_lambda;
    }
    cplx log_sigma(cplx z) const
    {
        auto [w0, mn] = m_red.reduce(z / m_lambda);
        const double m = mn[0], n = mn[1];
        const cplx om = m + n * m_red.tau();
        cplx res = std::log(m_lambda) + m_red.eta_of(m, n) * (w0 + om / 2.) + m_red.log_sigma(w0);
        // sign (-1)^{m + n + mn}
        const auto parity = (static_cast<std::int64_t>(m) + static_cast<std::int64_t>(n)
                             + static_cast<std::int64_t>(m) * static_cast<std::int64_t>(n))
                            & 1;
        if (parity != 0) {
            res += I * pi;
        }
        return res;
    }

    void check_pole(cplx z, const char *fname) const
    {
        auto [dist, p] = lattice_distance(z);
        if (dist < m_opts.pole_guard) {
            std::ostringstream oss;
            oss << fname << ": argument " << z << " lies within " << m_opts.pole_guard << " of lattice point " << p;
            throw pole_error(oss.str(), p);
        }
    }

private:
    cplx m_tau;
    EllipticOptions m_opts;
    std::array<std::int64_t, 4> m_gamma{};
    cplx m_lambda{};
    detail::reduced_lattice m_red;
    cplx m_eta1{}, m_eta2{}, m_g2{}, m_g3{};
    std::array<cplx, 3> m_omega{};
    std::array<cplx, 3> m_e{};
};

inline LatticeData make_lattice(cplx tau, EllipticOptions opts = {})
{
    return LatticeData(tau, opts);
}

inline cplx wp(cplx z, const LatticeData &L)
{
    L.check_pole(z, "wp");
    return L.wp_unguarded(z);
}

inline cplx wp_prime(cplx z, const LatticeData &L)
{
    L.check_pole(z, "wp_prime");
    return L.wp_prime_unguarded(z);
}

// wp'' = 6 wp^2 - g2/2
inline cplx wp_second(cplx z, const LatticeData &L)
{
    const cplx p = wp(z, L);
    return 6. * p * p - L.g2() / 2.;
}

inline cplx zeta_w(cplx z, const LatticeData &L)
{
    L.check_pole(z, "zeta_w");
    return L.zeta_unguarded(z);
}

inline cplx sigma_w(cplx z, const LatticeData &L)
{
    if (z == cplx{0., 0.}) {
        return 0.;
    }
    auto [dist, p] = L.lattice_distance(z);
    (void)p;
    if (dist == 0.) {
        return 0.;
    }
    return std::exp(L.log_sigma(z));
}

// Residual of wp'^2 = 4 wp^3 - g2 wp - g3, scaled by 1 + |wp|^3.
inline double cubic_residual(cplx z, const LatticeData &L)
{
    const cplx p = wp(z, L), dp = wp_prime(z, L);
    return std::abs(dp * dp - (4. * p * p * p - L.g2() * p - L.g3())) / (1. + std::pow(std::abs(p), 3));
}

inline double legendre_residual(const LatticeData &L)
{
    return std::abs(L.tau() * L.eta1() - L.eta2() - 2. * pi * I);
}

} // namespace gtorus

#endif
