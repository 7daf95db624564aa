#ifndef GTORUS_PREMODULAR_HPP
#define GTORUS_PREMODULAR_HPP

// Hecke's form Z_{r,s}(tau) = zeta(r + s tau) - r eta1 - s eta2 and the
// pre-modular forms Z^(n)_{r,s}(tau), n = 1, 2, 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "elliptic.hpp"
#include "lame_curve.hpp"

namespace gtorus
{

struct PreModularEval {
    double r = 0., s = 0.;
    cplx tau{};
    cplx Z{};
    cplx wp_rs{}, wp_prime_rs{};
    cplx value{};
    // d value / dr, d value / ds
    cplx d_r{}, d_s{};
};

namespace detail
{

inline bool in_half_lattice_real(double r, double s, double tol = 1e-12)
{
    return std::abs(2. * r - std::round(2. * r)) < tol && std::abs(2. * s - std::round(2. * s)) < tol;
}

inline void require_n(int n)
{
    if (n < 1 || n > 3) {
        std::ostringstream oss;
        oss << "pre-modular form Z^(" << n << ") is only available for n = 1, 2, 3";
        throw capability_error(oss.str());
    }
}

} // namespace detail

inline cplx hecke_Z(cplx r, cplx s, const LatticeData &L)
{
    return zeta_w(r + s * L.tau(), L) - r * L.eta1() - s * L.eta2();
}

// Complex (r, s) is allowed so that Z^(n) can be evaluated along Y_n.
inline PreModularEval premodular_eval(cplx r, cplx s, const LatticeData &L, int n)
{
    detail::require_n(n);
    const cplx z = r + s * L.tau();
    const cplx Z = hecke_Z(r, s, L);
    const cplx p = wp(z, L), dp = wp_prime(z, L), ddp = 6. * p * p - L.g2() / 2.;
    PreModularEval out;
    out.r = r.real();
    out.s = s.real();
    out.tau = L.tau();
    out.Z = Z;
    out.wp_rs = p;
    out.wp_prime_rs = dp;

    // partial derivatives of the value in Z, wp, wp'
    cplx fZ, fp, fdp;
    if (n == 1) {
        out.value = Z;
        fZ = 1.;
        fp = 0.;
        fdp = 0.;
    } else if (n == 2) {
        out.value = Z * Z * Z - 3. * p * Z - dp;
        fZ = 3. * Z * Z - 3. * p;
        fp = -3. * Z;
        fdp = -1.;
    } else {
        const cplx g2 = L.g2();
        const cplx Z2 = Z * Z, Z3 = Z2 * Z, Z4 = Z3 * Z;
        out.value = Z4 * Z2 - 15. * p * Z4 - 20. * dp * Z3 + (27. / 4. * g2 - 45. * p * p) * Z2 - 12. * p * dp * Z
                    - 5. / 4. * dp * dp;
        fZ = 6. * Z4 * Z - 60. * p * Z3 - 60. * dp * Z2 + 2. * (27. / 4. * g2 - 45. * p * p) * Z - 12. * p * dp;
        fp = -15. * Z4 - 90. * p * Z2 - 12. * dp * Z;
        fdp = -20. * Z3 - 12. * p * Z - 5. / 2. * dp;
    }
    const cplx tau = L.tau();
    out.d_r = fZ * (-p - L.eta1()) + fp * dp + fdp * ddp;
    out.d_s = fZ * (-p * tau - L.eta2()) + fp * dp * tau + fdp * ddp * tau;
    return out;
}

inline cplx z_n(cplx r, cplx s, const LatticeData &L, int n)
{
    return premodular_eval(r, s, L, n).value;
}

inline PreModularEval premodular_eval(double r, double s, const LatticeData &L, int n)
{
    if (detail::in_half_lattice_real(r, s)) {
        throw domain_error("pre-modular form evaluated at a point of (1/2)Z^2");
    }
    return premodular_eval(cplx(r), cplx(s), L, n);
}

inline cplx z_n(double r, double s, const LatticeData &L, int n)
{
    return premodular_eval(r, s, L, n).value;
}

// ---------------------------------------------------------------------------
// Zeros in tau.

struct TauZero {
    cplx tau{};
    double residual = 0.;
    // dZ^(n)/dtau at the zero
    cplx derivative{};
    int iterations = 0;
};

struct TauZeroOptions {
    double tol = 1e-10;
    double fd_step = 1e-7;
    int max_iter = 60;
};

inline TauZero find_tau_zero(double r, double s, cplx seed_tau, int n, TauZeroOptions opts = {})
{
    detail::require_n(n);
    if (detail::in_half_lattice_real(r, s)) {
        throw domain_error("find_tau_zero: (r, s) lies in (1/2)Z^2");
    }
    auto f = [&](cplx tau) { return z_n(r, s, LatticeData(tau), n); };
    auto df = [&](cplx tau) {
        const double h = opts.fd_step * std::max(1., std::abs(tau));
        return (f(tau + h) - f(tau - h)) / (2. * h);
    };
    cplx tau = seed_tau;
    if (!(tau.imag() > 0.)) {
        throw domain_error("find_tau_zero: seed must satisfy Im tau > 0");
    }
    cplx v = f(tau);
    for (int it = 0; it < opts.max_iter; ++it) {
        if (std::abs(v) < opts.tol) {
            return TauZero{tau, std::abs(v), df(tau), it};
        }
        const cplx d = df(tau);
        cplx step = -v / d;
        if (!std::isfinite(std::abs(step))) {
            break;
        }
        double lambda = 1.;
        bool accepted = false;
        for (int h = 0; h < 30; ++h, lambda /= 2.) {
            const cplx t = tau + lambda * step;
            if (t.imag() <= 1e-3 * std::max(1., std::abs(t))) {
                continue;
            }
            const cplx vt = f(t);
            if (std::abs(vt) < std::abs(v) || (h == 0 && std::abs(v) < 1e-6)) {
                tau = t;
                v = vt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    if (std::abs(v) < opts.tol) {
        return TauZero{tau, std::abs(v), df(tau), opts.max_iter};
    }
    std::ostringstream oss;
    oss << "find_tau_zero: no zero of Z^(" << n << ") found from seed " << seed_tau << " (last tau " << tau
        << ", |Z| = " << std::abs(v) << ")";
    throw convergence_error(oss.str(), {tau}, std::abs(v));
}

// ---------------------------------------------------------------------------
// Real zeros in (r, s).

struct RsZero {
    double r = 0., s = 0.;
    double residual = 0.;
    RsBox box = RsBox::none;
};

struct RsScanReport {
    std::vector<RsZero> zeros;
    int flagged_cells = 0;
    // flagged cells whose Newton polish did not converge
    int failed_cells = 0;
    // flagged cells whose polish converged onto (a neighbourhood of) (1/2)Z^2
    int rejected_cells = 0;
};

namespace detail
{

inline double half_lattice_distance(double r, double s)
{
    return std::max(std::abs(r - std::round(2. * r) / 2.), std::abs(s - std::round(2. * s) / 2.));
}

// Bounding square [r0, r0 + 1/2] x [0, 1/2] of each triangle.
inline double box_r0(RsBox box)
{
    return (box == RsBox::delta1 || box == RsBox::delta2) ? 0.5 : 0.;
}

inline bool near_triangle(RsBox box, double r, double s, double slack)
{
    switch (box) {
    case RsBox::delta0:
        return r + s >= 0.5 - slack;
    case RsBox::delta1:
        return r + s >= 1. - slack;
    case RsBox::delta2:
        return r + s <= 1. + slack;
    case RsBox::delta3:
        return r + s <= 0.5 + slack;
    default:
        return false;
    }
}

// Real Newton in (r, s) for the complex equation Z^(n) = 0.
inline bool polish_rs(double &r, double &s, const LatticeData &L, int n, double tol, double &residual)
{
    residual = HUGE_VAL;
    for (int it = 0; it < 50; ++it) {
        if (in_half_lattice_real(r, s, 1e-9)) {
            return false;
        }
        PreModularEval e;
        try {
            e = premodular_eval(cplx(r), cplx(s), L, n);
        } catch (const pole_error &) {
            return false;
        }
        const double res = std::abs(e.value);
        // once inside tol, keep stepping while the residual still drops
        if (res < tol && !(res < 0.5 * residual)) {
            residual = std::min(res, residual);
            return true;
        }
        if (res > 10. * residual && it > 3) {
            return false;
        }
        residual = res;
        Eigen::Matrix2d J;
        J << e.d_r.real(), e.d_s.real(), e.d_r.imag(), e.d_s.imag();
        const Eigen::Vector2d rhs(-e.value.real(), -e.value.imag());
        const Eigen::Vector2d step = J.fullPivLu().solve(rhs);
        if (!step.allFinite()) {
            return false;
        }
        const double cap = 0.05;
        const double scale = std::min(1., cap / std::max(1e-300, step.norm()));
        r += scale * step[0];
        s += scale * step[1];
    }
    residual = std::abs(premodular_eval(cplx(r), cplx(s), L, n).value);
    return residual < tol;
}

} // namespace detail

// All sign-change cells of Z^(n) over the triangle at grid x grid resolution, polished.
inline RsScanReport find_rs_zeros_report(const LatticeData &L, int n, RsBox box, int grid = 200, double tol = 1e-10)
{
    detail::require_n(n);
    if (box == RsBox::none) {
        throw domain_error("find_rs_zeros: box must be one of the four triangles");
    }
    if (grid < 2) {
        throw domain_error("find_rs_zeros: grid must be at least 2");
    }
    const double r0 = detail::box_r0(box), h = 0.5 / grid;
    const auto N = static_cast<std::size_t>(grid + 1);
    std::vector<cplx> val(N * N, cplx(NAN, NAN));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            const double r = r0 + static_cast<double>(i) * h, s = static_cast<double>(j) * h;
            if (!detail::near_triangle(box, r, s, 2. * h) || detail::in_half_lattice_real(r, s, 1e-12)) {
                continue;
            }
            val[i * N + j] = z_n(cplx(r), cplx(s), L, n);
        }
    }
    auto changes = [](double a, double b, double c, double d) {
        const double lo = std::min({a, b, c, d}), hi = std::max({a, b, c, d});
        return lo <= 0. && hi >= 0.;
    };
    RsScanReport rep;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        for (std::size_t j = 0; j + 1 < N; ++j) {
            const std::array<cplx, 4> c{val[i * N + j], val[(i + 1) * N + j], val[i * N + j + 1], val[(i + 1) * N + j + 1]};
            if (std::any_of(c.begin(), c.end(), [](cplx v) { return !std::isfinite(v.real()); })) {
                continue;
            }
            if (!changes(c[0].real(), c[1].real(), c[2].real(), c[3].real())
                || !changes(c[0].imag(), c[1].imag(), c[2].imag(), c[3].imag())) {
                continue;
            }
            double r = r0 + (static_cast<double>(i) + 0.5) * h, s = (static_cast<double>(j) + 0.5) * h, res = 0.;
            // Z^(n) vanishes at every point of (1/2)Z^2 and cancels catastrophically near Z^2;
            // cells touching one, or iterates drifting onto one, only see that zero.
            if (detail::half_lattice_distance(r, s) < 2.5 * h) {
                continue;
            }
            ++rep.flagged_cells;
            if (!detail::polish_rs(r, s, L, n, tol, res)) {
                if (detail::half_lattice_distance(r, s) < 1e-2) {
                    ++rep.rejected_cells;
                } else {
                    ++rep.failed_cells;
                }
                continue;
            }
            if (detail::half_lattice_distance(r, s) < 1e-4 || L.lattice_distance(r + s * L.tau()).first < 1e-2) {
                ++rep.rejected_cells;
                continue;
            }
            // reduce into [0,1]^2 and fold by sign into [0,1] x [0,1/2]
            const auto cr = detail::canonical_rs(r, s);
            r = cr[0].real();
            s = cr[1].real();
            if (rs_box(r, s) != box) {
                continue;
            }
            const bool dup = std::any_of(rep.zeros.begin(), rep.zeros.end(), [&](const RsZero &z) {
                return std::abs(z.r - r) < 1e-7 && std::abs(z.s - s) < 1e-7;
            });
            if (!dup) {
                rep.zeros.push_back(RsZero{r, s, res, box});
            }
        }
    }
    std::sort(rep.zeros.begin(), rep.zeros.end(), [](const RsZero &a, const RsZero &b) {
        return a.r != b.r ? a.r < b.r : a.s < b.s;
    });
    return rep;
}

inline std::vector<RsZero> find_rs_zeros(const LatticeData &L, int n, RsBox box, int grid = 200, double tol = 1e-10)
{
    return find_rs_zeros_report(L, n, box, grid, tol).zeros;
}

// Union over the four triangles.
inline RsScanReport find_rs_zeros_all(const LatticeData &L, int n, int grid = 200, double tol = 1e-10)
{
    RsScanReport all;
    for (auto box : {RsBox::delta0, RsBox::delta1, RsBox::delta2, RsBox::delta3}) {
        auto rep = find_rs_zeros_report(L, n, box, grid, tol);
        all.zeros.insert(all.zeros.end(), rep.zeros.begin(), rep.zeros.end());
        all.flagged_cells += rep.flagged_cells;
        all.failed_cells += rep.failed_cells;
        all.rejected_cells += rep.rejected_cells;
    }
    return all;
}

} // namespace gtorus

#endif
