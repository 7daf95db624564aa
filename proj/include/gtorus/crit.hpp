#ifndef GTORUS_CRIT_HPP
#define GTORUS_CRIT_HPP

// Critical points of G_n: trivial ones (branch points of Y_n) and nontrivial ones
// (real monodromy data), the closed-form Hessian determinant at nontrivial points,
// the Jacobian of phi o a, degeneracy classification and Gamma_0(2) transport.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elliptic.hpp"
#include "lame_curve.hpp"
#include "numdiff.hpp"
#include "premodular.hpp"
#include "solvers.hpp"
#include "torus_green.hpp"

namespace gtorus
{

enum class CritKind { trivial, nontrivial };

enum class Degeneracy { nondegenerate, near_degenerate, degenerate, not_applicable };

inline const char *to_string(CritKind k)
{
    return k == CritKind::trivial ? "trivial" : "nontrivial";
}

inline const char *to_string(Degeneracy d)
{
    switch (d) {
    case Degeneracy::nondegenerate:
        return "nondegenerate";
    case Degeneracy::near_degenerate:
        return "near-degenerate";
    case Degeneracy::degenerate:
        return "degenerate";
    default:
        return "n/a";
    }
}

struct DegeneracyOptions {
    double degenerate_below = 1e-6;
    double near_below = 1e-4;
};

struct DegeneracyVerdict {
    Degeneracy verdict = Degeneracy::not_applicable;
    // |Im(tau_s conj(tau_r))| / (|tau_s|^2 + |tau_r|^2)
    double margin = std::numeric_limits<double>::quiet_NaN();
};

struct CriticalPointRecord {
    Configuration config;
    CritKind kind = CritKind::trivial;
    cplx B{};
    MonodromyData rs;
    double det_closed = std::numeric_limits<double>::quiet_NaN();
    double det_numeric = std::numeric_limits<double>::quiet_NaN();
    double c_p = std::numeric_limits<double>::quiet_NaN();
    cplx tau_r{}, tau_s{};
    // tau_s / tau_r; infinite when tau_r = 0
    cplx tau_ratio{};
    DegeneracyVerdict degenerate;
    double gradient_residual = 0.;
};

// ---------------------------------------------------------------------------
// Closed forms.

struct PhiJacobian {
    // -(4|c0 - d0 eta1|^2 / Im tau) Im(tau + 2 pi i / (c0/d0 - eta1))
    double via_c0d0 = 0.;
    // -(1 / 4 pi^2 Im tau) |tau_r|^2 Im(tau_s / tau_r)
    double via_tau = 0.;
};

inline PhiJacobian jacobian_phi(const YnPoint &, const CurveDerivatives &D, const LatticeData &L)
{
    const double b = L.tau().imag();
    const cplx w = D.c0 - D.d0 * L.eta1();
    PhiJacobian out;
    if (D.d0 != cplx(0.)) {
        out.via_c0d0 = -4. * std::norm(w) / b * std::imag(L.tau() + 2. * pi * I / (D.c0 / D.d0 - L.eta1()));
    } else {
        out.via_c0d0 = -4. * std::norm(w) - 8. * pi / b * std::real(D.d0 * std::conj(w));
    }
    out.via_tau = -std::imag(D.tau_s * std::conj(D.tau_r)) / (4. * pi * pi * b);
    return out;
}

// phi(B) = -4 pi sum_j grad G(a_j(B)) as a map R^2 -> R^2, B = u + i v; det of its
// central-difference Jacobian (Y_n re-solved at each stencil point).
inline double jacobian_phi_fd(const YnPoint &y, const LatticeData &L, double h = 1e-5)
{
    const auto a0 = y.config.zs();
    auto phi = [&](const Eigen::VectorXd &x) {
        const cplx B(x[0], x[1]);
        auto res = detail::polish_at_B(a0, B, L);
        if (!res.converged) {
            throw convergence_error("jacobian_phi_fd: Y_n solve failed", res.x, res.residual);
        }
        Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
        for (auto z : res.x) {
            const auto g = green_gradient(z, L);
            v[0] -= 4. * pi * g[0];
            v[1] -= 4. * pi * g[1];
        }
        return v;
    };
    const Eigen::VectorXd x0 = (Eigen::VectorXd(2) << y.B.real(), y.B.imag()).finished();
    return central_jacobian(phi, x0, FdOptions{h, true}).determinant();
}

struct HessianClosedForm {
    double det = 0.;
    double c_p = 0.;
};

// det D^2 G_n = ((-1)^n n^2 / (4 (2 pi)^{2n+2} Im tau)) c_p |tau_r|^2 Im(tau_s / tau_r),
// c_p = |det of the principal (n-1) minor of (dg^j/da_k)|^2 / |a_n'(B)|^2 after moving
// the largest |a_k'(B)| to position n.
inline HessianClosedForm hessian_closed_form(const YnPoint &y, const CurveDerivatives &D, const LatticeData &L)
{
    if (is_branch_point(y, L)) {
        throw domain_error("hessian_closed_form: configuration is a branch point of Y_n (trivial critical point)");
    }
    const auto n = static_cast<int>(y.config.size());
    auto a = y.config.zs();
    auto ap = D.a_prime;
    std::size_t k = 0;
    for (std::size_t j = 1; j < ap.size(); ++j) {
        if (std::abs(ap[j]) > std::abs(ap[k])) {
            k = j;
        }
    }
    if (std::abs(ap[k]) == 0.) {
        throw degenerate_error("hessian_closed_form: a'(B) vanishes identically");
    }
    std::swap(a[k], a.back());
    std::swap(ap[k], ap.back());
    cplx minor = 1.;
    if (n > 1) {
        const Eigen::MatrixXcd Dg = yn_partials(a, L);
        minor = Dg.leftCols(n - 1).determinant();
    }
    HessianClosedForm out;
    out.c_p = std::norm(minor) / std::norm(ap.back());
    const double sign = (n % 2 == 0) ? 1. : -1.;
    const double pref = sign * n * n / (4. * std::pow(2. * pi, 2 * n + 2) * L.tau().imag());
    out.det = pref * out.c_p * std::imag(D.tau_s * std::conj(D.tau_r));
    return out;
}

// The n = 2 determinant written through Q = B^2 + 3 eta1 B - 3/2 g2 and l_2(B):
// c_p |Q|^2 / ((2 pi)^4 |l_2(B)| Im tau) * Im(tau - 6 pi i B / Q).
inline double hessian_n2_example(cplx B, double c_p, const LatticeData &L)
{
    const cplx Q = B * B + 3. * L.eta1() * B - 1.5 * L.g2();
    const double b = L.tau().imag();
    return c_p * std::norm(Q) / (std::pow(2. * pi, 4) * std::abs(lame_poly(B, L, 2)) * b)
           * std::imag(L.tau() - 6. * pi * I * B / Q);
}

inline DegeneracyVerdict classify_degeneracy(cplx tau_r, cplx tau_s, DegeneracyOptions opts = {})
{
    DegeneracyVerdict v;
    const double scale = std::norm(tau_r) + std::norm(tau_s);
    if (scale == 0.) {
        v.margin = 0.;
        v.verdict = Degeneracy::degenerate;
        return v;
    }
    v.margin = std::abs(std::imag(tau_s * std::conj(tau_r))) / scale;
    if (v.margin < opts.degenerate_below) {
        v.verdict = Degeneracy::degenerate;
    } else if (v.margin < opts.near_below) {
        v.verdict = Degeneracy::near_degenerate;
    } else {
        v.verdict = Degeneracy::nondegenerate;
    }
    return v;
}

inline DegeneracyVerdict classify_degeneracy(const CriticalPointRecord &rec, DegeneracyOptions opts = {})
{
    if (rec.kind == CritKind::trivial) {
        return {};
    }
    return classify_degeneracy(rec.tau_r, rec.tau_s, opts);
}

// ---------------------------------------------------------------------------
// Records.

// Fill every derived field of a record from its configuration.
inline CriticalPointRecord make_record(const Configuration &c, CritKind kind, const LatticeData &L,
                                       DegeneracyOptions dopts = {})
{
    CriticalPointRecord rec;
    rec.config = c;
    rec.kind = kind;
    const auto a = c.zs();
    rec.B = accessory_B(a, L);
    const YnPoint y{c, rec.B, L.tau()};
    rec.rs = monodromy_rs(y, L);
    rec.gradient_residual = gradient_norm(gn_gradient(c, L));
    rec.det_numeric = gn_hessian(c, L).determinant();
    if (kind == CritKind::nontrivial) {
        const auto D = curve_derivatives(y, L);
        rec.tau_r = D.tau_r;
        rec.tau_s = D.tau_s;
        rec.tau_ratio = D.tau_r == cplx(0.) ? cplx(std::numeric_limits<double>::infinity(), 0.) : D.tau_s / D.tau_r;
        const auto hc = hessian_closed_form(y, D, L);
        rec.det_closed = hc.det;
        rec.c_p = hc.c_p;
        rec.degenerate = classify_degeneracy(D.tau_r, D.tau_s, dopts);
    }
    return rec;
}

struct TrivialReport {
    std::vector<CriticalPointRecord> records;
    // l_n has (numerically) repeated roots
    bool multiple_roots = false;
    std::vector<std::string> failures;
};

namespace detail
{

inline void push_unique(std::vector<CriticalPointRecord> &out, CriticalPointRecord rec, const LatticeData &L)
{
    for (const auto &r : out) {
        if (r.config.same_multiset(rec.config, L, 1e-7)) {
            return;
        }
    }
    out.push_back(std::move(rec));
}

// Symmetric configurations {p_1, -p_1, ..., p_m, -p_m} u S with S a set of half-periods.
inline std::vector<std::vector<cplx>> symmetric_branch_points(const LatticeData &L, int n, int nseeds, unsigned seed)
{
    std::vector<std::vector<cplx>> found;
    const std::array<cplx, 3> halves{L.omega(1) / 2., L.omega(2) / 2., L.omega(3) / 2.};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.02, 0.98);
    for (int m = n / 2; m >= 0; --m) {
        const int h = n - 2 * m;
        if (h > 3) {
            continue;
        }
        for (unsigned mask = 0; mask < 8u; ++mask) {
            if (std::popcount(mask) != h) {
                continue;
            }
            std::vector<cplx> fixed;
            for (unsigned i = 0; i < 3u; ++i) {
                if (mask & (1u << i)) {
                    fixed.push_back(halves[i]);
                }
            }
            const auto mm = static_cast<std::size_t>(m);
            auto expand = [&](const std::vector<cplx> &p) {
                std::vector<cplx> a(p);
                for (auto v : p) {
                    a.push_back(-v);
                }
                a.insert(a.end(), fixed.begin(), fixed.end());
                return a;
            };
            if (m == 0) {
                found.push_back(fixed);
                continue;
            }
            auto system = [&](const std::vector<cplx> &p) {
                const auto a = expand(p);
                const auto g = yn_residuals_raw(a, L);
                const Eigen::MatrixXcd Dg = yn_partials(a, L);
                const auto me = static_cast<Eigen::Index>(mm);
                Eigen::VectorXcd F(me);
                Eigen::MatrixXcd J(me, me);
                for (Eigen::Index j = 0; j < me; ++j) {
                    F[j] = g[static_cast<std::size_t>(j)];
                    for (Eigen::Index i = 0; i < me; ++i) {
                        J(j, i) = Dg(j, i) - Dg(j, me + i);
                    }
                }
                return std::make_pair(F, J);
            };
            for (int t = 0; t < nseeds; ++t) {
                std::vector<cplx> p(mm);
                for (auto &v : p) {
                    v = U(rng) + U(rng) * L.tau();
                }
                auto res = complex_newton(system, p, [&](const std::vector<cplx> &v) {
                    return admissible_configuration(expand(v), L, 1e-5);
                });
                if (!res.converged) {
                    continue;
                }
                auto a = expand(res.x);
                const auto cfg = Configuration::from_z(a, L);
                const bool dup = std::any_of(found.begin(), found.end(), [&](const std::vector<cplx> &f) {
                    return f.size() == a.size() && Configuration::from_z(f, L).same_multiset(cfg, L, 1e-6);
                });
                if (!dup) {
                    found.push_back(std::move(a));
                }
            }
        }
    }
    return found;
}

} // namespace detail

struct TrivialOptions {
    // seeds per symmetric pattern (n >= 3)
    int seeds = 48;
    unsigned rng_seed = 7u;
    DegeneracyOptions degeneracy{};
};

inline TrivialReport find_trivial(const LatticeData &L, int n, TrivialOptions opts = {})
{
    if (n < 1) {
        throw domain_error("find_trivial: n must be positive");
    }
    TrivialReport rep;
    auto add = [&](const std::vector<cplx> &a) {
        detail::push_unique(rep.records, make_record(Configuration::from_z(a, L), CritKind::trivial, L, opts.degeneracy), L);
    };
    if (n <= 2) {
        // l_1 = prod (B - e_k), l_2 = (B^2 - 3 g2) prod (B + 3 e_k): take the roots from the factors
        struct Candidate {
            cplx B;
            std::vector<cplx> a;
        };
        std::vector<Candidate> cands;
        for (int k = 1; k <= 3; ++k) {
            if (n == 1) {
                cands.push_back({L.e(k), {L.omega(k) / 2.}});
            } else {
                std::vector<cplx> a;
                for (int j = 1; j <= 3; ++j) {
                    if (j != k) {
                        a.push_back(L.omega(j) / 2.);
                    }
                }
                cands.push_back({-3. * L.e(k), a});
            }
        }
        if (n == 2) {
            const cplx w = std::sqrt(3. * L.g2());
            cands.push_back({w, {}});
            cands.push_back({-w, {}});
        }
        double scale = 0.;
        for (const auto &c : cands) {
            scale = std::max(scale, std::abs(c.B));
        }
        for (std::size_t i = 0; i < cands.size(); ++i) {
            for (std::size_t j = i + 1; j < cands.size(); ++j) {
                if (std::abs(cands[i].B - cands[j].B) < 1e-10 * (1. + scale)) {
                    rep.multiple_roots = true;
                }
            }
        }
        for (const auto &c : cands) {
            try {
                if (!c.a.empty()) {
                    add(c.a);
                } else {
                    // wp''(p) = 0, i.e. wp(p) = B/6 with B^2 = 3 g2
                    const cplx p = wp_inverse(c.B / 6., L);
                    add({p, -p});
                }
            } catch (const std::exception &e) {
                std::ostringstream oss;
                oss << "root B = " << c.B << ": " << e.what();
                rep.failures.push_back(oss.str());
            }
        }
    } else {
        for (const auto &a : detail::symmetric_branch_points(L, n, opts.seeds, opts.rng_seed)) {
            try {
                add(a);
            } catch (const std::exception &e) {
                rep.failures.emplace_back(e.what());
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Nontrivial critical points.

struct UnresolvedZero {
    double r = 0., s = 0.;
    std::string reason;
};

struct NontrivialReport {
    std::vector<CriticalPointRecord> records;
    std::vector<UnresolvedZero> unresolved;
    int grid = 0;
    int flagged_cells = 0;
    int failed_cells = 0;
    int rejected_cells = 0;
};

struct NontrivialOptions {
    int grid = 200;
    double zero_tol = 1e-10;
    int seeds = 64;
    unsigned rng_seed = 99u;
    DegeneracyOptions degeneracy{};
};

namespace detail
{

// Newton on {g^j = 0, sum a = r + s tau, sum zeta(a) = r eta1 + s eta2} (overdetermined by one).
inline NewtonResult polish_critical(const std::vector<cplx> &seed, double r, double s, const LatticeData &L)
{
    const cplx A = r + s * L.tau(), Zt = r * L.eta1() + s * L.eta2();
    auto system = [&](const std::vector<cplx> &a) {
        const auto n = static_cast<Eigen::Index>(a.size());
        Eigen::VectorXcd F(n + 1);
        Eigen::MatrixXcd J(n + 1, n);
        const auto g = yn_residuals_raw(a, L);
        if (n > 1) {
            J.topRows(n - 1) = yn_partials(a, L);
        }
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            F[j] = g[static_cast<std::size_t>(j)];
        }
        cplx sa = 0., sz = 0.;
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto z = a[static_cast<std::size_t>(k)];
            sa += z;
            sz += zeta_w(z, L);
            J(n - 1, k) = 1.;
            J(n, k) = -wp(z, L);
        }
        F[n - 1] = sa - A;
        F[n] = sz - Zt;
        return std::make_pair(F, J);
    };
    return complex_newton(system, seed, [&](const std::vector<cplx> &a) { return admissible_configuration(a, L); });
}

} // namespace detail

// The unique configuration with real monodromy data (r, s), if it can be found.
inline std::optional<std::vector<cplx>> recover_configuration(double r, double s, const LatticeData &L, int n,
                                                              int seeds = 64, unsigned rng_seed = 99u)
{
    const cplx A = r + s * L.tau(), Zt = r * L.eta1() + s * L.eta2();
    if (n == 1) {
        auto res = detail::polish_critical({A}, r, s, L);
        if (res.converged) {
            return res.x;
        }
        return std::nullopt;
    }
    for (int attempt = 0; attempt < 3; ++attempt) {
        const auto cands = yn_points_with_sum(A, L, n, seeds << attempt, rng_seed + static_cast<unsigned>(attempt));
        std::vector<std::pair<double, std::vector<cplx>>> scored;
        for (const auto &a : cands) {
            cplx sz = 0.;
            for (auto z : a) {
                sz += zeta_w(z, L);
            }
            scored.emplace_back(std::abs(sz - Zt), a);
        }
        std::sort(scored.begin(), scored.end(), [](const auto &u, const auto &v) { return u.first < v.first; });
        for (const auto &[score, a] : scored) {
            if (score > 1e-4 * (1. + std::abs(Zt))) {
                break;
            }
            auto res = detail::polish_critical(a, r, s, L);
            if (res.converged && res.residual < 1e-10) {
                return res.x;
            }
        }
    }
    return std::nullopt;
}

inline NontrivialReport find_nontrivial(const LatticeData &L, int n, NontrivialOptions opts = {})
{
    if (n < 1 || n > 3) {
        std::ostringstream oss;
        oss << "find_nontrivial: needs Z^(n), available for n = 1, 2, 3 only (got n = " << n << ")";
        throw capability_error(oss.str());
    }
    NontrivialReport rep;
    rep.grid = opts.grid;
    const auto scan = find_rs_zeros_all(L, n, opts.grid, opts.zero_tol);
    rep.flagged_cells = scan.flagged_cells;
    rep.failed_cells = scan.failed_cells;
    rep.rejected_cells = scan.rejected_cells;
    for (const auto &z : scan.zeros) {
        const auto a = recover_configuration(z.r, z.s, L, n, opts.seeds, opts.rng_seed);
        if (!a) {
            rep.unresolved.push_back({z.r, z.s, "no configuration recovered after seed sweep"});
            continue;
        }
        try {
            const auto cfg = Configuration::from_z(*a, L);
            if (cfg.is_symmetric(L, 1e-7)) {
                rep.unresolved.push_back({z.r, z.s, "recovered configuration is a branch point"});
                continue;
            }
            auto rec = make_record(cfg, CritKind::nontrivial, L, opts.degeneracy);
            auto neg = make_record(cfg.negated(L), CritKind::nontrivial, L, opts.degeneracy);
            detail::push_unique(rep.records, std::move(rec), L);
            detail::push_unique(rep.records, std::move(neg), L);
        } catch (const std::exception &e) {
            rep.unresolved.push_back({z.r, z.s, e.what()});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Gamma_0(2) transport.

struct Gamma {
    long a = 1, b = 0, c = 0, d = 1;
};

inline bool in_gamma0_2(const Gamma &g)
{
    return g.a * g.d - g.b * g.c == 1 && g.c % 2 == 0;
}

inline cplx apply_gamma(const Gamma &g, cplx tau)
{
    return (static_cast<double>(g.a) * tau + static_cast<double>(g.b)) / (static_cast<double>(g.c) * tau + static_cast<double>(g.d));
}

// z -> z / (c tau + d) on the lattice of gamma(tau); every field recomputed there.
inline CriticalPointRecord gamma_transport(const CriticalPointRecord &rec, const Gamma &g, const LatticeData &L,
                                           const LatticeData &L_tilde, DegeneracyOptions dopts = {})
{
    if (!in_gamma0_2(g)) {
        std::ostringstream oss;
        oss << "gamma_transport: [[" << g.a << "," << g.b << "],[" << g.c << "," << g.d << "]] is not in Gamma_0(2)";
        throw domain_error(oss.str());
    }
    if (std::abs(apply_gamma(g, L.tau()) - L_tilde.tau()) > 1e-12 * (1. + std::abs(L_tilde.tau()))) {
        throw domain_error("gamma_transport: L_tilde is not the lattice of gamma(tau)");
    }
    const cplx lambda = static_cast<double>(g.c) * L.tau() + static_cast<double>(g.d);
    std::vector<cplx> zs;
    for (auto z : rec.config.zs()) {
        zs.push_back(z / lambda);
    }
    return make_record(Configuration::from_z(zs, L_tilde), rec.kind, L_tilde, dopts);
}

} // namespace gtorus

#endif
