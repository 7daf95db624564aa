#ifndef GTORUS_CLI_VERIFY_HPP
#define GTORUS_CLI_VERIFY_HPP

// Identity-verification suite behind `gtorus verify`.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include <gtorus/crit.hpp>

#include "common.hpp"

namespace gtorus::cli
{

struct VerifyOptions {
    bool full = false;
    unsigned seed = 20240601u;
    double tol_legendre = 1e-10;
    double tol_cubic = 1e-8;
    double tol_sigma = 1e-8;
    double tol_special = 1e-10;
    double tol_wedge = 1e-5;
    double tol_hessian = 1e-6;
    double tol_closed_form = 1e-5;
    double tol_premodular = 1e-8;
    // Added to g2 inside the cubic check only; a sensitivity probe.
    double tamper_g2 = 0.;
};

struct CheckResult {
    std::string name;
    double target = 0.;
    double measured = 0.;
    bool pass = false;
    std::string detail;
};

namespace detail
{

// tau uniformly in F_0 = {0 <= Re tau <= 1, |tau - 1/2| >= 1/2} with Im tau <= im_max.
inline cplx random_f0(std::mt19937_64 &rng, double im_max = 4.)
{
    std::uniform_real_distribution<double> ux(0., 1.), uy(1e-3, im_max);
    for (;;) {
        const cplx t(ux(rng), uy(rng));
        if (std::abs(t - 0.5) >= 0.5) {
            return t;
        }
    }
}

inline cplx random_cell_point(std::mt19937_64 &rng, cplx tau)
{
    std::uniform_real_distribution<double> u(0.05, 0.95);
    return u(rng) + u(rng) * tau;
}

inline CheckResult make_check(std::string name, double target, double measured, std::string detail = {})
{
    return {std::move(name), target, measured, measured < target, std::move(detail)};
}

} // namespace detail

inline std::vector<CheckResult> run_verify(const VerifyOptions &o)
{
    std::vector<CheckResult> out;
    std::mt19937_64 rng(o.seed);
    auto guarded = [&](const std::string &name, double target, const std::function<CheckResult()> &f) {
        try {
            out.push_back(f());
        } catch (const std::exception &e) {
            out.push_back({name, target, std::numeric_limits<double>::infinity(), false, e.what()});
        }
    };

    guarded("legendre", o.tol_legendre, [&] {
        double worst = 0.;
        for (int i = 0; i < 100; ++i) {
            worst = std::max(worst, legendre_residual(LatticeData(detail::random_f0(rng))));
        }
        return detail::make_check("legendre", o.tol_legendre, worst, "100 tau in F0, Im tau <= 4");
    });

    guarded("cubic-ode", o.tol_cubic, [&] {
        double worst = 0.;
        for (int i = 0; i < 100; ++i) {
            const LatticeData L(detail::random_f0(rng));
            const cplx z = detail::random_cell_point(rng, L.tau());
            const cplx p = wp(z, L), dp = wp_prime(z, L);
            const cplx g2 = L.g2() + o.tamper_g2;
            worst = std::max(worst, std::abs(dp * dp - (4. * p * p * p - g2 * p - L.g3())) / (1. + std::pow(std::abs(p), 3)));
        }
        return detail::make_check("cubic-ode", o.tol_cubic, worst, "100 random (z, tau)");
    });

    guarded("branch-values", o.tol_cubic, [&] {
        double worst = 0.;
        for (int i = 0; i < 20; ++i) {
            const LatticeData L(detail::random_f0(rng));
            const double scale = 1. + std::abs(L.e(1)) + std::abs(L.e(2)) + std::abs(L.e(3));
            worst = std::max(worst, std::abs(L.e(1) + L.e(2) + L.e(3)) / scale);
            const cplx x = detail::random_cell_point(rng, L.tau());
            const cplx lhs = 4. * x * x * x - L.g2() * x - L.g3();
            const cplx rhs = 4. * (x - L.e(1)) * (x - L.e(2)) * (x - L.e(3));
            worst = std::max(worst, std::abs(lhs - rhs) / (1. + std::abs(lhs)));
        }
        return detail::make_check("branch-values", o.tol_cubic, worst, "e1+e2+e3 = 0 and cubic factorisation");
    });

    guarded("sigma-law", o.tol_sigma, [&] {
        double worst = 0.;
        for (int i = 0; i < 100; ++i) {
            const LatticeData L(detail::random_f0(rng, 2.));
            const cplx z = detail::random_cell_point(rng, L.tau());
            for (int k = 1; k <= 2; ++k) {
                const cplx w = L.omega(k), eta = k == 1 ? L.eta1() : L.eta2();
                const cplx lhs = sigma_w(z + w, L), rhs = -std::exp(eta * (z + w / 2.)) * sigma_w(z, L);
                worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
            }
        }
        return detail::make_check("sigma-law", o.tol_sigma, worst, "100 random (z, tau), both periods");
    });

    guarded("special-values", o.tol_special, [&] {
        const LatticeData Li(cplx(0., 1.)), Lh(hexagonal_tau());
        const double m = std::max({std::abs(Li.eta1() - pi), std::abs(Li.g3()), std::abs(Lh.g2())});
        return detail::make_check("special-values", o.tol_special, m, "eta1(i) = pi, g3(i) = 0, g2(hex) = 0");
    });

    guarded("wedge", o.tol_wedge, [&] {
        double worst = 0.;
        const std::vector<std::pair<cplx, int>> pts{{cplx(0., 1.), 1}, {cplx(0.3, 1.2), 1}, {cplx(0., 2.), 2},
                                                    {cplx(0.45, 1.2), 2}};
        for (auto [tau, n] : pts) {
            const LatticeData L(tau);
            const cplx B = n == 1 ? 2. * L.e(1) : cplx(1.3, 0.4);
            const auto y = solve_yn_from_B(B, L, n);
            worst = std::max(worst, wedge_check(y[0], L));
        }
        return detail::make_check("wedge", o.tol_wedge, worst, "Y1 and Y2 samples, h = 1e-4");
    });

    guarded("hessian-fd", o.tol_hessian, [&] {
        double worst = 0.;
        for (int i = 0; i < (o.full ? 20 : 5); ++i) {
            const LatticeData L(detail::random_f0(rng, 2.));
            std::vector<cplx> zs;
            for (int j = 0; j < 2; ++j) {
                zs.push_back(detail::random_cell_point(rng, L.tau()));
            }
            const auto c = Configuration::from_z(zs, L);
            const Eigen::MatrixXd H = gn_hessian(c, L), F = gn_hessian_fd(c, L);
            worst = std::max(worst, (H - F).norm() / H.norm());
        }
        return detail::make_check("hessian-fd", o.tol_hessian, worst, "analytic vs finite-difference Hessian of G_2");
    });

    guarded("n1-closed-form", o.tol_closed_form, [&] {
        const LatticeData L(cplx(0., 1.));
        double worst = 0.;
        for (int k = 1; k <= 3; ++k) {
            const auto c = Configuration::from_z({L.omega(k) / 2.}, L);
            const cplx B = L.e(k);
            const double closed = -std::norm(L.eta1() + B) / (4. * pi * pi * L.tau().imag())
                                  * std::imag(L.tau() - 2. * pi * I / (L.eta1() + B));
            const double fd = gn_hessian_fd(c, L).determinant();
            worst = std::max(worst, std::abs(closed - fd) / std::abs(fd));
        }
        return detail::make_check("n1-closed-form", o.tol_closed_form, worst, "tau = i, half-periods");
    });

    if (o.full) {
        guarded("n2-closed-form", o.tol_closed_form, [&] {
            const LatticeData L(cplx(0.45, 1.2));
            const auto rep = find_nontrivial(L, 2, NontrivialOptions{120});
            if (rep.records.empty()) {
                return CheckResult{"n2-closed-form", o.tol_closed_form, std::numeric_limits<double>::infinity(), false,
                                   "no nontrivial point found at tau = 0.45+1.2i"};
            }
            double worst = 0.;
            for (const auto &r : rep.records) {
                worst = std::max(worst, std::abs(r.det_closed - r.det_numeric) / std::abs(r.det_numeric));
            }
            return detail::make_check("n2-closed-form", o.tol_closed_form, worst, "tau = 0.45+1.2i, discovered pair");
        });

        guarded("premodular-along-Y2", o.tol_premodular, [&] {
            const LatticeData L(cplx(0., 2.));
            std::uniform_real_distribution<double> u(-8., 8.);
            double worst = 0.;
            for (int i = 0; i < 20; ++i) {
                const auto y = solve_yn_from_B(cplx(u(rng), u(rng)), L, 2);
                const auto md = monodromy_rs(y[0], L);
                worst = std::max(worst, std::abs(z_n(md.raw_r, md.raw_s, L, 2)));
            }
            return detail::make_check("premodular-along-Y2", o.tol_premodular, worst, "20 random B, tau = 2i");
        });

        guarded("hexagonal-pair", 1e-8, [&] {
            const LatticeData L(hexagonal_tau());
            const auto rep = find_nontrivial(L, 1, NontrivialOptions{120});
            const auto want = Configuration::from_z({(1. + L.tau()) / 3.}, L);
            double m = rep.records.size() == 2 ? 0. : 1.;
            bool hit = false;
            for (const auto &r : rep.records) {
                hit = hit || r.config.same_multiset(want, L, 1e-8);
            }
            m = hit ? m : 1.;
            return detail::make_check("hexagonal-pair", 1e-8, m, "exactly +-(1+tau)/3 at tau = exp(i pi/3)");
        });

        guarded("rectangular-n2", 1e-8, [&] {
            const LatticeData L(cplx(0., 2.));
            const auto t = find_trivial(L, 2);
            const auto nt = find_nontrivial(L, 2, NontrivialOptions{120});
            double m = (t.records.size() == 5 && nt.records.empty() && nt.unresolved.empty()) ? 0. : 1.;
            for (const auto &r : t.records) {
                if (std::abs(r.det_numeric) < 1e-6) {
                    m = 1.;
                }
            }
            return detail::make_check("rectangular-n2", 1e-8, m, "tau = 2i: 5 trivial, 0 nontrivial, all |det| > 1e-6");
        });
    }
    return out;
}

inline nlohmann::json verify_json(const std::vector<CheckResult> &checks, const VerifyOptions &o)
{
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["tool_version"] = tool_version;
    j["level"] = o.full ? "full" : "quick";
    j["seed"] = o.seed;
    j["checks"] = nlohmann::json::array();
    bool ok = true;
    for (const auto &c : checks) {
        j["checks"].push_back({{"name", c.name}, {"target", c.target}, {"measured", c.measured}, {"pass", c.pass}, {"detail", c.detail}});
        ok = ok && c.pass;
    }
    j["pass"] = ok;
    return j;
}

} // namespace gtorus::cli

#endif
