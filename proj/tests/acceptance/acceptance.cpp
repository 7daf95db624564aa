// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtorus/crit.hpp>

using namespace gtorus;

namespace
{

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void check(bool ok, const std::string &what)
    {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string &what) { lines.push_back("info " + what); }
};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
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

int failures = 0;

void criterion(int id, const std::string &title, double budget_s, const std::function<void(Outcome &)> &body)
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception &e) {
        o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.) {
        o.check(secs < budget_s, "runtime " + num(secs) + " s < " + num(budget_s) + " s");
    }
    for (const auto &l : o.lines) {
        std::printf("    %s\n", l.c_str());
    }
    std::printf("%s criterion %d: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
}

} // namespace

int main()
{
    criterion(1, "Legendre relation on 100 random tau in F0", 5., [](Outcome &o) {
        std::mt19937_64 rng(101);
        double worst = 0.;
        for (int k = 0; k < 100; ++k) {
            const LatticeData L(random_f0(rng, 4.));
            worst = std::max(worst, std::abs(L.tau() * L.eta1() - L.eta2() - 2. * pi * I));
        }
        o.check(worst < 1e-10, "max |tau eta1 - eta2 - 2 pi i| = " + num(worst) + " < 1e-10");
    });

    criterion(2, "cubic identity and sigma transformation law", 0., [](Outcome &o) {
        std::mt19937_64 rng(102);
        double cubic = 0., sig = 0.;
        for (int k = 0; k < 100; ++k) {
            const LatticeData L(random_f0(rng, 3.));
            const cplx z = random_cell(rng, L.tau());
            cubic = std::max(cubic, cubic_residual(z, L));
            for (int j = 1; j <= 2; ++j) {
                const cplx w = L.omega(j), eta = j == 1 ? L.eta1() : L.eta2();
                const cplx rhs = -std::exp(eta * (z + w / 2.)) * sigma_w(z, L);
                sig = std::max(sig, std::abs(sigma_w(z + w, L) - rhs) / std::abs(rhs));
            }
        }
        o.check(cubic < 1e-8, "cubic residual (relative) " + num(cubic) + " < 1e-8");
        o.check(sig < 1e-8, "sigma law (relative) " + num(sig) + " < 1e-8");
    });

    criterion(3, "special values at tau = i and exp(i pi/3)", 0., [](Outcome &o) {
        const LatticeData sq(cplx(0., 1.)), hex(hexagonal_tau());
        const double d1 = std::abs(sq.eta1() - pi), d2 = std::abs(sq.g3()), d3 = std::abs(hex.g2());
        o.check(d1 < 1e-10, "|eta1(i) - pi| = " + num(d1));
        o.check(d2 < 1e-10, "|g3(i)| = " + num(d2));
        o.check(d3 < 1e-10, "|g2(exp(i pi/3))| = " + num(d3));
    });

    criterion(4, "n = 1, tau = i: three nondegenerate half-periods, closed form vs FD Hessian", 10., [](Outcome &o) {
        const LatticeData L(cplx(0., 1.));
        const auto triv = find_trivial(L, 1);
        const auto nontriv = find_nontrivial(L, 1);
        o.check(triv.records.size() == 3 && nontriv.records.empty() && nontriv.unresolved.empty(),
                std::to_string(triv.records.size()) + " trivial + " + std::to_string(nontriv.records.size()) + " nontrivial points");
        for (const auto &r : triv.records) {
            const double b = L.tau().imag();
            const double closed = -std::norm(L.eta1() + r.B) / (4. * pi * pi * b) * std::imag(L.tau() - 2. * pi * I / (L.eta1() + r.B));
            const double fd = gn_hessian_fd(r.config, L).determinant();
            o.check(std::abs(fd) > 1e-6, "p = " + num(r.config[0].z.real()) + "+" + num(r.config[0].z.imag()) + "i, det " + num(fd));
            o.check(rel(closed, fd) < 1e-5, "closed form vs FD: " + num(rel(closed, fd)) + " < 1e-5");
        }
    });

    criterion(5, "n = 1, hexagonal torus: the pair +-(1+tau)/3, Z = 0, c_p", 0., [](Outcome &o) {
        const LatticeData L(hexagonal_tau());
        const auto rep = find_nontrivial(L, 1);
        const cplx p = (1. + L.tau()) / 3.;
        const auto plus = Configuration::from_z({p}, L), minus = plus.negated(L);
        bool has_plus = false, has_minus = false;
        for (const auto &r : rep.records) {
            has_plus = has_plus || r.config.same_multiset(plus, L, 1e-10);
            has_minus = has_minus || r.config.same_multiset(minus, L, 1e-10);
        }
        o.check(rep.records.size() == 2 && has_plus && has_minus,
                "found " + std::to_string(rep.records.size()) + " nontrivial points, pair +-(1+tau)/3 present");
        const double z = std::abs(hecke_Z(1. / 3., 1. / 3., L));
        o.check(z < 1e-10, "|Z_{1/3,1/3}| = " + num(z) + " < 1e-10");
        if (rep.records.empty()) {
            return;
        }
        const auto &r = rep.records.front();
        const double wp2 = std::norm(wp_prime(p, L)), b = L.tau().imag();
        const double target = wp2 / (64. * pi * pi * pi * pi * b);
        o.check(rel(r.c_p, target) < 1e-8,
                "c_p via the minor/a_n' expression = " + num(r.c_p) + " vs |wp'(p)|^2/(64 pi^4 Im tau) = " + num(target));
        o.info("c_p / |wp'(p)|^2 - 1 = " + num(r.c_p / wp2 - 1.) +
               "; the quoted value equals n^2/(4 (2 pi)^(2n+2) Im tau) * c_p, rel. diff " +
               num(rel(r.c_p / (4. * std::pow(2. * pi, 4) * b), target)));
        o.info("det closed " + num(r.det_closed) + " vs numeric " + num(r.det_numeric));
    });

    criterion(6, "wedge identity dtau^dB = 8 pi^2 dr^ds on Y1 and Y2", 60., [](Outcome &o) {
        std::mt19937_64 rng(106);
        std::uniform_real_distribution<double> u(-4., 4.);
        const std::vector<cplx> taus{cplx(0., 1.), cplx(0.3, 1.2), cplx(0.45, 1.2), cplx(0.1, 0.9), hexagonal_tau()};
        double worst = 0.;
        int done = 0;
        for (int n : {1, 2}) {
            for (cplx tau : taus) {
                const LatticeData L(tau);
                for (;;) {
                    const auto y = solve_yn_from_B(cplx(u(rng), u(rng)), L, n);
                    if (is_branch_point(y[0], L, 1e-3)) {
                        continue;
                    }
                    worst = std::max(worst, wedge_check(y[0], L, 1e-5));
                    ++done;
                    break;
                }
            }
        }
        o.check(done == 10 && worst < 1e-5, std::to_string(done) + " points, h = 1e-5, max relative deviation from 1/(8 pi^2) " + num(worst));
    });

    criterion(7, "Z^(2) vanishes along Y2 at 20 sampled B", 0., [](Outcome &o) {
        std::mt19937_64 rng(107);
        std::uniform_real_distribution<double> u(-6., 6.);
        const std::vector<cplx> taus{cplx(0.45, 1.2), cplx(0., 2.), cplx(0.2, 0.8), hexagonal_tau()};
        double worst = 0.;
        for (int k = 0; k < 20; ++k) {
            const LatticeData L(taus[static_cast<std::size_t>(k) % taus.size()]);
            const auto y = solve_yn_from_B(cplx(u(rng), u(rng)), L, 2);
            const auto md = monodromy_rs(y[0], L);
            worst = std::max(worst, std::abs(z_n(md.raw_r, md.raw_s, L, 2)));
        }
        o.check(worst < 1e-8, "max |Z^(2)| = " + num(worst) + " < 1e-8");
    });

    criterion(8, "n = 2, tau = 2i: exactly five trivial nondegenerate points", 30., [](Outcome &o) {
        const LatticeData L(cplx(0., 2.));
        const auto triv = find_trivial(L, 2);
        const auto nontriv = find_nontrivial(L, 2);
        o.check(triv.records.size() == 5 && nontriv.records.empty() && nontriv.unresolved.empty(),
                std::to_string(triv.records.size()) + " trivial + " + std::to_string(nontriv.records.size()) + " nontrivial points");
        double min_det = std::numeric_limits<double>::infinity();
        for (const auto &r : triv.records) {
            min_det = std::min(min_det, std::abs(r.det_numeric));
        }
        o.check(min_det > 1e-6, "min |det| = " + num(min_det) + " > 1e-6");
    });

    criterion(9, "closed-form Hessian vs numeric over 10 tau in E_n", 0., [](Outcome &o) {
        const std::vector<std::pair<cplx, int>> sample{
            {hexagonal_tau(), 1}, {cplx(0.5, 0.8), 1}, {cplx(0.5, 1.0), 1}, {cplx(0.45, 0.9), 1}, {cplx(0.55, 0.95), 1},
            {cplx(0.25, 1.), 2},  {cplx(0.75, 1.), 2}, {cplx(0.5, 1.5), 2}, {cplx(0.45, 1.2), 2}, {cplx(0.3, 0.7), 2}};
        double worst = 0., worst_ex = 0., min_cp = std::numeric_limits<double>::infinity();
        int points = 0;
        for (auto [tau, n] : sample) {
            const LatticeData L(tau);
            const auto rep = find_nontrivial(L, n);
            o.check(!rep.records.empty() && rep.unresolved.empty(),
                    "tau = " + num(tau.real()) + "+" + num(tau.imag()) + "i, n = " + std::to_string(n) + ": " +
                        std::to_string(rep.records.size()) + " nontrivial points");
            for (const auto &r : rep.records) {
                ++points;
                worst = std::max(worst, rel(r.det_closed, r.det_numeric));
                min_cp = std::min(min_cp, r.c_p);
                if (n == 2) {
                    worst_ex = std::max(worst_ex, rel(hessian_n2_example(r.B, r.c_p, L), r.det_closed));
                }
            }
        }
        o.check(worst < 1e-5, std::to_string(points) + " points, max relative det disagreement " + num(worst) + " < 1e-5");
        o.check(min_cp > 0., "min c_p = " + num(min_cp) + " > 0");
        o.check(worst_ex < 1e-10, "n = 2 example vs general formula " + num(worst_ex) + " < 1e-10");
    });

    criterion(10, "Gamma_0(2) transport of critical points", 0., [](Outcome &o) {
        std::mt19937_64 rng(110);
        std::uniform_int_distribution<long> e(-5, 5);
        std::vector<Gamma> gs;
        while (gs.size() < 5) {
            const Gamma g{e(rng), e(rng), e(rng), e(rng)};
            if (in_gamma0_2(g) && g.c != 0) {
                gs.push_back(g);
            }
        }
        const LatticeData hex(hexagonal_tau()), e2(cplx(0.45, 1.2));
        const auto base1 = find_nontrivial(hex, 1).records, base2 = find_nontrivial(e2, 2).records;
        for (const auto &g : gs) {
            double grad = 0., zres = 0.;
            bool verdicts = true;
            auto run = [&](const LatticeData &L, const std::vector<CriticalPointRecord> &recs, int n) {
                const LatticeData Lt(apply_gamma(g, L.tau()));
                for (const auto &r : recs) {
                    const auto t = gamma_transport(r, g, L, Lt);
                    grad = std::max(grad, t.gradient_residual);
                    zres = std::max(zres, std::abs(z_n(t.rs.r.real(), t.rs.s.real(), Lt, n)));
                    verdicts = verdicts && t.degenerate.verdict == r.degenerate.verdict;
                }
            };
            run(hex, base1, 1);
            run(e2, base2, 2);
            o.check(grad < 1e-8 && zres < 1e-8 && verdicts,
                    "gamma = [" + std::to_string(g.a) + " " + std::to_string(g.b) + "; " + std::to_string(g.c) + " " +
                        std::to_string(g.d) + "]: gradient " + num(grad) + ", |Z^(n)| " + num(zres) +
                        (verdicts ? ", verdicts kept" : ", verdict changed"));
        }
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
