#ifndef GTORUS_SOLVERS_HPP
#define GTORUS_SOLVERS_HPP

// Damped (Gauss-)Newton for holomorphic systems F: C^m -> C^k, k >= m, and
// polynomial roots via the companion matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace gtorus
{

struct NewtonOptions {
    double tol = 1e-12;
    // Accepted when the iteration stalls below this residual.
    double stall_tol = 1e-10;
    int max_iter = 80;
    int max_halvings = 40;
};

struct NewtonResult {
    std::vector<cplx> x;
    double residual = 0.;
    int iterations = 0;
    bool converged = false;
};

// sys(x) -> std::pair<Eigen::VectorXcd F, Eigen::MatrixXcd J>.
// admissible(x) rejects iterates (e.g. collisions); rejected steps are halved.
template <typename System, typename Admissible>
NewtonResult complex_newton(System &&sys, std::vector<cplx> x, Admissible &&admissible, NewtonOptions opts = {})
{
    using Vec = Eigen::VectorXcd;
    const auto m = static_cast<Eigen::Index>(x.size());
    auto [F, J] = sys(x);
    double res = F.cwiseAbs().maxCoeff();
    NewtonResult out;
    for (int it = 0; it < opts.max_iter; ++it) {
        out.iterations = it;
        if (res < opts.tol) {
            break;
        }
        Vec step = J.colPivHouseholderQr().solve(-F);
        if (!step.allFinite()) {
            break;
        }
        double lambda = 1.;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, lambda /= 2.) {
            std::vector<cplx> trial(x);
            for (Eigen::Index i = 0; i < m; ++i) {
                trial[static_cast<std::size_t>(i)] += lambda * step[i];
            }
            if (!admissible(trial)) {
                continue;
            }
            auto [Ft, Jt] = sys(trial);
            if (!Ft.allFinite()) {
                continue;
            }
            const double rt = Ft.cwiseAbs().maxCoeff();
            // Full steps are always taken near the solution; damped steps must decrease the residual.
            if (rt < res || (h == 0 && res < 1e-6 && rt < 10. * res)) {
                x = std::move(trial);
                F = std::move(Ft);
                J = std::move(Jt);
                const bool stalled = std::abs(rt - res) <= 1e-3 * res && rt < opts.stall_tol;
                res = rt;
                accepted = true;
                if (stalled) {
                    it = opts.max_iter;
                }
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    out.x = std::move(x);
    out.residual = res;
    out.converged = res < opts.stall_tol;
    return out;
}

template <typename System>
NewtonResult complex_newton(System &&sys, std::vector<cplx> x, NewtonOptions opts = {})
{
    return complex_newton(std::forward<System>(sys), std::move(x), [](const std::vector<cplx> &) { return true; }, opts);
}

// Polynomial sum_k coeffs[k] B^k.
inline cplx poly_eval(const std::vector<cplx> &coeffs, cplx x)
{
    cplx acc = 0.;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

inline cplx poly_derivative_eval(const std::vector<cplx> &coeffs, cplx x)
{
    cplx acc = 0.;
    for (std::size_t k = coeffs.size() - 1; k >= 1; --k) {
        acc = acc * x + static_cast<double>(k) * coeffs[k];
    }
    return acc;
}

// Roots of sum_k coeffs[k] x^k (leading coefficient nonzero), eigenvalues of the
// companion matrix followed by Newton polish.
inline std::vector<cplx> poly_roots(const std::vector<cplx> &coeffs)
{
    if (coeffs.size() < 2 || coeffs.back() == cplx{0., 0.}) {
        throw domain_error("poly_roots: need degree >= 1 with nonzero leading coefficient");
    }
    const auto deg = static_cast<Eigen::Index>(coeffs.size() - 1);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) {
        C(i, i - 1) = 1.;
    }
    for (Eigen::Index i = 0; i < deg; ++i) {
        C(i, deg - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + deg);
    for (auto &r : roots) {
        for (int it = 0; it < 8; ++it) {
            const cplx d = poly_derivative_eval(coeffs, r);
            if (std::abs(d) == 0.) {
                break;
            }
            const cplx dx = poly_eval(coeffs, r) / d;
            if (!std::isfinite(std::abs(dx)) || std::abs(dx) > 1e-3 * (1. + std::abs(r))) {
                break;
            }
            r -= dx;
            if (std::abs(dx) < 1e-16 * (1. + std::abs(r))) {
                break;
            }
        }
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

} // namespace gtorus

#endif
