#ifndef GTORUS_NUMDIFF_HPP
#define GTORUS_NUMDIFF_HPP

// Central-difference derivatives with one optional Richardson step.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gtorus
{

struct FdOptions {
    double step = 1e-5;
    bool richardson = true;
};

// Jacobian of f: R^n -> R^m at x; f returns an Eigen::VectorXd.
template <typename F>
Eigen::MatrixXd central_jacobian(F &&f, const Eigen::VectorXd &x, FdOptions opts = {})
{
    const auto n = x.size();
    auto column = [&](Eigen::Index j, double h) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        return Eigen::VectorXd((f(xp) - f(xm)) / (2. * h));
    };
    Eigen::VectorXd c0 = column(0, opts.step);
    Eigen::MatrixXd J(c0.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd c = j == 0 ? c0 : column(j, opts.step);
        if (opts.richardson) {
            c = (4. * column(j, opts.step / 2.) - c) / 3.;
        }
        J.col(j) = c;
    }
    return J;
}

// Scalar central derivative of a function of one real variable (any vector-space valued result).
template <typename F>
auto central_derivative(F &&f, double x, double h, bool richardson = true)
{
    auto d = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2. * hh); };
    if (!richardson) {
        return d(h);
    }
    return (4. * d(h / 2.) - d(h)) / 3.;
}

} // namespace gtorus

#endif
