#ifndef GTORUS_TORUS_GREEN_HPP
#define GTORUS_TORUS_GREEN_HPP

// Green function G(z; tau) of the flat torus and the multiple Green function
//
//   G_n(a) = sum_{j<k} G(a_j - a_k) - n sum_j G(a_j).
//
// First derivative (z = r + s*tau, r, s real):
//   -4 pi G_z = zeta(z) - z*eta1 + 2 pi i s
// Second derivatives, with b = Im(tau):
//   -4 pi G_zz    = -wp(z) - eta1 + pi/b
//   -4 pi G_zzbar = -pi/b
// Real gradient and Hessian follow from f_x = 2 Re f_z, f_y = -2 Im f_z.

#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "elliptic.hpp"
#include "numdiff.hpp"

namespace gtorus
{

// A point of E_tau with its real coordinates: z = r + s*tau.
struct TorusPoint {
    cplx z{};
    double r = 0.;
    double s = 0.;

    static TorusPoint from_z(cplx z, const LatticeData &L)
    {
        const auto rs = L.real_coords(z);
        return {z, rs[0], rs[1]};
    }
    static TorusPoint from_rs(double r, double s, const LatticeData &L)
    {
        return {r + s * L.tau(), r, s};
    }
    // Representative with (r, s) in [0, 1)^2.
    TorusPoint canonical(const LatticeData &L) const
    {
        double rr = r - std::floor(r), ss = s - std::floor(s);
        if (rr >= 1.) {
            rr = 0.;
        }
        if (ss >= 1.) {
            ss = 0.;
        }
        return from_rs(rr, ss, L);
    }
};

using Vec2 = std::array<double, 2>;

// n points on E_tau^x, distinct modulo the lattice. Compared as multisets.
class Configuration
{
public:
    Configuration() = default;
    explicit Configuration(std::vector<TorusPoint> pts) : m_points(std::move(pts)) {}

    static Configuration from_z(const std::vector<cplx> &zs, const LatticeData &L)
    {
        std::vector<TorusPoint> pts;
        pts.reserve(zs.size());
        for (auto z : zs) {
            pts.push_back(TorusPoint::from_z(z, L));
        }
        return Configuration(std::move(pts));
    }

    std::size_t size() const
    {
        return m_points.size();
    }
    const std::vector<TorusPoint> &points() const
    {
        return m_points;
    }
    const TorusPoint &operator[](std::size_t i) const
    {
        return m_points[i];
    }
    std::vector<cplx> zs() const
    {
        std::vector<cplx> out;
        out.reserve(m_points.size());
        for (const auto &p : m_points) {
            out.push_back(p.z);
        }
        return out;
    }

    Configuration negated(const LatticeData &L) const
    {
        std::vector<cplx> zs;
        for (const auto &p : m_points) {
            zs.push_back(-p.z);
        }
        return from_z(zs, L);
    }

    // Throws domain_error if some a_j is on the lattice or two points coincide in E_tau.
    void validate(const LatticeData &L) const
    {
        if (m_points.empty()) {
            throw domain_error("configuration must contain at least one point");
        }
        const double guard = L.options().pole_guard;
        for (std::size_t j = 0; j < m_points.size(); ++j) {
            if (L.lattice_distance(m_points[j].z).first < guard) {
                std::ostringstream oss;
                oss << "configuration point a_" << j + 1 << " = " << m_points[j].z << " is a lattice point";
                throw domain_error(oss.str());
            }
            for (std::size_t k = j + 1; k < m_points.size(); ++k) {
                if (L.lattice_distance(m_points[j].z - m_points[k].z).first < guard) {
                    std::ostringstream oss;
                    oss << "configuration points a_" << j + 1 << " and a_" << k + 1 << " coincide in E_tau";
                    throw domain_error(oss.str());
                }
            }
        }
    }

    // Multiset equality in E_tau up to tol.
    bool same_multiset(const Configuration &other, const LatticeData &L, double tol = 1e-7) const
    {
        if (other.size() != size()) {
            return false;
        }
        std::vector<bool> used(size(), false);
        for (const auto &p : m_points) {
            bool found = false;
            for (std::size_t k = 0; k < other.size(); ++k) {
                if (!used[k] && L.lattice_distance(p.z - other[k].z).first < tol) {
                    used[k] = found = true;
                    break;
                }
            }
            if (!found) {
                return false;
            }
        }
        return true;
    }

    // a = -a as multisets.
    bool is_symmetric(const LatticeData &L, double tol = 1e-7) const
    {
        return same_multiset(negated(L), L, tol);
    }

    // {a} and {-a} disjoint in E_tau.
    bool disjoint_from_negation(const LatticeData &L, double tol = 1e-7) const
    {
        for (const auto &p : m_points) {
            for (const auto &q : m_points) {
                if (L.lattice_distance(p.z + q.z).first < tol) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    std::vector<TorusPoint> m_points;
};

// G_z = dG/dz.
inline cplx green_dz(cplx z, const LatticeData &L)
{
    const cplx z0 = L.reduce(z);
    const double s = z0.imag() / L.tau().imag();
    return -(zeta_w(z0, L) - z0 * L.eta1() + 2. * pi * I * s) / (4. * pi);
}

inline cplx green_dz(const TorusPoint &p, const LatticeData &L)
{
    return green_dz(p.z, L);
}

inline Vec2 green_gradient(cplx z, const LatticeData &L)
{
    const cplx gz = green_dz(z, L);
    return {2. * gz.real(), -2. * gz.imag()};
}

// G_zz and G_{z zbar}.
inline cplx green_dzz(cplx z, const LatticeData &L)
{
    const double b = L.tau().imag();
    return (wp(z, L) + L.eta1() - pi / b) / (4. * pi);
}

inline double green_dzzbar(const LatticeData &L)
{
    return 1. / (4. * L.tau().imag());
}

// Real 2x2 Hessian of G at z (order x, y).
inline Eigen::Matrix2d green_hessian(cplx z, const LatticeData &L)
{
    const cplx gzz = green_dzz(z, L);
    const double gzzb = green_dzzbar(L);
    Eigen::Matrix2d H;
    H(0, 0) = 2. * gzz.real() + 2. * gzzb;
    H(1, 1) = -2. * gzz.real() + 2. * gzzb;
    H(0, 1) = H(1, 0) = -2. * gzz.imag();
    return H;
}

namespace detail
{

// G without its additive constant, evaluated on the reduced representative.
inline double green_unnormalised(cplx z, const LatticeData &L)
{
    const cplx z0 = L.reduce(z);
    const double b = L.tau().imag();
    return -L.log_sigma(z0).real() / (2. * pi) + (L.eta1() * z0 * z0).real() / (4. * pi) + z0.imag() * z0.imag() / (2. * b);
}

} // namespace detail

// Additive constant making the midpoint-rule mean of G over the torus vanish.
inline double green_constant(const LatticeData &L, int grid = 64)
{
    double acc = 0.;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double r = (i + 0.5) / grid, s = (j + 0.5) / grid;
            acc += detail::green_unnormalised(r + s * L.tau(), L);
        }
    }
    return -acc / (static_cast<double>(grid) * grid);
}

inline double green_value(cplx z, const LatticeData &L, double constant)
{
    L.check_pole(z, "green_value");
    return detail::green_unnormalised(z, L) + constant;
}

// Recomputes the normalisation each call; pass green_constant(L) explicitly in loops.
inline double green_value(const TorusPoint &p, const LatticeData &L)
{
    return green_value(p.z, L, green_constant(L));
}

inline double gn_value(const Configuration &c, const LatticeData &L, double constant)
{
    c.validate(L);
    const std::size_t n = c.size();
    double acc = 0.;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            acc += green_value(c[j].z - c[k].z, L, constant);
        }
        acc -= static_cast<double>(n) * green_value(c[j].z, L, constant);
    }
    return acc;
}

inline double gn_value(const Configuration &c, const LatticeData &L)
{
    return gn_value(c, L, green_constant(L));
}

// Component j: sum_{k != j} grad G(a_j - a_k) - n grad G(a_j).
inline std::vector<Vec2> gn_gradient(const Configuration &c, const LatticeData &L)
{
    c.validate(L);
    const std::size_t n = c.size();
    const double dn = static_cast<double>(n);
    std::vector<Vec2> out(n, Vec2{0., 0.});
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 g = green_gradient(c[j].z, L);
        out[j][0] -= dn * g[0];
        out[j][1] -= dn * g[1];
        for (std::size_t k = j + 1; k < n; ++k) {
            const Vec2 d = green_gradient(c[j].z - c[k].z, L);
            out[j][0] += d[0];
            out[j][1] += d[1];
            // grad G is odd
            out[k][0] -= d[0];
            out[k][1] -= d[1];
        }
    }
    return out;
}

inline double gradient_norm(const std::vector<Vec2> &g)
{
    double m = 0.;
    for (const auto &v : g) {
        m = std::max(m, std::hypot(v[0], v[1]));
    }
    return m;
}

// 2n x 2n Hessian, variables ordered (x_1, y_1, ..., x_n, y_n).
inline Eigen::MatrixXd gn_hessian(const Configuration &c, const LatticeData &L)
{
    c.validate(L);
    const auto n = static_cast<Eigen::Index>(c.size());
    const double dn = static_cast<double>(n);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        H.block<2, 2>(2 * j, 2 * j) -= dn * green_hessian(c[static_cast<std::size_t>(j)].z, L);
        for (Eigen::Index k = j + 1; k < n; ++k) {
            const Eigen::Matrix2d h = green_hessian(c[static_cast<std::size_t>(j)].z - c[static_cast<std::size_t>(k)].z, L);
            H.block<2, 2>(2 * j, 2 * j) += h;
            H.block<2, 2>(2 * k, 2 * k) += h;
            H.block<2, 2>(2 * j, 2 * k) -= h;
            H.block<2, 2>(2 * k, 2 * j) -= h;
        }
    }
    return H;
}

namespace detail
{

inline Eigen::VectorXd pack(const Configuration &c)
{
    Eigen::VectorXd x(2 * static_cast<Eigen::Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j) {
        x[static_cast<Eigen::Index>(2 * j)] = c[j].z.real();
        x[static_cast<Eigen::Index>(2 * j + 1)] = c[j].z.imag();
    }
    return x;
}

inline Configuration unpack(const Eigen::VectorXd &x, const LatticeData &L)
{
    std::vector<cplx> zs;
    for (Eigen::Index j = 0; j < x.size() / 2; ++j) {
        zs.emplace_back(x[2 * j], x[2 * j + 1]);
    }
    return Configuration::from_z(zs, L);
}

} // namespace detail

// Finite-difference Hessian from gn_gradient (fallback and test oracle).
inline Eigen::MatrixXd gn_hessian_fd(const Configuration &c, const LatticeData &L, FdOptions opts = {1e-4, true})
{
    auto grad = [&](const Eigen::VectorXd &x) {
        const auto g = gn_gradient(detail::unpack(x, L), L);
        Eigen::VectorXd v(static_cast<Eigen::Index>(2 * g.size()));
        for (std::size_t j = 0; j < g.size(); ++j) {
            v[static_cast<Eigen::Index>(2 * j)] = g[j][0];
            v[static_cast<Eigen::Index>(2 * j + 1)] = g[j][1];
        }
        return v;
    };
    return central_jacobian(grad, detail::pack(c), opts);
}

// Finite-difference gradient from gn_value.
inline std::vector<Vec2> gn_gradient_fd(const Configuration &c, const LatticeData &L, FdOptions opts = {1e-5, true})
{
    const double C = green_constant(L);
    auto val = [&](const Eigen::VectorXd &x) {
        Eigen::VectorXd v(1);
        v[0] = gn_value(detail::unpack(x, L), L, C);
        return v;
    };
    const Eigen::MatrixXd J = central_jacobian(val, detail::pack(c), opts);
    std::vector<Vec2> out(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        out[j] = {J(0, static_cast<Eigen::Index>(2 * j)), J(0, static_cast<Eigen::Index>(2 * j + 1))};
    }
    return out;
}

} // namespace gtorus

#endif
