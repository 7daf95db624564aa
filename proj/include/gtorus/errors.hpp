#ifndef GTORUS_ERRORS_HPP
#define GTORUS_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtorus
{

using cplx = std::complex<double>;

// Invalid input: Im(tau) <= 0, coincident configuration points, bad gamma, ...
class domain_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Evaluation too close to a lattice point.
class pole_error : public domain_error
{
public:
    pole_error(const std::string &what, cplx nearest)
        : domain_error(what), m_nearest(nearest)
    {}
    cplx nearest_lattice_point() const
    {
        return m_nearest;
    }

private:
    cplx m_nearest;
};

// Iterative solver failed. Carries the last iterate for diagnostics.
class convergence_error : public std::runtime_error
{
public:
    convergence_error(const std::string &what, std::vector<cplx> last = {}, double residual = -1.)
        : std::runtime_error(what), m_last(std::move(last)), m_residual(residual)
    {}
    const std::vector<cplx> &last_iterate() const
    {
        return m_last;
    }
    double residual() const
    {
        return m_residual;
    }

private:
    std::vector<cplx> m_last;
    double m_residual;
};

// Requested quantity has no implementation for this index (e.g. Lame polynomial for n >= 3).
class capability_error : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

// A linear system that must be regular at valid inputs turned out singular.
class degenerate_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace gtorus

#endif
