// All critical points of G on the hexagonal torus: three half-periods and the pair +-(1+tau)/3.
#include <cstdio>

#include <gtorus/crit.hpp>

using namespace gtorus;

static void print(const CriticalPointRecord &r)
{
    std::printf("  %-10s", r.kind == CritKind::trivial ? "trivial" : "nontrivial");
    for (const auto &p : r.config.points()) {
        std::printf(" p = %.12f%+.12fi", p.z.real(), p.z.imag());
    }
    std::printf("  det = %+.10f", r.det_numeric);
    if (r.kind == CritKind::nontrivial) {
        std::printf("  closed = %+.10f  (r,s) = (%.10f, %.10f)  margin %.3f", r.det_closed, r.rs.r.real(), r.rs.s.real(),
                    r.degenerate.margin);
    }
    std::printf("\n");
}

int main()
{
    const LatticeData L(hexagonal_tau());
    std::printf("critical points of G at tau = exp(i pi/3)\n");
    for (const auto &r : find_trivial(L, 1).records) {
        print(r);
    }
    const auto rep = find_nontrivial(L, 1);
    for (const auto &r : rep.records) {
        print(r);
    }
    const cplx p = (1. + L.tau()) / 3.;
    std::printf("expected nontrivial point (1+tau)/3 = %.12f%+.12fi\n", p.real(), p.imag());
}
