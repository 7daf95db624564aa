#ifndef GTORUS_CLI_SCAN_HPP
#define GTORUS_CLI_SCAN_HPP

// tau-plane scans for `gtorus scan`: one row per grid node, row-major with
// Im tau outer and Re tau inner, computed by a worker pool and merged by index.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <gtorus/crit.hpp>

#include "common.hpp"

namespace gtorus::cli
{

enum class Region { f0, rect };

struct ScanTasks {
    bool critical = true;
    bool membership = true;
    bool degeneracy = true;
    bool wedge = true;
};

struct ScanJob {
    int n = 1;
    Region region = Region::f0;
    double re_min = 0., re_max = 1.;
    double im_min = 0.05, im_max = 2.;
    int nx = 20, ny = 20;
    ScanTasks tasks;
    int rs_grid = 60;
    unsigned threads = 1;
    double tol_gradient = 1e-8;
    double tol_zero = 1e-10;
    DegeneracyOptions degeneracy{};

    void validate() const
    {
        if (n < 1) {
            throw usage_error("scan: --n must be positive");
        }
        if (nx < 2 || ny < 2) {
            throw usage_error("scan: resolution must be at least 2 per axis");
        }
        if (!(im_min > 0.) || !(im_max > im_min) || !(re_max > re_min)) {
            throw usage_error("scan: region must be a non-empty rectangle inside Im tau > 0");
        }
        if ((tasks.membership || tasks.degeneracy) && n > 3) {
            throw usage_error("scan: nontrivial search needs Z^(n), available for n <= 3");
        }
    }
};

inline bool in_f0(cplx tau)
{
    return tau.real() >= 0. && tau.real() <= 1. && std::abs(tau - 0.5) >= 0.5;
}

struct ScanRow {
    double re = 0., im = 0.;
    int n_trivial = -1, n_nontrivial = -1;
    double min_abs_det = std::numeric_limits<double>::quiet_NaN();
    double min_margin = std::numeric_limits<double>::quiet_NaN();
    double wedge = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    std::string message;
};

inline ScanRow scan_cell(const ScanJob &job, cplx tau)
{
    ScanRow row;
    row.re = tau.real();
    row.im = tau.imag();
    if (job.region == Region::f0 && !in_f0(tau)) {
        row.status = "outside";
        return row;
    }
    auto note = [&](const std::string &what) {
        row.status = "partial";
        if (!row.message.empty()) {
            row.message += "; ";
        }
        row.message += what;
    };
    try {
        const LatticeData L(tau);
        auto track_det = [&](const CriticalPointRecord &r) {
            const double d = std::abs(r.det_numeric);
            row.min_abs_det = std::isnan(row.min_abs_det) ? d : std::min(row.min_abs_det, d);
            if (r.gradient_residual > job.tol_gradient) {
                note("gradient residual above tolerance");
            }
        };
        if (job.tasks.critical) {
            const auto t = find_trivial(L, job.n);
            row.n_trivial = static_cast<int>(t.records.size());
            for (const auto &r : t.records) {
                track_det(r);
            }
            if (!t.failures.empty()) {
                note("trivial search failures");
            }
            if (t.multiple_roots) {
                note("Lame polynomial has a repeated root");
            }
        }
        if (job.tasks.critical || job.tasks.membership || job.tasks.degeneracy) {
            const auto nt = find_nontrivial(L, job.n, NontrivialOptions{job.rs_grid, job.tol_zero, 64, 99u, job.degeneracy});
            row.n_nontrivial = static_cast<int>(nt.records.size());
            for (const auto &r : nt.records) {
                if (job.tasks.critical) {
                    track_det(r);
                }
                if (job.tasks.degeneracy) {
                    const double m = r.degenerate.margin;
                    row.min_margin = std::isnan(row.min_margin) ? m : std::min(row.min_margin, m);
                }
            }
            if (!nt.unresolved.empty() || nt.failed_cells > 0) {
                note("unresolved zeros of Z^(n)");
            }
        }
        if (job.tasks.wedge) {
            try {
                const cplx a0 = 0.31 + 0.27 * tau;
                const cplx B = static_cast<double>(2 * job.n - 1) * static_cast<double>(job.n) * wp(a0, L) + cplx(0.7, 0.3);
                const auto y = solve_yn_from_B(B, L, job.n);
                // B grows like 1/(Im tau)^2 towards the cusp; shrink the stencil with it
                const double h = 1e-4 * std::pow(std::min(1., tau.imag()), 2);
                row.wedge = wedge_check(y[0], L, h);
            } catch (const std::exception &e) {
                note(std::string("wedge: ") + e.what());
            }
        }
    } catch (const std::exception &e) {
        row.status = "error";
        row.message = e.what();
    }
    return row;
}

inline std::vector<cplx> scan_nodes(const ScanJob &job)
{
    std::vector<cplx> nodes;
    nodes.reserve(static_cast<std::size_t>(job.nx * job.ny));
    for (int j = 0; j < job.ny; ++j) {
        const double im = job.im_min + (job.im_max - job.im_min) * j / (job.ny - 1);
        for (int i = 0; i < job.nx; ++i) {
            const double re = job.re_min + (job.re_max - job.re_min) * i / (job.nx - 1);
            nodes.emplace_back(re, im);
        }
    }
    return nodes;
}

// Rows ordered by node index (Im tau outer, Re tau inner) whatever the thread count.
inline std::vector<ScanRow> run_scan(const ScanJob &job)
{
    job.validate();
    const auto nodes = scan_nodes(job);
    std::vector<ScanRow> rows(nodes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < nodes.size(); k = next++) {
            rows[k] = scan_cell(job, nodes[k]);
        }
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(job.threads, static_cast<unsigned>(nodes.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    return rows;
}

inline void write_scan_csv(std::ostream &os, const std::vector<ScanRow> &rows)
{
    os << "re_tau,im_tau,n_trivial,n_nontrivial,min_abs_det_numeric,min_degeneracy_margin,wedge_residual,status\n";
    for (const auto &r : rows) {
        os << fmt(r.re) << ',' << fmt(r.im) << ',' << r.n_trivial << ',' << r.n_nontrivial << ',' << fmt(r.min_abs_det)
           << ',' << fmt(r.min_margin) << ',' << fmt(r.wedge) << ',' << r.status << '\n';
    }
}

inline nlohmann::json scan_metadata(const ScanJob &job, const std::vector<ScanRow> &rows)
{
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["tool_version"] = tool_version;
    j["job"] = {{"n", job.n},
                {"region", job.region == Region::f0 ? "F0" : "rect"},
                {"re_range", {job.re_min, job.re_max}},
                {"im_range", {job.im_min, job.im_max}},
                {"resolution", {job.nx, job.ny}},
                {"rs_grid", job.rs_grid},
                {"threads", job.threads},
                {"tasks",
                 {{"critical-points", job.tasks.critical},
                  {"En-membership", job.tasks.membership},
                  {"degeneracy-margin", job.tasks.degeneracy},
                  {"wedge-residual", job.tasks.wedge}}}};
    j["tolerances"] = {{"gradient", job.tol_gradient},
                       {"premodular_zero", job.tol_zero},
                       {"degenerate_below", job.degeneracy.degenerate_below},
                       {"near_degenerate_below", job.degeneracy.near_below}};
    j["notes"] = {"Im tau is capped at im_max; the unbounded part of F0 is not scanned.",
                  "Nontrivial counts are resolution-limited by rs_grid; an empty cell is not a proof of absence."};
    nlohmann::json diag = nlohmann::json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!rows[k].message.empty()) {
            diag.push_back({{"row", k}, {"status", rows[k].status}, {"message", rows[k].message}});
        }
    }
    j["diagnostics"] = diag;
    return j;
}

inline nlohmann::json scan_json(const ScanJob &job, const std::vector<ScanRow> &rows)
{
    auto j = scan_metadata(job, rows);
    j["rows"] = nlohmann::json::array();
    for (const auto &r : rows) {
        j["rows"].push_back({{"re_tau", r.re},
                             {"im_tau", r.im},
                             {"n_trivial", r.n_trivial},
                             {"n_nontrivial", r.n_nontrivial},
                             {"min_abs_det_numeric", r.min_abs_det},
                             {"min_degeneracy_margin", r.min_margin},
                             {"wedge_residual", r.wedge},
                             {"status", r.status}});
    }
    return j;
}

} // namespace gtorus::cli

#endif
