#ifndef GTORUS_CLI_APP_HPP
#define GTORUS_CLI_APP_HPP

// Subcommand wiring for the gtorus executable. run_app is also driven directly by the tests.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <gtorus/crit.hpp>

#include "common.hpp"
#include "scan.hpp"
#include "verify.hpp"

namespace gtorus::cli
{

namespace detail
{

// Writes to --out when given, otherwise to the supplied stream.
class Sink
{
public:
    Sink(const std::string &path, std::ostream &fallback)
    {
        if (path.empty()) {
            m_os = &fallback;
        } else {
            m_file = std::make_unique<std::ofstream>(path);
            if (!*m_file) {
                throw usage_error("cannot open output file '" + path + "'");
            }
            m_os = m_file.get();
        }
    }
    std::ostream &os()
    {
        return *m_os;
    }

private:
    std::unique_ptr<std::ofstream> m_file;
    std::ostream *m_os = nullptr;
};

inline void check_format(const std::string &f, std::initializer_list<const char *> allowed)
{
    for (const char *a : allowed) {
        if (f == a) {
            return;
        }
    }
    throw usage_error("unsupported --format '" + f + "'");
}

inline void print_record_text(std::ostream &os, const CriticalPointRecord &r)
{
    os << "  " << to_string(r.kind) << "  points:";
    for (const auto &p : r.config.points()) {
        os << ' ' << fmt(p.z);
    }
    os << "\n    B = " << fmt(r.B) << "  (r,s) = (" << fmt(r.rs.r) << ", " << fmt(r.rs.s) << ")"
       << "  |grad| = " << fmt(r.gradient_residual) << "\n    det_numeric = " << fmt(r.det_numeric);
    if (r.kind == CritKind::nontrivial) {
        os << "  det_closed = " << fmt(r.det_closed) << "  c_p = " << fmt(r.c_p) << "\n    tau_s/tau_r = "
           << fmt(r.tau_ratio) << "  verdict = " << to_string(r.degenerate.verdict) << " (margin "
           << fmt(r.degenerate.margin) << ")";
    }
    os << '\n';
}

inline void write_records_csv(std::ostream &os, const std::vector<CriticalPointRecord> &recs)
{
    os << "kind,points,B_re,B_im,r_re,s_re,gradient_residual,det_numeric,det_closed,c_p,tau_ratio_re,tau_ratio_im,"
          "verdict,margin\n";
    for (const auto &r : recs) {
        std::string pts;
        for (const auto &p : r.config.points()) {
            pts += (pts.empty() ? "" : ";") + fmt(p.z);
        }
        os << to_string(r.kind) << ",\"" << pts << "\"," << fmt(r.B.real()) << ',' << fmt(r.B.imag()) << ','
           << fmt(r.rs.r.real()) << ',' << fmt(r.rs.s.real()) << ',' << fmt(r.gradient_residual) << ','
           << fmt(r.det_numeric) << ',' << fmt(r.det_closed) << ',' << fmt(r.c_p) << ',' << fmt(r.tau_ratio.real())
           << ',' << fmt(r.tau_ratio.imag()) << ',' << to_string(r.degenerate.verdict) << ','
           << fmt(r.degenerate.margin) << '\n';
    }
}

inline RsBox parse_box(const std::string &s)
{
    if (s == "0" || s == "delta0") {
        return RsBox::delta0;
    }
    if (s == "1" || s == "delta1") {
        return RsBox::delta1;
    }
    if (s == "2" || s == "delta2") {
        return RsBox::delta2;
    }
    if (s == "3" || s == "delta3") {
        return RsBox::delta3;
    }
    if (s == "all") {
        return RsBox::none;
    }
    throw usage_error("--box must be 0, 1, 2, 3 or all");
}

inline std::pair<int, int> parse_resolution(const std::string &s)
{
    const auto x = s.find_first_of("xX");
    try {
        if (x == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (const std::exception &) {
        throw usage_error("--grid must be N or NXxNY");
    }
}

} // namespace detail

inline int cmd_critical(cplx tau, int n, int grid, const std::string &format, const std::string &out_path,
                        double tol_gradient, double tol_zero, DegeneracyOptions dopts, std::ostream &out)
{
    detail::check_format(format, {"text", "json", "csv"});
    if (n < 1) {
        throw usage_error("--n must be positive");
    }
    const LatticeData L(tau);
    const auto triv = find_trivial(L, n, TrivialOptions{48, 7u, dopts});
    std::optional<NontrivialReport> nontriv;
    std::vector<std::string> notes = triv.failures;
    if (triv.multiple_roots) {
        notes.emplace_back("Lame polynomial has (numerically) repeated roots; trivial points may be missing");
    }
    if (n <= 3) {
        nontriv = find_nontrivial(L, n, NontrivialOptions{grid, tol_zero, 64, 99u, dopts});
        for (const auto &u : nontriv->unresolved) {
            notes.push_back("unresolved zero (r,s) = (" + fmt(u.r) + ", " + fmt(u.s) + "): " + u.reason);
        }
        if (nontriv->failed_cells > 0) {
            notes.push_back(std::to_string(nontriv->failed_cells) + " flagged cells failed to polish");
        }
    } else {
        notes.emplace_back("nontrivial search skipped: Z^(n) is only available for n <= 3");
    }
    std::vector<CriticalPointRecord> all = triv.records;
    if (nontriv) {
        all.insert(all.end(), nontriv->records.begin(), nontriv->records.end());
    }
    for (const auto &r : all) {
        if (r.gradient_residual > tol_gradient) {
            notes.push_back("record with gradient residual " + fmt(r.gradient_residual) + " above tolerance");
        }
    }
    const bool complete = notes.empty();

    detail::Sink sink(out_path, out);
    auto &os = sink.os();
    if (format == "json") {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["tool_version"] = tool_version;
        j["tau"] = to_json(tau);
        j["n"] = n;
        j["rs_grid"] = grid;
        j["complete"] = complete;
        j["notes"] = notes;
        j["trivial"] = nlohmann::json::array();
        for (const auto &r : triv.records) {
            j["trivial"].push_back(to_json(r));
        }
        j["nontrivial"] = nlohmann::json::array();
        if (nontriv) {
            for (const auto &r : nontriv->records) {
                j["nontrivial"].push_back(to_json(r));
            }
        }
        os << j.dump(2) << '\n';
    } else if (format == "csv") {
        detail::write_records_csv(os, all);
    } else {
        os << "tau = " << fmt(tau) << "  n = " << n << "  (r,s) grid " << grid << "\n";
        os << "trivial: " << triv.records.size() << '\n';
        for (const auto &r : triv.records) {
            detail::print_record_text(os, r);
        }
        os << "nontrivial: " << (nontriv ? std::to_string(nontriv->records.size()) : std::string("not searched")) << '\n';
        if (nontriv) {
            for (const auto &r : nontriv->records) {
                detail::print_record_text(os, r);
            }
        }
        for (const auto &note : notes) {
            os << "note: " << note << '\n';
        }
        os << (complete ? "status: complete" : "status: partial") << '\n';
    }
    return complete ? exit_ok : exit_partial;
}

inline int cmd_lame_roots(cplx tau, int n, const std::string &format, std::ostream &out)
{
    detail::check_format(format, {"text", "json"});
    const LatticeData L(tau);
    std::vector<cplx> roots;
    try {
        roots = lame_roots(L, n);
    } catch (const capability_error &e) {
        throw usage_error(e.what());
    }
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            sep = std::min(sep, std::abs(roots[i] - roots[j]));
        }
    }
    if (format == "json") {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["tau"] = to_json(tau);
        j["n"] = n;
        j["roots"] = nlohmann::json::array();
        for (auto r : roots) {
            j["roots"].push_back({{"B", to_json(r)}, {"abs_l", std::abs(lame_poly(r, L, n))}});
        }
        j["min_separation"] = sep;
        out << j.dump(2) << '\n';
    } else {
        out << "Lame polynomial l_" << n << " at tau = " << fmt(tau) << '\n';
        for (auto r : roots) {
            out << "  B = " << fmt(r) << "   |l(B)| = " << fmt(std::abs(lame_poly(r, L, n))) << '\n';
        }
        out << "min separation " << fmt(sep) << '\n';
    }
    return exit_ok;
}

inline int cmd_premodular_zeros(cplx tau, int n, const std::string &box, int grid, double tol_zero,
                                const std::string &format, std::ostream &out)
{
    detail::check_format(format, {"text", "json", "csv"});
    if (n < 1 || n > 3) {
        throw usage_error("premodular-zeros: --n must be 1, 2 or 3");
    }
    const LatticeData L(tau);
    const RsBox b = detail::parse_box(box);
    const auto rep = b == RsBox::none ? find_rs_zeros_all(L, n, grid, tol_zero) : find_rs_zeros_report(L, n, b, grid, tol_zero);
    if (format == "json") {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["tau"] = to_json(tau);
        j["n"] = n;
        j["grid"] = grid;
        j["flagged_cells"] = rep.flagged_cells;
        j["failed_cells"] = rep.failed_cells;
        j["rejected_cells"] = rep.rejected_cells;
        j["zeros"] = nlohmann::json::array();
        for (const auto &z : rep.zeros) {
            j["zeros"].push_back({{"r", z.r}, {"s", z.s}, {"box", static_cast<int>(z.box)}, {"residual", z.residual}});
        }
        out << j.dump(2) << '\n';
    } else if (format == "csv") {
        out << "r,s,box,residual\n";
        for (const auto &z : rep.zeros) {
            out << fmt(z.r) << ',' << fmt(z.s) << ',' << static_cast<int>(z.box) << ',' << fmt(z.residual) << '\n';
        }
    } else {
        out << "real zeros of Z^(" << n << ") at tau = " << fmt(tau) << " (grid " << grid << "): " << rep.zeros.size() << '\n';
        for (const auto &z : rep.zeros) {
            out << "  (r,s) = (" << fmt(z.r) << ", " << fmt(z.s) << ")  box " << static_cast<int>(z.box) << "  |Z| = "
                << fmt(z.residual) << '\n';
        }
        out << "flagged cells " << rep.flagged_cells << ", failed " << rep.failed_cells << ", rejected near (1/2)Z^2 "
            << rep.rejected_cells << '\n';
    }
    return rep.failed_cells > 0 ? exit_partial : exit_ok;
}

inline int cmd_hessian(cplx tau, const std::vector<cplx> &pts, const std::string &format, std::ostream &out)
{
    detail::check_format(format, {"text", "json"});
    const LatticeData L(tau);
    const auto c = Configuration::from_z(pts, L);
    c.validate(L);
    const Eigen::MatrixXd H = gn_hessian(c, L);
    const Eigen::MatrixXd F = gn_hessian_fd(c, L);
    const double grad = gradient_norm(gn_gradient(c, L));
    const auto g = yn_residuals(c, L);
    double yres = 0.;
    for (auto v : g) {
        yres = std::max(yres, std::abs(v));
    }
    std::optional<CriticalPointRecord> rec;
    if (yres < 1e-8 && grad < 1e-6 && !c.is_symmetric(L)) {
        rec = make_record(c, CritKind::nontrivial, L);
    }
    if (format == "json") {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["tau"] = to_json(tau);
        nlohmann::json m = nlohmann::json::array();
        for (Eigen::Index i = 0; i < H.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index k = 0; k < H.cols(); ++k) {
                row.push_back(H(i, k));
            }
            m.push_back(row);
        }
        j["hessian"] = m;
        j["det_analytic"] = H.determinant();
        j["det_finite_difference"] = F.determinant();
        j["gradient_residual"] = grad;
        j["yn_residual"] = yres;
        if (rec) {
            j["closed_form"] = to_json(*rec);
        }
        out << j.dump(2) << '\n';
    } else {
        out << "Hessian of G_" << pts.size() << " at tau = " << fmt(tau) << '\n';
        for (Eigen::Index i = 0; i < H.rows(); ++i) {
            out << ' ';
            for (Eigen::Index k = 0; k < H.cols(); ++k) {
                out << ' ' << fmt(H(i, k));
            }
            out << '\n';
        }
        out << "det (analytic)          " << fmt(H.determinant()) << '\n';
        out << "det (finite difference) " << fmt(F.determinant()) << '\n';
        out << "|grad G_n| = " << fmt(grad) << "   max |g^j| = " << fmt(yres) << '\n';
        if (rec) {
            out << "nontrivial critical point on Y_n:\n";
            detail::print_record_text(out, *rec);
        }
    }
    return exit_ok;
}

inline int cmd_verify(const VerifyOptions &o, const std::string &format, const std::string &out_path, std::ostream &out)
{
    detail::check_format(format, {"text", "json"});
    const auto checks = run_verify(o);
    bool ok = true;
    for (const auto &c : checks) {
        ok = ok && c.pass;
    }
    detail::Sink sink(out_path, out);
    auto &os = sink.os();
    if (format == "json") {
        os << verify_json(checks, o).dump(2) << '\n';
    } else {
        for (const auto &c : checks) {
            os << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  measured " << fmt(c.measured) << "  target < "
               << fmt(c.target);
            if (!c.detail.empty()) {
                os << "  (" << c.detail << ')';
            }
            os << '\n';
        }
        os << (ok ? "all checks passed" : "verification FAILED") << '\n';
    }
    return ok ? exit_ok : exit_verify_failed;
}

inline int cmd_scan(const ScanJob &job, const std::string &format, const std::string &out_path, std::ostream &out)
{
    detail::check_format(format, {"csv", "json"});
    const auto rows = run_scan(job);
    bool complete = true;
    for (const auto &r : rows) {
        complete = complete && (r.status == "ok" || r.status == "outside");
    }
    if (format == "json") {
        detail::Sink sink(out_path, out);
        sink.os() << scan_json(job, rows).dump(2) << '\n';
    } else {
        {
            detail::Sink sink(out_path, out);
            write_scan_csv(sink.os(), rows);
        }
        if (!out_path.empty()) {
            std::ofstream side(out_path + ".json");
            side << scan_metadata(job, rows).dump(2) << '\n';
        }
    }
    return complete ? exit_ok : exit_partial;
}

inline int run_app(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Critical points of multiple Green functions on flat tori"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    std::string tau_s, format = "text", out_path, points_s, box = "all", level = "quick", region = "F0", res = "20x20",
                tasks_s = "critical,membership,degeneracy,wedge";
    int n = 1, grid = 200, rs_grid = 60;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    double tol_gradient = 1e-8, tol_zero = 1e-10;
    DegeneracyOptions dopts;
    VerifyOptions vopts;
    ScanJob job;

    auto *crit = app.add_subcommand("critical", "trivial and nontrivial critical points of G_n");
    crit->add_option("--tau", tau_s, "modulus, e.g. 0.4+0.9i or exp(i*pi/3)")->required();
    crit->add_option("--n", n, "number of points")->required();
    crit->add_option("--grid", grid, "(r,s) grid per triangle for the nontrivial search");
    crit->add_option("--format", format, "text|json|csv");
    crit->add_option("--out", out_path, "output file (default stdout)");
    crit->add_option("--tol-gradient", tol_gradient);
    crit->add_option("--tol-zero", tol_zero);
    crit->add_option("--tol-degenerate", dopts.degenerate_below);
    crit->add_option("--tol-near-degenerate", dopts.near_below);

    auto *lame = app.add_subcommand("lame-roots", "roots of the Lame polynomial l_n (n = 1, 2)");
    lame->add_option("--tau", tau_s)->required();
    lame->add_option("--n", n)->required();
    lame->add_option("--format", format, "text|json");

    auto *pz = app.add_subcommand("premodular-zeros", "real zeros (r,s) of Z^(n) over the triangles");
    pz->add_option("--tau", tau_s)->required();
    pz->add_option("--n", n)->required();
    pz->add_option("--box", box, "0|1|2|3|all");
    pz->add_option("--grid", grid);
    pz->add_option("--tol-zero", tol_zero);
    pz->add_option("--format", format, "text|json|csv");

    auto *hess = app.add_subcommand("hessian", "2n x 2n Hessian of G_n at a configuration");
    hess->add_option("--tau", tau_s)->required();
    hess->add_option("--points", points_s, "comma-separated points, e.g. \"0.3+0.2i,0.6+0.4i\"")->required();
    hess->add_option("--format", format, "text|json");

    auto *ver = app.add_subcommand("verify", "identity verification suite");
    ver->add_option("--level", level, "quick|full");
    ver->add_option("--format", format, "text|json");
    ver->add_option("--out", out_path);
    ver->add_option("--seed", vopts.seed);
    ver->add_option("--tol-legendre", vopts.tol_legendre);
    ver->add_option("--tol-cubic", vopts.tol_cubic);
    ver->add_option("--tol-sigma", vopts.tol_sigma);
    ver->add_option("--tol-special", vopts.tol_special);
    ver->add_option("--tol-wedge", vopts.tol_wedge);
    ver->add_option("--tol-hessian", vopts.tol_hessian);
    ver->add_option("--tol-closed-form", vopts.tol_closed_form);
    ver->add_option("--tamper-g2", vopts.tamper_g2, "perturb g2 inside the cubic check (sensitivity probe)");

    auto *scan = app.add_subcommand("scan", "tau-plane scan");
    scan->add_option("--n", n)->required();
    scan->add_option("--region", region, "F0|rect");
    scan->add_option("--re-min", job.re_min);
    scan->add_option("--re-max", job.re_max);
    scan->add_option("--im-min", job.im_min);
    scan->add_option("--im-max", job.im_max, "cap on Im tau (F0 is unbounded)");
    scan->add_option("--grid", res, "resolution N or NXxNY");
    scan->add_option("--rs-grid", rs_grid, "(r,s) grid per triangle in each cell");
    scan->add_option("--tasks", tasks_s, "subset of critical,membership,degeneracy,wedge");
    scan->add_option("--threads", threads);
    scan->add_option("--format", format, "csv|json");
    scan->add_option("--out", out_path, "CSV path; a .json sidecar is written next to it");
    scan->add_option("--tol-gradient", tol_gradient);
    scan->add_option("--tol-zero", tol_zero);
    scan->add_option("--tol-degenerate", dopts.degenerate_below);
    scan->add_option("--tol-near-degenerate", dopts.near_below);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            // --help / --version
            app.exit(e, out, err);
            return exit_ok;
        }
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (crit->parsed()) {
            return cmd_critical(parse_tau(tau_s), n, grid, format, out_path, tol_gradient, tol_zero, dopts, out);
        }
        if (lame->parsed()) {
            return cmd_lame_roots(parse_tau(tau_s), n, format, out);
        }
        if (pz->parsed()) {
            return cmd_premodular_zeros(parse_tau(tau_s), n, box, grid, tol_zero, format, out);
        }
        if (hess->parsed()) {
            return cmd_hessian(parse_tau(tau_s), parse_complex_list(points_s), format, out);
        }
        if (ver->parsed()) {
            if (level != "quick" && level != "full") {
                throw usage_error("--level must be quick or full");
            }
            vopts.full = level == "full";
            return cmd_verify(vopts, format == "text" ? "text" : format, out_path, out);
        }
        if (scan->parsed()) {
            if (region == "F0" || region == "f0") {
                job.region = Region::f0;
            } else if (region == "rect") {
                job.region = Region::rect;
            } else {
                throw usage_error("--region must be F0 or rect");
            }
            std::tie(job.nx, job.ny) = detail::parse_resolution(res);
            job.n = n;
            job.rs_grid = rs_grid;
            job.threads = threads;
            job.tol_gradient = tol_gradient;
            job.tol_zero = tol_zero;
            job.degeneracy = dopts;
            job.tasks = ScanTasks{false, false, false, false};
            std::stringstream ss(tasks_s);
            std::string t;
            while (std::getline(ss, t, ',')) {
                if (t == "critical" || t == "critical-points") {
                    job.tasks.critical = true;
                } else if (t == "membership" || t == "En-membership") {
                    job.tasks.membership = true;
                } else if (t == "degeneracy" || t == "degeneracy-margin") {
                    job.tasks.degeneracy = true;
                } else if (t == "wedge" || t == "wedge-residual") {
                    job.tasks.wedge = true;
                } else {
                    throw usage_error("unknown scan task '" + t + "'");
                }
            }
            return cmd_scan(job, format == "text" ? "csv" : format, out_path, out);
        }
    } catch (const usage_error &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const gtorus::domain_error &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return exit_partial;
    }
    return exit_usage;
}

} // namespace gtorus::cli

#endif
