#ifndef GTORUS_CLI_COMMON_HPP
#define GTORUS_CLI_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <gtorus/crit.hpp>

namespace gtorus::cli
{

inline constexpr const char *tool_version = "0.1.0";
inline constexpr int schema_version = 1;

enum exit_code : int {
    exit_ok = 0,
    exit_partial = 2,
    exit_verify_failed = 3,
    exit_usage = 64,
};

class usage_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

inline std::string strip(const std::string &s)
{
    std::string out;
    for (char c : s) {
        if (c != ' ' && c != '\t') {
            out.push_back(c);
        }
    }
    return out;
}

inline double parse_real(const std::string &s, const std::string &whole)
{
    if (s.empty() || s == "+") {
        return 1.;
    }
    if (s == "-") {
        return -1.;
    }
    std::size_t pos = 0;
    double v = 0.;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != s.size() || !std::isfinite(v)) {
        throw usage_error("cannot parse complex number '" + whole + "'");
    }
    return v;
}

} // namespace detail

// "a+bi", "a-bi", "bi", "i", "a", and the hexagonal point "exp(i*pi/3)".
inline cplx parse_complex(const std::string &text)
{
    const std::string s = detail::strip(text);
    if (s == "exp(i*pi/3)" || s == "exp(pi*i/3)" || s == "e^(i*pi/3)") {
        return hexagonal_tau();
    }
    if (s.empty()) {
        throw usage_error("empty complex number");
    }
    if (s.back() != 'i' && s.back() != 'j') {
        return {detail::parse_real(s, text), 0.};
    }
    const std::string body = s.substr(0, s.size() - 1);
    // split at the last sign that is not a leading sign or part of an exponent
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    std::string im = body, re;
    if (split != std::string::npos) {
        re = body.substr(0, split);
        im = body.substr(split);
    }
    if (!im.empty() && im.back() == '*') {
        im.pop_back();
    }
    return {re.empty() ? 0. : detail::parse_real(re, text), detail::parse_real(im, text)};
}

inline cplx parse_tau(const std::string &text)
{
    const cplx tau = parse_complex(text);
    if (!(tau.imag() > 0.)) {
        throw usage_error("tau must have positive imaginary part (got '" + text + "')");
    }
    return tau;
}

// Comma- or semicolon-separated list of complex numbers.
inline std::vector<cplx> parse_complex_list(const std::string &text)
{
    std::vector<cplx> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == ';') {
            out.push_back(parse_complex(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!detail::strip(cur).empty()) {
        out.push_back(parse_complex(cur));
    }
    if (out.empty()) {
        throw usage_error("empty point list");
    }
    return out;
}

inline std::string fmt(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(cplx v)
{
    std::string im = fmt(v.imag());
    if (im.front() != '-' && im.front() != 'n' && im.front() != 'i') {
        im = "+" + im;
    }
    return fmt(v.real()) + im + "i";
}

inline nlohmann::json to_json(cplx v)
{
    return nlohmann::json::array({v.real(), v.imag()});
}

inline nlohmann::json to_json(const CriticalPointRecord &rec)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto &p : rec.config.points()) {
        pts.push_back({{"z", to_json(p.z)}, {"r", p.r}, {"s", p.s}});
    }
    nlohmann::json j;
    j["kind"] = to_string(rec.kind);
    j["points"] = pts;
    j["B"] = to_json(rec.B);
    j["rs"] = {{"r", to_json(rec.rs.r)},
               {"s", to_json(rec.rs.s)},
               {"real", rec.rs.is_real},
               {"branch", rec.rs.branch},
               {"box", static_cast<int>(rec.rs.box)}};
    j["gradient_residual"] = rec.gradient_residual;
    j["det_numeric"] = rec.det_numeric;
    j["det_closed"] = rec.det_closed;
    j["c_p"] = rec.c_p;
    j["tau_r"] = to_json(rec.tau_r);
    j["tau_s"] = to_json(rec.tau_s);
    j["tau_ratio"] = to_json(rec.tau_ratio);
    j["degeneracy"] = {{"verdict", to_string(rec.degenerate.verdict)}, {"margin", rec.degenerate.margin}};
    return j;
}

} // namespace gtorus::cli

#endif
