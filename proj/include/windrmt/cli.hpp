// SPDX-License-Identifier: MIT
//
// Configuration-driven command layer: JSON configs in, self-describing JSON
// or CSV result files out.  Every output embeds the echoed config, library
// version, and effective seed so a result file alone reproduces the run.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "windrmt/asymptotics.hpp"
#include "windrmt/curves.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/gaussian_field.hpp"
#include "windrmt/logdet.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/partition.hpp"
#include "windrmt/polya.hpp"
#include "windrmt/rng.hpp"
#include "windrmt/sampling.hpp"
#include "windrmt/version.hpp"
#include "windrmt/winding.hpp"

namespace windrmt {

/// Malformed or incomplete configuration (maps to exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string command;

    // ensemble
    double gamma = 1.0;
    double delta = 0.0;
    int n = 1;
    std::vector<int> n_values;  ///< convergence sweep sizes

    // curve
    bool has_curve = false;
    LaurentPolynomial curve_a;
    LaurentPolynomial curve_b;

    // points (angles in turns, i.e. fractions of a full revolution)
    std::vector<double> p_turns, q_turns, p_tilde_turns, q_tilde_turns;

    // monte carlo
    long trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_base = 0;
    bool trace = false;

    // gaussian random field
    std::string grf_kernel = "induced";  ///< "induced" or "user-grid"
    Eigen::MatrixXcd grf_values;
    Eigen::MatrixXcd grf_d1_values;

    QuadratureSpec quadrature;

    std::string output_path;
    std::string format = "json";  ///< "json" or "csv"

    std::string seed_source = "config";
    nlohmann::json echo;  ///< the raw parsed config, embedded in every output
};

namespace detail {

[[nodiscard]] inline Complex point_from_turns(double turns) {
    return std::polar(1.0, kTwoPi * turns);
}

[[nodiscard]] inline std::vector<Complex> points_from_turns(const std::vector<double>& turns) {
    std::vector<Complex> out;
    out.reserve(turns.size());
    for (double t : turns) out.push_back(point_from_turns(t));
    return out;
}

[[nodiscard]] inline LaurentPolynomial poly_from_json(const nlohmann::json& terms,
                                                      const char* name) {
    if (!terms.is_array()) {
        throw ConfigError(std::string("curve.") + name +
                          " must be an array of [exponent, re, im] triples");
    }
    LaurentPolynomial poly;
    for (const auto& term : terms) {
        if (!term.is_array() || term.size() != 3 || !term[0].is_number_integer()) {
            throw ConfigError(std::string("curve.") + name +
                              ": each term must be [integer exponent, re, im]");
        }
        poly.coefficients[term[0].get<int>()] +=
            Complex{term[1].get<double>(), term[2].get<double>()};
    }
    poly.prune();
    return poly;
}

[[nodiscard]] inline std::vector<double> turns_from_json(const nlohmann::json& node,
                                                         const char* name) {
    if (!node.is_array()) {
        throw ConfigError(std::string("points.") + name + " must be an array of turns");
    }
    std::vector<double> out;
    for (const auto& v : node) {
        if (!v.is_number()) {
            throw ConfigError(std::string("points.") + name + " entries must be numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

[[nodiscard]] inline Eigen::MatrixXcd complex_matrix_from_json(const nlohmann::json& node,
                                                               const char* name) {
    if (!node.is_array() || node.empty()) {
        throw ConfigError(std::string("grf.") + name + " must be a non-empty 2D array");
    }
    const std::size_t m = node.size();
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = node[i];
        if (!row.is_array() || row.size() != m) {
            throw ConfigError(std::string("grf.") + name + " must be square");
        }
        for (std::size_t j = 0; j < m; ++j) {
            const auto& cell = row[j];
            if (!cell.is_array() || cell.size() != 2) {
                throw ConfigError(std::string("grf.") + name + " entries must be [re, im]");
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                Complex{cell[0].get<double>(), cell[1].get<double>()};
        }
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline RunConfig parse_run_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    RunConfig cfg;
    cfg.echo = doc;

    if (!doc.contains("command") || !doc["command"].is_string()) {
        throw ConfigError("config requires a string field \"command\"");
    }
    cfg.command = doc["command"].get<std::string>();
    static const std::vector<std::string> kCommands = {
        "exact-partition", "mean-winding", "asymptotic", "montecarlo",
        "grf",             "verify",       "convergence"};
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
        throw ConfigError("unknown command \"" + cfg.command + "\"");
    }

    if (doc.contains("ensemble")) {
        const auto& e = doc["ensemble"];
        if (!e.is_object()) throw ConfigError("ensemble must be an object");
        if (e.contains("gamma")) cfg.gamma = e["gamma"].get<double>();
        if (e.contains("delta")) cfg.delta = e["delta"].get<double>();
        if (e.contains("n")) cfg.n = e["n"].get<int>();
        if (e.contains("n_values")) {
            for (const auto& v : e["n_values"]) cfg.n_values.push_back(v.get<int>());
        }
    }

    if (doc.contains("curve")) {
        const auto& c = doc["curve"];
        if (!c.is_object() || !c.contains("a") || !c.contains("b")) {
            throw ConfigError("curve must be an object with coefficient lists \"a\" and \"b\"");
        }
        cfg.curve_a = detail::poly_from_json(c["a"], "a");
        cfg.curve_b = detail::poly_from_json(c["b"], "b");
        cfg.has_curve = true;
    }

    if (doc.contains("points")) {
        const auto& pt = doc["points"];
        if (!pt.is_object()) throw ConfigError("points must be an object of angle lists");
        if (pt.contains("p")) cfg.p_turns = detail::turns_from_json(pt["p"], "p");
        if (pt.contains("q")) cfg.q_turns = detail::turns_from_json(pt["q"], "q");
        if (pt.contains("p_tilde")) {
            cfg.p_tilde_turns = detail::turns_from_json(pt["p_tilde"], "p_tilde");
        }
        if (pt.contains("q_tilde")) {
            cfg.q_tilde_turns = detail::turns_from_json(pt["q_tilde"], "q_tilde");
        }
    }

    if (doc.contains("mc")) {
        const auto& mc = doc["mc"];
        if (!mc.is_object()) throw ConfigError("mc must be an object");
        if (mc.contains("trials")) cfg.trials = mc["trials"].get<long>();
        if (mc.contains("seed")) cfg.seed = mc["seed"].get<std::uint64_t>();
        if (mc.contains("streams")) cfg.stream_base = mc["streams"].get<std::uint64_t>();
        if (mc.contains("trace")) cfg.trace = mc["trace"].get<bool>();
    }

    if (doc.contains("grf")) {
        const auto& g = doc["grf"];
        if (!g.is_object()) throw ConfigError("grf must be an object");
        if (g.contains("kernel")) cfg.grf_kernel = g["kernel"].get<std::string>();
        if (cfg.grf_kernel != "induced" && cfg.grf_kernel != "user-grid") {
            throw ConfigError("grf.kernel must be \"induced\" or \"user-grid\"");
        }
        if (cfg.grf_kernel == "user-grid") {
            if (!g.contains("values") || !g.contains("d1_values")) {
                throw ConfigError("grf.kernel = user-grid requires \"values\" and "
                                  "\"d1_values\" tables");
            }
            cfg.grf_values = detail::complex_matrix_from_json(g["values"], "values");
            cfg.grf_d1_values = detail::complex_matrix_from_json(g["d1_values"], "d1_values");
        }
    }

    if (doc.contains("quadrature")) {
        const auto& q = doc["quadrature"];
        if (!q.is_object()) throw ConfigError("quadrature must be an object");
        if (q.contains("nodes")) cfg.quadrature.node_count = q["nodes"].get<int>();
        if (q.contains("tolerance")) cfg.quadrature.tolerance = q["tolerance"].get<double>();
    }

    if (doc.contains("output")) {
        const auto& o = doc["output"];
        if (!o.is_object()) throw ConfigError("output must be an object");
        if (o.contains("path")) cfg.output_path = o["path"].get<std::string>();
        if (o.contains("format")) cfg.format = o["format"].get<std::string>();
        if (cfg.format != "json" && cfg.format != "csv") {
            throw ConfigError("output.format must be \"json\" or \"csv\"");
        }
    }
    return cfg;
}

[[nodiscard]] inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(doc);
}

/// WINDING_RMT_SEED overrides the config seed when set.
inline void apply_seed_override(RunConfig& cfg) {
    const char* env = std::getenv("WINDING_RMT_SEED");
    if (env == nullptr || *env == '\0') return;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        throw ConfigError("WINDING_RMT_SEED must be a non-negative integer, got \"" +
                          std::string(env) + "\"");
    }
    cfg.seed = static_cast<std::uint64_t>(value);
    cfg.seed_source = "env";
}

// ---------------------------------------------------------------------------
// Result document
// ---------------------------------------------------------------------------

struct ResultTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct ResultDoc {
    nlohmann::json summary = nlohmann::json::object();
    std::vector<ResultTable> tables;
    std::vector<std::string> console;  ///< lines echoed to stdout (verify)
    int exit_code = 0;
};

namespace detail {

[[nodiscard]] inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[nodiscard]] inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

[[nodiscard]] inline CurvePair build_curve(const RunConfig& cfg) {
    if (!cfg.has_curve) {
        throw ValidationError("command \"" + cfg.command + "\" requires a curve");
    }
    return validate_curve(cfg.curve_a, cfg.curve_b);
}

[[nodiscard]] inline PointPairs build_points(const RunConfig& cfg) {
    PointPairs pts;
    pts.p = points_from_turns(cfg.p_turns);
    pts.q = points_from_turns(cfg.q_turns);
    pts.p_tilde = points_from_turns(cfg.p_tilde_turns);
    pts.q_tilde = points_from_turns(cfg.q_tilde_turns);
    return pts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------------

namespace detail {

[[nodiscard]] inline ResultDoc run_exact_partition(const RunConfig& cfg) {
    const CurvePair curve = build_curve(cfg);
    const PointPairs pts = build_points(cfg);
    if (pts.m1() + pts.m2() == 0) {
        throw ValidationError("exact-partition requires at least one point pair");
    }
    const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, cfg.n};
    const PartitionResult result = partition_general(curve, pts, hw, cfg.quadrature);
    ResultDoc doc;
    doc.summary["value_re"] = result.value.real();
    doc.summary["value_im"] = result.value.imag();
    doc.summary["log_abs"] = result.log_abs;
    doc.summary["condition_estimate"] = result.condition_estimate;
    doc.summary["m1"] = pts.m1();
    doc.summary["m2"] = pts.m2();
    return doc;
}

[[nodiscard]] inline ResultDoc run_mean_winding(const RunConfig& cfg) {
    const CurvePair curve = build_curve(cfg);
    const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, cfg.n};
    ResultDoc doc;
    doc.summary["exact_mean"] = mean_winding_exact(curve, hw, cfg.quadrature);
    doc.summary["n"] = cfg.n;
    return doc;
}

[[nodiscard]] inline ResultDoc run_asymptotic(const RunConfig& cfg) {
    const CurvePair curve = build_curve(cfg);
    const AsymptoticBreakdown breakdown =
        theorem2_mean(curve, cfg.gamma, cfg.delta, cfg.n, cfg.quadrature);
    ResultDoc doc;
    doc.summary["leading_coefficient"] = breakdown.leading_coefficient;
    doc.summary["subleading_value"] = breakdown.subleading_value;
    doc.summary["n"] = breakdown.n;
    doc.summary["assembled"] = breakdown.assembled;
    return doc;
}

inline void append_trace_table(const RunConfig& cfg, const CurvePair& curve, ResultDoc& doc) {
    RandomStream rs{cfg.seed, cfg.stream_base};
    const bool gaussian = (cfg.gamma == 1.0 && cfg.delta == 0.0);
    Eigen::MatrixXcd k1, k2;
    std::vector<Complex> eigs;
    if (gaussian) {
        k1 = sample_ginue(cfg.n, rs);
        k2 = sample_ginue(cfg.n, rs);
    } else {
        const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, cfg.n};
        eigs = sample_hat_eigenvalues(hw, rs);
    }
    const int m = cfg.quadrature.node_count;
    std::vector<LogComplex> values;
    values.reserve(static_cast<std::size_t>(m) + 1);
    double max_log = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= m; ++j) {  // closed curve: repeat the first node
        const Complex p = std::polar(1.0, kTwoPi * static_cast<double>(j % m) / m);
        const CurveFrame f = curve_frame(curve, p);
        LogComplex det = LogComplex::from(Complex{1.0, 0.0});
        if (gaussian) {
            det = log_det(f.a * k1 + f.b * k2);
        } else {
            for (const Complex& z : eigs) det *= LogComplex::from(f.a + f.b * z);
        }
        if (!det.is_zero()) max_log = std::max(max_log, det.logmag);
        values.push_back(det);
    }
    ResultTable table;
    table.name = "trace";
    table.columns = {"node", "theta", "re", "im"};
    for (int j = 0; j <= m; ++j) {
        const double theta = kTwoPi * static_cast<double>(j) / m;
        const LogComplex& det = values[static_cast<std::size_t>(j)];
        const Complex scaled =
            det.is_zero() ? Complex{0.0, 0.0} : det.unit * std::exp(det.logmag - max_log);
        table.rows.push_back({std::to_string(j), fmt_double(theta), fmt_double(scaled.real()),
                              fmt_double(scaled.imag())});
    }
    doc.summary["trace_log_scale"] = max_log;
    doc.tables.push_back(std::move(table));
}

[[nodiscard]] inline ResultDoc run_montecarlo(const RunConfig& cfg, int threads) {
    const CurvePair curve = build_curve(cfg);
    ResultDoc doc;
    HatWeight hw{MBParams{cfg.gamma, cfg.delta}, cfg.n};
    const bool gaussian = (cfg.gamma == 1.0 && cfg.delta == 0.0);
    const Ensemble ensemble = gaussian ? Ensemble::ginue() : Ensemble::mb(hw);
    RandomStream stream{cfg.seed, cfg.stream_base};
    const WindingEstimate estimate = mc_mean_winding(curve, ensemble, cfg.n, cfg.trials, stream,
                                                     cfg.quadrature, threads);
    doc.summary["mean"] = estimate.mean;
    doc.summary["std_error"] = estimate.std_error;
    doc.summary["trials"] = estimate.trials;
    doc.summary["discarded"] = estimate.discarded;
    doc.summary["ensemble"] = gaussian ? "ginue" : "mb";
    if (!estimate.warning.empty()) doc.summary["warning"] = estimate.warning;

    ResultTable hist;
    hist.name = "histogram";
    hist.columns = {"winding", "count"};
    for (const auto& [w, count] : estimate.histogram) {
        hist.rows.push_back({std::to_string(w), std::to_string(count)});
    }
    doc.tables.push_back(std::move(hist));
    if (cfg.trace) append_trace_table(cfg, curve, doc);
    return doc;
}

[[nodiscard]] inline ResultDoc run_grf(const RunConfig& cfg) {
    ResultDoc doc;
    CovarianceKernel kernel;
    if (cfg.grf_kernel == "induced") {
        kernel = induced_kernel(build_curve(cfg));
    } else {
        kernel = user_grid_kernel(cfg.grf_values, cfg.grf_d1_values);
    }
    doc.summary["kernel"] = cfg.grf_kernel;
    doc.summary["mean_winding"] = grf_mean_winding(kernel, cfg.n, cfg.quadrature);
    if (!cfg.p_turns.empty() && !cfg.q_turns.empty()) {
        const Complex p = point_from_turns(cfg.p_turns.front());
        const Complex q = point_from_turns(cfg.q_turns.front());
        const Complex z1 = grf_partition(kernel, p, q, cfg.n);
        doc.summary["partition_re"] = z1.real();
        doc.summary["partition_im"] = z1.imag();
        if (cfg.trials > 0) {
            RandomStream stream{cfg.seed, cfg.stream_base};
            const GrfCheck check = grf_mc_check(kernel, p, q, cfg.n, cfg.trials, stream);
            doc.summary["mc_value_re"] = check.mc_value.real();
            doc.summary["mc_value_im"] = check.mc_value.imag();
            doc.summary["mc_std_error"] = check.std_error;
            doc.summary["mc_deviation"] = std::abs(check.mc_value - check.closed_form);
            if (!check.warning.empty()) doc.summary["warning"] = check.warning;
        }
    }
    return doc;
}

[[nodiscard]] inline ResultDoc run_convergence(const RunConfig& cfg) {
    const CurvePair curve = build_curve(cfg);
    std::vector<int> sizes = cfg.n_values;
    if (sizes.empty()) sizes = {50, 100, 200, 400};
    const double leading = aa_phase(curve, cfg.gamma, cfg.quadrature);
    const double subleading = subleading_term(curve, cfg.gamma, cfg.delta, cfg.quadrature);
    ResultTable table;
    table.name = "convergence";
    table.columns = {"n", "exact", "asymptotic", "gap"};
    for (int n : sizes) {
        const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, n};
        const double exact = mean_winding_exact(curve, hw, cfg.quadrature);
        const double asymptotic = leading * static_cast<double>(n) + subleading;
        table.rows.push_back({std::to_string(n), fmt_double(exact), fmt_double(asymptotic),
                              fmt_double(std::fabs(exact - asymptotic))});
    }
    ResultDoc doc;
    doc.summary["leading_coefficient"] = leading;
    doc.summary["subleading_value"] = subleading;
    doc.tables.push_back(std::move(table));
    return doc;
}

/// One pass/fail line per exact invariant; exit code 1 if anything fails.
[[nodiscard]] inline ResultDoc run_verify(const RunConfig& cfg) {
    ResultDoc doc;
    ResultTable table;
    table.name = "checks";
    table.columns = {"check", "status", "detail"};
    bool all_pass = true;
    auto record = [&](const std::string& name, bool pass, const std::string& detail) {
        table.rows.push_back({name, pass ? "pass" : "FAIL", detail});
        doc.console.push_back((pass ? "pass  " : "FAIL  ") + name +
                              (detail.empty() ? "" : "  (" + detail + ")"));
        all_pass = all_pass && pass;
    };
    auto run_check = [&](const std::string& name, auto&& body) {
        try {
            const std::pair<bool, std::string> result = body();
            record(name, result.first, result.second);
        } catch (const std::exception& e) {
            record(name, false, e.what());
        }
    };

    const CurvePair curve = cfg.has_curve
                                ? validate_curve(cfg.curve_a, cfg.curve_b)
                                : validate_curve(
                                      LaurentPolynomial::from_terms(
                                          {{1, Complex{1.0, 0.0}}, {0, Complex{0.4, -0.1}}}),
                                      LaurentPolynomial::from_terms(
                                          {{0, Complex{1.0, 0.0}}, {-1, Complex{-0.3, 0.0}}}));
    RandomStream rs{cfg.seed == 0 ? 20260814 : cfg.seed, 977};

    run_check("partition equals one at coincident points", [&]() {
        for (int trial = 0; trial < 20; ++trial) {
            const double gamma = rs.uniform(0.7, 2.2);
            const double delta = rs.uniform(-0.2, 1.5);
            const int n = 1 + static_cast<int>(rs.uniform(0.0, 9.0));
            const HatWeight hw{MBParams{gamma, delta}, n};
            PointPairs pts;
            pts.p = {std::polar(1.0, rs.uniform(0.0, kTwoPi))};
            pts.q = pts.p;
            const PartitionResult z = partition_m(curve, pts, hw);
            if (z.value != Complex{1.0, 0.0}) {
                return std::pair{false, std::string("Z(p,p) != 1")};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("upsilon complementary symmetry", [&]() {
        const HatWeight hw{MBParams{1.3, 0.4}, 9};
        for (int trial = 0; trial < 10; ++trial) {
            const Complex u = std::polar(rs.uniform(0.3, 2.5), rs.uniform(0.0, kTwoPi));
            const Complex total = upsilon(u, u, hw) + upsilon(1.0 / u, 1.0 / u, hw);
            if (std::abs(total - Complex{9.0, 0.0}) > 1e-10 * 9.0) {
                return std::pair{false, std::string("|sum - N| too large")};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("upsilon reflection identity", [&]() {
        const HatWeight hw{MBParams{1.7, 0.8}, 7};
        for (int trial = 0; trial < 10; ++trial) {
            const Complex u = std::polar(rs.uniform(0.5, 2.0), rs.uniform(0.0, kTwoPi));
            const Complex v = std::polar(rs.uniform(0.5, 2.0), rs.uniform(0.0, kTwoPi));
            if (std::abs(u - v) < 1e-3) continue;
            const Complex w = u / v;
            const Complex wn = std::pow(w, 7);
            const Complex lhs = upsilon(u, v, hw);
            const Complex rhs =
                w * ((wn - 1.0) / (w - 1.0) - wn * upsilon(1.0 / u, 1.0 / v, hw));
            if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(lhs))) {
                return std::pair{false, std::string("reflection mismatch")};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("moment reflection M(k) = M(N+1-k)", [&]() {
        const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, 11};
        for (int k = 1; k <= 11; ++k) {
            const double lhs = hw.mellin(static_cast<double>(k));
            const double rhs = hw.mellin(static_cast<double>(12 - k));
            if (std::fabs(lhs - rhs) > 1e-10 * std::fabs(lhs)) {
                return std::pair{false, "k = " + std::to_string(k)};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("weight reflection w(1/x) = x^{N+1} w(x)", [&]() {
        const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, 6};
        for (int trial = 0; trial < 10; ++trial) {
            const double x = std::exp(rs.uniform(-2.0, 2.0));
            const double lhs = hw.evaluate(1.0 / x);
            const double rhs = std::pow(x, 7) * hw.evaluate(x);
            if (std::fabs(lhs - rhs) > 1e-10 * std::fabs(lhs)) {
                return std::pair{false, "x = " + fmt_double(x)};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("incomplete ratio reflection r(k,A) + r(N+1-k,1/A) = 1", [&]() {
        const HatWeight hw{MBParams{cfg.gamma, cfg.delta}, 8};
        for (int trial = 0; trial < 10; ++trial) {
            const int k = 1 + static_cast<int>(rs.uniform(0.0, 8.0));
            const double a = std::exp(rs.uniform(-2.0, 2.0));
            const double total = hw.incomplete_mellin_ratio(k, a) +
                                 hw.incomplete_mellin_ratio(9 - k, 1.0 / a);
            if (std::fabs(total - 1.0) > 1e-10) {
                return std::pair{false, "k = " + std::to_string(k)};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("incomplete beta reflection I_x(a,b) = 1 - I_{1-x}(b,a)", [&]() {
        for (int trial = 0; trial < 20; ++trial) {
            const double a = rs.uniform(0.2, 5.0);
            const double b = rs.uniform(0.2, 5.0);
            const double x = rs.uniform(0.01, 0.99);
            const double lhs = regularized_incomplete_beta(x, a, b);
            const double rhs = 1.0 - regularized_incomplete_beta(1.0 - x, b, a);
            if (std::fabs(lhs - rhs) > 1e-12) {
                return std::pair{false, "x = " + fmt_double(x)};
            }
        }
        return std::pair{true, std::string{}};
    });

    run_check("winding integer-valued and rescale-invariant", [&]() {
        RandomStream local{rs.seed, 1044};
        const Eigen::MatrixXcd k1 = sample_ginue(4, local);
        const Eigen::MatrixXcd k2 = sample_ginue(4, local);
        QuadratureSpec spec;
        spec.node_count = 256;
        const int w1 = winding_realization_matrices(k1, k2, curve, spec);
        const int w2 = winding_realization_matrices(
            Eigen::MatrixXcd(0.37 * k1), Eigen::MatrixXcd(0.37 * k2), curve, spec);
        if (w1 != w2) return std::pair{false, std::string("rescaling changed the winding")};
        return std::pair{true, std::string{}};
    });

    doc.summary["all_pass"] = all_pass;
    doc.summary["checks"] = table.rows.size();
    doc.tables.push_back(std::move(table));
    doc.exit_code = all_pass ? 0 : 1;
    return doc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Output rendering
// ---------------------------------------------------------------------------

namespace detail {

[[nodiscard]] inline std::string render_json(const RunConfig& cfg, const ResultDoc& doc) {
    nlohmann::json root;
    root["version"] = kVersion;
    root["command"] = cfg.command;
    root["config"] = cfg.echo;
    root["seed"] = {{"value", cfg.seed}, {"source", cfg.seed_source}};
    root["timestamp"] = utc_timestamp();
    nlohmann::json results;
    results["summary"] = doc.summary;
    for (const ResultTable& table : doc.tables) {
        nlohmann::json t;
        t["columns"] = table.columns;
        t["rows"] = table.rows;
        results[table.name] = t;
    }
    root["results"] = results;
    return root.dump(2) + "\n";
}

[[nodiscard]] inline std::string render_csv(const RunConfig& cfg, const ResultDoc& doc) {
    std::ostringstream out;
    out << "# windrmt " << kVersion << "\n";
    out << "# command: " << cfg.command << "\n";
    out << "# seed: " << cfg.seed << " (" << cfg.seed_source << ")\n";
    out << "# timestamp: " << utc_timestamp() << "\n";
    out << "# config: " << cfg.echo.dump() << "\n";
    out << "table,summary\nkey,value\n";
    for (const auto& [key, value] : doc.summary.items()) {
        out << key << ",";
        if (value.is_string()) {
            out << value.get<std::string>();
        } else if (value.is_number_float()) {
            out << fmt_double(value.get<double>());
        } else {
            out << value.dump();
        }
        out << "\n";
    }
    for (const ResultTable& table : doc.tables) {
        out << "\ntable," << table.name << "\n";
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "\n");
        }
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << row[i] << (i + 1 < row.size() ? "," : "\n");
            }
        }
    }
    return out.str();
}

}  // namespace detail

/// Execute the configured command and write the result artifact.  Returns
/// the process exit code (0 on success; verify returns 1 when a check
/// fails).  Throws for config, validation, and numerical failures.
[[nodiscard]] inline int run_command(RunConfig cfg, int threads = 1,
                                     const std::string& output_override = {}) {
    apply_seed_override(cfg);
    if (threads < 1) throw ConfigError("--threads must be >= 1");
    cfg.quadrature.validate();

    ResultDoc doc;
    if (cfg.command == "exact-partition") {
        doc = detail::run_exact_partition(cfg);
    } else if (cfg.command == "mean-winding") {
        doc = detail::run_mean_winding(cfg);
    } else if (cfg.command == "asymptotic") {
        doc = detail::run_asymptotic(cfg);
    } else if (cfg.command == "montecarlo") {
        doc = detail::run_montecarlo(cfg, threads);
    } else if (cfg.command == "grf") {
        doc = detail::run_grf(cfg);
    } else if (cfg.command == "convergence") {
        doc = detail::run_convergence(cfg);
    } else if (cfg.command == "verify") {
        doc = detail::run_verify(cfg);
    } else {
        throw ConfigError("unknown command \"" + cfg.command + "\"");
    }

    std::string path = output_override.empty() ? cfg.output_path : output_override;
    if (path.empty()) path = "windrmt-" + cfg.command + (cfg.format == "csv" ? ".csv" : ".json");
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << (cfg.format == "csv" ? detail::render_csv(cfg, doc) : detail::render_json(cfg, doc));
    out.close();

    for (const std::string& line : doc.console) std::cout << line << "\n";
    std::cout << cfg.command << ": wrote " << path << "\n";
    return doc.exit_code;
}

// ---------------------------------------------------------------------------
// Plot-script emission
// ---------------------------------------------------------------------------

namespace detail {

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    long row_count = 0;
};

[[nodiscard]] inline std::vector<CsvTable> scan_csv_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open result file: " + path);
    std::vector<CsvTable> tables;
    std::string line;
    bool expect_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!cells.empty() && cells.front() == "table" && cells.size() == 2) {
            tables.push_back(CsvTable{cells[1], {}, 0});
            expect_header = true;
        } else if (expect_header && !tables.empty()) {
            tables.back().columns = cells;
            expect_header = false;
        } else if (!tables.empty()) {
            ++tables.back().row_count;
        }
    }
    return tables;
}

inline constexpr const char* kPlotPreamble = R"PY(#!/usr/bin/env python3
# Self-contained plot script generated by windrmt; reads only the CSV below.
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = CSV_PATH_TOKEN


def read_tables(path):
    tables = {}
    name, header = None, None
    with open(path, newline="") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            if cells[0] == "table" and len(cells) == 2:
                name, header = cells[1], None
                tables[name] = []
                continue
            if name is None:
                continue
            if header is None:
                header = cells
                continue
            tables[name].append(dict(zip(header, cells)))
    return tables


tables = read_tables(CSV_PATH)
stem = os.path.splitext(os.path.basename(CSV_PATH))[0]
)PY";

}  // namespace detail

/// Generate a plotting script for a recognized CSV result file.  Recognized
/// table schemas: histogram (winding, count), convergence (n, exact,
/// asymptotic, gap), trace (node, theta, re, im).  Anything else is a schema
/// mismatch.
inline void emit_plot_script(const std::string& result_path, const std::string& script_path) {
    const std::vector<detail::CsvTable> tables = detail::scan_csv_tables(result_path);
    bool has_histogram = false, has_convergence = false, has_trace = false;
    for (const detail::CsvTable& t : tables) {
        if (t.name == "histogram" &&
            t.columns == std::vector<std::string>{"winding", "count"}) {
            has_histogram = true;
        }
        if (t.name == "convergence" &&
            t.columns == std::vector<std::string>{"n", "exact", "asymptotic", "gap"}) {
            has_convergence = true;
        }
        if (t.name == "trace" &&
            t.columns == std::vector<std::string>{"node", "theta", "re", "im"}) {
            has_trace = true;
        }
    }
    if (!has_histogram && !has_convergence && !has_trace) {
        throw ValidationError("emit_plot_script: no recognized table schema in " + result_path +
                              " (expected histogram, convergence, or trace)");
    }

    std::ostringstream py;
    std::string preamble = detail::kPlotPreamble;
    const std::string placeholder = "CSV_PATH_TOKEN";
    const std::size_t at = preamble.find(placeholder);
    preamble.replace(at, placeholder.size(), "\"" + result_path + "\"");
    py << preamble;

    if (has_histogram) {
        py << R"PY(
rows = tables["histogram"]
w = [int(r["winding"]) for r in rows]
c = [int(r["count"]) for r in rows]
fig, ax = plt.subplots(figsize=(5, 3.2))
ax.bar(w, c, color="#4878cf", width=0.8)
ax.set_xlabel("winding number")
ax.set_ylabel("count")
ax.set_title("winding-number histogram")
fig.savefig(stem + "-histogram.png", dpi=160, bbox_inches="tight")
plt.close(fig)
)PY";
    }
    if (has_convergence) {
        py << R"PY(
rows = tables["convergence"]
n = [int(r["n"]) for r in rows]
gap = [float(r["gap"]) for r in rows]
fig, ax = plt.subplots(figsize=(5, 3.2))
ax.semilogy(n, gap, "o-", color="#d65f5f")
ax.set_xlabel("matrix size N")
ax.set_ylabel("|exact - asymptotic|")
ax.set_title("asymptotic gap vs N")
fig.savefig(stem + "-convergence.png", dpi=160, bbox_inches="tight")
plt.close(fig)
)PY";
    }
    if (has_trace) {
        py << R"PY(
rows = tables["trace"]
re = [float(r["re"]) for r in rows]
im = [float(r["im"]) for r in rows]
fig, ax = plt.subplots(figsize=(4.2, 4.2))
ax.plot(re, im, "-", color="#4878cf", lw=1.0)
ax.plot([0.0], [0.0], "k+", markersize=12, markeredgewidth=2)
ax.set_xlabel("Re det")
ax.set_ylabel("Im det")
ax.set_title("determinantal curve (scaled)")
ax.set_aspect("equal", adjustable="datalim")
fig.savefig(stem + "-trace.png", dpi=160, bbox_inches="tight")
plt.close(fig)
)PY";
    }

    std::ofstream out(script_path);
    if (!out) throw ValidationError("cannot open script output: " + script_path);
    out << py.str();
}

}  // namespace windrmt
