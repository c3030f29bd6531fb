#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavewidth/greedy.hpp"
#include "wavewidth/manifold.hpp"
#include "wavewidth/widths.hpp"

namespace wavewidth {

enum class Family { wave, smooth };

inline std::string to_string(Family f) { return f == Family::wave ? "wave" : "smooth"; }

inline Family parse_family(const std::string& name) {
    if (name == "wave") return Family::wave;
    if (name == "smooth") return Family::smooth;
    throw std::invalid_argument("unknown family '" + name + "' (expected wave or smooth)");
}

/// Contrast snapshot exp(-s (t + x + 2)) on the box: strictly positive,
/// analytic in the decay parameter s, with a closed-form Gram. Its width
/// decays superalgebraically, the opposite regime from the wave family.
struct SmoothSnapshot {
    double s = 0.0;

    explicit SmoothSnapshot(double decay) : s(decay) {
        if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("decay parameter must lie in [0,1]");
    }

    double value(const SpaceTimePoint& p) const {
        require_in_closure(p);
        return std::exp(-s * (p.t + p.x + 2.0));
    }
};

/// Exact pairing of two contrast snapshots. With sigma = a + b the integral
/// factorizes into exp(-2 sigma) * (1 - e^-sigma)/sigma * (e^sigma - e^-sigma)/sigma;
/// tiny sigma switches to a fourth-order series to dodge the 0/0, limit 2.
inline double smooth_inner_product(double a, double b) {
    if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
        throw std::domain_error("decay parameters must lie in [0,1]");
    const double sigma = a + b;
    if (sigma < 1e-6) {
        const double s2 = sigma * sigma;
        const double first = 1.0 - sigma / 2.0 + s2 / 6.0 - s2 * sigma / 24.0 + s2 * s2 / 120.0;
        const double second = 2.0 * (1.0 + s2 / 6.0 + s2 * s2 / 120.0);
        return std::exp(-2.0 * sigma) * first * second;
    }
    const double first = -std::expm1(-sigma) / sigma;
    const double second = 2.0 * std::sinh(sigma) / sigma;
    return std::exp(-2.0 * sigma) * first * second;
}

inline double inner_product(const SmoothSnapshot& f, const SmoothSnapshot& g) {
    return smooth_inner_product(f.s, g.s);
}

inline std::string label(const SmoothSnapshot& f) {
    return "smooth(" + detail::format_double(f.s) + ")";
}

/// Uniform parameter grid {i / (size - 1) : 0 <= i < size} over [0, 1].
inline std::vector<double> uniform_parameter_grid(int size) {
    if (size < 2) throw std::invalid_argument("parameter grid needs at least 2 points");
    std::vector<double> grid(size);
    for (int i = 0; i < size; ++i) grid[i] = static_cast<double>(i) / (size - 1);
    return grid;
}

inline GramMatrix family_gram(Family family, int grid_size, unsigned threads = 1) {
    const std::vector<double> params = uniform_parameter_grid(grid_size);
    if (family == Family::wave) {
        std::vector<WaveElement> elems;
        elems.reserve(params.size());
        for (double mu : params) elems.push_back(WaveElement::snapshot(mu));
        return assemble_gram(elems, threads);
    }
    std::vector<SmoothSnapshot> elems;
    elems.reserve(params.size());
    for (double s : params) elems.push_back(SmoothSnapshot(s));
    return assemble_gram(elems, threads);
}

/// One sweep row. lower_packing is NaN (and packing_applicable false) when
/// the proof-chain bound does not apply to this grid/N combination.
struct SweepRow {
    int n = 0;
    double lower_packing = std::numeric_limits<double>::quiet_NaN();
    bool packing_applicable = false;
    double lower_dual = 0.0;
    double upper = 0.0;
    double greedy_error = 0.0;
    double pod_tail = 0.0;
};

struct SweepReport {
    Family family = Family::wave;
    int grid_size = 0;
    std::vector<SweepRow> rows;
    std::optional<DecayFit> fit;  // decay of the upper-bound column; needs >= 4 rows
    MinimaxConfig config;
};

/// Full study over one family: per requested dimension the certified lower
/// bounds, the minimax upper bound, the greedy error at that dimension and
/// the uniformly weighted spectral tail. The packing column is filled only
/// where the hat grid embeds into the parameter grid (wave family with
/// grid_size - 1 divisible by 2N).
inline SweepReport run_sweep(Family family, int grid_size, std::span<const int> n_list,
                             const MinimaxConfig& cfg = {}, unsigned threads = 1) {
    if (n_list.empty()) throw std::invalid_argument("sweep needs at least one dimension");
    int max_n = 0;
    for (int n : n_list) {
        if (n < 1) throw std::invalid_argument("sweep dimensions must be positive");
        max_n = std::max(max_n, n);
    }
    if (grid_size < 2 * max_n + 1)
        throw std::invalid_argument("parameter grid too small for the requested dimensions");
    cfg.validate();

    SweepReport report;
    report.family = family;
    report.grid_size = grid_size;
    report.config = cfg;

    const GramMatrix gram = family_gram(family, grid_size, threads);
    const GreedyTrace trace = strong_greedy(gram, std::min(max_n, gram.size()), 0.0);
    std::vector<double> uniform(gram.size(), 1.0 / gram.size());

    for (int n : n_list) {
        SweepRow row;
        row.n = n;
        const WidthEstimate est = minimax_width(gram, n, cfg);
        row.lower_dual = est.lower_dual;
        row.upper = est.upper;
        row.packing_applicable = family == Family::wave && (grid_size - 1) % (2 * n) == 0;
        if (row.packing_applicable) row.lower_packing = packing_lower_bound(n);
        const int last = static_cast<int>(trace.errors.size()) - 1;
        row.greedy_error = trace.errors[std::min(n, last)];
        // The uniform spectral tail is a dual certificate like lower_dual, so
        // it gets the same round-off guard against the verified upper bound.
        row.pod_tail = std::min(dual_lower_bound(gram, n, uniform), row.upper);
        report.rows.push_back(row);
    }

    // Fit the decay of the upper-bound column. Trailing rows that sit at the
    // residual-arithmetic noise floor carry no decay information and are
    // dropped from the fit window.
    double scale = 0.0;
    for (int i = 0; i < gram.size(); ++i) scale = std::max(scale, gram(i, i));
    const double noise_floor = 3e-7 * std::sqrt(std::max(scale, 0.0));
    std::size_t fit_end = report.rows.size();
    while (fit_end > 0 && report.rows[fit_end - 1].upper < noise_floor) --fit_end;
    if (fit_end >= 4) {
        bool all_positive = true;
        std::vector<double> ns, uppers;
        for (std::size_t i = 0; i < fit_end; ++i) {
            ns.push_back(static_cast<double>(report.rows[i].n));
            uppers.push_back(report.rows[i].upper);
            all_positive = all_positive && report.rows[i].upper > 0.0;
        }
        if (all_positive) report.fit = fit_decay_points(ns, uppers);
    }
    return report;
}

namespace detail {

/// 17 significant digits, scientific, locale-independent.
inline std::string format_sci17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_csv(const SweepReport& report, std::ostream& out) {
    out << "family,grid_size,N,lower_packing,lower_dual,upper,greedy_error,pod_tail\n";
    for (const auto& row : report.rows) {
        out << to_string(report.family) << ',' << report.grid_size << ',' << row.n << ','
            << detail::format_sci17(row.lower_packing) << ','
            << detail::format_sci17(row.lower_dual) << ',' << detail::format_sci17(row.upper)
            << ',' << detail::format_sci17(row.greedy_error) << ','
            << detail::format_sci17(row.pod_tail) << '\n';
    }
}

inline nlohmann::json to_json(const DecayFit& fit) {
    return nlohmann::json{{"algebraic_exponent", fit.algebraic_exponent},
                          {"algebraic_r2", fit.algebraic_r2},
                          {"exponential_rate", fit.exponential_rate},
                          {"exponential_r2", fit.exponential_r2},
                          {"better_model", to_string(fit.better_model)}};
}

inline nlohmann::json to_json(const MinimaxConfig& cfg) {
    return nlohmann::json{{"restarts", cfg.restarts},
                          {"max_iterations", cfg.max_iterations},
                          {"weight_learning_rate", cfg.weight_learning_rate},
                          {"convergence_tol", cfg.convergence_tol},
                          {"seed", cfg.seed}};
}

inline nlohmann::json to_json(const SweepReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json jrow{{"N", row.n},
                            {"lower_dual", row.lower_dual},
                            {"upper", row.upper},
                            {"greedy_error", row.greedy_error},
                            {"pod_tail", row.pod_tail}};
        if (row.packing_applicable)
            jrow["lower_packing"] = row.lower_packing;
        else
            jrow["lower_packing"] = nullptr;
        rows.push_back(jrow);
    }
    nlohmann::json j{{"family", to_string(report.family)},
                     {"grid_size", report.grid_size},
                     {"rows", rows},
                     {"config", to_json(report.config)}};
    if (report.fit)
        j["fit"] = to_json(*report.fit);
    else
        j["fit"] = nullptr;
    return j;
}

inline SweepReport sweep_from_json(const nlohmann::json& j) {
    SweepReport report;
    report.family = parse_family(j.at("family").get<std::string>());
    report.grid_size = j.at("grid_size").get<int>();
    const auto& jcfg = j.at("config");
    report.config.restarts = jcfg.at("restarts").get<int>();
    report.config.max_iterations = jcfg.at("max_iterations").get<int>();
    report.config.weight_learning_rate = jcfg.at("weight_learning_rate").get<double>();
    report.config.convergence_tol = jcfg.at("convergence_tol").get<double>();
    report.config.seed = jcfg.at("seed").get<std::uint64_t>();
    for (const auto& jrow : j.at("rows")) {
        SweepRow row;
        row.n = jrow.at("N").get<int>();
        if (jrow.at("lower_packing").is_null()) {
            row.lower_packing = std::numeric_limits<double>::quiet_NaN();
            row.packing_applicable = false;
        } else {
            row.lower_packing = jrow.at("lower_packing").get<double>();
            row.packing_applicable = true;
        }
        row.lower_dual = jrow.at("lower_dual").get<double>();
        row.upper = jrow.at("upper").get<double>();
        row.greedy_error = jrow.at("greedy_error").get<double>();
        row.pod_tail = jrow.at("pod_tail").get<double>();
        report.rows.push_back(row);
    }
    if (!j.at("fit").is_null()) {
        const auto& jfit = j.at("fit");
        DecayFit fit;
        fit.algebraic_exponent = jfit.at("algebraic_exponent").get<double>();
        fit.algebraic_r2 = jfit.at("algebraic_r2").get<double>();
        fit.exponential_rate = jfit.at("exponential_rate").get<double>();
        fit.exponential_r2 = jfit.at("exponential_r2").get<double>();
        fit.better_model = jfit.at("better_model").get<std::string>() == "algebraic"
                               ? DecayModel::algebraic
                               : DecayModel::exponential;
        report.fit = fit;
    }
    return report;
}

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

inline void emit_report(const SweepReport& report, ReportFormat format, std::ostream& out) {
    if (format == ReportFormat::csv) {
        write_csv(report, out);
    } else {
        out << to_json(report).dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("failed to write report");
}

}  // namespace wavewidth
