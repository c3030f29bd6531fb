// Command-line driver for the width studies: Gram export, packing-bound
// verification, width sweeps, greedy traces and weak-residual checks.
// Exit codes: 0 success, 2 usage error, 1 numerical or I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavewidth/wavewidth.hpp"

namespace {

struct Options {
    std::string family = "wave";
    int grid = 33;
    int nmax = 8;
    std::uint64_t seed = 42;
    double tol = 1e-8;
    std::string format = "csv";
    std::string out = "-";
    unsigned threads = wavewidth::default_thread_count();
    double mu = 0.5;
    int bumps = 20;
    int quad = 64;
};

class OutputStream {
public:
    explicit OutputStream(const std::string& destination) {
        if (destination != "-") {
            file_.open(destination);
            if (!file_) throw std::runtime_error("cannot open output file: " + destination);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }
    void finish() {
        get().flush();
        if (!get()) throw std::runtime_error("failed to write output");
    }

private:
    std::ofstream file_;
};

std::string fmt(double v) { return wavewidth::detail::format_sci17(v); }

int cmd_gram(const Options& opt) {
    const wavewidth::GramMatrix gram =
        wavewidth::family_gram(wavewidth::parse_family(opt.family), opt.grid, opt.threads);
    OutputStream out(opt.out);
    if (opt.format == "csv") {
        for (int i = 0; i < gram.size(); ++i) {
            for (int j = 0; j < gram.size(); ++j)
                out.get() << (j ? "," : "") << fmt(gram(i, j));
            out.get() << '\n';
        }
    } else {
        nlohmann::json entries = nlohmann::json::array();
        for (int i = 0; i < gram.size(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < gram.size(); ++j) row.push_back(gram(i, j));
            entries.push_back(row);
        }
        nlohmann::json j{{"family", opt.family},
                         {"grid_size", opt.grid},
                         {"labels", gram.labels},
                         {"entries", entries}};
        out.get() << j.dump(2) << '\n';
    }
    out.finish();
    return 0;
}

int cmd_bound_check(const Options& opt) {
    OutputStream out(opt.out);
    if (opt.format == "csv") {
        out.get() << "N,packing_bound,chain_verified\n";
        for (int n = 1; n <= opt.nmax; ++n) {
            const wavewidth::PackingChain chain = wavewidth::verify_packing_chain(n);
            out.get() << n << ',' << fmt(chain.value) << ','
                      << (chain.verified ? "true" : "false") << '\n';
        }
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (int n = 1; n <= opt.nmax; ++n) {
            const wavewidth::PackingChain chain = wavewidth::verify_packing_chain(n);
            rows.push_back({{"N", n},
                            {"packing_bound", chain.value},
                            {"chain_verified", chain.verified}});
        }
        out.get() << rows.dump(2) << '\n';
    }
    out.finish();
    return 0;
}

int cmd_sweep(const Options& opt) {
    std::vector<int> n_list(opt.nmax);
    std::iota(n_list.begin(), n_list.end(), 1);
    wavewidth::MinimaxConfig cfg;
    cfg.seed = opt.seed;
    cfg.convergence_tol = opt.tol;
    const wavewidth::SweepReport report = wavewidth::run_sweep(
        wavewidth::parse_family(opt.family), opt.grid, n_list, cfg, opt.threads);
    OutputStream out(opt.out);
    wavewidth::emit_report(report, wavewidth::parse_report_format(opt.format), out.get());
    out.finish();
    return 0;
}

int cmd_greedy(const Options& opt) {
    const wavewidth::GramMatrix gram =
        wavewidth::family_gram(wavewidth::parse_family(opt.family), opt.grid, opt.threads);
    const wavewidth::GreedyTrace trace = wavewidth::strong_greedy(gram, opt.nmax, opt.tol);
    OutputStream out(opt.out);
    if (opt.format == "csv") {
        out.get() << "N,selected_index,error\n";
        out.get() << "0,," << fmt(trace.errors[0]) << '\n';
        for (std::size_t i = 0; i < trace.selected_indices.size(); ++i)
            out.get() << (i + 1) << ',' << trace.selected_indices[i] << ','
                      << fmt(trace.errors[i + 1]) << '\n';
    } else {
        nlohmann::json j{{"family", opt.family},
                         {"grid_size", opt.grid},
                         {"n_max", trace.n_max},
                         {"selected_indices", trace.selected_indices},
                         {"errors", trace.errors}};
        out.get() << j.dump(2) << '\n';
    }
    out.finish();
    return 0;
}

int cmd_residual(const Options& opt) {
    wavewidth::SplitMix64 rng = wavewidth::SplitMix64::derived(opt.seed, 0);
    const wavewidth::WaveSnapshot snapshot(opt.mu);
    OutputStream out(opt.out);
    nlohmann::json rows = nlohmann::json::array();
    if (opt.format == "csv")
        out.get() << "index,center_t,center_x,radius_t,radius_x,residual\n";
    for (int i = 0; i < opt.bumps; ++i) {
        const wavewidth::BumpTestFunction bump = wavewidth::sample_interior_bump(rng);
        const double r = wavewidth::weak_residual(snapshot, bump, opt.mu, opt.quad);
        if (opt.format == "csv") {
            out.get() << i << ',' << fmt(bump.center_t) << ',' << fmt(bump.center_x) << ','
                      << fmt(bump.radius_t) << ',' << fmt(bump.radius_x) << ',' << fmt(r)
                      << '\n';
        } else {
            rows.push_back({{"index", i},
                            {"center_t", bump.center_t},
                            {"center_x", bump.center_x},
                            {"radius_t", bump.radius_t},
                            {"radius_x", bump.radius_x},
                            {"residual", r}});
        }
    }
    if (opt.format != "csv") out.get() << rows.dump(2) << '\n';
    out.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Width bounds and reduced-basis studies for a parametrized wave family"};
    app.require_subcommand(1);
    Options opt;

    const auto family_check = CLI::IsMember({"wave", "smooth"});
    const auto format_check = CLI::IsMember({"csv", "json"});

    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--format", opt.format, "Output format")->check(format_check);
        cmd->add_option("--out", opt.out, "Output path, or - for stdout");
    };
    auto add_threads = [&](CLI::App* cmd) {
        cmd->add_option("--threads", opt.threads, "Worker threads for Gram assembly")
            ->check(CLI::Range(1u, 1024u));
    };

    CLI::App* gram = app.add_subcommand("gram", "Emit the Gram matrix of a snapshot family");
    gram->add_option("--family", opt.family, "Snapshot family")->check(family_check);
    gram->add_option("--grid", opt.grid, "Uniform parameter grid size")->check(CLI::Range(2, 100000));
    add_output(gram);
    add_threads(gram);

    CLI::App* bound = app.add_subcommand("bound-check",
                                         "Verify the packing bound chain for N = 1..nmax");
    bound->add_option("--nmax", opt.nmax, "Largest dimension")->check(CLI::Range(1, 100000));
    add_output(bound);

    CLI::App* sweep = app.add_subcommand("sweep", "Width bound sweep over N = 1..nmax");
    sweep->add_option("--family", opt.family, "Snapshot family")->check(family_check);
    sweep->add_option("--grid", opt.grid, "Uniform parameter grid size")->check(CLI::Range(2, 100000));
    sweep->add_option("--nmax", opt.nmax, "Largest dimension")->check(CLI::Range(1, 100000));
    sweep->add_option("--seed", opt.seed, "Random seed for the minimax restarts");
    sweep->add_option("--tol", opt.tol, "Weight-ascent convergence tolerance")
        ->check(CLI::PositiveNumber);
    add_output(sweep);
    add_threads(sweep);

    CLI::App* greedy = app.add_subcommand("greedy", "Strong greedy reduced-basis trace");
    greedy->add_option("--family", opt.family, "Snapshot family")->check(family_check);
    greedy->add_option("--grid", opt.grid, "Uniform parameter grid size")->check(CLI::Range(2, 100000));
    greedy->add_option("--nmax", opt.nmax, "Selection budget")->check(CLI::Range(1, 100000));
    greedy->add_option("--tol", opt.tol, "Stop once the worst residual drops below this")
        ->check(CLI::PositiveNumber);
    add_output(greedy);
    add_threads(greedy);

    CLI::App* residual = app.add_subcommand(
        "residual", "Weak residuals of a snapshot against random interior test functions");
    residual->add_option("--mu", opt.mu, "Wave speed")->check(CLI::Range(0.0, 1.0));
    residual->add_option("--bumps", opt.bumps, "Number of sampled test functions")
        ->check(CLI::Range(1, 100000));
    residual->add_option("--quad", opt.quad, "Quadrature points per axis per piece")
        ->check(CLI::Range(8, 4096));
    residual->add_option("--seed", opt.seed, "Random seed for the test functions");
    add_output(residual);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    // Cross-option constraints are usage errors too.
    if (sweep->parsed() && opt.grid < 2 * opt.nmax + 1) {
        std::cerr << "error: sweep needs --grid >= 2*nmax + 1\n";
        return 2;
    }
    if (greedy->parsed() && opt.nmax > opt.grid) {
        std::cerr << "error: greedy needs --nmax <= --grid\n";
        return 2;
    }

    try {
        if (gram->parsed()) return cmd_gram(opt);
        if (bound->parsed()) return cmd_bound_check(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (greedy->parsed()) return cmd_greedy(opt);
        if (residual->parsed()) return cmd_residual(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
