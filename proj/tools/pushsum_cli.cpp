// Command-line front end: reproduces the bound tables, Monte Carlo error
// curves, coefficient histograms, the push-sum vs consensus speed
// comparison, and the numerical fixed point of the two-node invariance
// equation. Every output CSV carries its full configuration as '#' header
// lines; a fixed (config, seed) pair reproduces files byte for byte.

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pushsum/csv.hpp"
#include "pushsum/experiments.hpp"
#include "pushsum/markov.hpp"
#include "pushsum/measure.hpp"
#include "pushsum/version.hpp"

namespace {

using namespace pushsum;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

void write_provenance(CsvWriter& csv, const CLI::App& cmd) {
    csv.comment(std::string("pushsum ") + kVersion);
    csv.comment("command=" + cmd.get_name());
    std::istringstream config(cmd.config_to_str(true, false));
    for (std::string line; std::getline(config, line);) {
        if (line.empty()) continue;
        // Output locations are not part of the scientific configuration and
        // would break byte-reproducibility across destinations.
        const std::string key = line.substr(0, line.find('='));
        if (key == "out" || key == "samples-out" || key == "cells-out" || key == "summary-out")
            continue;
        csv.comment(line);
    }
}

void write_plot_script(const std::string& out, const std::string& plot_body, const std::string& ylabel,
                       const std::string& xlabel) {
    std::ofstream gp = open_output(out + ".gp");
    gp << "set datafile separator ','\n"
       << "set datafile missing ''\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << out << ".png'\n"
       << "set xlabel '" << xlabel << "'\n"
       << "set ylabel '" << ylabel << "'\n"
       << "set key top left\n"
       << plot_body << '\n';
}

struct CommonOpts {
    std::string out;
    std::uint64_t seed = 1;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_seed = true) {
    cmd->add_option("--out", opts.out, "output CSV path")->required();
    if (with_seed) cmd->add_option("--seed", opts.seed, "base seed; all trial streams derive from it");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = all hardware threads)");
}

int cmd_bounds(const CLI::App& cmd, const CommonOpts& opts, double p_min, double p_max, double p_step,
               int series_terms) {
    const std::vector<double> grid = linear_grid(p_min, p_max, p_step);
    const std::vector<BoundSet> rows = bounds_table(grid, series_terms);

    std::ofstream file = open_output(opts.out);
    CsvWriter csv(file);
    write_provenance(csv, cmd);
    csv.header({"p", "gamma", "lower_closed", "lower_series", "upper_general", "upper_highp"});
    for (const BoundSet& b : rows) {
        csv.field(b.p).field(b.gamma).field(b.lower_closed).field(b.lower_series).field(b.upper_general);
        csv.field(b.upper_highp);
        csv.end_row();
    }
    write_plot_script(opts.out,
                      "plot '" + opts.out + "' using 1:3 with lines title 'lower closed', \\\n"
                      "     '" + opts.out + "' using 1:4 with lines title 'lower series', \\\n"
                      "     '" + opts.out + "' using 1:5 with lines title 'upper general', \\\n"
                      "     '" + opts.out + "' using 1:6 with lines title 'upper high-p'",
                      "R", "p");
    return 0;
}

int cmd_simulate(const CLI::App& cmd, const CommonOpts& opts, double p_min, double p_max, double p_step,
                 int n, double alpha, long trials) {
    const std::vector<double> grid = linear_grid(p_min, p_max, p_step);
    const std::vector<SimulateRow> rows = simulate_table(grid, n, alpha, trials, opts.seed, opts.threads);

    std::ofstream file = open_output(opts.out);
    CsvWriter csv(file);
    write_provenance(csv, cmd);
    csv.header({"p", "r_hat", "stderr", "nonconverged_fraction"});
    for (const SimulateRow& row : rows) {
        const double frac = static_cast<double>(row.estimate.nonconverged) /
                            static_cast<double>(row.estimate.trials + row.estimate.nonconverged);
        csv.field(row.p).field(row.estimate.r_hat).field(row.estimate.stderr_mean).field(frac);
        csv.end_row();
        if (row.estimate.nonconverged > 0)
            std::cerr << "warning: p=" << row.p << ": " << row.estimate.nonconverged
                      << " trials did not converge and were excluded\n";
    }
    write_plot_script(opts.out,
                      "plot '" + opts.out + "' using 1:2:3 with yerrorlines title 'simulated R'",
                      "R", "p");
    return 0;
}

int cmd_hist(const CLI::App& cmd, const CommonOpts& opts, double p, int n, long trials, int bins,
             const std::string& samples_out) {
    ProtocolParams params;
    params.n = n;
    params.p = p;

    if (!samples_out.empty()) {
        const std::vector<TauSample> samples = sample_tau_batch(params, trials, opts.seed, opts.threads);
        std::ofstream file = open_output(samples_out);
        CsvWriter csv(file);
        write_provenance(csv, cmd);
        std::vector<std::string> cols{"trial"};
        for (int k = 1; k <= n; ++k) cols.push_back("tau_" + std::to_string(k));
        cols.push_back("steps");
        cols.push_back("converged");
        csv.header(cols);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            csv.field(static_cast<long>(i));
            for (int k = 0; k < n; ++k) {
                if (samples[i].converged)
                    csv.field(samples[i].tau[k]);
                else
                    csv.field(std::optional<double>{}); // no tau for unconverged trials
            }
            csv.field(samples[i].steps).field(static_cast<long>(samples[i].converged ? 1 : 0));
            csv.end_row();
        }
    }

    std::ofstream file = open_output(opts.out);
    CsvWriter csv(file);
    write_provenance(csv, cmd);
    if (n == 2) {
        const DiscreteMeasure measure = empirical_measure(params, trials, bins, opts.seed, opts.threads);
        csv.header({"bin_center", "mass"});
        for (int k = 0; k < measure.size(); ++k) {
            csv.field(measure.bin_center(k)).field(measure.bins[k]);
            csv.end_row();
        }
        write_plot_script(opts.out, "plot '" + opts.out + "' using 1:2 with boxes title 'tau_1 mass'",
                          "mass", "tau_1");
    } else {
        const TriangleHistogram tri = empirical_triangle(params, trials, bins, opts.seed, opts.threads);
        csv.header({"tau1_center", "tau2_center", "mass"});
        for (int j = 0; j < bins; ++j)
            for (int i = 0; i < bins; ++i) {
                csv.field((i + 0.5) / bins).field((j + 0.5) / bins).field(tri.at(i, j));
                csv.end_row();
            }
        write_plot_script(opts.out,
                          "set view map\nsplot '" + opts.out + "' using 1:2:3 with points pt 5 ps 0.5 "
                          "palette title 'tau mass'",
                          "tau_2", "tau_1");
    }
    return 0;
}

const char* label_name(CellLabel label) {
    switch (label) {
    case CellLabel::Empty: return "empty";
    case CellLabel::ConsensusFaster: return "a";
    case CellLabel::PushSumFaster: return "b";
    case CellLabel::NoPushSum: return "c";
    }
    return "?";
}

int cmd_compare(const CLI::App& cmd, const CommonOpts& opts, const CompareConfig& config,
                const std::string& cells_out, int error_bins, double error_max, int p_bins) {
    CompareConfig cfg = config;
    cfg.base_seed = opts.seed;
    cfg.threads = opts.threads;
    const std::vector<CompareRecord> records = run_compare(cfg);

    std::ofstream file = open_output(opts.out);
    CsvWriter csv(file);
    write_provenance(csv, cmd);
    csv.header({"algorithm", "p", "alpha", "error", "speed", "converged"});
    for (const CompareRecord& rec : records) {
        csv.field(std::string(rec.pushsum ? "pushsum" : "consensus"));
        csv.field(rec.p).field(rec.alpha).field(rec.error).field(rec.speed);
        csv.field(static_cast<long>(rec.converged ? 1 : 0));
        csv.end_row();
    }

    const CellGrid grid = label_cells(records, error_bins, error_max, p_bins, cfg.p_max);
    const std::string cells_path = cells_out.empty() ? opts.out + ".cells.csv" : cells_out;
    std::ofstream cells_file = open_output(cells_path);
    CsvWriter cells_csv(cells_file);
    write_provenance(cells_csv, cmd);
    cells_csv.header({"error_center", "p_center", "label", "pushsum_count", "consensus_count",
                      "pushsum_speed_median", "consensus_speed_median"});
    for (int pb = 0; pb < grid.p_bins; ++pb)
        for (int eb = 0; eb < grid.error_bins; ++eb) {
            const int cell = grid.index(eb, pb);
            cells_csv.field(grid.error_center(eb)).field(grid.p_center(pb));
            cells_csv.field(std::string(label_name(grid.labels[cell])));
            cells_csv.field(grid.pushsum_count[cell]).field(grid.consensus_count[cell]);
            cells_csv.field(grid.pushsum_speed[cell]).field(grid.consensus_speed[cell]);
            cells_csv.end_row();
        }
    write_plot_script(cells_path,
                      "plot '" + cells_path + "' using 1:(strcol(3) eq 'a' ? $2 : 1/0) with points pt 5 title 'a', \\\n"
                      "     '" + cells_path + "' using 1:(strcol(3) eq 'b' ? $2 : 1/0) with points pt 5 title 'b', \\\n"
                      "     '" + cells_path + "' using 1:(strcol(3) eq 'c' ? $2 : 1/0) with points pt 5 title 'c'",
                      "p", "error");
    return 0;
}

int cmd_fixpoint(const CLI::App& cmd, const CommonOpts& opts, double p, int bins, int iterations,
                 const std::string& start, const std::string& summary_out) {
    const StartMeasure start_measure = start == "centered" ? StartMeasure::Centered : StartMeasure::Uniform;
    const FixpointResult result = invariance_iterate(p, bins, iterations, start_measure);
    const double r_value = measure_R(result.measure);

    std::ofstream file = open_output(opts.out);
    CsvWriter csv(file);
    write_provenance(csv, cmd);
    csv.header({"bin_center", "mass"});
    for (int k = 0; k < result.measure.size(); ++k) {
        csv.field(result.measure.bin_center(k)).field(result.measure.bins[k]);
        csv.end_row();
    }
    write_plot_script(opts.out, "plot '" + opts.out + "' using 1:2 with lines title 'fixed-point mass'",
                      "mass", "tau_1");

    const std::string summary_path = summary_out.empty() ? opts.out + ".summary.csv" : summary_out;
    std::ofstream summary_file = open_output(summary_path);
    CsvWriter summary(summary_file);
    write_provenance(summary, cmd);
    summary.header({"p", "bins", "iterations_run", "last_tv_change", "R", "lower_closed", "lower_series",
                    "upper_general", "upper_highp"});
    const BoundSet b = evaluate_bounds(p);
    summary.field(p).field(bins).field(static_cast<long>(result.iterations)).field(result.last_tv_change);
    summary.field(r_value).field(b.lower_closed).field(b.lower_series).field(b.upper_general);
    summary.field(b.upper_highp);
    summary.end_row();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"push-sum averaging under transmission failures: simulation and analysis"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default(true);
    app.set_config("--config", "", "flat key=value config file; flags override");
    app.set_version_flag("--version", std::string(kVersion));

    // bounds
    CommonOpts bounds_opts;
    double b_pmin = 0.0, b_pmax = 1.0, b_pstep = 0.05;
    int b_terms = 60;
    CLI::App* bounds = app.add_subcommand("bounds", "evaluate the analytic bound set over a p-grid");
    add_common(bounds, bounds_opts, false);
    bounds->add_option("--p-min", b_pmin, "grid start")->check(CLI::Range(0.0, 1.0));
    bounds->add_option("--p-max", b_pmax, "grid end")->check(CLI::Range(0.0, 1.0));
    bounds->add_option("--p-step", b_pstep, "grid step")->check(CLI::PositiveNumber);
    bounds->add_option("--series-terms", b_terms, "terms of the series lower bound");

    // simulate
    CommonOpts sim_opts;
    double s_pmin = 0.1, s_pmax = 0.9, s_pstep = 0.1, s_alpha = 0.5;
    int s_n = 2;
    long s_trials = 100000;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of R over a p-grid");
    add_common(simulate, sim_opts);
    simulate->add_option("--p-min", s_pmin, "grid start")->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--p-max", s_pmax, "grid end")->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--p-step", s_pstep, "grid step")->check(CLI::PositiveNumber);
    simulate->add_option("--n", s_n, "agent count")->check(CLI::Range(2, 64));
    simulate->add_option("--alpha", s_alpha, "send/influence ratio");
    simulate->add_option("--trials", s_trials, "trials per grid point")->check(CLI::PositiveNumber);

    // hist
    CommonOpts hist_opts;
    double h_p = 0.6;
    int h_n = 2, h_bins = 200;
    long h_trials = 100000;
    std::string h_samples_out;
    CLI::App* hist = app.add_subcommand("hist", "histogram of the coefficient vector tau");
    add_common(hist, hist_opts);
    hist->add_option("--p", h_p, "failure probability")->check(CLI::Range(0.0, 1.0));
    hist->add_option("--n", h_n, "agent count (2: 1-D, 3: triangular)")->check(CLI::Range(2, 3));
    hist->add_option("--trials", h_trials, "sample count")->check(CLI::PositiveNumber);
    hist->add_option("--bins", h_bins, "bins per axis")->check(CLI::PositiveNumber);
    hist->add_option("--samples-out", h_samples_out, "also dump per-trial tau samples to this CSV");

    // compare
    CommonOpts cmp_opts;
    CompareConfig cmp_cfg;
    std::string cmp_cells_out;
    int cmp_error_bins = 16, cmp_p_bins = 20;
    double cmp_error_max = 0.08;
    CLI::App* compare = app.add_subcommand("compare", "speed/error comparison of push-sum vs consensus");
    add_common(compare, cmp_opts);
    compare->add_option("--n", cmp_cfg.n, "agent count")->check(CLI::Range(2, 64));
    compare->add_option("--p-samples", cmp_cfg.p_samples, "random p draws")->check(CLI::PositiveNumber);
    compare->add_option("--alpha-samples", cmp_cfg.alpha_samples, "random alpha draws")
        ->check(CLI::PositiveNumber);
    compare->add_option("--trials-per-cell", cmp_cfg.trials_per_cell, "runs per (p, alpha) pair")
        ->check(CLI::PositiveNumber);
    compare->add_option("--eps", cmp_cfg.speed_eps, "spread target defining the speed metric");
    compare->add_option("--p-max", cmp_cfg.p_max, "p draws are uniform on [0, p-max)");
    compare->add_option("--alpha-min", cmp_cfg.alpha_min, "lower end of the alpha draw range");
    compare->add_option("--alpha-max", cmp_cfg.alpha_max, "upper end of the alpha draw range");
    compare->add_option("--max-steps", cmp_cfg.max_steps, "per-run step budget");
    compare->add_option("--cells-out", cmp_cells_out, "cell-label CSV path (default <out>.cells.csv)");
    compare->add_option("--error-bins", cmp_error_bins, "error-axis cells")->check(CLI::PositiveNumber);
    compare->add_option("--error-max", cmp_error_max, "error-axis upper edge")->check(CLI::PositiveNumber);
    compare->add_option("--p-bins", cmp_p_bins, "p-axis cells")->check(CLI::PositiveNumber);

    // fixpoint
    CommonOpts fix_opts;
    double f_p = 0.6;
    int f_bins = 100001, f_iters = 500;
    std::string f_start = "uniform", f_summary_out;
    CLI::App* fixpoint = app.add_subcommand("fixpoint", "solve the two-node invariance equation on bins");
    add_common(fixpoint, fix_opts, false);
    fixpoint->add_option("--p", f_p, "failure probability")->check(CLI::Range(0.0, 1.0));
    fixpoint->add_option("--bins", f_bins, "bin count (>= 100)")->check(CLI::PositiveNumber);
    fixpoint->add_option("--iterations", f_iters, "iteration budget")->check(CLI::PositiveNumber);
    fixpoint->add_option("--start", f_start, "starting measure")
        ->check(CLI::IsMember({"uniform", "centered"}));
    fixpoint->add_option("--summary-out", f_summary_out, "summary CSV path (default <out>.summary.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bounds->parsed())
            return cmd_bounds(*bounds, bounds_opts, b_pmin, b_pmax, b_pstep, b_terms);
        if (simulate->parsed())
            return cmd_simulate(*simulate, sim_opts, s_pmin, s_pmax, s_pstep, s_n, s_alpha, s_trials);
        if (hist->parsed())
            return cmd_hist(*hist, hist_opts, h_p, h_n, h_trials, h_bins, h_samples_out);
        if (compare->parsed())
            return cmd_compare(*compare, cmp_opts, cmp_cfg, cmp_cells_out, cmp_error_bins, cmp_error_max,
                               cmp_p_bins);
        if (fixpoint->parsed())
            return cmd_fixpoint(*fixpoint, fix_opts, f_p, f_bins, f_iters, f_start, f_summary_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
