#include "lrnn/cli.hpp"

#include "lrnn/experiment.hpp"
#include "lrnn/model.hpp"
#include "lrnn/plot.hpp"
#include "lrnn/series.hpp"
#include "lrnn/stats.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace lrnn {

namespace {

int cmd_generate(const std::string& problem, std::size_t length, const std::string& out,
                 const std::string& fir_path, bool raw) {
    const Problem p = problem_from_string(problem);
    TimeSeries series;
    if (raw) {
        switch (p) {
            case Problem::MG17:
            case Problem::MG30: {
                MgConfig cfg;
                cfg.tau = p == Problem::MG17 ? 17.0 : 30.0;
                cfg.length = length;
                series = gen_mackey_glass(cfg);
                break;
            }
            case Problem::Henon:
                series = gen_henon(1.4, 0.3, length, 1000, 0.0, 0.0);
                break;
            case Problem::FIRLaser:
                series = load_fir_laser(fir_path);
                series.values.resize(std::min(series.values.size(), length));
                break;
        }
    } else {
        series = problem_series(p, length, fir_path);
    }
    write_series_csv(series, out);
    std::printf("wrote %zu samples to %s\n", series.values.size(), out.c_str());
    return 0;
}

int cmd_train(const std::string& problem, std::size_t length, const std::string& regime,
              std::uint64_t seed, std::size_t d_u, double eps, int max_iters, double tol,
              const std::string& fir_path) {
    const Problem p = problem_from_string(problem);
    const Regime r = regime_from_string(regime);
    const TimeSeries series = problem_series(p, length + 1, fir_path);
    const TrainingProblem tp =
        make_training_problem(series.values, length, r, eps, std::nullopt, d_u);
    const LrnnModel init = random_model(d_u, 1, seed);
    const TrainingState state = train(tp, init, {max_iters, tol});

    for (const auto& e : state.cost_trace)
        std::printf("iter %3d %s cost %.12g\n", e.iteration,
                    e.half == HalfStep::UStep ? "U" : "F", e.cost);

    const Matrix pred = predict_insample(state, tp);
    std::vector<double> pv(pred.data());
    std::vector<double> tv(tp.zx.data());
    std::printf("final cost      %.12g\n", state.cost_trace.back().cost);
    std::printf("converged at    %s\n",
                state.converged_at ? std::to_string(*state.converged_at).c_str() : "-");
    std::printf("eps pred error  %.6g\n", eps_error_timeavg(pv, tv, eps, tp.lambdas.appr));
    std::printf("nmrse           %.6g\n", nmrse(pv, tv));
    std::printf("sparsity F / U  %.4f / %.4f\n", sparsity_fraction(state.model.f, 1e-6),
                sparsity_fraction(state.u, 1e-6));
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
    const ExperimentConfig cfg = load_config(config_path);
    std::filesystem::create_directories(out_dir);
    const ExperimentReport report = run_experiments(cfg);

    std::size_t failures = 0;
    for (const auto& r : report.records) failures += r.failed ? 1 : 0;

    write_report_csv(report, out_dir + "/report.csv");
    write_report_json(report, out_dir + "/report.json");
    const auto plots = emit_plots(report, out_dir + "/plots");
    std::printf("%zu cells (%zu failed), %zu plots -> %s\n", report.records.size(), failures,
                plots.size(), out_dir.c_str());
    return 0;
}

int cmd_stats(const std::string& in_path) {
    const TimeSeries series = read_series_values(in_path);
    const TimeSeries scaled = scale_to_unit(series);  // throws on constant series
    const ZeroCrossingStats zc = zero_crossing_stats(scaled.values);

    std::printf("samples          %zu\n", series.values.size());
    std::printf("crossing gaps    %zu\n", zc.distances.size());
    if (zc.kurtosis)
        std::printf("kurtosis         %.6g\n", *zc.kurtosis);
    else
        std::printf("kurtosis         n/a (fewer than 4 gaps or zero variance)\n");
    if (zc.loglog_slope) {
        std::printf("log-log slope    %.6g\n", *zc.loglog_slope);
        std::printf("fit r^2          %.6g\n", *zc.slope_r2);
    } else {
        std::printf("log-log slope    n/a (degenerate histogram)\n");
    }
    return 0;
}

int cmd_plot(const std::string& report_path, const std::string& outdir) {
    const ExperimentReport report = load_report_json(report_path);
    const auto written = emit_plots(report, outdir);
    std::printf("%zu plots -> %s\n", written.size(), outdir.c_str());
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Linear recurrent network identification from chaotic series"};
    app.require_subcommand(1);

    std::string problem = "mg30", regime = "sparse", out = "series.csv";
    std::string fir_path, config_path, report_path, out_dir = "out";
    std::size_t length = 100, d_u = 4;
    std::uint64_t seed = 1;
    double eps = 0.05, tol = 1e-6;
    int max_iters = 50;
    bool raw = false;

    auto* gen = app.add_subcommand("generate", "Generate or load a benchmark series as CSV");
    gen->add_option("--problem", problem, "mg17, mg30, henon or fir")->required();
    gen->add_option("--length", length, "number of samples")->required();
    gen->add_option("--seed", seed, "accepted for interface uniformity; generators are fixed");
    gen->add_option("--out", out, "output CSV path")->required();
    gen->add_option("--fir-path", fir_path, "FIR laser data file (one sample per line)");
    gen->add_flag("--raw", raw, "skip scaling onto [-1, 1]");

    auto* tr = app.add_subcommand("train", "Train one model and print the cost trace");
    tr->add_option("--problem", problem)->required();
    tr->add_option("--length", length, "series length T")->required();
    tr->add_option("--regime", regime, "sparse or quadratic")->required();
    tr->add_option("--seed", seed, "model init seed");
    tr->add_option("--d-u", d_u, "hidden state dimension");
    tr->add_option("--eps", eps, "insensitivity of the data terms");
    tr->add_option("--max-iters", max_iters);
    tr->add_option("--tol", tol, "relative decrease stopping tolerance");
    tr->add_option("--fir-path", fir_path);

    auto* ex = app.add_subcommand("experiment", "Run the experiment matrix from a config file");
    ex->add_option("--config", config_path, "key = value config file")->required();
    ex->add_option("--out-dir", out_dir, "output directory");

    auto* st = app.add_subcommand("stats", "Zero-crossing statistics of a series file");
    st->add_option("--in", report_path, "series file (CSV or one value per line)")->required();

    auto* pl = app.add_subcommand("plot", "Re-emit plots from a JSON report");
    pl->add_option("--report", report_path, "report.json path")->required();
    pl->add_option("--outdir", out_dir, "plot output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(problem, length, out, fir_path, raw);
        if (tr->parsed())
            return cmd_train(problem, length, regime, seed, d_u, eps, max_iters, tol, fir_path);
        if (ex->parsed()) return cmd_experiment(config_path, out_dir);
        if (st->parsed()) return cmd_stats(report_path);
        if (pl->parsed()) return cmd_plot(report_path, out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace lrnn
