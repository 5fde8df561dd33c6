#pragma once

#include "lrnn/model.hpp"
#include "lrnn/series.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lrnn {

enum class Problem { MG17, MG30, FIRLaser, Henon };

std::string to_string(Problem p);
std::string to_string(Regime r);
Problem problem_from_string(const std::string& s);
Regime regime_from_string(const std::string& s);

struct ExperimentConfig {
    std::vector<Problem> problems = {Problem::MG17, Problem::MG30, Problem::Henon};
    std::vector<std::size_t> lengths = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    int restarts = 20;
    std::vector<Regime> regimes = {Regime::Sparse, Regime::Quadratic};
    std::size_t d_u = 4;
    double eps = 0.05;
    int max_iters = 50;
    double tol = 1e-6;
    std::uint64_t master_seed = 1;
    std::string fir_path;
    int threads = 0;  // 0 = hardware concurrency
};

/// Parses `key = value` lines with # comments; keys match the field names.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct CellRecord {
    Problem problem = Problem::MG30;
    std::size_t t = 0;
    Regime regime = Regime::Sparse;
    int restart = 0;
    bool failed = false;
    std::string error;
    double final_cost = 0.0;
    double eps_error = 0.0;   // lambda_appr-weighted eps-insensitive prediction error
    double quad_error = 0.0;  // lambda_appr-weighted squared prediction error
    double nmrse = 0.0;
    int iters_to_1pct = 0;  // first iteration within 1% of the final cost
    std::optional<int> converged_at;
    double sparsity_f = 0.0;
    double sparsity_u = 0.0;
    std::vector<TraceEntry> trace;
};

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
    double best = 0.0;
    double worst = 0.0;
};

Aggregate aggregate(const std::vector<double>& values);

struct CellAggregates {
    Aggregate final_cost, eps_error, quad_error, nmrse;
};

/// Representative in-sample prediction overlay: the best-final-cost restart
/// at the largest T of each (problem, regime).
struct Overlay {
    Problem problem = Problem::MG30;
    Regime regime = Regime::Sparse;
    std::size_t t = 0;
    int restart = 0;
    std::vector<double> target;
    std::vector<double> predicted;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellRecord> records;  // deterministic cell order
    std::vector<Overlay> overlays;
};

/// Injective packing of a cell's coordinates, mixed with the master seed to
/// derive the restart's model seed.
std::uint64_t cell_seed(std::uint64_t master_seed, Problem p, std::size_t t, Regime r,
                        int restart);

/// Generates each problem's scaled series once, then trains and evaluates
/// every (problem, T, regime, restart) cell. Deterministic for a fixed
/// config, independent of the thread count.
ExperimentReport run_experiments(const ExperimentConfig& cfg);

/// Per-(problem, T, regime) aggregates recomputed from the records.
std::map<std::string, CellAggregates> compute_aggregates(const ExperimentReport& report);

void write_report_csv(const ExperimentReport& report, const std::string& path);
void write_report_json(const ExperimentReport& report, const std::string& path);
ExperimentReport load_report_json(const std::string& path);
std::vector<CellRecord> load_report_csv(const std::string& path);

/// The scaled series used for a problem's cells (exposed for the CLI).
TimeSeries problem_series(Problem p, std::size_t samples, const std::string& fir_path);

}  // namespace lrnn
