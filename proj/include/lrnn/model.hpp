#pragma once

#include "lrnn/cost.hpp"
#include "lrnn/matrix.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lrnn {

/// Linear recurrent network u_{t+1} = F u_t + G x_t with readout o = H u.
/// H stays the fixed projection onto the leading coordinates; training
/// optimizes F and the hidden sequence U only.
struct LrnnModel {
    Matrix f;  // d_u x d_u
    Matrix g;  // d_u x d_x
    Matrix h;  // d_x x d_u
    std::size_t d_u = 0;
    std::size_t d_x = 0;
};

struct Lambdas {
    double appr = 1.0;
    double state = 1.0;
    double u = 1.0;
    double f = 1.0;
};

/// Term weights balancing contributions independently of T and the state
/// dimension: 1/(T d_x), 1/((T-1) d_u), 1/(T d_u), 1/d_u^2.
Lambdas default_lambdas(std::size_t t, std::size_t d_x, std::size_t d_u);

/// Selector dropping the first time column: U C_b = [u_2 .. u_T].
Matrix cut_begin_matrix(std::size_t t);
/// Selector dropping the last time column: U C_e = [u_1 .. u_{T-1}].
Matrix cut_end_matrix(std::size_t t);

struct TrainingProblem {
    Matrix x;          // d_x x T, inputs x_1..x_T
    Matrix zx;         // d_x x T, targets x_2..x_{T+1}
    Matrix cut_begin;  // T x (T-1)
    Matrix cut_end;    // T x (T-1)
    Lambdas lambdas;
    double eps = 0.05;  // insensitivity of the data terms; regularizers use 0
    Regime regime = Regime::Sparse;

    std::size_t horizon() const { return x.cols(); }
    std::size_t d_x() const { return x.rows(); }
};

/// Builds a scalar-series problem from samples[0..t]: X gets the first t
/// values, zX the t values shifted by one. Requires at least t+1 samples.
TrainingProblem make_training_problem(const std::vector<double>& samples, std::size_t t,
                                      Regime regime, double eps,
                                      std::optional<Lambdas> lambdas = std::nullopt,
                                      std::size_t d_u = 4);

/// F and G drawn i.i.d. uniform on [0,1]; H is the projection onto the first
/// d_x hidden coordinates. Identical seeds give identical models on every
/// platform.
LrnnModel random_model(std::size_t d_u, std::size_t d_x, std::uint64_t seed);

enum class HalfStep { UStep, FStep };

struct TraceEntry {
    int iteration = 0;
    HalfStep half = HalfStep::UStep;
    double cost = 0.0;
};

struct TrainingState {
    LrnnModel model;
    Matrix u;  // d_u x T
    std::vector<TraceEntry> cost_trace;
    std::optional<int> converged_at;
};

/// Cost over Z = F with U held fixed: approximation, state and the F
/// regularizer; the U regularizer is constant here and excluded.
CostFunction build_f_step(const TrainingProblem& problem, const LrnnModel& model,
                          const Matrix& u);

/// Cost over Z = U with F held fixed; the F regularizer is excluded.
CostFunction build_u_step(const TrainingProblem& problem, const LrnnModel& model);

/// The whole objective including both regularizers, under problem.regime.
double full_cost(const TrainingProblem& problem, const LrnnModel& model, const Matrix& u);

struct TrainOptions {
    int max_iters = 50;
    double tol = 1e-6;
};

/// Alternating minimization: each iteration solves the U step then the F
/// step to per-step global optimality, recording the full cost after each
/// half step. Stops once the relative cost decrease over a full iteration
/// falls below tol. The first half step is a U step, so no initial U is
/// needed.
TrainingState train(const TrainingProblem& problem, const LrnnModel& init,
                    const TrainOptions& opts = {});

/// H (F U + G X) using the optimized hidden sequence.
Matrix predict_insample(const TrainingState& state, const TrainingProblem& problem);

struct RecursivePrediction {
    Matrix trajectory;  // d_x x steps actually produced
    bool diverged = false;
};

/// Closed-loop rollout u <- F u + G x_hat, x_hat <- H u. Truncates with the
/// diverged flag once the trajectory leaves [-1e100, 1e100].
RecursivePrediction predict_recursive(const TrainingState& state, const Matrix& x_seed,
                                      const std::vector<double>& u_seed, int horizon);

}  // namespace lrnn
