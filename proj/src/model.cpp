#include "lrnn/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lrnn {

namespace {

// splitmix64; stable across platforms, unlike the distribution templates.
std::uint64_t mix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(mix64(state) >> 11) * 0x1.0p-53;
}

NormSpec data_norm(const TrainingProblem& p, std::size_t rows, std::size_t cols) {
    if (p.regime == Regime::Sparse)
        return NormSpec::eps_insensitive(p.eps * Matrix::ones(rows, cols));
    return NormSpec::squared_k(Matrix::identity(rows));
}

NormSpec reg_norm(const TrainingProblem& p, std::size_t rows, std::size_t cols) {
    if (p.regime == Regime::Sparse)
        return NormSpec::eps_insensitive(Matrix(rows, cols));  // eps = 0: plain L1
    return NormSpec::squared_k(Matrix::identity(rows));
}

}  // namespace

Lambdas default_lambdas(std::size_t t, std::size_t d_x, std::size_t d_u) {
    if (t < 2) throw std::invalid_argument("default_lambdas: T must be at least 2");
    if (d_x == 0 || d_u == 0) throw std::invalid_argument("default_lambdas: zero dimension");
    Lambdas l;
    l.appr = 1.0 / (static_cast<double>(t) * static_cast<double>(d_x));
    l.state = 1.0 / (static_cast<double>(t - 1) * static_cast<double>(d_u));
    l.u = 1.0 / (static_cast<double>(t) * static_cast<double>(d_u));
    l.f = 1.0 / (static_cast<double>(d_u) * static_cast<double>(d_u));
    return l;
}

Matrix cut_begin_matrix(std::size_t t) {
    if (t < 2) throw std::invalid_argument("cut_begin_matrix: T must be at least 2");
    Matrix c(t, t - 1);
    for (std::size_t j = 0; j + 1 < t; ++j) c(j + 1, j) = 1.0;
    return c;
}

Matrix cut_end_matrix(std::size_t t) {
    if (t < 2) throw std::invalid_argument("cut_end_matrix: T must be at least 2");
    Matrix c(t, t - 1);
    for (std::size_t j = 0; j + 1 < t; ++j) c(j, j) = 1.0;
    return c;
}

TrainingProblem make_training_problem(const std::vector<double>& samples, std::size_t t,
                                      Regime regime, double eps,
                                      std::optional<Lambdas> lambdas, std::size_t d_u) {
    if (t < 2) throw std::invalid_argument("make_training_problem: T must be at least 2");
    if (samples.size() < t + 1)
        throw std::invalid_argument("make_training_problem: need T+1 samples, have " +
                                    std::to_string(samples.size()));
    if (eps < 0.0) throw std::invalid_argument("make_training_problem: eps < 0");

    TrainingProblem p;
    p.x = Matrix(1, t);
    p.zx = Matrix(1, t);
    for (std::size_t i = 0; i < t; ++i) {
        p.x(0, i) = samples[i];
        p.zx(0, i) = samples[i + 1];
    }
    p.cut_begin = cut_begin_matrix(t);
    p.cut_end = cut_end_matrix(t);
    p.lambdas = lambdas ? *lambdas : default_lambdas(t, 1, d_u);
    p.eps = eps;
    p.regime = regime;
    return p;
}

LrnnModel random_model(std::size_t d_u, std::size_t d_x, std::uint64_t seed) {
    if (d_u < d_x) throw std::invalid_argument("random_model: d_u must be >= d_x");
    LrnnModel m;
    m.d_u = d_u;
    m.d_x = d_x;
    std::uint64_t state = seed;
    m.f = Matrix(d_u, d_u);
    for (double& v : m.f.data()) v = uniform01(state);
    m.g = Matrix(d_u, d_x);
    for (double& v : m.g.data()) v = uniform01(state);
    m.h = Matrix(d_x, d_u);
    for (std::size_t i = 0; i < d_x; ++i) m.h(i, i) = 1.0;
    return m;
}

CostFunction build_f_step(const TrainingProblem& p, const LrnnModel& model, const Matrix& u) {
    const std::size_t t = p.horizon();
    if (u.rows() != model.d_u || u.cols() != t)
        throw std::invalid_argument("build_f_step: U shape mismatch");

    const Matrix hgx = model.h * model.g * p.x;
    const Matrix appr_offset = p.zx - hgx;
    const Matrix state_offset = u * p.cut_begin - model.g * p.x * p.cut_end;

    std::vector<CostTerm> terms;
    terms.push_back({p.lambdas.appr,
                     make_expr({{model.h, u}}, appr_offset, model.d_u, model.d_u),
                     data_norm(p, p.d_x(), t)});
    terms.push_back({p.lambdas.state,
                     make_expr({{Matrix::identity(model.d_u), u * p.cut_end}}, state_offset,
                               model.d_u, model.d_u),
                     data_norm(p, model.d_u, t - 1)});
    terms.push_back({p.lambdas.f,
                     make_expr({{Matrix::identity(model.d_u), Matrix::identity(model.d_u)}},
                               Matrix(model.d_u, model.d_u), model.d_u, model.d_u),
                     reg_norm(p, model.d_u, model.d_u)});
    return make_cost_function(p.regime, std::move(terms));
}

CostFunction build_u_step(const TrainingProblem& p, const LrnnModel& model) {
    const std::size_t t = p.horizon();
    const Matrix hgx = model.h * model.g * p.x;
    const Matrix appr_offset = p.zx - hgx;
    const Matrix neg_cb = -1.0 * p.cut_begin;
    const Matrix state_offset = -1.0 * (model.g * p.x * p.cut_end);

    std::vector<CostTerm> terms;
    terms.push_back({p.lambdas.appr,
                     make_expr({{model.h * model.f, Matrix::identity(t)}}, appr_offset,
                               model.d_u, t),
                     data_norm(p, p.d_x(), t)});
    terms.push_back({p.lambdas.state,
                     make_expr({{model.f, p.cut_end}, {Matrix::identity(model.d_u), neg_cb}},
                               state_offset, model.d_u, t),
                     data_norm(p, model.d_u, t - 1)});
    terms.push_back({p.lambdas.u,
                     make_expr({{Matrix::identity(model.d_u), Matrix::identity(t)}},
                               Matrix(model.d_u, t), model.d_u, t),
                     reg_norm(p, model.d_u, t)});
    return make_cost_function(p.regime, std::move(terms));
}

double full_cost(const TrainingProblem& p, const LrnnModel& model, const Matrix& u) {
    const std::size_t t = p.horizon();
    const Matrix fu_gx = model.f * u + model.g * p.x;
    const Matrix appr_res = model.h * fu_gx - p.zx;
    const Matrix state_res = fu_gx * p.cut_end - u * p.cut_begin;

    double total = 0.0;
    total += p.lambdas.appr * norm_value(data_norm(p, p.d_x(), t), appr_res);
    total += p.lambdas.state * norm_value(data_norm(p, model.d_u, t - 1), state_res);
    total += p.lambdas.f * norm_value(reg_norm(p, model.d_u, model.d_u), model.f);
    total += p.lambdas.u * norm_value(reg_norm(p, model.d_u, t), u);
    return total;
}

TrainingState train(const TrainingProblem& p, const LrnnModel& init, const TrainOptions& opts) {
    if (opts.max_iters < 1) throw std::invalid_argument("train: max_iters < 1");
    if (init.f.rows() != init.d_u || init.g.cols() != p.d_x())
        throw std::invalid_argument("train: init model shape mismatch");

    TrainingState state;
    state.model = init;
    state.u = Matrix(init.d_u, p.horizon());

    double prev_iter_cost = 0.0;
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        try {
            const CostMinimum u_min = minimize_cost(build_u_step(p, state.model));
            state.u = u_min.z;
            state.cost_trace.push_back(
                {iter, HalfStep::UStep, full_cost(p, state.model, state.u)});

            const CostMinimum f_min = minimize_cost(build_f_step(p, state.model, state.u));
            state.model.f = f_min.z;
            const double cost = full_cost(p, state.model, state.u);
            state.cost_trace.push_back({iter, HalfStep::FStep, cost});

            if (iter >= 2) {
                const double decrease = prev_iter_cost - cost;
                if (decrease < opts.tol * std::max(std::abs(prev_iter_cost), 1e-300)) {
                    state.converged_at = iter;
                    break;
                }
            }
            prev_iter_cost = cost;
        } catch (const std::exception& e) {
            throw std::runtime_error("train: iteration " + std::to_string(iter) + ": " +
                                     e.what());
        }
    }
    return state;
}

Matrix predict_insample(const TrainingState& state, const TrainingProblem& problem) {
    return state.model.h * (state.model.f * state.u + state.model.g * problem.x);
}

RecursivePrediction predict_recursive(const TrainingState& state, const Matrix& x_seed,
                                      const std::vector<double>& u_seed, int horizon) {
    const auto& m = state.model;
    if (x_seed.rows() != m.d_x || x_seed.cols() != 1)
        throw std::invalid_argument("predict_recursive: x_seed shape");
    if (u_seed.size() != m.d_u) throw std::invalid_argument("predict_recursive: u_seed size");
    if (horizon < 1) throw std::invalid_argument("predict_recursive: horizon < 1");

    RecursivePrediction out;
    Matrix traj(m.d_x, static_cast<std::size_t>(horizon));
    Matrix u = Matrix::column(u_seed);
    Matrix xhat = x_seed;
    int produced = 0;
    for (int step = 0; step < horizon; ++step) {
        u = m.f * u + m.g * xhat;
        xhat = m.h * u;
        if (!xhat.all_finite() || xhat.max_abs() > 1e100) {
            out.diverged = true;
            break;
        }
        for (std::size_t i = 0; i < m.d_x; ++i) traj(i, static_cast<std::size_t>(step)) = xhat(i, 0);
        ++produced;
    }
    if (produced == 0) {
        out.trajectory = Matrix();  // diverged before the first step
        out.diverged = true;
        return out;
    }
    out.trajectory = Matrix(m.d_x, static_cast<std::size_t>(produced));
    for (std::size_t i = 0; i < m.d_x; ++i)
        for (int j = 0; j < produced; ++j)
            out.trajectory(i, static_cast<std::size_t>(j)) = traj(i, static_cast<std::size_t>(j));
    return out;
}

}  // namespace lrnn
