#include "lrnn/optimize.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lrnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-9;   // reduced-cost optimality threshold
constexpr double kPivotTol = 1e-9;  // smallest acceptable pivot magnitude
constexpr double kHarrisRelax = 1e-9;
constexpr long kRefactorEvery = 100;

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, FreeAtZero };

// Dense LU with partial pivoting for the basis matrix.
struct Lu {
    Matrix a;
    std::vector<std::size_t> piv;
};

Lu lu_factor(Matrix a) {
    const std::size_t n = a.rows();
    const double scale = a.max_abs();
    Lu f{std::move(a), std::vector<std::size_t>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(f.a(i, k)) > std::abs(f.a(p, k))) p = i;
        if (std::abs(f.a(p, k)) < 1e-13 * (1.0 + scale)) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "simplex: singular basis (k=%zu pivot=%.3e scale=%.3e)",
                          k, std::abs(f.a(p, k)), scale);
            throw std::runtime_error(msg);
        }
        f.piv[k] = p;
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(f.a(k, j), f.a(p, j));
        const double inv = 1.0 / f.a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = f.a(i, k) * inv;
            f.a(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.a(i, j) -= m * f.a(k, j);
        }
    }
    return f;
}

// Solves A x = b for the factored matrix. Row swaps are applied to b up
// front: the multiplier rows were swapped in full during factorization.
void lu_solve(const Lu& f, std::vector<double>& b) {
    const std::size_t n = f.a.rows();
    for (std::size_t k = 0; k < n; ++k) std::swap(b[k], b[f.piv[k]]);
    for (std::size_t k = 0; k < n; ++k) {
        const double bk = b[k];
        if (bk == 0.0) continue;
        for (std::size_t i = k + 1; i < n; ++i) b[i] -= f.a(i, k) * bk;
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= f.a(k, j) * b[j];
        b[k] = s / f.a(k, k);
    }
}

// Solves A' x = b for the same factorization: U' y = b, L' z = y, x = P' z.
void lu_solve_transposed(const Lu& f, std::vector<double>& b) {
    const std::size_t n = f.a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        double s = b[k];
        for (std::size_t j = 0; j < k; ++j) s -= f.a(j, k) * b[j];
        b[k] = s / f.a(k, k);
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t i = k + 1; i < n; ++i) s -= f.a(i, k) * b[i];
        b[k] = s;
    }
    for (std::size_t k = n; k-- > 0;) std::swap(b[k], b[f.piv[k]]);
}

// Revised bounded-variable simplex over sparse columns. The basis inverse is
// held as a dense LU plus a product-form eta file that is rebuilt from the
// original data every kRefactorEvery pivots, so column values and reduced
// costs never inherit accumulated pivot round-off.
class RevisedSimplex {
public:
    explicit RevisedSimplex(const BoundedLp& lp) : m_(lp.a.rows()), n_struct_(lp.a.cols()) {
        lo_ = lp.lo;
        up_ = lp.up;
        cost_ = lp.c;
        n_ = n_struct_;

        col_ptr_.assign(1, 0);
        for (std::size_t j = 0; j < n_struct_; ++j) {
            for (std::size_t i = 0; i < m_; ++i) {
                const double v = lp.a(i, j);
                if (v != 0.0) {
                    row_idx_.push_back(i);
                    val_.push_back(v);
                }
            }
            col_ptr_.push_back(row_idx_.size());
        }

        state_.assign(n_, VarState::AtLower);
        for (std::size_t j = 0; j < n_; ++j) {
            if (lo_[j] == -kInf && up_[j] == kInf)
                state_[j] = VarState::FreeAtZero;
            else if (lo_[j] == -kInf)
                state_[j] = VarState::AtUpper;
        }

        std::vector<double> resid = lp.b;
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = rest_value(j);
            if (v == 0.0) continue;
            for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                resid[row_idx_[k]] -= val_[k] * v;
        }

        basis_.assign(m_, -1);
        std::vector<char> needs_artificial(m_, 1);
        for (std::size_t i = 0; i < m_; ++i) {
            long j = (i < lp.start_basis.size()) ? lp.start_basis[i] : -1;
            if (j < 0) continue;
            double sigma = 0.0;
            if (!is_unit_column(static_cast<std::size_t>(j), i, sigma)) continue;
            const double v = resid[i] / sigma + rest_value(static_cast<std::size_t>(j));
            if (v < lo_[j] - 1e-12 || v > up_[j] + 1e-12) continue;
            basis_[i] = j;
            needs_artificial[i] = 0;
        }

        art_begin_ = n_;
        for (std::size_t i = 0; i < m_; ++i) {
            if (!needs_artificial[i]) continue;
            const double sigma = (resid[i] < 0.0) ? -1.0 : 1.0;
            row_idx_.push_back(i);
            val_.push_back(sigma);
            col_ptr_.push_back(row_idx_.size());
            lo_.push_back(0.0);
            up_.push_back(kInf);
            cost_.push_back(0.0);
            state_.push_back(VarState::AtLower);
            basis_[i] = static_cast<long>(n_);
            any_artificial_ = true;
            ++n_;
        }
        for (std::size_t i = 0; i < m_; ++i) state_[static_cast<std::size_t>(basis_[i])] = VarState::Basic;

        b_ = lp.b;
        refactor();
    }

    bool has_artificials() const { return any_artificial_; }

    // Massively degenerate instances (the cost duals have an all-zero rhs)
    // walk the simplex through arbitrarily ill-conditioned bases when every
    // ratio ties at zero. A tiny deterministic rhs perturbation makes the
    // ratio tests generically unique; the true rhs is restored before the
    // final answer. Reduced costs never depend on the rhs, so optimality of
    // the final basis carries over, and feasibility is off by at most the
    // perturbation itself.
    void perturb_rhs(double scale) {
        b_true_ = b_;
        double phase = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            phase += 0.6180339887498949;
            phase -= std::floor(phase);
            b_[i] += scale * (0.5 + phase) * (1.0 + std::abs(b_[i]));
        }
        refactor();
    }

    void restore_rhs() {
        b_ = b_true_;
        refactor();
    }

    // Worst violation of a basic variable against its own bounds.
    double max_bound_violation() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t j = static_cast<std::size_t>(basis_[i]);
            if (lo_[j] != -kInf) worst = std::max(worst, lo_[j] - xb_[i]);
            if (up_[j] != kInf) worst = std::max(worst, xb_[i] - up_[j]);
        }
        return worst;
    }

    double run_phase1() {
        std::vector<double> saved = cost_;
        std::fill(cost_.begin(), cost_.end(), 0.0);
        for (std::size_t j = art_begin_; j < n_; ++j) cost_[j] = 1.0;
        run(/*phase1=*/true);
        const double infeas = artificial_sum();
        cost_ = saved;
        return infeas;
    }

    void pin_artificials() {
        for (std::size_t j = art_begin_; j < n_; ++j) {
            lo_[j] = 0.0;
            up_[j] = 0.0;
            if (state_[j] != VarState::Basic) state_[j] = VarState::AtLower;
        }
    }

    LpStatus run_phase2() { return run(/*phase1=*/false); }

    std::vector<double> solution() const {
        std::vector<double> x(n_struct_);
        for (std::size_t j = 0; j < n_struct_; ++j) x[j] = current_value(j);
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (lo_[j] != -kInf && x[j] < lo_[j]) {
                if (x[j] < lo_[j] - 1e-6)
                    throw std::runtime_error("simplex: bound violated at column " +
                                             std::to_string(j));
                x[j] = lo_[j];
            }
            if (up_[j] != kInf && x[j] > up_[j]) {
                if (x[j] > up_[j] + 1e-6)
                    throw std::runtime_error("simplex: bound violated at column " +
                                             std::to_string(j));
                x[j] = up_[j];
            }
        }
        return x;
    }

    const std::vector<double>& multipliers() const { return pi_; }
    long iterations() const { return iterations_; }

private:
    bool is_unit_column(std::size_t j, std::size_t row, double& sigma) const {
        const std::size_t b = col_ptr_[j], e = col_ptr_[j + 1];
        if (e != b + 1) return false;
        if (row_idx_[b] != row) return false;
        const double v = val_[b];
        if (v != 1.0 && v != -1.0) return false;
        sigma = v;
        return true;
    }

    double rest_value(std::size_t j) const {
        switch (state_[j]) {
            case VarState::AtLower: return lo_[j];
            case VarState::AtUpper: return up_[j];
            default: return 0.0;
        }
    }

    double current_value(std::size_t j) const {
        if (state_[j] == VarState::Basic) {
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] == static_cast<long>(j)) return xb_[i];
        }
        return rest_value(j);
    }

    double artificial_sum() const {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (static_cast<std::size_t>(basis_[i]) >= art_begin_) s += std::abs(xb_[i]);
        return s;
    }

    void scatter_column(std::size_t j, std::vector<double>& dense) const {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
            dense[row_idx_[k]] = val_[k];
    }

    // B^{-1} v through the LU factor and the eta file.
    void ftran(std::vector<double>& v) const {
        lu_solve(lu_, v);
        for (const Eta& e : etas_) {
            const double t = v[e.row];
            if (t == 0.0) continue;
            const double* col = e.col.data();
            for (std::size_t i = 0; i < m_; ++i) v[i] += col[i] * t;
            v[e.row] = e.diag * t;
        }
    }

    // v' B^{-1}, i.e. solves B' w = v.
    void btran(std::vector<double>& v) const {
        for (std::size_t k = etas_.size(); k-- > 0;) {
            const Eta& e = etas_[k];
            double s = e.diag * v[e.row];
            const double* col = e.col.data();
            for (std::size_t i = 0; i < m_; ++i) s += col[i] * v[i];
            v[e.row] = s;
        }
        lu_solve_transposed(lu_, v);
    }

    void refactor() {
        Matrix b(m_, m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t j = static_cast<std::size_t>(basis_[i]);
            for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                b(row_idx_[k], i) = val_[k];
        }
        lu_ = lu_factor(std::move(b));
        etas_.clear();

        // Exact basic values for the current bound assignment.
        std::vector<double> rhs = b_;
        for (std::size_t j = 0; j < n_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double v = rest_value(j);
            if (v == 0.0) continue;
            for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                rhs[row_idx_[k]] -= val_[k] * v;
        }
        lu_solve(lu_, rhs);
        xb_ = std::move(rhs);
    }

    // Exact multipliers and reduced costs for the current basis.
    void price_all() {
        pi_.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) pi_[i] = cost_[static_cast<std::size_t>(basis_[i])];
        btran(pi_);
        d_.assign(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            double s = cost_[j];
            for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                s -= pi_[row_idx_[k]] * val_[k];
            d_[j] = s;
        }
    }

    int entering_direction(std::size_t j) const {
        if (state_[j] == VarState::Basic) return 0;
        if (lo_[j] == up_[j]) return 0;  // pinned
        const double dj = d_[j];
        switch (state_[j]) {
            case VarState::AtLower: return dj < -kCostTol ? +1 : 0;
            case VarState::AtUpper: return dj > kCostTol ? -1 : 0;
            case VarState::FreeAtZero:
                if (dj < -kCostTol) return +1;
                if (dj > kCostTol) return -1;
                return 0;
            default: return 0;
        }
    }

    LpStatus run(bool phase1) {
        const long iter_limit = 20000 + 200L * static_cast<long>(m_ + n_);
        long degenerate_streak = 0;
        bool bland = false;
        std::vector<double> y(m_);

        for (;;) {
            if (++iterations_ > iter_limit)
                throw std::runtime_error("simplex: iteration limit exceeded");
            if (static_cast<long>(etas_.size()) >= kRefactorEvery) refactor();
            if (phase1 && artificial_sum() <= 1e-10) return LpStatus::Optimal;

            price_all();

            long enter = -1;
            int dir = 0;
            double best = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                const int dj_dir = entering_direction(j);
                if (dj_dir == 0) continue;
                if (bland) {
                    enter = static_cast<long>(j);
                    dir = dj_dir;
                    break;
                }
                const double mag = std::abs(d_[j]);
                if (mag > best) {
                    best = mag;
                    enter = static_cast<long>(j);
                    dir = dj_dir;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            const std::size_t je = static_cast<std::size_t>(enter);

            scatter_column(je, y);
            ftran(y);
            double colmax = 0.0;
            for (double v : y) colmax = std::max(colmax, std::abs(v));
            const double wtol = std::max(kPivotTol, 1e-7 * colmax);

            // Harris two-pass ratio test over the fresh column.
            const double span = up_[je] - lo_[je];
            auto row_ratio = [&](std::size_t i, double relax, double& w_out,
                                 bool& hits_upper) -> double {
                const double w = y[i];
                if (std::abs(w) <= wtol) return kInf;
                const double delta = -dir * w;
                const std::size_t bi = static_cast<std::size_t>(basis_[i]);
                double slack;
                if (delta < 0.0) {
                    if (lo_[bi] == -kInf) return kInf;
                    slack = xb_[i] - lo_[bi];
                    hits_upper = false;
                } else {
                    if (up_[bi] == kInf) return kInf;
                    slack = up_[bi] - xb_[i];
                    hits_upper = true;
                }
                w_out = w;
                return std::max(slack + relax, 0.0) / std::abs(delta);
            };

            double t_limit = span;
            for (std::size_t i = 0; i < m_; ++i) {
                double w = 0.0;
                bool hu = false;
                t_limit = std::min(t_limit, row_ratio(i, kHarrisRelax, w, hu));
            }
            if (t_limit == kInf) {
                if (phase1) throw std::runtime_error("simplex: phase 1 unbounded");
                return LpStatus::Unbounded;
            }

            long leave_row = -1;
            bool leave_at_upper = false;
            double leave_weight = 0.0;
            double t = span;
            for (std::size_t i = 0; i < m_; ++i) {
                double w = 0.0;
                bool hu = false;
                const double ti = row_ratio(i, 0.0, w, hu);
                if (ti > t_limit) continue;
                bool take;
                if (bland) {
                    take = leave_row < 0 || ti < t - 1e-12 ||
                           (ti <= t + 1e-12 && basis_[i] < basis_[leave_row]);
                } else {
                    take = leave_row < 0 || std::abs(w) > leave_weight;
                }
                if (take) {
                    t = ti;
                    leave_row = static_cast<long>(i);
                    leave_at_upper = hu;
                    leave_weight = std::abs(w);
                }
            }

            degenerate_streak = (leave_row >= 0 && t <= 1e-12) ? degenerate_streak + 1 : 0;
            if (degenerate_streak > 100) bland = true;
            if (degenerate_streak == 0) bland = false;

            if (leave_row < 0) {
                // The entering variable reaches its opposite bound first.
                for (std::size_t i = 0; i < m_; ++i)
                    if (y[i] != 0.0) xb_[i] -= dir * y[i] * span;
                state_[je] =
                    (state_[je] == VarState::AtLower) ? VarState::AtUpper : VarState::AtLower;
                continue;
            }

            // Pivot: update values, record the eta transform for B^{-1}.
            const std::size_t r = static_cast<std::size_t>(leave_row);
            const double step = std::max(t, 0.0);
            const double enter_val = rest_value(je) + dir * step;
            for (std::size_t i = 0; i < m_; ++i)
                if (i != r && y[i] != 0.0) xb_[i] -= dir * y[i] * step;

            const std::size_t leaving = static_cast<std::size_t>(basis_[r]);
            state_[leaving] = leave_at_upper ? VarState::AtUpper : VarState::AtLower;

            Eta e;
            e.row = r;
            e.diag = 1.0 / y[r];
            e.col.assign(m_, 0.0);
            for (std::size_t i = 0; i < m_; ++i)
                if (i != r) e.col[i] = -y[i] * e.diag;
            etas_.push_back(std::move(e));

            basis_[r] = static_cast<long>(je);
            state_[je] = VarState::Basic;
            xb_[r] = enter_val;
        }
    }

    struct Eta {
        std::size_t row = 0;
        double diag = 1.0;
        std::vector<double> col;  // col[row] is unused; kept zero
    };

    std::size_t m_;
    std::size_t n_struct_;
    std::size_t n_;
    std::size_t art_begin_ = 0;
    bool any_artificial_ = false;

    std::vector<std::size_t> col_ptr_;
    std::vector<std::size_t> row_idx_;
    std::vector<double> val_;
    std::vector<double> b_;
    std::vector<double> lo_, up_, cost_;

    std::vector<long> basis_;
    std::vector<VarState> state_;
    std::vector<double> xb_;
    std::vector<double> d_;
    std::vector<double> pi_;

    std::vector<double> b_true_;

    Lu lu_;
    std::vector<Eta> etas_;
    long iterations_ = 0;
};

}  // namespace

BoundedSolution solve_bounded(const BoundedLp& lp) {
    const std::size_t m = lp.a.rows(), n = lp.a.cols();
    if (lp.b.size() != m || lp.c.size() != n || lp.lo.size() != n || lp.up.size() != n)
        throw std::invalid_argument("solve_bounded: inconsistent sizes");

    // The rhs perturbation guides the pivot path away from fully degenerate
    // territory. Reduced costs do not depend on the rhs, so the final basis
    // stays optimal once the true rhs is restored; it merely has to remain
    // feasible. If it does not, retry with a finer perturbation and finally
    // with none at all.
    BoundedSolution out;
    for (double scale : {1e-7, 1e-9, 0.0}) {
        RevisedSimplex simplex(lp);
        if (scale > 0.0) simplex.perturb_rhs(scale);

        if (simplex.has_artificials()) {
            if (simplex.run_phase1() > 1e-7) {
                out.status = LpStatus::Infeasible;
                out.iterations += simplex.iterations();
                return out;
            }
            simplex.pin_artificials();
        }
        out.status = simplex.run_phase2();
        out.iterations += simplex.iterations();
        if (out.status != LpStatus::Optimal) return out;

        if (scale > 0.0) {
            simplex.restore_rhs();
            if (simplex.max_bound_violation() > 1e-7) continue;
        }
        out.x = simplex.solution();
        out.objective = 0.0;
        for (std::size_t j = 0; j < n; ++j) out.objective += lp.c[j] * out.x[j];
        out.row_multipliers = simplex.multipliers();
        return out;
    }
    throw std::runtime_error("solve_bounded: no feasible optimal basis after retries");
}

LpSolution solve_lp(const LinearProgram& lp) {
    const std::size_t rows = lp.d.rows(), cols = lp.d.cols();
    if (lp.w.size() != cols) throw std::invalid_argument("solve_lp: w/D size mismatch");
    if (lp.q.size() != rows) throw std::invalid_argument("solve_lp: q/D size mismatch");
    if (lp.num_free > cols) throw std::invalid_argument("solve_lp: num_free exceeds variables");

    // Standard form: append one slack per inequality row.
    BoundedLp std_form;
    std_form.a = Matrix(rows, cols + rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) std_form.a(i, j) = lp.d(i, j);
        std_form.a(i, cols + i) = 1.0;
    }
    std_form.b = lp.q;
    std_form.c.assign(cols + rows, 0.0);
    std::copy(lp.w.begin(), lp.w.end(), std_form.c.begin());
    std_form.lo.assign(cols + rows, 0.0);
    std_form.up.assign(cols + rows, kInf);
    for (std::size_t j = 0; j < lp.num_free; ++j) std_form.lo[j] = -kInf;
    std_form.start_basis.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) std_form.start_basis[i] = static_cast<long>(cols + i);

    BoundedSolution sol = solve_bounded(std_form);

    LpSolution out;
    out.status = sol.status;
    if (sol.status != LpStatus::Optimal) return out;

    out.y.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(cols));
    out.objective = 0.0;
    for (std::size_t j = 0; j < cols; ++j) out.objective += lp.w[j] * out.y[j];

    // Feasibility contract; a failure here is a solver defect, not user error.
    for (std::size_t i = 0; i < rows; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < cols; ++j) row += lp.d(i, j) * out.y[j];
        if (row > lp.q[i] + 1e-6)
            throw std::runtime_error("solve_lp: returned point violates row " +
                                     std::to_string(i));
    }
    return out;
}

QuadraticMinimum minimize_quadratic(const Matrix& h, const std::vector<double>& f,
                                    double constant) {
    if (f.size() != h.rows()) throw std::invalid_argument("minimize_quadratic: f size");
    const Matrix z = solve_spd(h, Matrix::column(f));
    QuadraticMinimum out;
    out.z = z.data();
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        const double* hi = h.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < h.cols(); ++j) s += hi[j] * out.z[j];
        quad += out.z[i] * s;
        lin += f[i] * out.z[i];
    }
    out.value = 0.5 * quad + lin + constant;
    return out;
}

}  // namespace lrnn
