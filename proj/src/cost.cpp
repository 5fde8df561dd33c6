#include "lrnn/cost.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lrnn {

MultiTermExpr make_expr(std::vector<std::pair<Matrix, Matrix>> terms, Matrix offset,
                        std::size_t z_rows, std::size_t z_cols) {
    if (terms.empty()) throw std::invalid_argument("make_expr: no terms");
    for (const auto& [l, m] : terms) {
        if (l.cols() != z_rows || m.rows() != z_cols)
            throw std::invalid_argument("make_expr: term does not conform to Z shape");
        if (l.rows() != offset.rows() || m.cols() != offset.cols())
            throw std::invalid_argument("make_expr: term residual shape differs from offset");
    }
    MultiTermExpr e;
    e.terms = std::move(terms);
    e.offset = std::move(offset);
    e.z_rows = z_rows;
    e.z_cols = z_cols;
    return e;
}

NormSpec NormSpec::eps_insensitive(Matrix r) {
    for (double v : r.data())
        if (v < 0.0) throw std::invalid_argument("eps_insensitive: negative entry in R");
    NormSpec n;
    n.kind = Kind::EpsInsensitive;
    n.weight = std::move(r);
    return n;
}

NormSpec NormSpec::squared_k(Matrix k) {
    if (k.rows() != k.cols()) throw std::invalid_argument("squared_k: K not square");
    solve_spd(k, Matrix(k.rows(), 1));  // symmetry + positive definiteness
    NormSpec n;
    n.kind = Kind::SquaredK;
    n.weight = std::move(k);
    return n;
}

CostFunction make_cost_function(Regime regime, std::vector<CostTerm> terms) {
    if (terms.empty()) throw std::invalid_argument("make_cost_function: no terms");
    CostFunction c;
    c.regime = regime;
    c.z_rows = terms.front().expr.z_rows;
    c.z_cols = terms.front().expr.z_cols;
    for (const auto& t : terms) {
        if (t.lambda <= 0.0) throw std::invalid_argument("make_cost_function: lambda <= 0");
        if (t.expr.z_rows != c.z_rows || t.expr.z_cols != c.z_cols)
            throw std::invalid_argument("make_cost_function: terms disagree on Z shape");
        const bool eps = t.norm.kind == NormSpec::Kind::EpsInsensitive;
        if (regime == Regime::Sparse && !eps)
            throw std::invalid_argument("make_cost_function: Sparse cost with squared norm");
        if (regime == Regime::Quadratic && eps)
            throw std::invalid_argument("make_cost_function: Quadratic cost with eps norm");
        if (eps) {
            if (t.norm.weight.rows() != t.expr.residual_rows() ||
                t.norm.weight.cols() != t.expr.residual_cols())
                throw std::invalid_argument("make_cost_function: R shape mismatch");
        } else if (t.norm.weight.rows() != t.expr.residual_rows()) {
            throw std::invalid_argument("make_cost_function: K size mismatch");
        }
    }
    c.terms = std::move(terms);
    return c;
}

Matrix eval_residual(const MultiTermExpr& expr, const Matrix& z) {
    if (z.rows() != expr.z_rows || z.cols() != expr.z_cols)
        throw std::invalid_argument("eval_residual: Z shape mismatch");
    Matrix r(expr.residual_rows(), expr.residual_cols());
    for (const auto& [l, m] : expr.terms) r += l * z * m;
    r -= expr.offset;
    return r;
}

double norm_value(const NormSpec& norm, const Matrix& residual) {
    if (norm.kind == NormSpec::Kind::EpsInsensitive) {
        const auto& r = norm.weight;
        if (r.rows() != residual.rows() || r.cols() != residual.cols())
            throw std::invalid_argument("norm_value: R shape mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < residual.size(); ++i)
            s += std::max(0.0, std::abs(residual.data()[i]) - r.data()[i]);
        return s;
    }
    const Matrix km = norm.weight * residual;
    double s = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i) s += residual.data()[i] * km.data()[i];
    return s;
}

double eval_cost(const CostFunction& cost, const Matrix& z) {
    double total = 0.0;
    for (const auto& t : cost.terms) total += t.lambda * norm_value(t.norm, eval_residual(t.expr, z));
    return total;
}

Matrix stacked_operator(const MultiTermExpr& expr) {
    Matrix op = kron(transpose(expr.terms.front().second), expr.terms.front().first);
    for (std::size_t i = 1; i < expr.terms.size(); ++i)
        op += kron(transpose(expr.terms[i].second), expr.terms[i].first);
    return op;
}

LinearProgram assemble_lp(const CostFunction& cost) {
    if (cost.regime != Regime::Sparse)
        throw std::invalid_argument("assemble_lp: cost is not Sparse");

    const std::size_t nz = cost.z_rows * cost.z_cols;
    std::vector<Matrix> ops;
    std::vector<std::size_t> nr(cost.terms.size());
    std::size_t total = 0;
    for (std::size_t k = 0; k < cost.terms.size(); ++k) {
        ops.push_back(stacked_operator(cost.terms[k].expr));
        nr[k] = ops[k].rows();
        total += nr[k];
    }

    // y = (z, a_1..a_K, a*_1..a*_K); rows: +blocks, -blocks, then the
    // nonnegativity rows -a <= 0 and -a* <= 0.
    const std::size_t cols = nz + 2 * total;
    const std::size_t rows = 4 * total;
    LinearProgram lp;
    lp.num_free = nz;
    lp.w.assign(cols, 0.0);
    lp.q.assign(rows, 0.0);
    lp.d = Matrix(rows, cols);

    std::size_t off = 0;
    for (std::size_t k = 0; k < cost.terms.size(); ++k) {
        const auto& term = cost.terms[k];
        const Matrix r = vec(term.norm.weight);
        const Matrix n = vec(term.expr.offset);
        const std::size_t a_col = nz + off;
        const std::size_t as_col = nz + total + off;
        for (std::size_t i = 0; i < nr[k]; ++i) {
            lp.w[a_col + i] = term.lambda;
            lp.w[as_col + i] = term.lambda;
            const std::size_t plus_row = off + i;
            const std::size_t minus_row = total + off + i;
            for (std::size_t g = 0; g < nz; ++g) {
                const double v = ops[k](i, g);
                lp.d(plus_row, g) = v;
                lp.d(minus_row, g) = -v;
            }
            lp.d(plus_row, a_col + i) = -1.0;
            lp.d(minus_row, as_col + i) = -1.0;
            lp.q[plus_row] = r(i, 0) + n(i, 0);
            lp.q[minus_row] = r(i, 0) - n(i, 0);
            lp.d(2 * total + off + i, a_col + i) = -1.0;
            lp.d(3 * total + off + i, as_col + i) = -1.0;
        }
        off += nr[k];
    }
    return lp;
}

QuadraticForm assemble_qp(const CostFunction& cost) {
    if (cost.regime != Regime::Quadratic)
        throw std::invalid_argument("assemble_qp: cost is not Quadratic");

    const std::size_t nz = cost.z_rows * cost.z_cols;
    QuadraticForm qf;
    qf.h = Matrix(nz, nz);
    qf.f.assign(nz, 0.0);
    qf.constant = 0.0;

    for (const auto& term : cost.terms) {
        const auto& k = term.norm.weight;
        const auto& n = term.expr.offset;
        const double lam = term.lambda;
        for (const auto& [li, mi] : term.expr.terms) {
            for (const auto& [lj, mj] : term.expr.terms) {
                // (M_i' (x) I)' [M_j' (x) (L_i'K L_j)] collapses to
                // (M_i M_j') (x) (L_i'K L_j) by the mixed-product rule.
                Matrix block = kron(mi * transpose(mj), transpose(li) * k * lj);
                block *= 2.0 * lam;
                qf.h += block;
            }
        }
        for (const auto& [lj, mj] : term.expr.terms) {
            const Matrix fj = vec(transpose(lj) * k * n * transpose(mj));
            for (std::size_t i = 0; i < nz; ++i) qf.f[i] -= 2.0 * lam * fj(i, 0);
        }
        const Matrix kn = k * n;
        double tr_nkn = 0.0;
        for (std::size_t i = 0; i < n.size(); ++i) tr_nkn += n.data()[i] * kn.data()[i];
        qf.constant += lam * tr_nkn;
    }

    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = i + 1; j < nz; ++j) {
            const double avg = 0.5 * (qf.h(i, j) + qf.h(j, i));
            qf.h(i, j) = avg;
            qf.h(j, i) = avg;
        }
    return qf;
}

CostMinimum minimize_sparse_cost(const CostFunction& cost) {
    if (cost.regime != Regime::Sparse)
        throw std::invalid_argument("minimize_sparse_cost: cost is not Sparse");

    const std::size_t nz = cost.z_rows * cost.z_cols;
    std::vector<Matrix> ops;
    std::size_t total = 0;
    for (const auto& t : cost.terms) {
        ops.push_back(stacked_operator(t.expr));
        total += ops.back().rows();
    }

    // Dual of the assemble_lp program: one equality row per z entry with zero
    // right-hand side, a box pair (alpha, alpha*) in [0, lambda_k] per
    // residual entry. min (r+n)'alpha + (r-n)'alpha*; the primal optimum is
    // the negated dual optimum and the primal minimizer is the vector of row
    // multipliers.
    BoundedLp dual;
    dual.a = Matrix(nz, 2 * total);
    dual.b.assign(nz, 0.0);
    dual.c.assign(2 * total, 0.0);
    dual.lo.assign(2 * total, 0.0);
    dual.up.assign(2 * total, 0.0);

    // An identity regularizer term (L = I, M = I, N = 0) contributes exact
    // unit columns to the dual; seeding the start basis with them avoids the
    // all-artificial degenerate start.
    long identity_term = -1;
    std::size_t off = 0;
    for (std::size_t k = 0; k < cost.terms.size(); ++k) {
        const auto& term = cost.terms[k];
        const Matrix r = vec(term.norm.weight);
        const Matrix n = vec(term.expr.offset);
        const std::size_t nr = ops[k].rows();
        if (identity_term < 0 && nr == nz && ops[k] == Matrix::identity(nz) &&
            term.expr.offset.max_abs() == 0.0)
            identity_term = static_cast<long>(off);
        for (std::size_t i = 0; i < nr; ++i) {
            const std::size_t ca = off + i;
            const std::size_t cs = total + off + i;
            for (std::size_t g = 0; g < nz; ++g) {
                const double v = ops[k](i, g);
                dual.a(g, ca) = v;
                dual.a(g, cs) = -v;
            }
            dual.c[ca] = r(i, 0) + n(i, 0);
            dual.c[cs] = r(i, 0) - n(i, 0);
            dual.up[ca] = term.lambda;
            dual.up[cs] = term.lambda;
        }
        off += nr;
    }
    if (identity_term >= 0) {
        dual.start_basis.resize(nz);
        for (std::size_t g = 0; g < nz; ++g)
            dual.start_basis[g] = identity_term + static_cast<long>(g);
    }

    const BoundedSolution sol = solve_bounded(dual);
    if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("minimize_sparse_cost: dual solve not optimal");

    Matrix zvec(nz, 1);
    for (std::size_t g = 0; g < nz; ++g) zvec(g, 0) = sol.row_multipliers[g];
    if (!zvec.all_finite())
        throw std::runtime_error("minimize_sparse_cost: non-finite minimizer");

    // The multipliers carry factorization round-off where the L1 geometry
    // puts exact zeros; snap it out so zeros propagate exactly into later
    // problems built from this minimizer.
    const double snap = 1e-9 * (1.0 + zvec.max_abs());
    for (double& v : zvec.data())
        if (std::abs(v) < snap) v = 0.0;

    CostMinimum out;
    out.z = unvec(zvec, cost.z_rows, cost.z_cols);
    out.value = eval_cost(cost, out.z);

    const double dual_value = -sol.objective;
    if (std::abs(out.value - dual_value) > 1e-6 * (1.0 + std::abs(dual_value)))
        throw std::runtime_error("minimize_sparse_cost: primal/dual gap " +
                                 std::to_string(out.value - dual_value));
    return out;
}

CostMinimum minimize_quadratic_cost(const CostFunction& cost) {
    const QuadraticForm qf = assemble_qp(cost);
    const QuadraticMinimum qm = minimize_quadratic(qf.h, qf.f, qf.constant);
    CostMinimum out;
    out.z = unvec(Matrix::column(qm.z), cost.z_rows, cost.z_cols);
    out.value = qm.value;
    return out;
}

CostMinimum minimize_cost(const CostFunction& cost) {
    return cost.regime == Regime::Sparse ? minimize_sparse_cost(cost)
                                         : minimize_quadratic_cost(cost);
}

}  // namespace lrnn
