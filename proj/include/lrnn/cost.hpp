#pragma once

#include "lrnn/matrix.hpp"
#include "lrnn/optimize.hpp"

#include <utility>
#include <vector>

namespace lrnn {

enum class Regime { Sparse, Quadratic };

/// Affine map Z -> sum_i L_i Z M_i - N over a fixed Z shape. All terms and
/// the offset N share one residual shape.
struct MultiTermExpr {
    std::vector<std::pair<Matrix, Matrix>> terms;  // (L_i, M_i)
    Matrix offset;                                 // N
    std::size_t z_rows = 0;
    std::size_t z_cols = 0;

    std::size_t residual_rows() const { return offset.rows(); }
    std::size_t residual_cols() const { return offset.cols(); }
};

MultiTermExpr make_expr(std::vector<std::pair<Matrix, Matrix>> terms, Matrix offset,
                        std::size_t z_rows, std::size_t z_cols);

/// Norm applied to a residual: elementwise eps-insensitive |m|_eps summed over
/// entries (R holds the per-entry insensitivities, R = 0 gives the L1 norm),
/// or the squared norm tr(M'KM) induced by a positive definite K.
struct NormSpec {
    enum class Kind { EpsInsensitive, SquaredK };
    Kind kind = Kind::EpsInsensitive;
    Matrix weight;

    static NormSpec eps_insensitive(Matrix r);
    static NormSpec squared_k(Matrix k);
};

struct CostTerm {
    double lambda = 1.0;
    MultiTermExpr expr;
    NormSpec norm;
};

/// Weighted sum of norm terms over a shared variable Z. Sparse costs use only
/// eps-insensitive norms, Quadratic costs only squared K-norms.
struct CostFunction {
    Regime regime = Regime::Sparse;
    std::vector<CostTerm> terms;
    std::size_t z_rows = 0;
    std::size_t z_cols = 0;
};

CostFunction make_cost_function(Regime regime, std::vector<CostTerm> terms);

Matrix eval_residual(const MultiTermExpr& expr, const Matrix& z);
double norm_value(const NormSpec& norm, const Matrix& residual);
double eval_cost(const CostFunction& cost, const Matrix& z);

/// vec form of the multi-term map: sum_i M_i' (x) L_i, mapping vec(Z) to
/// vec(sum_i L_i Z M_i).
Matrix stacked_operator(const MultiTermExpr& expr);

/// Reduction of a Sparse cost to min w'y s.t. Dy <= q over y = (z, a, a*).
/// Each term contributes its own slack blocks; the z block is shared and
/// free. The LP optimum equals the cost minimum and the minimizer is
/// unvec of the leading z block.
LinearProgram assemble_lp(const CostFunction& cost);

struct QuadraticForm {
    Matrix h;
    std::vector<double> f;
    double constant = 0.0;
};

/// Reduction of a Quadratic cost to 0.5 vec(Z)'H vec(Z) + f'vec(Z) + const;
/// H is symmetrized after assembly.
QuadraticForm assemble_qp(const CostFunction& cost);

struct CostMinimum {
    Matrix z;
    double value = 0.0;
};

/// Exact global minimizer of a Sparse cost. Solves the bounded dual of the
/// assemble_lp program (box variables per residual entry, one equality row
/// per z entry) and reads the minimizer off the row multipliers; the dual
/// and primal objectives are cross-checked before returning.
CostMinimum minimize_sparse_cost(const CostFunction& cost);

/// Exact global minimizer of a Quadratic cost via the SPD system.
CostMinimum minimize_quadratic_cost(const CostFunction& cost);

/// Dispatch on cost.regime.
CostMinimum minimize_cost(const CostFunction& cost);

}  // namespace lrnn
