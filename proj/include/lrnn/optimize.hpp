#pragma once

#include "lrnn/matrix.hpp"

#include <cstdint>
#include <vector>

namespace lrnn {

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// min w'y subject to D y <= q. The first num_free components of y are
/// unrestricted in sign; the remaining ones are nonnegative.
struct LinearProgram {
    std::vector<double> w;
    Matrix d;
    std::vector<double> q;
    std::size_t num_free = 0;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> y;
    double objective = 0.0;
};

LpSolution solve_lp(const LinearProgram& lp);

/// min c'x subject to A x = b and lo <= x <= up. Bounds may be infinite on
/// either side; a column with lo = -inf and up = +inf is a free variable.
/// start_basis, when non-empty, gives per row a column index whose constraint
/// column is exactly +-e_i (a unit column) to seed the initial basis; -1 or an
/// infeasible choice falls back to an artificial variable for that row.
struct BoundedLp {
    Matrix a;
    std::vector<double> b;
    std::vector<double> c;
    std::vector<double> lo;
    std::vector<double> up;
    std::vector<long> start_basis;
};

struct BoundedSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    /// Simplex multipliers of the equality rows (read off the artificial
    /// columns); the dual optimum when status == Optimal.
    std::vector<double> row_multipliers;
    long iterations = 0;
};

BoundedSolution solve_bounded(const BoundedLp& lp);

struct QuadraticMinimum {
    std::vector<double> z;
    double value = 0.0;
};

/// Exact minimizer of 0.5 z'Hz + f'z + constant for SPD H.
QuadraticMinimum minimize_quadratic(const Matrix& h, const std::vector<double>& f,
                                    double constant);

}  // namespace lrnn
