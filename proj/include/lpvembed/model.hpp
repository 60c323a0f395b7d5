#pragma once

// NLFR and LPV model types.
//
// NLFR (continuous time, D_zw = 0):
//     dx/dt = A x + Bw w + Bu u
//     z     = Cz x + Dzu u
//     y     = Cy x + Dyw w + Dyu u
//     w     = f(z)
//
// Affine LPV, in offset-corrected coordinates u~ = u - d, y~ = y - y0:
//     dx/dt = (A + sum_k p_k A_k) x + (Bu + sum_k p_k B_k) u~
//     y~    = (Cy + sum_k p_k C_k) x + (Dyu + sum_k p_k D_k) u~
// with p_k the retained entries of the scheduling map evaluated at z.

#include "lpvembed/expr.hpp"
#include "lpvembed/factorize.hpp"
#include "lpvembed/types.hpp"

#include <cstddef>
#include <vector>

namespace lpvembed {

struct Dims {
    std::size_t n_x = 0;
    std::size_t n_u = 0;
    std::size_t n_y = 0;
    std::size_t n_w = 0;
    std::size_t n_z = 0;
    std::size_t n_p = 0;

    friend bool operator==(const Dims&, const Dims&) = default;
};

struct NlfrModel {
    Matrix A, Bw, Bu, Cz, Cy, Dzu, Dyw, Dyu;
    ExpressionVector f;  // n_w rows over n_z variables
};

/// One retained scheduling channel: p_k multiplies E_{r,i} inside the LFR.
struct Channel {
    std::size_t row = 0;  // r, zero-based
    std::size_t col = 0;  // i, zero-based
    Matrix A, B, C, D;
};

struct LpvModel {
    // Nominal LTI part.
    Matrix A, Bu, Cy, Dyu;
    // Interconnection matrices kept for evaluating the scheduling map and the LFR view.
    Matrix Bw, Cz, Dzu, Dyw;
    // Original nonlinearity, kept for reference and reconstruction checks.
    ExpressionVector f;

    std::vector<Channel> basis;  // row-major over (r, i), Zero entries pruned
    SchedulingMap schedule;
    Vector d;   // input offset:  u~ = u - d
    Vector y0;  // output offset: y  = y~ + y0
};

/// Checks dimensions, finiteness and expression arity. Throws DimensionMismatch
/// (naming the matrix), NonFiniteEntry or ExpressionArityMismatch.
NlfrModel validate_nlfr(NlfrModel model, const Dims& declared);
/// As above with the dimensions taken from A, Bu, Cy, Bw and Cz.
NlfrModel validate_nlfr(NlfrModel model);

/// Same checks for an LPV model, plus basis/schedule consistency of shapes.
LpvModel validate_lpv(LpvModel model);

Dims dims(const NlfrModel& model);
Dims dims(const LpvModel& model);

/// E_{r,i}-based basis quadruple (Bw E Cz, Bw E Dzu, Dyw E Cz, Dyw E Dzu).
Channel make_channel(const Matrix& Bw, const Matrix& Cz, const Matrix& Dzu, const Matrix& Dyw,
                     std::size_t row, std::size_t col);

struct BasisCheck {
    bool consistent = true;
    double max_abs_deviation = 0.0;
    std::size_t worst_channel = 0;
};

/// Recomputes every basis quadruple from (Bw, Cz, Dzu, Dyw) and its index.
BasisCheck verify_basis(const LpvModel& model);

}  // namespace lpvembed
