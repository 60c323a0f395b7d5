#pragma once

// Propagation of a constant nonlinearity offset c = f(0) to constant input and
// output corrections through the steady-state gains of the LTI part.
//
// Steady-state gains (s -> 0) of the four channel pairings:
//     G1 = Dyu - Cy A^-1 Bu    (u -> y)      G2 = Dzu - Cz A^-1 Bu   (u -> z)
//     G3 = Dyw - Cy A^-1 Bw    (w -> y)      G4 =     - Cz A^-1 Bw   (w -> z)
//
// The offset c enters w, shifts z by G4 c and y by G3 c at steady state. The
// input correction d solves G2 d = -G4 c, so that u~ = u - d reproduces the
// same z-shift through the input path; the output correction is
// y0 = G3 c + G1 d, and y = y~ + y0.

#include "lpvembed/model.hpp"
#include "lpvembed/types.hpp"

#include <string>

namespace lpvembed {

struct DcGains {
    Matrix g1;  // n_y x n_u
    Matrix g2;  // n_z x n_u
    Matrix g3;  // n_y x n_w
    Matrix g4;  // n_z x n_w
};

/// Throws SingularA when A has an eigenvalue at (or numerically at) zero.
DcGains dc_gains(const NlfrModel& model);

inline constexpr double kHurwitzMargin = -1e-9;

struct HurwitzReport {
    bool hurwitz = false;
    double max_real_part = 0.0;
};

/// True iff every eigenvalue has real part < -1e-9. Throws EigenvalueFailure.
HurwitzReport check_hurwitz(const Matrix& A);

inline constexpr double kOffsetConsistencyTolerance = 1e-9;

struct OffsetSolution {
    Vector d;   // n_u
    Vector y0;  // n_y
    double residual = 0.0;
};

/// Minimum-norm least-squares d for G2 d = -G4 c. Throws ColumnSpaceViolation
/// when the residual exceeds 1e-9 (1 + |G4 c|).
OffsetSolution solve_offsets(const DcGains& gains, const Vector& c);

/// u~ = u - d per sample (rows are samples).
Matrix apply_input_offset(const Matrix& u, const OffsetSolution& sol);
/// y~ = y - y0 per sample.
Matrix remove_output_offset(const Matrix& y, const OffsetSolution& sol);
/// y = y~ + y0 per sample.
Matrix restore_output_offset(const Matrix& y_corrected, const OffsetSolution& sol);

}  // namespace lpvembed
