#include "lpvembed/offset.hpp"

#include "lpvembed/error.hpp"
#include "lpvembed/expr.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <limits>

namespace lpvembed {

DcGains dc_gains(const NlfrModel& model) {
    const Eigen::PartialPivLU<Matrix> lu(model.A);
    const double rcond = lu.rcond();
    if (!(rcond > 64 * std::numeric_limits<double>::epsilon()))
        throw Error(ErrorCode::SingularA, "A is singular (reciprocal condition " + format_double(rcond) +
                                              "); the steady-state gain is undefined");
    const Matrix inv_bu = lu.solve(model.Bu);
    const Matrix inv_bw = lu.solve(model.Bw);
    DcGains g;
    g.g1 = model.Dyu - model.Cy * inv_bu;
    g.g2 = model.Dzu - model.Cz * inv_bu;
    g.g3 = model.Dyw - model.Cy * inv_bw;
    g.g4 = -model.Cz * inv_bw;
    return g;
}

HurwitzReport check_hurwitz(const Matrix& A) {
    if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
    const Eigen::EigenSolver<Matrix> es(A, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenvalueFailure, "eigenvalue iteration did not converge");
    HurwitzReport rep;
    rep.max_real_part = es.eigenvalues().real().maxCoeff();
    rep.hurwitz = rep.max_real_part < kHurwitzMargin;
    return rep;
}

OffsetSolution solve_offsets(const DcGains& gains, const Vector& c) {
    if (!c.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "offset c must be finite");
    if (c.size() != gains.g4.cols()) throw Error(ErrorCode::DimensionMismatch, "offset c has wrong length");
    OffsetSolution sol;
    if ((c.array() == 0.0).all()) {
        sol.d = Vector::Zero(gains.g2.cols());
        sol.y0 = Vector::Zero(gains.g1.rows());
        return sol;
    }
    const Vector shift = gains.g4 * c;
    const Vector target = -shift;
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gains.g2);
    sol.d = cod.solve(target);
    const Vector unreachable = gains.g2 * sol.d - target;
    sol.residual = unreachable.norm();
    if (sol.residual > kOffsetConsistencyTolerance * (1.0 + shift.norm())) {
        std::string comp;
        for (Eigen::Index k = 0; k < unreachable.size(); ++k) comp += (k ? ", " : "") + format_double(unreachable[k]);
        throw Error(ErrorCode::ColumnSpaceViolation,
                    "G4(0) c is not in the column space of G2(0): residual " + format_double(sol.residual) +
                        ", unreachable component [" + comp + "]");
    }
    sol.y0 = gains.g3 * c + gains.g1 * sol.d;
    return sol;
}

Matrix apply_input_offset(const Matrix& u, const OffsetSolution& sol) {
    if (u.cols() != sol.d.size()) throw Error(ErrorCode::DimensionMismatch, "input width differs from d");
    return u.rowwise() - sol.d.transpose();
}

Matrix remove_output_offset(const Matrix& y, const OffsetSolution& sol) {
    if (y.cols() != sol.y0.size()) throw Error(ErrorCode::DimensionMismatch, "output width differs from y0");
    return y.rowwise() - sol.y0.transpose();
}

Matrix restore_output_offset(const Matrix& y_corrected, const OffsetSolution& sol) {
    if (y_corrected.cols() != sol.y0.size()) throw Error(ErrorCode::DimensionMismatch, "output width differs from y0");
    return y_corrected.rowwise() + sol.y0.transpose();
}

}  // namespace lpvembed
