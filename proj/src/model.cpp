#include "lpvembed/model.hpp"

#include "lpvembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lpvembed {

namespace {

using Index = Eigen::Index;

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                                                      std::to_string(m.cols()) + ", expected " +
                                                      std::to_string(rows) + "x" + std::to_string(cols));
}

void check_length(const Vector& v, std::size_t n, const char* name) {
    if (static_cast<std::size_t>(v.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has length " + std::to_string(v.size()) +
                                                      ", expected " + std::to_string(n));
}

void check_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) throw Error(ErrorCode::NonFiniteEntry, std::string(name) + " contains a non-finite entry");
}

void check_dims_positive(const Dims& d) {
    if (d.n_x == 0 || d.n_u == 0 || d.n_y == 0 || d.n_w == 0 || d.n_z == 0)
        throw Error(ErrorCode::DimensionMismatch, "every model dimension must be at least 1");
}

void check_nonlinearity(const ExpressionVector& f, const Dims& d) {
    if (f.size() != d.n_w)
        throw Error(ErrorCode::ExpressionArityMismatch,
                    "f has " + std::to_string(f.size()) + " rows, expected n_w = " + std::to_string(d.n_w));
    for (std::size_t r = 0; r < f.size(); ++r)
        if (f[r].n_vars() != d.n_z)
            throw Error(ErrorCode::ExpressionArityMismatch, "f row " + std::to_string(r + 1) + " has arity " +
                                                                std::to_string(f[r].n_vars()) +
                                                                ", expected n_z = " + std::to_string(d.n_z));
}

void check_interconnect(const Matrix& A, const Matrix& Bw, const Matrix& Bu, const Matrix& Cz, const Matrix& Cy,
                        const Matrix& Dzu, const Matrix& Dyw, const Matrix& Dyu, const Dims& d) {
    check_dims_positive(d);
    check_shape(A, d.n_x, d.n_x, "A");
    check_shape(Bw, d.n_x, d.n_w, "Bw");
    check_shape(Bu, d.n_x, d.n_u, "Bu");
    check_shape(Cz, d.n_z, d.n_x, "Cz");
    check_shape(Cy, d.n_y, d.n_x, "Cy");
    check_shape(Dzu, d.n_z, d.n_u, "Dzu");
    check_shape(Dyw, d.n_y, d.n_w, "Dyw");
    check_shape(Dyu, d.n_y, d.n_u, "Dyu");
    check_finite(A, "A");
    check_finite(Bw, "Bw");
    check_finite(Bu, "Bu");
    check_finite(Cz, "Cz");
    check_finite(Cy, "Cy");
    check_finite(Dzu, "Dzu");
    check_finite(Dyw, "Dyw");
    check_finite(Dyu, "Dyu");
}

}  // namespace

NlfrModel validate_nlfr(NlfrModel model, const Dims& declared) {
    check_interconnect(model.A, model.Bw, model.Bu, model.Cz, model.Cy, model.Dzu, model.Dyw, model.Dyu, declared);
    check_nonlinearity(model.f, declared);
    return model;
}

NlfrModel validate_nlfr(NlfrModel model) {
    Dims d;
    d.n_x = static_cast<std::size_t>(model.A.rows());
    d.n_u = static_cast<std::size_t>(model.Bu.cols());
    d.n_y = static_cast<std::size_t>(model.Cy.rows());
    d.n_w = static_cast<std::size_t>(model.Bw.cols());
    d.n_z = static_cast<std::size_t>(model.Cz.rows());
    return validate_nlfr(std::move(model), d);
}

LpvModel validate_lpv(LpvModel model) {
    Dims d = dims(model);
    check_interconnect(model.A, model.Bw, model.Bu, model.Cz, model.Cy, model.Dzu, model.Dyw, model.Dyu, d);
    check_nonlinearity(model.f, d);
    check_length(model.d, d.n_u, "d");
    check_length(model.y0, d.n_y, "y0");
    if (!model.d.allFinite() || !model.y0.allFinite())
        throw Error(ErrorCode::NonFiniteEntry, "offset vectors must be finite");
    const SchedulingMap& s = model.schedule;
    if (s.n_w != d.n_w || s.n_z != d.n_z || s.entries.size() != d.n_w * d.n_z)
        throw Error(ErrorCode::DimensionMismatch, "scheduling map is not n_w x n_z");
    check_length(s.c, d.n_w, "schedule offset c");
    if (!is_valid_ordering(s.ordering, d.n_z)) throw Error(ErrorCode::InvalidOrdering, "invalid stored ordering");
    if (d.n_p > d.n_w * d.n_z) throw Error(ErrorCode::DimensionMismatch, "n_p exceeds n_w * n_z");
    for (std::size_t k = 0; k < model.basis.size(); ++k) {
        const Channel& ch = model.basis[k];
        if (ch.row >= d.n_w || ch.col >= d.n_z)
            throw Error(ErrorCode::DimensionMismatch, "basis channel " + std::to_string(k + 1) + " index out of range");
        if (k > 0) {
            const Channel& prev = model.basis[k - 1];
            if (prev.row * d.n_z + prev.col >= ch.row * d.n_z + ch.col)
                throw Error(ErrorCode::FormatError, "basis channels must be row-major and unique");
        }
        if (s.at(ch.row, ch.col).kind == EntryKind::Zero)
            throw Error(ErrorCode::FormatError, "basis channel " + std::to_string(k + 1) + " has a zero schedule");
        check_shape(ch.A, d.n_x, d.n_x, "basis A_k");
        check_shape(ch.B, d.n_x, d.n_u, "basis B_k");
        check_shape(ch.C, d.n_y, d.n_x, "basis C_k");
        check_shape(ch.D, d.n_y, d.n_u, "basis D_k");
        check_finite(ch.A, "basis A_k");
        check_finite(ch.B, "basis B_k");
        check_finite(ch.C, "basis C_k");
        check_finite(ch.D, "basis D_k");
    }
    std::size_t nonzero = 0;
    for (const auto& e : s.entries)
        if (e.kind != EntryKind::Zero) ++nonzero;
    if (nonzero != model.basis.size())
        throw Error(ErrorCode::ChannelCountMismatch, "basis has " + std::to_string(model.basis.size()) +
                                                         " channels but the schedule has " + std::to_string(nonzero) +
                                                         " nonzero entries");
    return model;
}

Dims dims(const NlfrModel& model) {
    Dims d;
    d.n_x = static_cast<std::size_t>(model.A.rows());
    d.n_u = static_cast<std::size_t>(model.Bu.cols());
    d.n_y = static_cast<std::size_t>(model.Cy.rows());
    d.n_w = static_cast<std::size_t>(model.Bw.cols());
    d.n_z = static_cast<std::size_t>(model.Cz.rows());
    d.n_p = 0;
    return d;
}

Dims dims(const LpvModel& model) {
    Dims d;
    d.n_x = static_cast<std::size_t>(model.A.rows());
    d.n_u = static_cast<std::size_t>(model.Bu.cols());
    d.n_y = static_cast<std::size_t>(model.Cy.rows());
    d.n_w = static_cast<std::size_t>(model.Bw.cols());
    d.n_z = static_cast<std::size_t>(model.Cz.rows());
    d.n_p = model.basis.size();
    return d;
}

Channel make_channel(const Matrix& Bw, const Matrix& Cz, const Matrix& Dzu, const Matrix& Dyw, std::size_t row,
                     std::size_t col) {
    const auto r = static_cast<Index>(row);
    const auto i = static_cast<Index>(col);
    Channel ch;
    ch.row = row;
    ch.col = col;
    // B E_{r,i} C is the outer product of column r of B with row i of C.
    ch.A = Bw.col(r) * Cz.row(i);
    ch.B = Bw.col(r) * Dzu.row(i);
    ch.C = Dyw.col(r) * Cz.row(i);
    ch.D = Dyw.col(r) * Dzu.row(i);
    return ch;
}

BasisCheck verify_basis(const LpvModel& model) {
    BasisCheck out;
    for (std::size_t k = 0; k < model.basis.size(); ++k) {
        const Channel& ch = model.basis[k];
        const Channel ref = make_channel(model.Bw, model.Cz, model.Dzu, model.Dyw, ch.row, ch.col);
        const double dev = std::max({(ch.A - ref.A).cwiseAbs().maxCoeff(), (ch.B - ref.B).cwiseAbs().maxCoeff(),
                                     (ch.C - ref.C).cwiseAbs().maxCoeff(), (ch.D - ref.D).cwiseAbs().maxCoeff()});
        if (dev > out.max_abs_deviation) {
            out.max_abs_deviation = dev;
            out.worst_channel = k;
        }
    }
    out.consistent = out.max_abs_deviation == 0.0;
    return out;
}

}  // namespace lpvembed
