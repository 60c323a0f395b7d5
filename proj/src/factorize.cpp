#include "lpvembed/factorize.hpp"

#include "lpvembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lpvembed {

double MapEntry::evaluate(std::span<const double> z) const {
    switch (kind) {
        case EntryKind::Zero: return 0.0;
        case EntryKind::Exact: return exact.evaluate(z);
        case EntryKind::Guarded: return eval_guarded(guarded, z);
    }
    return 0.0;
}

std::string MapEntry::to_string() const {
    switch (kind) {
        case EntryKind::Zero: return "0";
        case EntryKind::Exact: return exact.to_string();
        case EntryKind::Guarded:
            return "(" + guarded.numerator.to_string() + ")/z" + std::to_string(guarded.divisor + 1);
    }
    return "?";
}

OffsetSplit extract_offset(const ExpressionVector& f) {
    OffsetSplit out;
    out.c = Vector::Zero(static_cast<Eigen::Index>(f.size()));
    out.reduced.reserve(f.size());
    for (std::size_t r = 0; r < f.size(); ++r) {
        const std::vector<double> origin(f[r].n_vars(), 0.0);
        const double c = f[r].evaluate(origin);
        out.c[static_cast<Eigen::Index>(r)] = c;
        out.reduced.push_back(c == 0.0 ? f[r] : f[r] - Expression::constant(f[r].n_vars(), c));
    }
    return out;
}

bool is_valid_ordering(std::span<const std::size_t> ordering, std::size_t n_z) {
    if (ordering.size() != n_z) return false;
    std::vector<bool> seen(n_z, false);
    for (std::size_t v : ordering) {
        if (v >= n_z || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

std::vector<std::size_t> identity_ordering(std::size_t n_z) {
    std::vector<std::size_t> o(n_z);
    std::iota(o.begin(), o.end(), std::size_t{0});
    return o;
}

SchedulingMap factorize(const ExpressionVector& reduced, std::span<const std::size_t> ordering, const Vector& c) {
    if (reduced.empty()) throw Error(ErrorCode::InvalidArgument, "nonlinearity has no output rows");
    const std::size_t n_z = reduced.front().n_vars();
    const std::size_t n_w = reduced.size();
    if (!is_valid_ordering(ordering, n_z))
        throw Error(ErrorCode::InvalidOrdering, "ordering is not a permutation of 1.." + std::to_string(n_z));
    if (c.size() != 0 && static_cast<std::size_t>(c.size()) != n_w)
        throw Error(ErrorCode::DimensionMismatch, "offset vector length differs from number of rows");

    const std::vector<double> origin(n_z, 0.0);
    for (std::size_t r = 0; r < n_w; ++r) {
        if (reduced[r].n_vars() != n_z) throw Error(ErrorCode::ArityMismatch, "rows of f differ in arity");
        double scale = 0.0;
        for (const auto& t : reduced[r].terms()) scale += std::abs(t.evaluate(origin));
        const double at_origin = reduced[r].evaluate(origin);
        if (std::abs(at_origin) > 1e-14 * (1.0 + scale))
            throw Error(ErrorCode::NonzeroAtOrigin, "row " + std::to_string(r + 1) + " evaluates to " +
                                                        format_double(at_origin) +
                                                        " at z = 0; extract the offset first");
    }

    SchedulingMap map;
    map.n_w = n_w;
    map.n_z = n_z;
    map.entries.resize(n_w * n_z);
    map.ordering.assign(ordering.begin(), ordering.end());
    map.c = c.size() ? c : Vector::Zero(static_cast<Eigen::Index>(n_w));

    for (std::size_t r = 0; r < n_w; ++r) {
        std::vector<bool> keep(n_z, false);
        Expression previous = restrict_to(reduced[r], keep);
        for (std::size_t k = 0; k < n_z; ++k) {
            const std::size_t var = ordering[k];
            keep[var] = true;
            Expression current = restrict_to(reduced[r], keep);
            Expression numerator = current - previous;
            MapEntry& entry = map.at(r, var);
            if (numerator.empty()) {
                entry.kind = EntryKind::Zero;
            } else if (auto q = try_exact_divide(numerator, var)) {
                entry.kind = EntryKind::Exact;
                entry.exact = std::move(*q);
            } else {
                entry.kind = EntryKind::Guarded;
                entry.guarded = make_guarded(std::move(numerator), var);
            }
            previous = std::move(current);
        }
    }
    return map;
}

Matrix evaluate_map(const SchedulingMap& map, std::span<const double> z) {
    if (z.size() != map.n_z) throw Error(ErrorCode::ArityMismatch, "scheduling map evaluated at wrong arity");
    Matrix p(static_cast<Eigen::Index>(map.n_w), static_cast<Eigen::Index>(map.n_z));
    for (std::size_t r = 0; r < map.n_w; ++r)
        for (std::size_t i = 0; i < map.n_z; ++i)
            p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = map.at(r, i).evaluate(z);
    return p;
}

std::string ReconstructionReport::describe() const {
    std::ostringstream os;
    os << (passed ? "PASS" : "FAIL") << ": " << samples << " samples, max abs error "
       << format_double(max_abs_error) << ", max rel error " << format_double(max_rel_error) << " (tolerance "
       << format_double(tolerance) << ")";
    if (!passed) {
        os << "; worst at sample " << worst_sample << " row " << worst_row + 1 << "; failing rows:";
        for (auto r : failing_rows) os << ' ' << r + 1;
    }
    return os.str();
}

ReconstructionReport check_reconstruction(const SchedulingMap& map, const ExpressionVector& f,
                                          const std::vector<Vector>& samples, double tolerance) {
    if (f.size() != map.n_w) throw Error(ErrorCode::DimensionMismatch, "map and nonlinearity differ in rows");
    ReconstructionReport rep;
    rep.tolerance = tolerance;
    rep.samples = samples.size();
    std::vector<bool> row_failed(map.n_w, false);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Vector& zv = samples[s];
        const std::span<const double> z(zv.data(), static_cast<std::size_t>(zv.size()));
        for (std::size_t r = 0; r < map.n_w; ++r) {
            const double want = f[r].evaluate(z);
            double got = 0.0;
            for (std::size_t i = 0; i < map.n_z; ++i) got += map.at(r, i).evaluate(z) * z[i];
            got += map.c[static_cast<Eigen::Index>(r)];
            const double abs_err = std::abs(got - want);
            const double rel_err = abs_err / (1.0 + std::abs(want));
            if (!(rel_err <= tolerance)) row_failed[r] = true;
            if (abs_err > rep.max_abs_error) rep.max_abs_error = abs_err;
            if (rel_err > rep.max_rel_error || std::isnan(rel_err)) {
                rep.max_rel_error = rel_err;
                rep.worst_sample = s;
                rep.worst_row = r;
            }
        }
    }
    for (std::size_t r = 0; r < map.n_w; ++r)
        if (row_failed[r]) rep.failing_rows.push_back(r);
    rep.passed = rep.failing_rows.empty();
    return rep;
}

}  // namespace lpvembed
