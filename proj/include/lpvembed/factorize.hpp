#pragma once

// Ordered factorization of a static nonlinearity into a scheduling map:
//
//     f(z) = F(z) z + c,   F = [F_1(z) ... F_nz(z)],
//
// where, for the ordering s = (s_1, ..., s_nz), column s_k depends only on
// z_{s_1}..z_{s_k} and is the divided difference of f - c between keeping the
// first k and the first k-1 ordered variables, divided by z_{s_k}. Columns whose
// numerator is not exactly divisible are guarded quotients.

#include "lpvembed/expr.hpp"
#include "lpvembed/types.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lpvembed {

enum class EntryKind { Zero, Exact, Guarded };

struct MapEntry {
    EntryKind kind = EntryKind::Zero;
    Expression exact;          // valid when kind == Exact
    GuardedQuotient guarded;   // valid when kind == Guarded

    double evaluate(std::span<const double> z) const;
    /// Printed form; guarded entries print as "(N)/zi".
    std::string to_string() const;
};

struct SchedulingMap {
    std::size_t n_w = 0;
    std::size_t n_z = 0;
    std::vector<MapEntry> entries;     // row-major n_w x n_z, original variable numbering
    std::vector<std::size_t> ordering; // zero-based permutation used for construction
    Vector c;                          // constant offset, length n_w

    const MapEntry& at(std::size_t r, std::size_t i) const { return entries[r * n_z + i]; }
    MapEntry& at(std::size_t r, std::size_t i) { return entries[r * n_z + i]; }
};

struct OffsetSplit {
    ExpressionVector reduced;  // f - c, with reduced(0) == 0
    Vector c;                  // f(0)
};

OffsetSplit extract_offset(const ExpressionVector& f);

bool is_valid_ordering(std::span<const std::size_t> ordering, std::size_t n_z);
std::vector<std::size_t> identity_ordering(std::size_t n_z);

/// Throws NonzeroAtOrigin if any row of `reduced` is nonzero at the origin
/// beyond 1e-14, InvalidOrdering for a bad permutation.
SchedulingMap factorize(const ExpressionVector& reduced, std::span<const std::size_t> ordering,
                        const Vector& c = Vector());

Matrix evaluate_map(const SchedulingMap& map, std::span<const double> z);

inline constexpr double kReconstructionTolerance = 1e-12;

struct ReconstructionReport {
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;  // |F(z) z + c - f(z)| / (1 + |f(z)|)
    std::size_t worst_sample = 0;
    std::size_t worst_row = 0;
    std::size_t samples = 0;
    std::vector<std::size_t> failing_rows;
    double tolerance = kReconstructionTolerance;
    bool passed = true;

    std::string describe() const;
};

ReconstructionReport check_reconstruction(const SchedulingMap& map, const ExpressionVector& f,
                                          const std::vector<Vector>& samples,
                                          double tolerance = kReconstructionTolerance);

}  // namespace lpvembed
