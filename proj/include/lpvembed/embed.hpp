#pragma once

#include "lpvembed/error.hpp"
#include "lpvembed/factorize.hpp"
#include "lpvembed/model.hpp"
#include "lpvembed/offset.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lpvembed {

struct EmbedReport {
    std::vector<std::size_t> ordering;  // zero-based
    Vector c;
    bool offset_applied = false;
    OffsetSolution offsets;
    std::optional<HurwitzReport> hurwitz;
    std::vector<std::pair<std::size_t, std::size_t>> pruned;  // (r, i) of Zero entries
    ReconstructionReport reconstruction;  // on a fixed pseudo-random sample in [-3, 3]^n_z
    std::vector<std::string> warnings;

    std::string to_text(const LpvModel& model) const;
};

/// extract_offset -> (c != 0: dc_gains, solve_offsets) -> factorize -> basis.
/// Propagates NonzeroAtOrigin, InvalidOrdering, SingularA, ColumnSpaceViolation.
LpvModel embed(const NlfrModel& model, std::span<const std::size_t> ordering, EmbedReport* report = nullptr);
LpvModel embed(const NlfrModel& model, EmbedReport* report = nullptr);

/// Per-assumption status for `validate`. Hurwitz is advisory unless an offset
/// must be propagated, in which case it is reported but still does not block.
struct AssumptionCheck {
    std::string name;
    bool ok = true;
    bool advisory = false;
    std::string detail;
    std::optional<ErrorCode> code;  // set on blocking failures
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;

    bool embeddable() const noexcept;
    /// First blocking failure, if any.
    const AssumptionCheck* first_failure() const noexcept;
    std::string to_text() const;
};

ValidationReport check_assumptions(const NlfrModel& model);

struct StateSpace {
    Matrix A, B, C, D;
};

/// (A + sum p_k A_k, Bu + sum p_k B_k, Cy + sum p_k C_k, Dyu + sum p_k D_k).
StateSpace assemble(const LpvModel& lpv, std::span<const double> p);

/// Retained scheduling channels evaluated at z, in basis order.
Vector scheduling_from_z(const LpvModel& lpv, std::span<const double> z);
/// z = Cz x + Dzu u~, then scheduling_from_z.
Vector scheduling_from_state(const LpvModel& lpv, const Vector& x, const Vector& u_corrected);

/// The LPV model read as an LFR: the LTI interconnection closed by the
/// time-varying gain w = P(t) z, with P nonzero only on the retained channels.
struct LfrView {
    Matrix A, Bw, Bu, Cz, Cy, Dzu, Dyw, Dyu;
    std::size_t n_w = 0;
    std::size_t n_z = 0;
    std::vector<std::pair<std::size_t, std::size_t>> channels;  // Delta-block positions (r, i)

    /// Scatters channel values into the n_w x n_z gain block.
    Matrix gain(std::span<const double> p) const;
    std::string describe() const;
};

LfrView lpv_lfr_view(const LpvModel& lpv);
StateSpace close_lfr(const LfrView& view, std::span<const double> p);

}  // namespace lpvembed
