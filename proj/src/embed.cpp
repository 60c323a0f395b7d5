#include "lpvembed/embed.hpp"

#include "lpvembed/error.hpp"

#include <cstdint>
#include <sstream>

namespace lpvembed {

namespace {

using Index = Eigen::Index;

// splitmix64; keeps the report's sample set identical across platforms.
std::vector<Vector> report_samples(std::size_t n_z, std::size_t count) {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::vector<Vector> out(count, Vector(static_cast<Index>(n_z)));
    for (auto& v : out)
        for (Index j = 0; j < v.size(); ++j) v[j] = -3.0 + 6.0 * static_cast<double>(next() >> 11) * 0x1.0p-53;
    return out;
}

}  // namespace

LpvModel embed(const NlfrModel& model, std::span<const std::size_t> ordering, EmbedReport* report) {
    const Dims d = dims(model);
    if (!is_valid_ordering(ordering, d.n_z))
        throw Error(ErrorCode::InvalidOrdering, "ordering is not a permutation of 1.." + std::to_string(d.n_z));

    EmbedReport rep;
    rep.ordering.assign(ordering.begin(), ordering.end());

    OffsetSplit split = extract_offset(model.f);
    rep.c = split.c;

    try {
        rep.hurwitz = check_hurwitz(model.A);
    } catch (const Error& e) {
        rep.warnings.push_back(std::string("Hurwitz check unavailable: ") + e.what());
    }

    OffsetSolution offsets;
    offsets.d = Vector::Zero(static_cast<Index>(d.n_u));
    offsets.y0 = Vector::Zero(static_cast<Index>(d.n_y));
    if (!(split.c.array() == 0.0).all()) {
        if (rep.hurwitz && !rep.hurwitz->hurwitz)
            rep.warnings.push_back("A is not Hurwitz (max real part " + format_double(rep.hurwitz->max_real_part) +
                                   "); offset propagation relies on steady-state gains of an unstable system");
        offsets = solve_offsets(dc_gains(model), split.c);
        rep.offset_applied = true;
    }
    rep.offsets = offsets;

    SchedulingMap map = factorize(split.reduced, ordering, split.c);

    LpvModel lpv;
    lpv.A = model.A;
    lpv.Bu = model.Bu;
    lpv.Cy = model.Cy;
    lpv.Dyu = model.Dyu;
    lpv.Bw = model.Bw;
    lpv.Cz = model.Cz;
    lpv.Dzu = model.Dzu;
    lpv.Dyw = model.Dyw;
    lpv.f = model.f;
    lpv.d = offsets.d;
    lpv.y0 = offsets.y0;

    for (std::size_t r = 0; r < map.n_w; ++r) {
        for (std::size_t i = 0; i < map.n_z; ++i) {
            if (map.at(r, i).kind == EntryKind::Zero) {
                rep.pruned.emplace_back(r, i);
                continue;
            }
            lpv.basis.push_back(make_channel(model.Bw, model.Cz, model.Dzu, model.Dyw, r, i));
        }
    }
    bool reduced_is_zero = true;
    for (const auto& row : split.reduced) reduced_is_zero = reduced_is_zero && row.empty();
    if (lpv.basis.empty() && !reduced_is_zero)
        throw Error(ErrorCode::EmbeddingDegenerate, "every scheduling entry was pruned but f - c is not zero");

    lpv.schedule = std::move(map);
    rep.reconstruction = check_reconstruction(lpv.schedule, model.f, report_samples(d.n_z, 200));
    if (!rep.reconstruction.passed) rep.warnings.push_back("reconstruction check: " + rep.reconstruction.describe());

    if (report) *report = std::move(rep);
    return lpv;
}

LpvModel embed(const NlfrModel& model, EmbedReport* report) {
    const auto ordering = identity_ordering(static_cast<std::size_t>(model.Cz.rows()));
    return embed(model, ordering, report);
}

std::string EmbedReport::to_text(const LpvModel& model) const {
    std::ostringstream os;
    const Dims d = dims(model);
    os << "LPV embedding report\n";
    os << "  dims: n_x=" << d.n_x << " n_u=" << d.n_u << " n_y=" << d.n_y << " n_w=" << d.n_w << " n_z=" << d.n_z
       << " n_p=" << d.n_p << "\n";
    os << "  ordering:";
    for (auto v : ordering) os << ' ' << v + 1;
    os << "\n  offset c = f(0):";
    for (Index k = 0; k < c.size(); ++k) os << ' ' << format_double(c[k]);
    os << "\n";
    if (offset_applied) {
        os << "  offset propagation: d =";
        for (Index k = 0; k < offsets.d.size(); ++k) os << ' ' << format_double(offsets.d[k]);
        os << ", y0 =";
        for (Index k = 0; k < offsets.y0.size(); ++k) os << ' ' << format_double(offsets.y0[k]);
        os << ", residual " << format_double(offsets.residual) << "\n";
    } else {
        os << "  offset propagation: not required (f(0) = 0)\n";
    }
    if (hurwitz)
        os << "  Hurwitz: " << (hurwitz->hurwitz ? "yes" : "no") << " (max real part "
           << format_double(hurwitz->max_real_part) << ")" << (offset_applied ? "" : ", advisory only") << "\n";
    os << "  scheduling channels (p_k = F(r,i)):\n";
    for (std::size_t k = 0; k < model.basis.size(); ++k) {
        const Channel& ch = model.basis[k];
        const MapEntry& e = model.schedule.at(ch.row, ch.col);
        os << "    p" << k + 1 << " = F(" << ch.row + 1 << "," << ch.col + 1 << ") = " << e.to_string();
        if (e.kind == EntryKind::Guarded)
            os << "   [guarded: derivative " << e.guarded.derivative.to_string() << " for |z" << e.guarded.divisor + 1
               << "| <= " << format_double(e.guarded.tau) << "*(1+|z|_inf)]";
        os << "\n";
    }
    os << "  pruned (identically zero):";
    if (pruned.empty()) os << " none";
    for (const auto& [r, i] : pruned) os << " (" << r + 1 << "," << i + 1 << ")";
    os << "\n  reconstruction: " << reconstruction.describe() << "\n";
    for (const auto& w : warnings) os << "  warning: " << w << "\n";
    return os.str();
}

StateSpace assemble(const LpvModel& lpv, std::span<const double> p) {
    if (p.size() != lpv.basis.size())
        throw Error(ErrorCode::ChannelCountMismatch, "expected " + std::to_string(lpv.basis.size()) +
                                                         " scheduling values, got " + std::to_string(p.size()));
    StateSpace ss{lpv.A, lpv.Bu, lpv.Cy, lpv.Dyu};
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Channel& ch = lpv.basis[k];
        ss.A.noalias() += p[k] * ch.A;
        ss.B.noalias() += p[k] * ch.B;
        ss.C.noalias() += p[k] * ch.C;
        ss.D.noalias() += p[k] * ch.D;
    }
    return ss;
}

Vector scheduling_from_z(const LpvModel& lpv, std::span<const double> z) {
    Vector p(static_cast<Index>(lpv.basis.size()));
    for (std::size_t k = 0; k < lpv.basis.size(); ++k)
        p[static_cast<Index>(k)] = lpv.schedule.at(lpv.basis[k].row, lpv.basis[k].col).evaluate(z);
    return p;
}

Vector scheduling_from_state(const LpvModel& lpv, const Vector& x, const Vector& u_corrected) {
    if (x.size() != lpv.A.rows() || u_corrected.size() != lpv.Bu.cols())
        throw Error(ErrorCode::DimensionMismatch, "state or input has wrong length");
    const Vector z = lpv.Cz * x + lpv.Dzu * u_corrected;
    return scheduling_from_z(lpv, std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

Matrix LfrView::gain(std::span<const double> p) const {
    if (p.size() != channels.size()) throw Error(ErrorCode::ChannelCountMismatch, "gain block channel count");
    Matrix P = Matrix::Zero(static_cast<Index>(n_w), static_cast<Index>(n_z));
    for (std::size_t k = 0; k < channels.size(); ++k)
        P(static_cast<Index>(channels[k].first), static_cast<Index>(channels[k].second)) = p[k];
    return P;
}

std::string LfrView::describe() const {
    std::ostringstream os;
    os << "LPV-LFR: LTI block (n_x=" << A.rows() << ") closed by w = P(t) z, P is " << n_w << "x" << n_z;
    if (channels.empty()) {
        os << ", empty Delta-block (linear system)";
    } else {
        os << ", scheduled positions:";
        for (const auto& [r, i] : channels) os << " (" << r + 1 << "," << i + 1 << ")";
    }
    return os.str();
}

LfrView lpv_lfr_view(const LpvModel& lpv) {
    LfrView v;
    v.A = lpv.A;
    v.Bw = lpv.Bw;
    v.Bu = lpv.Bu;
    v.Cz = lpv.Cz;
    v.Cy = lpv.Cy;
    v.Dzu = lpv.Dzu;
    v.Dyw = lpv.Dyw;
    v.Dyu = lpv.Dyu;
    v.n_w = lpv.schedule.n_w;
    v.n_z = lpv.schedule.n_z;
    for (const auto& ch : lpv.basis) v.channels.emplace_back(ch.row, ch.col);
    return v;
}

StateSpace close_lfr(const LfrView& view, std::span<const double> p) {
    const Matrix P = view.gain(p);
    return StateSpace{view.A + view.Bw * P * view.Cz, view.Bu + view.Bw * P * view.Dzu,
                      view.Cy + view.Dyw * P * view.Cz, view.Dyu + view.Dyw * P * view.Dzu};
}

}  // namespace lpvembed

namespace lpvembed {

bool ValidationReport::embeddable() const noexcept { return first_failure() == nullptr; }

const AssumptionCheck* ValidationReport::first_failure() const noexcept {
    for (const auto& c : checks)
        if (!c.ok && !c.advisory) return &c;
    return nullptr;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.ok ? "[ok]   " : c.advisory ? "[warn] " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << "\n";
    }
    os << (embeddable() ? "embeddable\n" : "not embeddable\n");
    return os.str();
}

ValidationReport check_assumptions(const NlfrModel& model) {
    ValidationReport rep;
    auto fail = [&rep](std::string name, const Error& e) {
        rep.checks.push_back({std::move(name), false, false, e.what(), e.code()});
    };

    try {
        validate_nlfr(model);
        const Dims d = dims(model);
        rep.checks.push_back({"dimensions consistent", true, false,
                              "n_x=" + std::to_string(d.n_x) + " n_u=" + std::to_string(d.n_u) +
                                  " n_y=" + std::to_string(d.n_y) + " n_w=" + std::to_string(d.n_w) +
                                  " n_z=" + std::to_string(d.n_z),
                              std::nullopt});
    } catch (const Error& e) {
        fail("dimensions consistent", e);
        return rep;
    }
    // A nonzero Dzw cannot reach this point: loading rejects it.
    rep.checks.push_back({"well-posed interconnection (Dzw = 0)", true, false, "no direct w -> z feedthrough",
                          std::nullopt});
    rep.checks.push_back({"f smooth, no singular points", true, false,
                          "term language: polynomials and sin/cos/exp/tanh/sinh/cosh of affine arguments",
                          std::nullopt});

    const OffsetSplit split = extract_offset(model.f);
    const bool has_offset = !(split.c.array() == 0.0).all();
    {
        std::ostringstream os;
        os << "c = f(0) =";
        for (Eigen::Index k = 0; k < split.c.size(); ++k) os << ' ' << format_double(split.c[k]);
        rep.checks.push_back({"decomposition f = F(z) z + c", true, false, os.str(), std::nullopt});
    }

    try {
        const HurwitzReport h = check_hurwitz(model.A);
        rep.checks.push_back({"A Hurwitz", h.hurwitz, true, "max real part " + format_double(h.max_real_part),
                              std::nullopt});
    } catch (const Error& e) {
        rep.checks.push_back({"A Hurwitz", false, true, e.what(), std::nullopt});
    }

    if (has_offset) {
        try {
            const OffsetSolution sol = solve_offsets(dc_gains(model), split.c);
            rep.checks.push_back({"offset solvable (G4 c in range of G2)", true, false,
                                  "residual " + format_double(sol.residual), std::nullopt});
        } catch (const Error& e) {
            fail("offset solvable (G4 c in range of G2)", e);
            return rep;
        }
    } else {
        rep.checks.push_back({"offset solvable (G4 c in range of G2)", true, false, "not required (c = 0)",
                              std::nullopt});
    }

    try {
        EmbedReport er;
        const LpvModel lpv = embed(model, &er);
        rep.checks.push_back({"factorization reconstructs f", er.reconstruction.passed, false,
                              er.reconstruction.describe() + ", n_p=" + std::to_string(lpv.basis.size()),
                              er.reconstruction.passed ? std::nullopt
                                                       : std::optional<ErrorCode>(ErrorCode::EmbeddingDegenerate)});
    } catch (const Error& e) {
        fail("factorization reconstructs f", e);
    }
    return rep;
}

}  // namespace lpvembed
