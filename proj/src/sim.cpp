#include "lpvembed/sim.hpp"

#include "lpvembed/embed.hpp"
#include "lpvembed/expr.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace lpvembed {

namespace {

using Index = Eigen::Index;

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void check_grid(const Matrix& u, std::size_t n_u, const Vector& x0, std::size_t n_x, double dt, std::size_t n_steps) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (static_cast<std::size_t>(u.rows()) != n_steps + 1)
        throw Error(ErrorCode::ShapeMismatch, "input must have n_steps + 1 = " + std::to_string(n_steps + 1) +
                                                  " samples, got " + std::to_string(u.rows()));
    if (static_cast<std::size_t>(u.cols()) != n_u)
        throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(u.cols()) + " channels, model expects " +
                                                  std::to_string(n_u));
    if (x0.size() != 0 && static_cast<std::size_t>(x0.size()) != n_x)
        throw Error(ErrorCode::ShapeMismatch, "initial state has wrong length");
    if (!u.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "input contains non-finite samples");
}

bool diverged(const Vector& x) {
    for (Index k = 0; k < x.size(); ++k)
        if (!(std::abs(x[k]) <= kDivergenceThreshold)) return true;
    return false;
}

// Drives one RK4 run. `field(x, u_row)` returns dx/dt; `record(k, x, u_row)`
// stores sample k. `u_at(k)` returns the input used at sample k; the half-step
// input is the average of neighbouring samples.
template <class Field, class Record, class InputAt>
void run_rk4(Trajectory& traj, Vector x, double dt, std::size_t n_steps, Field&& field, Record&& record,
             InputAt&& u_at) {
    const double half = 0.5 * dt;
    const double sixth = dt / 6.0;
    Vector compensation = Vector::Zero(x.size());
    record(0, x, u_at(0));
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Vector u0 = u_at(k);
        const Vector u1 = u_at(k + 1);
        const Vector um = 0.5 * (u0 + u1);
        const Vector k1 = field(x, u0);
        const Vector k2 = field(Vector(x + half * k1), um);
        const Vector k3 = field(Vector(x + half * k2), um);
        const Vector k4 = field(Vector(x + dt * k3), u1);
        const Vector increment = sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Kahan-compensated x += increment
        const Vector y = increment - compensation;
        const Vector t = x + y;
        compensation = (t - x) - y;
        x = t;
        if (diverged(x)) {
            const Index keep = static_cast<Index>(k + 1);
            traj.u.conservativeResize(keep, Eigen::NoChange);
            traj.x.conservativeResize(keep, Eigen::NoChange);
            traj.y.conservativeResize(keep, Eigen::NoChange);
            traj.z.conservativeResize(keep, Eigen::NoChange);
            traj.w_or_p.conservativeResize(keep, Eigen::NoChange);
            throw DivergenceError(k + 1, std::move(traj));
        }
        record(k + 1, x, u1);
    }
}

void allocate(Trajectory& traj, std::size_t samples, std::size_t n_u, std::size_t n_x, std::size_t n_y,
              std::size_t n_z, std::size_t n_wp) {
    const auto s = static_cast<Index>(samples);
    traj.u.resize(s, static_cast<Index>(n_u));
    traj.x.resize(s, static_cast<Index>(n_x));
    traj.y.resize(s, static_cast<Index>(n_y));
    traj.z.resize(s, static_cast<Index>(n_z));
    traj.w_or_p.resize(s, static_cast<Index>(n_wp));
}

Vector evaluate_f(const ExpressionVector& f, const Vector& z) {
    Vector w(static_cast<Index>(f.size()));
    for (std::size_t r = 0; r < f.size(); ++r) w[static_cast<Index>(r)] = f[r].evaluate(as_span(z));
    return w;
}

}  // namespace

DivergenceError::DivergenceError(std::size_t step, Trajectory partial)
    : Error(ErrorCode::Divergence, "state exceeded " + format_double(kDivergenceThreshold) + " at step " +
                                       std::to_string(step)),
      step_(step),
      partial_(std::move(partial)) {}

Trajectory simulate_nlfr(const NlfrModel& model, const Matrix& u, const Vector& x0, double dt, std::size_t n_steps) {
    const Dims d = dims(model);
    check_grid(u, d.n_u, x0, d.n_x, dt, n_steps);

    Trajectory traj;
    traj.kind = TrajectoryKind::Nlfr;
    traj.dt = dt;
    allocate(traj, n_steps + 1, d.n_u, d.n_x, d.n_y, d.n_z, d.n_w);

    auto field = [&](const Vector& x, const Vector& uk) -> Vector {
        const Vector z = model.Cz * x + model.Dzu * uk;
        const Vector w = evaluate_f(model.f, z);
        Vector dx = model.A * x;
        dx.noalias() += model.Bu * uk;
        dx.noalias() += model.Bw * w;
        return dx;
    };
    auto record = [&](std::size_t k, const Vector& x, const Vector& uk) {
        const auto row = static_cast<Index>(k);
        const Vector z = model.Cz * x + model.Dzu * uk;
        const Vector w = evaluate_f(model.f, z);
        Vector y = model.Cy * x;
        y.noalias() += model.Dyu * uk;
        y.noalias() += model.Dyw * w;
        traj.u.row(row) = uk.transpose();
        traj.x.row(row) = x.transpose();
        traj.y.row(row) = y.transpose();
        traj.z.row(row) = z.transpose();
        traj.w_or_p.row(row) = w.transpose();
    };
    auto u_at = [&](std::size_t k) -> Vector { return u.row(static_cast<Index>(k)).transpose(); };

    run_rk4(traj, x0.size() ? x0 : Vector::Zero(static_cast<Index>(d.n_x)), dt, n_steps, field, record, u_at);
    return traj;
}

namespace {

Trajectory simulate_lpv(const LpvModel& lpv, const Matrix& u, const Matrix* p_given, const Vector& x0, double dt,
                        std::size_t n_steps) {
    const Dims d = dims(lpv);
    check_grid(u, d.n_u, x0, d.n_x, dt, n_steps);
    if (p_given) {
        if (static_cast<std::size_t>(p_given->cols()) != d.n_p)
            throw Error(ErrorCode::ChannelCountMismatch, "scheduling signal has " + std::to_string(p_given->cols()) +
                                                             " channels, model has n_p = " + std::to_string(d.n_p));
        if (static_cast<std::size_t>(p_given->rows()) != n_steps + 1)
            throw Error(ErrorCode::ShapeMismatch, "scheduling signal must have n_steps + 1 samples");
    }

    Trajectory traj;
    traj.kind = TrajectoryKind::Lpv;
    traj.dt = dt;
    allocate(traj, n_steps + 1, d.n_u, d.n_x, d.n_y, d.n_z, d.n_p);

    // Exogenous p rides along with the input: columns [u~ | p], interpolated together.
    const Index n_u = static_cast<Index>(d.n_u);
    const Matrix corrected = u.rowwise() - lpv.d.transpose();
    auto u_at = [&](std::size_t k) -> Vector {
        const auto row = static_cast<Index>(k);
        if (!p_given) return corrected.row(row).transpose();
        Vector v(n_u + p_given->cols());
        v << corrected.row(row).transpose(), p_given->row(row).transpose();
        return v;
    };
    auto split = [&](const Vector& x, const Vector& ext, Vector& ut, Vector& p) {
        ut = ext.head(n_u);
        p = p_given ? Vector(ext.tail(ext.size() - n_u)) : scheduling_from_state(lpv, x, ut);
    };
    auto field = [&](const Vector& x, const Vector& ext) -> Vector {
        Vector ut, p;
        split(x, ext, ut, p);
        const StateSpace ss = assemble(lpv, as_span(p));
        Vector dx = ss.A * x;
        dx.noalias() += ss.B * ut;
        return dx;
    };
    auto record = [&](std::size_t k, const Vector& x, const Vector& ext) {
        const auto row = static_cast<Index>(k);
        Vector ut, p;
        split(x, ext, ut, p);
        const StateSpace ss = assemble(lpv, as_span(p));
        Vector y = ss.C * x;
        y.noalias() += ss.D * ut;
        y += lpv.y0;
        traj.u.row(row) = u.row(row);
        traj.x.row(row) = x.transpose();
        traj.y.row(row) = y.transpose();
        traj.z.row(row) = (lpv.Cz * x + lpv.Dzu * ut).transpose();
        traj.w_or_p.row(row) = p.transpose();
    };

    run_rk4(traj, x0.size() ? x0 : Vector::Zero(static_cast<Index>(d.n_x)), dt, n_steps, field, record, u_at);
    return traj;
}

}  // namespace

Trajectory simulate_lpv_self(const LpvModel& lpv, const Matrix& u, const Vector& x0, double dt, std::size_t n_steps) {
    return simulate_lpv(lpv, u, nullptr, x0, dt, n_steps);
}

Trajectory simulate_lpv_exogenous(const LpvModel& lpv, const Matrix& u, const Matrix& p, const Vector& x0, double dt,
                                  std::size_t n_steps) {
    return simulate_lpv(lpv, u, &p, x0, dt, n_steps);
}

Matrix schedule_along(const LpvModel& lpv, const Trajectory& traj) {
    if (traj.z.cols() != lpv.Cz.rows()) throw Error(ErrorCode::ShapeMismatch, "trajectory z width differs from n_z");
    Matrix p(traj.z.rows(), static_cast<Index>(lpv.basis.size()));
    for (Index k = 0; k < traj.z.rows(); ++k) {
        const Vector z = traj.z.row(k).transpose();
        p.row(k) = scheduling_from_z(lpv, as_span(z)).transpose();
    }
    return p;
}

// ---------------------------------------------------------------------------
// Comparison

double CompareReport::overall_max_abs() const noexcept {
    double m = 0.0;
    for (double v : max_abs_error) m = std::max(m, v);
    return m;
}

std::string CompareReport::to_text() const {
    std::ostringstream os;
    os << (passed() ? "PASS" : "FAIL") << ": max abs output error " << format_double(overall_max_abs())
       << " (tolerance " << format_double(tolerance) << ")\n";
    for (std::size_t c = 0; c < max_abs_error.size(); ++c)
        os << "  y" << c + 1 << ": max abs " << format_double(max_abs_error[c]) << ", relative rms "
           << format_double(relative_rms[c]) << "\n";
    if (first_exceed) os << "  first sample exceeding tolerance: " << *first_exceed << "\n";
    return os.str();
}

CompareReport compare(const Trajectory& a, const Trajectory& b, double tolerance) {
    if (a.dt != b.dt) throw Error(ErrorCode::ShapeMismatch, "trajectories use different dt");
    if (a.y.rows() != b.y.rows() || a.y.cols() != b.y.cols())
        throw Error(ErrorCode::ShapeMismatch, "trajectories differ in length or output count");
    CompareReport rep;
    rep.tolerance = tolerance;
    const Matrix diff = a.y - b.y;
    for (Index c = 0; c < diff.cols(); ++c) {
        rep.max_abs_error.push_back(diff.rows() ? diff.col(c).cwiseAbs().maxCoeff() : 0.0);
        const double rms_diff = diff.rows() ? std::sqrt(diff.col(c).squaredNorm() / static_cast<double>(diff.rows())) : 0.0;
        const double rms_ref = a.y.rows() ? std::sqrt(a.y.col(c).squaredNorm() / static_cast<double>(a.y.rows())) : 0.0;
        rep.relative_rms.push_back(rms_ref > 0.0 ? rms_diff / rms_ref : (rms_diff == 0.0 ? 0.0 : INFINITY));
    }
    for (Index k = 0; k < diff.rows() && !rep.first_exceed; ++k)
        for (Index c = 0; c < diff.cols(); ++c)
            if (!(std::abs(diff(k, c)) <= tolerance)) {
                rep.first_exceed = static_cast<std::size_t>(k);
                break;
            }
    return rep;
}

// ---------------------------------------------------------------------------
// Spectra and excitation

namespace {
std::mutex fftw_planner_mutex;  // FFTW planning is not thread-safe
}

Spectrum spectrum(const Matrix& signals, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    const Index n = signals.rows();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "spectrum of an empty signal");
    const Index bins = n / 2 + 1;
    Spectrum out;
    out.freq_hz.resize(bins);
    for (Index k = 0; k < bins; ++k) out.freq_hz[k] = static_cast<double>(k) / (static_cast<double>(n) * dt);
    out.magnitude.resize(bins, signals.cols());

    std::vector<double> in(static_cast<std::size_t>(n));
    fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(bins));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), spec, FFTW_ESTIMATE);
    }
    for (Index c = 0; c < signals.cols(); ++c) {
        for (Index k = 0; k < n; ++k) in[static_cast<std::size_t>(k)] = signals(k, c);
        fftw_execute(plan);
        for (Index k = 0; k < bins; ++k) {
            const double mag = std::hypot(spec[k][0], spec[k][1]) / static_cast<double>(n);
            const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
            out.magnitude(k, c) = unpaired ? mag : 2.0 * mag;
        }
    }
    {
        std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(spec);
    return out;
}

Spectrum spectrum(const Trajectory& traj, Signal which) {
    switch (which) {
        case Signal::Input: return spectrum(traj.u, traj.dt);
        case Signal::State: return spectrum(traj.x, traj.dt);
        case Signal::Output: return spectrum(traj.y, traj.dt);
        case Signal::NonlinearityInput: return spectrum(traj.z, traj.dt);
        case Signal::NonlinearityOutput: return spectrum(traj.w_or_p, traj.dt);
    }
    return spectrum(traj.y, traj.dt);
}

Matrix multisine(std::size_t n_u, double f_min, double f_max, double amplitude, double dt, std::size_t n_steps,
                 std::uint64_t seed) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (n_u == 0) throw Error(ErrorCode::InvalidArgument, "multisine needs at least one channel");
    const double nyquist = 0.5 / dt;
    if (!(f_min >= 0.0 && f_min < f_max && f_max < nyquist))
        throw Error(ErrorCode::NyquistViolation, "need 0 <= f_min < f_max < 1/(2 dt) = " + format_double(nyquist));
    if (!std::isfinite(amplitude) || amplitude < 0.0)
        throw Error(ErrorCode::InvalidArgument, "amplitude must be finite and non-negative");

    const std::size_t n = n_steps + 1;
    // bin k sits at k / (n dt); the slack keeps band edges that land on a bin
    const double record = static_cast<double>(n) * dt;
    std::size_t k_lo = static_cast<std::size_t>(std::ceil(f_min * record - 1e-9));
    std::size_t k_hi = static_cast<std::size_t>(std::floor(f_max * record + 1e-9));
    k_lo = std::max<std::size_t>(k_lo, 1);
    if (2 * k_hi >= n) k_hi = (n - 1) / 2;
    if (k_hi < k_lo)
        throw Error(ErrorCode::InvalidArgument, "no DFT bin lies in [f_min, f_max]; lengthen the record");

    std::uint64_t state = seed;
    auto next_unit = [&state] {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };

    Matrix u = Matrix::Zero(static_cast<Index>(n), static_cast<Index>(n_u));
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t c = 0; c < n_u; ++c) {
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const double phase = two_pi * next_unit();
            for (std::size_t s = 0; s < n; ++s) {
                const double angle = two_pi * static_cast<double>((k * s) % n) / static_cast<double>(n);
                u(static_cast<Index>(s), static_cast<Index>(c)) += std::cos(angle + phase);
            }
        }
        const double rms = std::sqrt(u.col(static_cast<Index>(c)).squaredNorm() / static_cast<double>(n));
        if (rms > 0.0) u.col(static_cast<Index>(c)) *= amplitude / rms;
    }
    return u;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void header_block(std::ostream& out, const char* prefix, Index count) {
    for (Index k = 0; k < count; ++k) out << ',' << prefix << k + 1;
}

void row_block(std::ostream& out, const Matrix& m, Index row) {
    for (Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(row, c));
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << 't';
    header_block(out, "u", traj.u.cols());
    header_block(out, "x", traj.x.cols());
    header_block(out, "y", traj.y.cols());
    header_block(out, "z", traj.z.cols());
    header_block(out, traj.kind == TrajectoryKind::Nlfr ? "w" : "p", traj.w_or_p.cols());
    out << '\n';
    for (Index k = 0; k < traj.y.rows(); ++k) {
        out << format_double(traj.time(static_cast<std::size_t>(k)));
        row_block(out, traj.u, k);
        row_block(out, traj.x, k);
        row_block(out, traj.y, k);
        row_block(out, traj.z, k);
        row_block(out, traj.w_or_p, k);
        out << '\n';
    }
}

void write_spectrum_csv(const Spectrum& spec, const std::vector<std::string>& names, std::ostream& out) {
    out << "freq_hz";
    for (Index c = 0; c < spec.magnitude.cols(); ++c)
        out << ',' << (static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)]
                                                                   : "ch" + std::to_string(c + 1));
    out << '\n';
    for (Index k = 0; k < spec.freq_hz.size(); ++k) {
        out << format_double(spec.freq_hz[k]);
        row_block(out, spec.magnitude, k);
        out << '\n';
    }
}

void write_compare_csv(const CompareReport& report, std::ostream& out) {
    out << "channel,max_abs_error,relative_rms\n";
    for (std::size_t c = 0; c < report.max_abs_error.size(); ++c)
        out << 'y' << c + 1 << ',' << format_double(report.max_abs_error[c]) << ','
            << format_double(report.relative_rms[c]) << '\n';
}

std::string summarize(const Trajectory& traj) {
    std::ostringstream os;
    const std::size_t n = traj.samples();
    os << (traj.kind == TrajectoryKind::Nlfr ? "NLFR" : "LPV") << " trajectory: " << n << " samples, dt "
       << format_double(traj.dt) << " s, t_end " << format_double(n ? traj.time(n - 1) : 0.0) << " s\n";
    for (Index c = 0; c < traj.y.cols(); ++c) {
        const auto col = traj.y.col(c);
        const double rms = n ? std::sqrt(col.squaredNorm() / static_cast<double>(n)) : 0.0;
        os << "  y" << c + 1 << ": min " << format_double(n ? col.minCoeff() : 0.0) << ", max "
           << format_double(n ? col.maxCoeff() : 0.0) << ", rms " << format_double(rms) << "\n";
    }
    return os.str();
}

}  // namespace lpvembed
