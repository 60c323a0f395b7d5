#pragma once

// Fixed-step RK4 simulation of NLFR and LPV models on a common time grid.
//
// Inputs are sampled at t_k = k dt, k = 0..n_steps, and linearly interpolated
// at the half steps. The state update is accumulated with compensated
// summation so that round-off does not mask the method's dt^4 error at
// small steps.

#include "lpvembed/error.hpp"
#include "lpvembed/model.hpp"
#include "lpvembed/types.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lpvembed {

enum class TrajectoryKind { Nlfr, Lpv };

/// Sampled signals, one row per time instant.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::Nlfr;
    double dt = 0.0;
    double t0 = 0.0;
    Matrix u;       // raw input
    Matrix x;
    Matrix y;
    Matrix z;
    Matrix w_or_p;  // w = f(z) for NLFR runs, p for LPV runs

    std::size_t samples() const noexcept { return static_cast<std::size_t>(y.rows()); }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Thrown when a state leaves [-1e12, 1e12]; carries the samples up to the
/// last finite step.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, Trajectory partial);

    std::size_t step() const noexcept { return step_; }
    const Trajectory& partial() const noexcept { return partial_; }

private:
    std::size_t step_;
    Trajectory partial_;
};

/// u has n_steps + 1 rows. x0 empty means zero initial state.
Trajectory simulate_nlfr(const NlfrModel& model, const Matrix& u, const Vector& x0, double dt, std::size_t n_steps);

/// Self-scheduled: p is recomputed from (x, u - d) at every RK4 stage.
Trajectory simulate_lpv_self(const LpvModel& lpv, const Matrix& u, const Vector& x0, double dt, std::size_t n_steps);

/// p (n_steps + 1 rows, n_p columns) is a given signal, linearly interpolated.
Trajectory simulate_lpv_exogenous(const LpvModel& lpv, const Matrix& u, const Matrix& p, const Vector& x0, double dt,
                                  std::size_t n_steps);

/// Scheduling trajectory obtained by applying the map to recorded z samples.
Matrix schedule_along(const LpvModel& lpv, const Trajectory& traj);

inline constexpr double kDefaultCompareTolerance = 1e-9;

struct CompareReport {
    std::vector<double> max_abs_error;  // per output channel
    std::vector<double> relative_rms;   // rms(a - b) / rms(a)
    std::optional<std::size_t> first_exceed;
    double tolerance = kDefaultCompareTolerance;

    bool passed() const noexcept { return !first_exceed.has_value(); }
    double overall_max_abs() const noexcept;
    std::string to_text() const;
};

/// Compares outputs; throws ShapeMismatch on differing dt, length or width.
CompareReport compare(const Trajectory& a, const Trajectory& b, double tolerance = kDefaultCompareTolerance);

enum class Signal { Input, State, Output, NonlinearityInput, NonlinearityOutput };

/// One-sided amplitude spectrum: a unit sinusoid on a bin has magnitude 1.
struct Spectrum {
    Vector freq_hz;    // N/2 + 1 bins
    Matrix magnitude;  // bins x channels
};

Spectrum spectrum(const Matrix& signals, double dt);
Spectrum spectrum(const Trajectory& traj, Signal which = Signal::Output);

/// Equal-amplitude cosines on the DFT grid of the n_steps + 1 sample record
/// with f_min <= f <= f_max (DC and Nyquist excluded), seeded random phases,
/// RMS scaled to `amplitude`. Throws NyquistViolation.
Matrix multisine(std::size_t n_u, double f_min, double f_max, double amplitude, double dt, std::size_t n_steps,
                 std::uint64_t seed);

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_spectrum_csv(const Spectrum& spec, const std::vector<std::string>& names, std::ostream& out);
void write_compare_csv(const CompareReport& report, std::ostream& out);

std::string summarize(const Trajectory& traj);

}  // namespace lpvembed
