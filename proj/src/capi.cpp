#include "lpvembed/lpvembed.h"

#include "lpvembed/builtin_examples.hpp"
#include "lpvembed/embed.hpp"
#include "lpvembed/error.hpp"
#include "lpvembed/model_io.hpp"
#include "lpvembed/sim.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

using namespace lpvembed;

struct lpv_nlfr {
    NlfrModel model;
};
struct lpv_model {
    LpvModel model;
};
struct lpv_traj {
    Trajectory traj;
};
struct lpv_compare {
    CompareReport report;
};

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local std::string last_error;

static_assert(static_cast<int>(ErrorCode::UnknownExample) + 1 == LPV_UNKNOWN_EXAMPLE,
              "lpv_status must mirror ErrorCode");

lpv_status status_of(ErrorCode code) { return static_cast<lpv_status>(static_cast<int>(code) + 1); }

lpv_status fail(lpv_status status, std::string message) {
    last_error = std::move(message);
    return status;
}

template <class Fn>
lpv_status guarded(Fn&& fn) noexcept {
    try {
        return fn();
    } catch (const Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(LPV_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(LPV_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(LPV_INTERNAL_ERROR, "unknown exception");
    }
}

#define LPV_REQUIRE(cond) \
    if (!(cond)) return fail(LPV_INVALID_ARGUMENT, "null argument: " #cond)

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

lpv_dims to_c(const Dims& d) { return {d.n_x, d.n_u, d.n_y, d.n_w, d.n_z, d.n_p}; }

Matrix samples_in(const double* data, std::size_t rows, std::size_t cols) {
    if (rows * cols == 0) return Matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    return Eigen::Map<const RowMajor>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void samples_out(const Matrix& m, double* out) {
    if (m.size() == 0) return;
    Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

Vector initial_state(const double* x0, std::size_t n_x) {
    if (!x0) return Vector();
    return Eigen::Map<const Vector>(x0, static_cast<Eigen::Index>(n_x));
}

const Matrix& select(const Trajectory& t, lpv_signal which) {
    switch (which) {
        case LPV_SIGNAL_INPUT: return t.u;
        case LPV_SIGNAL_STATE: return t.x;
        case LPV_SIGNAL_OUTPUT: return t.y;
        case LPV_SIGNAL_Z: return t.z;
        case LPV_SIGNAL_W_OR_P: return t.w_or_p;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown signal selector");
}

// Runs a simulation, handing back the partial trajectory on divergence.
template <class Fn>
lpv_status run_simulation(lpv_traj** out, Fn&& fn) {
    *out = nullptr;
    return guarded([&] {
        try {
            *out = new lpv_traj{fn()};
            return LPV_OK;
        } catch (const DivergenceError& e) {
            *out = new lpv_traj{e.partial()};
            return fail(LPV_DIVERGENCE, e.what());
        }
    });
}

void write_stream(const std::string& path, auto&& writer) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    writer(f);
    if (!f) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace

extern "C" {

const char* lpv_version(void) { return "0.1.0"; }

const char* lpv_status_name(lpv_status status) {
    if (status == LPV_OK) return "Ok";
    if (status == LPV_INTERNAL_ERROR) return "InternalError";
    if (status > LPV_OK && status <= LPV_UNKNOWN_EXAMPLE) return to_string(static_cast<ErrorCode>(status - 1));
    return "UnknownStatus";
}

const char* lpv_last_error(void) { return last_error.c_str(); }

void lpv_string_free(char* s) { std::free(s); }

// --- NLFR -------------------------------------------------------------------

lpv_status lpv_nlfr_load(const char* path, lpv_nlfr** out) {
    LPV_REQUIRE(path && out);
    *out = nullptr;
    return guarded([&] {
        *out = new lpv_nlfr{load_nlfr(path)};
        return LPV_OK;
    });
}

lpv_status lpv_nlfr_example(const char* name, lpv_nlfr** out) {
    LPV_REQUIRE(name && out);
    *out = nullptr;
    return guarded([&] {
        *out = new lpv_nlfr{example_model(name)};
        return LPV_OK;
    });
}

lpv_status lpv_nlfr_save(const lpv_nlfr* model, const char* path) {
    LPV_REQUIRE(model && path);
    return guarded([&] {
        save_nlfr(model->model, path);
        return LPV_OK;
    });
}

lpv_status lpv_nlfr_dims(const lpv_nlfr* model, lpv_dims* out) {
    LPV_REQUIRE(model && out);
    return guarded([&] {
        *out = to_c(dims(model->model));
        return LPV_OK;
    });
}

lpv_status lpv_nlfr_validate(const lpv_nlfr* model, char** report) {
    LPV_REQUIRE(model);
    return guarded([&] {
        const ValidationReport rep = check_assumptions(model->model);
        if (report) *report = dup_string(rep.to_text());
        if (const AssumptionCheck* bad = rep.first_failure())
            return fail(bad->code ? status_of(*bad->code) : LPV_INTERNAL_ERROR, bad->name + ": " + bad->detail);
        return LPV_OK;
    });
}

void lpv_nlfr_free(lpv_nlfr* model) { delete model; }

// --- embedding and LPV models -------------------------------------------------

lpv_status lpv_embed(const lpv_nlfr* model, const size_t* ordering, size_t n_ordering, lpv_model** out,
                     char** report) {
    LPV_REQUIRE(model && out);
    LPV_REQUIRE(ordering || n_ordering == 0);
    *out = nullptr;
    return guarded([&] {
        std::vector<std::size_t> order;
        if (n_ordering == 0) {
            order = identity_ordering(static_cast<std::size_t>(model->model.Cz.rows()));
        } else {
            for (size_t k = 0; k < n_ordering; ++k) {
                if (ordering[k] == 0) throw Error(ErrorCode::InvalidOrdering, "ordering entries are 1-based");
                order.push_back(ordering[k] - 1);
            }
        }
        EmbedReport rep;
        LpvModel lpv = embed(model->model, order, &rep);
        if (report) *report = dup_string(rep.to_text(lpv));
        *out = new lpv_model{std::move(lpv)};
        return LPV_OK;
    });
}

lpv_status lpv_model_load(const char* path, lpv_model** out) {
    LPV_REQUIRE(path && out);
    *out = nullptr;
    return guarded([&] {
        *out = new lpv_model{load_lpv(path)};
        return LPV_OK;
    });
}

lpv_status lpv_model_save(const lpv_model* model, const char* path) {
    LPV_REQUIRE(model && path);
    return guarded([&] {
        save_lpv(model->model, path);
        return LPV_OK;
    });
}

lpv_status lpv_model_dims(const lpv_model* model, lpv_dims* out) {
    LPV_REQUIRE(model && out);
    return guarded([&] {
        *out = to_c(dims(model->model));
        return LPV_OK;
    });
}

lpv_status lpv_model_verify_basis(const lpv_model* model, int* consistent, double* max_deviation) {
    LPV_REQUIRE(model);
    return guarded([&] {
        const BasisCheck chk = verify_basis(model->model);
        if (consistent) *consistent = chk.consistent ? 1 : 0;
        if (max_deviation) *max_deviation = chk.max_abs_deviation;
        return LPV_OK;
    });
}

void lpv_model_free(lpv_model* model) { delete model; }

// --- excitation and simulation ----------------------------------------------

lpv_status lpv_multisine(size_t n_u, double f_min, double f_max, double amplitude, double dt, size_t n_steps,
                         uint64_t seed, double* out) {
    LPV_REQUIRE(out);
    return guarded([&] {
        samples_out(multisine(n_u, f_min, f_max, amplitude, dt, n_steps, seed), out);
        return LPV_OK;
    });
}

lpv_status lpv_simulate_nlfr(const lpv_nlfr* model, const double* u, const double* x0, double dt, size_t n_steps,
                             lpv_traj** out) {
    LPV_REQUIRE(model && out);
    const Dims d = dims(model->model);
    LPV_REQUIRE(u || d.n_u == 0);
    return run_simulation(out, [&] {
        return simulate_nlfr(model->model, samples_in(u, n_steps + 1, d.n_u), initial_state(x0, d.n_x), dt, n_steps);
    });
}

lpv_status lpv_simulate_lpv(const lpv_model* model, const double* u, const double* x0, double dt, size_t n_steps,
                            lpv_traj** out) {
    LPV_REQUIRE(model && out);
    const Dims d = dims(model->model);
    LPV_REQUIRE(u || d.n_u == 0);
    return run_simulation(out, [&] {
        return simulate_lpv_self(model->model, samples_in(u, n_steps + 1, d.n_u), initial_state(x0, d.n_x), dt,
                                 n_steps);
    });
}

lpv_status lpv_simulate_lpv_exogenous(const lpv_model* model, const double* u, const double* p, const double* x0,
                                      double dt, size_t n_steps, lpv_traj** out) {
    LPV_REQUIRE(model && out);
    const Dims d = dims(model->model);
    LPV_REQUIRE(u || d.n_u == 0);
    LPV_REQUIRE(p || d.n_p == 0);
    return run_simulation(out, [&] {
        return simulate_lpv_exogenous(model->model, samples_in(u, n_steps + 1, d.n_u),
                                      samples_in(p, n_steps + 1, d.n_p), initial_state(x0, d.n_x), dt, n_steps);
    });
}

lpv_status lpv_schedule_along(const lpv_model* model, const lpv_traj* traj, double* out) {
    LPV_REQUIRE(model && traj && out);
    return guarded([&] {
        samples_out(schedule_along(model->model, traj->traj), out);
        return LPV_OK;
    });
}

// --- trajectories -----------------------------------------------------------

size_t lpv_traj_samples(const lpv_traj* traj) { return traj ? traj->traj.samples() : 0; }

double lpv_traj_dt(const lpv_traj* traj) { return traj ? traj->traj.dt : 0.0; }

size_t lpv_traj_width(const lpv_traj* traj, lpv_signal which) {
    if (!traj) return 0;
    try {
        return static_cast<size_t>(select(traj->traj, which).cols());
    } catch (...) {
        return 0;
    }
}

lpv_status lpv_traj_copy(const lpv_traj* traj, lpv_signal which, double* out) {
    LPV_REQUIRE(traj && out);
    return guarded([&] {
        samples_out(select(traj->traj, which), out);
        return LPV_OK;
    });
}

lpv_status lpv_traj_write_csv(const lpv_traj* traj, const char* path) {
    LPV_REQUIRE(traj && path);
    return guarded([&] {
        write_stream(path, [&](std::ostream& os) { write_trajectory_csv(traj->traj, os); });
        return LPV_OK;
    });
}

lpv_status lpv_traj_write_spectrum_csv(const lpv_traj* traj, lpv_signal which, const char* path) {
    LPV_REQUIRE(traj && path);
    return guarded([&] {
        const Matrix& m = select(traj->traj, which);
        static const char* prefixes[] = {"u", "x", "y", "z", "w"};
        const char* prefix = which == LPV_SIGNAL_W_OR_P && traj->traj.kind == TrajectoryKind::Lpv ? "p"
                                                                                                 : prefixes[which];
        std::vector<std::string> names;
        for (Eigen::Index c = 0; c < m.cols(); ++c) names.push_back(prefix + std::to_string(c + 1));
        const Spectrum spec = spectrum(m, traj->traj.dt);
        write_stream(path, [&](std::ostream& os) { write_spectrum_csv(spec, names, os); });
        return LPV_OK;
    });
}

lpv_status lpv_traj_summary(const lpv_traj* traj, char** out) {
    LPV_REQUIRE(traj && out);
    return guarded([&] {
        *out = dup_string(summarize(traj->traj));
        return LPV_OK;
    });
}

void lpv_traj_free(lpv_traj* traj) { delete traj; }

// --- comparison -------------------------------------------------------------

lpv_status lpv_compare_run(const lpv_traj* a, const lpv_traj* b, double tolerance, lpv_compare** out) {
    LPV_REQUIRE(a && b && out);
    *out = nullptr;
    return guarded([&] {
        *out = new lpv_compare{compare(a->traj, b->traj, tolerance)};
        return LPV_OK;
    });
}

int lpv_compare_passed(const lpv_compare* report) { return report && report->report.passed() ? 1 : 0; }

double lpv_compare_max_abs(const lpv_compare* report) { return report ? report->report.overall_max_abs() : 0.0; }

int lpv_compare_first_exceed(const lpv_compare* report, size_t* index) {
    if (!report || !report->report.first_exceed) return 0;
    if (index) *index = *report->report.first_exceed;
    return 1;
}

lpv_status lpv_compare_text(const lpv_compare* report, char** out) {
    LPV_REQUIRE(report && out);
    return guarded([&] {
        *out = dup_string(report->report.to_text());
        return LPV_OK;
    });
}

lpv_status lpv_compare_write_csv(const lpv_compare* report, const char* path) {
    LPV_REQUIRE(report && path);
    return guarded([&] {
        write_stream(path, [&](std::ostream& os) { write_compare_csv(report->report, os); });
        return LPV_OK;
    });
}

void lpv_compare_free(lpv_compare* report) { delete report; }

}  // extern "C"
