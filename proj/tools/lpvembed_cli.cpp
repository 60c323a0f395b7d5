// lpvembed command-line front end. Talks to the library through the C API only.

#include <lpvembed/lpvembed.h>

#include <CLI11.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

// Carries a status name and message to the single-line error printer in main.
struct CliError {
    std::string code;
    std::string message;
};

[[noreturn]] void raise(lpv_status s) { throw CliError{lpv_status_name(s), lpv_last_error()}; }
[[noreturn]] void raise(std::string code, std::string message) { throw CliError{std::move(code), std::move(message)}; }

void check(lpv_status s) {
    if (s != LPV_OK) raise(s);
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using NlfrPtr = std::unique_ptr<lpv_nlfr, Deleter<lpv_nlfr, lpv_nlfr_free>>;
using ModelPtr = std::unique_ptr<lpv_model, Deleter<lpv_model, lpv_model_free>>;
using TrajPtr = std::unique_ptr<lpv_traj, Deleter<lpv_traj, lpv_traj_free>>;
using ComparePtr = std::unique_ptr<lpv_compare, Deleter<lpv_compare, lpv_compare_free>>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    lpv_string_free(s);
    return out;
}

struct Config {
    std::string model_path;
    std::string lpv_path;
    std::string out_dir = ".";
    bool out_given = false;
    double dt = 1e-3;
    double t_end = 20.0;
    std::string ordering;
    std::string input = "multisine:0,2,1";
    std::uint64_t seed = 0;
    double tol = 1e-9;
    std::string scheduling = "self";
    std::string example = "msd2dof";
};

fs::path output_dir(const Config& cfg) {
    fs::path dir = cfg.out_dir;
    if (!cfg.out_given)
        if (const char* env = std::getenv("LPVEMBED_OUT"); env && *env) dir = env;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise("IoError", "cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            raise("InvalidArgument", "cannot parse '" + tok + "' in " + what);
        }
    }
    return out;
}

std::vector<std::size_t> parse_ordering(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    for (double v : split_numbers(text, "--ordering")) {
        if (v < 1 || v != std::floor(v)) raise("InvalidOrdering", "ordering entries must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

NlfrPtr load_nlfr(const std::string& path) {
    lpv_nlfr* m = nullptr;
    check(lpv_nlfr_load(path.c_str(), &m));
    return NlfrPtr(m);
}

ModelPtr load_lpv(const std::string& path) {
    lpv_model* m = nullptr;
    check(lpv_model_load(path.c_str(), &m));
    return ModelPtr(m);
}

struct Grid {
    double dt;
    std::size_t n_steps;
    std::vector<double> u;  // (n_steps + 1) x n_u, row-major
};

// CSV input: one row per sample at the --dt grid; a leading "t" column is skipped.
Grid read_input_file(const std::string& path, std::size_t n_u, double dt) {
    std::ifstream f(path);
    if (!f) raise("IoError", "cannot open input file '" + path + "'");
    Grid g{dt, 0, {}};
    std::string line;
    bool skip_t = false;
    std::size_t rows = 0;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        if (first) {
            first = false;
            const auto c = line.find_first_not_of(" \t");
            if (c != std::string::npos && std::isalpha(static_cast<unsigned char>(line[c]))) {
                skip_t = line.compare(c, 1, "t") == 0 && (line.size() == c + 1 || line[c + 1] == ',');
                continue;
            }
        }
        std::vector<double> v = split_numbers(line, path);
        if (skip_t && !v.empty()) v.erase(v.begin());
        if (v.size() != n_u)
            raise("ShapeMismatch", path + ": row " + std::to_string(rows + 1) + " has " + std::to_string(v.size()) +
                                       " input values, model expects " + std::to_string(n_u));
        g.u.insert(g.u.end(), v.begin(), v.end());
        ++rows;
    }
    if (rows < 2) raise("ShapeMismatch", path + ": need at least two samples");
    g.n_steps = rows - 1;
    return g;
}

Grid make_input(const Config& cfg, std::size_t n_u) {
    if (!(cfg.dt > 0.0)) raise("InvalidArgument", "--dt must be positive");
    if (cfg.input.rfind("file:", 0) == 0) return read_input_file(cfg.input.substr(5), n_u, cfg.dt);
    if (!(cfg.t_end > 0.0)) raise("InvalidArgument", "--t-end must be positive");
    const double steps = std::round(cfg.t_end / cfg.dt);
    if (steps < 1.0) raise("InvalidArgument", "--t-end must cover at least one step");
    Grid g{cfg.dt, static_cast<std::size_t>(steps), {}};
    g.u.assign((g.n_steps + 1) * n_u, 0.0);
    if (cfg.input.rfind("multisine:", 0) != 0)
        raise("InvalidArgument", "--input must be multisine:fmin,fmax,amp or file:path");
    const auto p = split_numbers(cfg.input.substr(10), "--input");
    if (p.size() != 3) raise("InvalidArgument", "multisine needs fmin,fmax,amp");
    if (n_u > 0) check(lpv_multisine(n_u, p[0], p[1], p[2], g.dt, g.n_steps, cfg.seed, g.u.data()));
    return g;
}

lpv_dims dims_of(const lpv_nlfr* m) {
    lpv_dims d{};
    check(lpv_nlfr_dims(m, &d));
    return d;
}

lpv_dims dims_of(const lpv_model* m) {
    lpv_dims d{};
    check(lpv_model_dims(m, &d));
    return d;
}

// Writes whatever was simulated, then reports divergence as an error.
TrajPtr finish_simulation(lpv_status s, lpv_traj* raw, const fs::path& csv) {
    TrajPtr t(raw);
    if (s == LPV_DIVERGENCE && t) {
        const std::string msg = lpv_last_error();
        check(lpv_traj_write_csv(t.get(), csv.string().c_str()));
        raise("Divergence", msg + "; partial trajectory written to " + csv.string());
    }
    check(s);
    return t;
}

TrajPtr run_nlfr(const lpv_nlfr* m, const Grid& g, const fs::path& csv) {
    lpv_traj* t = nullptr;
    const lpv_status s = lpv_simulate_nlfr(m, g.u.data(), nullptr, g.dt, g.n_steps, &t);
    return finish_simulation(s, t, csv);
}

TrajPtr run_lpv(const lpv_model* m, const Grid& g, const fs::path& csv, const std::string& scheduling,
                const lpv_traj* reference) {
    lpv_traj* t = nullptr;
    lpv_status s;
    if (scheduling == "exogenous") {
        if (!reference) raise("InvalidArgument", "--scheduling exogenous needs an NLFR model to take p from");
        const lpv_dims d = dims_of(m);
        std::vector<double> p(lpv_traj_samples(reference) * d.n_p);
        if (d.n_p) check(lpv_schedule_along(m, reference, p.data()));
        s = lpv_simulate_lpv_exogenous(m, g.u.data(), p.data(), nullptr, g.dt, g.n_steps, &t);
    } else {
        s = lpv_simulate_lpv(m, g.u.data(), nullptr, g.dt, g.n_steps, &t);
    }
    return finish_simulation(s, t, csv);
}

int cmd_example(const Config& cfg) {
    lpv_nlfr* raw = nullptr;
    check(lpv_nlfr_example(cfg.example.c_str(), &raw));
    NlfrPtr m(raw);
    const fs::path path = output_dir(cfg) / (cfg.example + ".json");
    check(lpv_nlfr_save(m.get(), path.string().c_str()));
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_validate(const Config& cfg) {
    NlfrPtr m = load_nlfr(cfg.model_path);
    char* report = nullptr;
    const lpv_status s = lpv_nlfr_validate(m.get(), &report);
    std::cout << take_string(report);
    check(s);
    return 0;
}

int cmd_embed(const Config& cfg) {
    NlfrPtr m = load_nlfr(cfg.model_path);
    const auto ordering = parse_ordering(cfg.ordering);
    lpv_model* raw = nullptr;
    char* report = nullptr;
    check(lpv_embed(m.get(), ordering.data(), ordering.size(), &raw, &report));
    ModelPtr lpv(raw);
    const std::string text = take_string(report);
    const fs::path dir = output_dir(cfg);
    check(lpv_model_save(lpv.get(), (dir / "lpv.json").string().c_str()));
    std::ofstream(dir / "embed_report.txt") << text;
    std::cout << text << "wrote " << (dir / "lpv.json").string() << "\n";
    return 0;
}

int cmd_simulate(const Config& cfg) {
    if (cfg.model_path.empty() == cfg.lpv_path.empty())
        raise("InvalidArgument", "simulate needs exactly one of --model or --lpv");
    const fs::path csv = output_dir(cfg) / "trajectory.csv";
    TrajPtr t;
    if (!cfg.model_path.empty()) {
        NlfrPtr m = load_nlfr(cfg.model_path);
        t = run_nlfr(m.get(), make_input(cfg, dims_of(m.get()).n_u), csv);
    } else {
        if (cfg.scheduling != "self") raise("InvalidArgument", "simulate supports only self-scheduling for --lpv");
        ModelPtr m = load_lpv(cfg.lpv_path);
        t = run_lpv(m.get(), make_input(cfg, dims_of(m.get()).n_u), csv, "self", nullptr);
    }
    check(lpv_traj_write_csv(t.get(), csv.string().c_str()));
    char* summary = nullptr;
    check(lpv_traj_summary(t.get(), &summary));
    std::cout << take_string(summary) << "wrote " << csv.string() << "\n";
    return 0;
}

int cmd_compare(const Config& cfg) {
    if (cfg.model_path.empty()) raise("InvalidArgument", "compare needs --model (NLFR)");
    NlfrPtr nlfr = load_nlfr(cfg.model_path);
    ModelPtr lpv;
    if (cfg.lpv_path.empty()) {
        const auto ordering = parse_ordering(cfg.ordering);
        lpv_model* raw = nullptr;
        check(lpv_embed(nlfr.get(), ordering.data(), ordering.size(), &raw, nullptr));
        lpv.reset(raw);
    } else {
        lpv = load_lpv(cfg.lpv_path);
    }
    const lpv_dims dn = dims_of(nlfr.get());
    const lpv_dims dl = dims_of(lpv.get());
    if (dn.n_u != dl.n_u || dn.n_y != dl.n_y || dn.n_x != dl.n_x)
        raise("ShapeMismatch", "NLFR and LPV models differ in n_x, n_u or n_y");

    const fs::path dir = output_dir(cfg);
    const Grid g = make_input(cfg, dn.n_u);
    TrajPtr a = run_nlfr(nlfr.get(), g, dir / "trajectory_nlfr.csv");
    TrajPtr b = run_lpv(lpv.get(), g, dir / "trajectory_lpv.csv", cfg.scheduling, a.get());
    check(lpv_traj_write_csv(a.get(), (dir / "trajectory_nlfr.csv").string().c_str()));
    check(lpv_traj_write_csv(b.get(), (dir / "trajectory_lpv.csv").string().c_str()));
    check(lpv_traj_write_spectrum_csv(a.get(), LPV_SIGNAL_OUTPUT, (dir / "spectrum_nlfr.csv").string().c_str()));
    check(lpv_traj_write_spectrum_csv(b.get(), LPV_SIGNAL_OUTPUT, (dir / "spectrum_lpv.csv").string().c_str()));

    lpv_compare* raw = nullptr;
    check(lpv_compare_run(a.get(), b.get(), cfg.tol, &raw));
    ComparePtr rep(raw);
    check(lpv_compare_write_csv(rep.get(), (dir / "compare.csv").string().c_str()));
    char* text = nullptr;
    check(lpv_compare_text(rep.get(), &text));
    const std::string report = take_string(text);
    std::ofstream(dir / "compare_report.txt") << report;
    std::cout << report;
    if (!lpv_compare_passed(rep.get())) {
        std::size_t idx = 0;
        lpv_compare_first_exceed(rep.get(), &idx);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3g", lpv_compare_max_abs(rep.get()));
        raise("ToleranceExceeded", std::string("max abs output error ") + buf + " exceeds " + std::to_string(cfg.tol) +
                                       "; first exceeded at sample " + std::to_string(idx));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embed nonlinear LFR models into affine LPV models and verify them by simulation"};
    app.require_subcommand(1);
    Config cfg;

    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out_dir, "Output directory (default: $LPVEMBED_OUT or .)")
            ->each([&](const std::string&) { cfg.out_given = true; });
    };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--dt", cfg.dt, "Step size in seconds")->capture_default_str();
        sub->add_option("--t-end", cfg.t_end, "Simulation horizon in seconds")->capture_default_str();
        sub->add_option("--input", cfg.input, "multisine:fmin,fmax,amp or file:path.csv")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "Multisine phase seed")->capture_default_str();
    };

    auto* example = app.add_subcommand("example", "Write a built-in NLFR model");
    example->add_option("name", cfg.example, "Example name")->capture_default_str();
    add_out(example);

    auto* validate = app.add_subcommand("validate", "Check the embedding assumptions of an NLFR model");
    validate->add_option("--model", cfg.model_path, "NLFR model file")->required();

    auto* embed = app.add_subcommand("embed", "Embed an NLFR model into an affine LPV model");
    embed->add_option("--model", cfg.model_path, "NLFR model file")->required();
    embed->add_option("--ordering", cfg.ordering, "Factorization ordering, e.g. 2,1 (default 1..n_z)");
    add_out(embed);

    auto* simulate = app.add_subcommand("simulate", "Simulate an NLFR or LPV model");
    simulate->add_option("--model", cfg.model_path, "NLFR model file");
    simulate->add_option("--lpv", cfg.lpv_path, "LPV model file");
    add_sim(simulate);
    add_out(simulate);

    auto* compare = app.add_subcommand("compare", "Simulate NLFR and LPV models side by side");
    compare->add_option("--model", cfg.model_path, "NLFR model file")->required();
    compare->add_option("--lpv", cfg.lpv_path, "LPV model file (default: embed --model on the fly)");
    compare->add_option("--ordering", cfg.ordering, "Ordering used when embedding on the fly");
    compare->add_option("--tol", cfg.tol, "Max abs output error tolerance")->capture_default_str();
    compare->add_option("--scheduling", cfg.scheduling, "self or exogenous")
        ->check(CLI::IsMember({"self", "exogenous"}))
        ->capture_default_str();
    add_sim(compare);
    add_out(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[InvalidArgument]: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*example) return cmd_example(cfg);
        if (*validate) return cmd_validate(cfg);
        if (*embed) return cmd_embed(cfg);
        if (*simulate) return cmd_simulate(cfg);
        if (*compare) return cmd_compare(cfg);
    } catch (const CliError& e) {
        std::cout.flush();
        std::string msg = e.message;
        for (char& c : msg)
            if (c == '\n' || c == '\r') c = ' ';
        std::cerr << "error[" << e.code << "]: " << msg << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[InternalError]: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
