// Exercises the shared library through its C header only.

#include <lpvembed/lpvembed.h>

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    lpv_string_free(s);
    return out;
}

std::string temp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

struct Msd {
    lpv_nlfr* nlfr = nullptr;
    Msd() { REQUIRE(lpv_nlfr_example("msd2dof", &nlfr) == LPV_OK); }
    ~Msd() { lpv_nlfr_free(nlfr); }
};

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status names") {
    CHECK(std::string(lpv_status_name(LPV_OK)) == "Ok");
    CHECK(std::string(lpv_status_name(LPV_NONZERO_DZW)) == "NonzeroDzw");
    CHECK(std::string(lpv_status_name(LPV_COLUMN_SPACE_VIOLATION)) == "ColumnSpaceViolation");
    CHECK(std::string(lpv_status_name(LPV_UNKNOWN_EXAMPLE)) == "UnknownExample");
    CHECK(std::string(lpv_status_name(LPV_INTERNAL_ERROR)) == "InternalError");
    CHECK(std::string(lpv_version()) == "0.1.0");
}

TEST_CASE("unknown example and null arguments") {
    lpv_nlfr* m = nullptr;
    CHECK(lpv_nlfr_example("nope", &m) == LPV_UNKNOWN_EXAMPLE);
    CHECK(m == nullptr);
    CHECK(std::string(lpv_last_error()).find("nope") != std::string::npos);
    CHECK(lpv_nlfr_example(nullptr, &m) == LPV_INVALID_ARGUMENT);
    CHECK(lpv_nlfr_load("/nonexistent.json", &m) == LPV_IO_ERROR);
    lpv_nlfr_free(nullptr);
    lpv_model_free(nullptr);
    lpv_traj_free(nullptr);
    lpv_compare_free(nullptr);
}

TEST_CASE("dims, validate and embed") {
    Msd msd;
    lpv_dims d{};
    REQUIRE(lpv_nlfr_dims(msd.nlfr, &d) == LPV_OK);
    CHECK(d.n_x == 4);
    CHECK(d.n_u == 2);
    CHECK(d.n_z == 2);
    CHECK(d.n_p == 0);

    char* report = nullptr;
    CHECK(lpv_nlfr_validate(msd.nlfr, &report) == LPV_OK);
    CHECK(take(report).find("embeddable") != std::string::npos);

    lpv_model* lpv = nullptr;
    REQUIRE(lpv_embed(msd.nlfr, nullptr, 0, &lpv, &report) == LPV_OK);
    const std::string text = take(report);
    CHECK(text.find("10*z1^2") != std::string::npos);
    REQUIRE(lpv_model_dims(lpv, &d) == LPV_OK);
    CHECK(d.n_p == 2);
    int consistent = 0;
    double dev = 1.0;
    CHECK(lpv_model_verify_basis(lpv, &consistent, &dev) == LPV_OK);
    CHECK(consistent == 1);
    CHECK(dev == 0.0);
    lpv_model_free(lpv);

    const size_t reversed[] = {2, 1};
    REQUIRE(lpv_embed(msd.nlfr, reversed, 2, &lpv, &report) == LPV_OK);
    CHECK(take(report).find("guarded") != std::string::npos);
    lpv_model_free(lpv);

    const size_t bad[] = {1, 1};
    CHECK(lpv_embed(msd.nlfr, bad, 2, &lpv, nullptr) == LPV_INVALID_ORDERING);
    const size_t zero_based[] = {0, 1};
    CHECK(lpv_embed(msd.nlfr, zero_based, 2, &lpv, nullptr) == LPV_INVALID_ORDERING);
    CHECK(lpv == nullptr);
}

TEST_CASE("save and load round trip") {
    Msd msd;
    const std::string nlfr_path = temp_path("capi_msd.json");
    const std::string lpv_path = temp_path("capi_msd_lpv.json");
    REQUIRE(lpv_nlfr_save(msd.nlfr, nlfr_path.c_str()) == LPV_OK);
    lpv_nlfr* back = nullptr;
    REQUIRE(lpv_nlfr_load(nlfr_path.c_str(), &back) == LPV_OK);
    lpv_model* lpv = nullptr;
    REQUIRE(lpv_embed(back, nullptr, 0, &lpv, nullptr) == LPV_OK);
    REQUIRE(lpv_model_save(lpv, lpv_path.c_str()) == LPV_OK);
    lpv_model* lpv2 = nullptr;
    REQUIRE(lpv_model_load(lpv_path.c_str(), &lpv2) == LPV_OK);
    lpv_dims d{};
    lpv_model_dims(lpv2, &d);
    CHECK(d.n_p == 2);
    lpv_model_free(lpv);
    lpv_model_free(lpv2);
    lpv_nlfr_free(back);
    std::remove(nlfr_path.c_str());
    std::remove(lpv_path.c_str());
}

TEST_CASE("simulate and compare") {
    Msd msd;
    const size_t n = 2000;
    std::vector<double> u((n + 1) * 2);
    REQUIRE(lpv_multisine(2, 0.0, 2.0, 1.0, 1e-3, n, 0, u.data()) == LPV_OK);
    lpv_model* lpv = nullptr;
    REQUIRE(lpv_embed(msd.nlfr, nullptr, 0, &lpv, nullptr) == LPV_OK);

    lpv_traj* a = nullptr;
    lpv_traj* b = nullptr;
    lpv_traj* c = nullptr;
    REQUIRE(lpv_simulate_nlfr(msd.nlfr, u.data(), nullptr, 1e-3, n, &a) == LPV_OK);
    REQUIRE(lpv_simulate_lpv(lpv, u.data(), nullptr, 1e-3, n, &b) == LPV_OK);
    CHECK(lpv_traj_samples(a) == n + 1);
    CHECK(lpv_traj_dt(a) == 1e-3);
    CHECK(lpv_traj_width(a, LPV_SIGNAL_STATE) == 4);
    CHECK(lpv_traj_width(b, LPV_SIGNAL_W_OR_P) == 2);

    std::vector<double> p((n + 1) * 2);
    REQUIRE(lpv_schedule_along(lpv, a, p.data()) == LPV_OK);
    REQUIRE(lpv_simulate_lpv_exogenous(lpv, u.data(), p.data(), nullptr, 1e-3, n, &c) == LPV_OK);

    std::vector<double> y(lpv_traj_samples(a) * 2);
    REQUIRE(lpv_traj_copy(a, LPV_SIGNAL_OUTPUT, y.data()) == LPV_OK);
    std::vector<double> uu(lpv_traj_samples(a) * 2);
    REQUIRE(lpv_traj_copy(a, LPV_SIGNAL_INPUT, uu.data()) == LPV_OK);
    CHECK(uu == u);

    lpv_compare* r = nullptr;
    REQUIRE(lpv_compare_run(a, b, 1e-9, &r) == LPV_OK);
    CHECK(lpv_compare_passed(r) == 1);
    CHECK(lpv_compare_max_abs(r) <= 1e-9);
    size_t idx = 99;
    CHECK(lpv_compare_first_exceed(r, &idx) == 0);
    char* text = nullptr;
    REQUIRE(lpv_compare_text(r, &text) == LPV_OK);
    CHECK(take(text).rfind("PASS", 0) == 0);
    lpv_compare_free(r);

    REQUIRE(lpv_compare_run(a, c, 1e-12, &r) == LPV_OK);
    CHECK(lpv_compare_passed(r) == 0);
    CHECK(lpv_compare_first_exceed(r, &idx) == 1);
    lpv_compare_free(r);

    const std::string csv = temp_path("capi_traj.csv");
    CHECK(lpv_traj_write_csv(a, csv.c_str()) == LPV_OK);
    CHECK(std::filesystem::file_size(csv) > 0);
    CHECK(lpv_traj_write_spectrum_csv(b, LPV_SIGNAL_W_OR_P, csv.c_str()) == LPV_OK);
    std::remove(csv.c_str());
    char* summary = nullptr;
    REQUIRE(lpv_traj_summary(a, &summary) == LPV_OK);
    CHECK(take(summary).find("2001 samples") != std::string::npos);

    lpv_traj_free(a);
    lpv_traj_free(b);
    lpv_traj_free(c);
    lpv_model_free(lpv);
}

TEST_CASE("input errors") {
    std::vector<double> u(202);
    CHECK(lpv_multisine(2, 0.0, 80.0, 1.0, 1e-2, 100, 0, u.data()) == LPV_NYQUIST_VIOLATION);
    Msd msd;
    lpv_traj* t = nullptr;
    CHECK(lpv_simulate_nlfr(msd.nlfr, u.data(), nullptr, -1.0, 100, &t) == LPV_INVALID_ARGUMENT);
    CHECK(t == nullptr);
    lpv_model* lpv = nullptr;
    REQUIRE(lpv_embed(msd.nlfr, nullptr, 0, &lpv, nullptr) == LPV_OK);
    CHECK(lpv_simulate_lpv_exogenous(lpv, u.data(), nullptr, nullptr, 1e-2, 100, &t) == LPV_INVALID_ARGUMENT);
    lpv_model_free(lpv);
}

TEST_CASE("divergence returns the partial trajectory") {
    const std::string path = temp_path("capi_unstable.json");
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f);
        std::fputs(R"({"format":"nlfr","dims":{"n_x":1,"n_u":1,"n_y":1,"n_w":1,"n_z":1},
            "A":[[1.0]],"Bw":[[1.0]],"Bu":[[1.0]],"Cz":[[1.0]],"Cy":[[1.0]],"f":["z1^2"]})",
                   f);
        std::fclose(f);
    }
    lpv_nlfr* m = nullptr;
    REQUIRE(lpv_nlfr_load(path.c_str(), &m) == LPV_OK);
    std::vector<double> u(1001, 1.0);
    lpv_traj* t = nullptr;
    CHECK(lpv_simulate_nlfr(m, u.data(), nullptr, 1e-2, 1000, &t) == LPV_DIVERGENCE);
    REQUIRE(t != nullptr);
    CHECK(lpv_traj_samples(t) > 1);
    CHECK(lpv_traj_samples(t) < 1001);
    CHECK(std::string(lpv_last_error()).find("step") != std::string::npos);
    lpv_traj_free(t);
    lpv_nlfr_free(m);
    std::remove(path.c_str());
}

TEST_CASE("nonzero Dzw is rejected on load") {
    const std::string path = temp_path("capi_dzw.json");
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f);
        std::fputs(R"({"format":"nlfr","dims":{"n_x":1,"n_u":1,"n_y":1,"n_w":1,"n_z":1},
            "A":[[-1.0]],"Bw":[[1.0]],"Bu":[[1.0]],"Cz":[[1.0]],"Cy":[[1.0]],"Dzw":[[0.1]],"f":["z1^2"]})",
                   f);
        std::fclose(f);
    }
    lpv_nlfr* m = nullptr;
    CHECK(lpv_nlfr_load(path.c_str(), &m) == LPV_NONZERO_DZW);
    std::remove(path.c_str());
}

}
