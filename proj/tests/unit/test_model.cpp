#include "lpvembed/builtin_examples.hpp"
#include "lpvembed/embed.hpp"
#include "lpvembed/error.hpp"
#include "lpvembed/model.hpp"
#include "lpvembed/model_io.hpp"

#include "../support/random_models.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace lpvembed;
using nlohmann::json;
using testsupport::Rng;

namespace {

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidArgument;
}

NlfrModel scalar_toy(const char* f) {
    NlfrModel m;
    m.A = Matrix::Constant(1, 1, -1.0);
    m.Bw = m.Bu = m.Cz = m.Cy = Matrix::Constant(1, 1, 1.0);
    m.Dzu = m.Dyw = m.Dyu = Matrix::Zero(1, 1);
    m.f = {parse(f, 1)};
    return m;
}

NlfrModel random_nlfr(Rng& rng, const Dims& d) {
    NlfrModel m;
    m.A = testsupport::random_stable(rng, d.n_x);
    m.Bw = rng.matrix(d.n_x, d.n_w);
    m.Bu = rng.matrix(d.n_x, d.n_u);
    m.Cz = rng.matrix(d.n_z, d.n_x);
    m.Cy = rng.matrix(d.n_y, d.n_x);
    m.Dzu = rng.matrix(d.n_z, d.n_u);
    m.Dyw = rng.matrix(d.n_y, d.n_w);
    m.Dyu = rng.matrix(d.n_y, d.n_u);
    testsupport::ExprShape shape;
    shape.zero_constant = true;
    for (std::size_t r = 0; r < d.n_w; ++r) m.f.push_back(testsupport::random_expression(rng, d.n_z, shape));
    return m;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("msd example dimensions and entries") {
    const NlfrModel m = example_model("msd2dof");
    CHECK(dims(m) == Dims{4, 2, 2, 1, 2, 0});
    CHECK_NOTHROW(validate_nlfr(m, Dims{4, 2, 2, 1, 2, 0}));
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(m.A(2, 0) == doctest::Approx(-pi2 - 1.44 * pi2).epsilon(1e-15));
    CHECK(m.A(3, 1) == doctest::Approx(-1.44 * pi2).epsilon(1e-15));
    CHECK(m.A(2, 2) == doctest::Approx(-0.11));
    CHECK(m.f[0] == parse("0.1*sin(10*z1)*z2 + 0.2*z2^2 + 10*z1^3", 2));
    CHECK(code_of([] { example_model("nope"); }) == ErrorCode::UnknownExample);
}

TEST_CASE("validation errors name the matrix") {
    NlfrModel m = example_model("msd2dof");
    m.Bw = Matrix::Zero(3, 1);
    try {
        validate_nlfr(m);
        FAIL("accepted bad Bw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
        CHECK(std::string(e.what()).find("Bw") != std::string::npos);
    }
    NlfrModel n = example_model("msd2dof");
    n.A(0, 0) = NAN;
    CHECK(code_of([&] { validate_nlfr(n); }) == ErrorCode::NonFiniteEntry);
    NlfrModel k = example_model("msd2dof");
    k.f.push_back(parse("z1", 2));
    CHECK(code_of([&] { validate_nlfr(k); }) == ErrorCode::ExpressionArityMismatch);
    NlfrModel a = example_model("msd2dof");
    a.f[0] = parse("z1*z2*z3", 3);
    CHECK(code_of([&] { validate_nlfr(a); }) == ErrorCode::ExpressionArityMismatch);
    CHECK(code_of([] { validate_nlfr(example_model("msd2dof"), Dims{4, 2, 2, 1, 3, 0}); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("scalar toy dims") { CHECK(dims(scalar_toy("z1^3")) == Dims{1, 1, 1, 1, 1, 0}); }

TEST_CASE("file Dzw must be zero") {
    json doc = to_json(example_model("msd2dof"));
    doc["Dzw"] = json::array({json::array({0.0}), json::array({0.0})});
    CHECK_NOTHROW(nlfr_from_json(doc));
    doc["Dzw"] = json::array({json::array({0.1}), json::array({0.0})});
    CHECK(code_of([&] { nlfr_from_json(doc); }) == ErrorCode::NonzeroDzw);
}

TEST_CASE("malformed files") {
    CHECK(code_of([] { deserialize_nlfr("{not json"); }) == ErrorCode::FormatError);
    json doc = to_json(example_model("msd2dof"));
    doc.erase("A");
    CHECK(code_of([&] { nlfr_from_json(doc); }) == ErrorCode::FormatError);
    json bad = to_json(example_model("msd2dof"));
    bad["Bw"] = json::array({json::array({0.0}), json::array({0.0}), json::array({-1.0})});
    CHECK(code_of([&] { nlfr_from_json(bad); }) == ErrorCode::DimensionMismatch);
    json expr = to_json(example_model("msd2dof"));
    expr["f"] = json::array({"sin(z1*z2)"});
    CHECK(code_of([&] { nlfr_from_json(expr); }) == ErrorCode::NonAffineFunctionArgument);
    json rows = to_json(example_model("msd2dof"));
    rows["f"] = json::array({"z1", "z2"});
    CHECK(code_of([&] { nlfr_from_json(rows); }) == ErrorCode::ExpressionArityMismatch);
    CHECK(code_of([] { load_nlfr("/nonexistent/model.json"); }) == ErrorCode::IoError);
}

TEST_CASE("optional feedthrough matrices default to zero") {
    json doc = to_json(example_model("msd2dof"));
    doc.erase("Dzu");
    doc.erase("Dyw");
    doc.erase("Dyu");
    const NlfrModel m = nlfr_from_json(doc);
    CHECK(same(m.Dzu, Matrix::Zero(2, 2)));
    CHECK(same(m.Dyw, Matrix::Zero(2, 1)));
}

TEST_CASE("nlfr serialization is exact") {
    Rng rng(12);
    for (int k = 0; k < 30; ++k) {
        const Dims d{1 + rng.index(5), 1 + rng.index(5), 1 + rng.index(5), 1 + rng.index(3), 1 + rng.index(4), 0};
        const NlfrModel m = random_nlfr(rng, d);
        const NlfrModel back = deserialize_nlfr(serialize_nlfr(m));
        CHECK(same(back.A, m.A));
        CHECK(same(back.Bw, m.Bw));
        CHECK(same(back.Bu, m.Bu));
        CHECK(same(back.Cz, m.Cz));
        CHECK(same(back.Cy, m.Cy));
        CHECK(same(back.Dzu, m.Dzu));
        CHECK(same(back.Dyw, m.Dyw));
        CHECK(same(back.Dyu, m.Dyu));
        REQUIRE(back.f.size() == m.f.size());
        for (std::size_t r = 0; r < m.f.size(); ++r) CHECK(back.f[r] == m.f[r]);
        CHECK(serialize_nlfr(back) == serialize_nlfr(m));
    }
}

TEST_CASE("lpv serialization is exact") {
    Rng rng(13);
    std::vector<LpvModel> models;
    models.push_back(embed(example_model("msd2dof")));
    models.push_back(embed(example_model("msd2dof"), std::vector<std::size_t>{1, 0}));
    models.push_back(embed(scalar_toy("0.5*z1 + 1")));
    models.push_back(embed(scalar_toy("0")));
    for (int k = 0; k < 10; ++k) {
        const Dims d{1 + rng.index(4), 1 + rng.index(3), 1 + rng.index(3), 1 + rng.index(3), 1 + rng.index(3), 0};
        models.push_back(embed(random_nlfr(rng, d)));
    }
    for (const LpvModel& m : models) {
        const std::string text = serialize_lpv(m);
        const LpvModel back = deserialize_lpv(text);
        CHECK(dims(back) == dims(m));
        CHECK(same(back.A, m.A));
        CHECK(same(back.d, m.d));
        CHECK(same(back.y0, m.y0));
        REQUIRE(back.basis.size() == m.basis.size());
        for (std::size_t k = 0; k < m.basis.size(); ++k) {
            CHECK(back.basis[k].row == m.basis[k].row);
            CHECK(back.basis[k].col == m.basis[k].col);
            CHECK(same(back.basis[k].A, m.basis[k].A));
            CHECK(same(back.basis[k].B, m.basis[k].B));
            CHECK(same(back.basis[k].C, m.basis[k].C));
            CHECK(same(back.basis[k].D, m.basis[k].D));
        }
        REQUIRE(back.schedule.entries.size() == m.schedule.entries.size());
        for (std::size_t e = 0; e < m.schedule.entries.size(); ++e) {
            const MapEntry& a = m.schedule.entries[e];
            const MapEntry& b = back.schedule.entries[e];
            CHECK(a.kind == b.kind);
            CHECK(a.to_string() == b.to_string());
            if (a.kind == EntryKind::Guarded) {
                CHECK(a.guarded.derivative == b.guarded.derivative);
                CHECK(a.guarded.tau == b.guarded.tau);
            }
        }
        CHECK(back.schedule.ordering == m.schedule.ordering);
        CHECK(serialize_lpv(back) == text);
    }
}

TEST_CASE("offsets survive a file round trip") {
    const LpvModel m = embed(scalar_toy("0.5*z1 + 1"));
    CHECK(m.d[0] != 0.0);
    const auto path = std::filesystem::temp_directory_path() / "lpvembed_offset_roundtrip.json";
    save_lpv(m, path.string());
    const LpvModel back = load_lpv(path.string());
    CHECK(back.d[0] == m.d[0]);
    CHECK(back.y0[0] == m.y0[0]);
    std::filesystem::remove(path);
}

TEST_CASE("linear model embeds with an empty basis") {
    const LpvModel m = embed(scalar_toy("0"));
    CHECK(dims(m).n_p == 0);
    const LpvModel back = deserialize_lpv(serialize_lpv(m));
    CHECK(back.basis.empty());
    CHECK(same(back.A, Matrix::Constant(1, 1, -1.0)));
}

TEST_CASE("basis recomputation detects corruption") {
    LpvModel m = embed(example_model("msd2dof"));
    CHECK(verify_basis(m).consistent);
    json doc = to_json(m);
    doc["basis"][1]["Ak"][2][0] = 5.0;
    const LpvModel bad = lpv_from_json(doc);
    const BasisCheck chk = verify_basis(bad);
    CHECK_FALSE(chk.consistent);
    CHECK(chk.worst_channel == 1);
    CHECK(chk.max_abs_deviation > 1.0);
}

TEST_CASE("basis quadruples are elementary-matrix products") {
    Rng rng(14);
    for (int k = 0; k < 20; ++k) {
        const std::size_t nx = 1 + rng.index(4), nu = 1 + rng.index(3), ny = 1 + rng.index(3);
        const std::size_t nw = 1 + rng.index(3), nz = 1 + rng.index(3);
        const Matrix Bw = rng.matrix(nx, nw), Cz = rng.matrix(nz, nx), Dzu = rng.matrix(nz, nu),
                     Dyw = rng.matrix(ny, nw);
        const std::size_t r = rng.index(nw), i = rng.index(nz);
        Matrix E = Matrix::Zero(static_cast<Eigen::Index>(nw), static_cast<Eigen::Index>(nz));
        E(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = 1.0;
        const Channel ch = make_channel(Bw, Cz, Dzu, Dyw, r, i);
        CHECK((ch.A - Bw * E * Cz).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ch.B - Bw * E * Dzu).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ch.C - Dyw * E * Cz).cwiseAbs().maxCoeff() == 0.0);
        CHECK((ch.D - Dyw * E * Dzu).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("randomized dimension tuples validate or name the bad matrix") {
    Rng rng(15);
    for (int k = 0; k < 100; ++k) {
        const Dims d{1 + rng.index(5), 1 + rng.index(5), 1 + rng.index(5), 1 + rng.index(5), 1 + rng.index(5), 0};
        NlfrModel m = random_nlfr(rng, d);
        CHECK(dims(validate_nlfr(m, d)) == d);
        const int which = rng.integer(0, 7);
        Matrix* mats[] = {&m.A, &m.Bw, &m.Bu, &m.Cz, &m.Cy, &m.Dzu, &m.Dyw, &m.Dyu};
        const char* names[] = {"A", "Bw", "Bu", "Cz", "Cy", "Dzu", "Dyw", "Dyu"};
        mats[which]->conservativeResize(mats[which]->rows() + 1, Eigen::NoChange);
        mats[which]->row(mats[which]->rows() - 1).setZero();
        try {
            validate_nlfr(m, d);
            FAIL("accepted resized " << names[which]);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DimensionMismatch);
            CHECK_MESSAGE(std::string(e.what()).find(names[which]) != std::string::npos, e.what());
        }
    }
}

}
