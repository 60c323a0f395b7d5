#include "lpvembed/error.hpp"
#include "lpvembed/factorize.hpp"

#include "../support/random_models.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lpvembed;
using testsupport::Rng;

namespace {

const char* kMsd = "0.1*sin(10*z1)*z2 + 0.2*z2^2 + 10*z1^3";

ExpressionVector rows(std::initializer_list<const char*> texts, std::size_t n) {
    ExpressionVector out;
    for (const char* t : texts) out.push_back(parse(t, n));
    return out;
}

std::vector<Vector> samples(Rng& rng, std::size_t n, std::size_t count, double half_width) {
    std::vector<Vector> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(rng.point(n, half_width));
    return out;
}

}  // namespace

TEST_SUITE("factorize") {

TEST_CASE("offset extraction") {
    auto s1 = extract_offset(rows({kMsd}, 2));
    CHECK(s1.c[0] == 0.0);
    CHECK(s1.reduced[0] == parse(kMsd, 2));

    auto s2 = extract_offset(rows({"z1^2 + 1"}, 1));
    CHECK(s2.c[0] == 1.0);
    CHECK(s2.reduced[0] == parse("z1^2", 1));

    auto s3 = extract_offset(rows({"sin(z1) + cos(z1)"}, 1));
    CHECK(s3.c[0] == 1.0);
    CHECK(s3.reduced[0].evaluate(std::vector{0.0}) == 0.0);
    CHECK(s3.reduced[0].evaluate(std::vector{0.4}) == doctest::Approx(std::sin(0.4) + std::cos(0.4) - 1.0));
}

TEST_CASE("msd with ordering 1,2 gives the polynomial-sine split") {
    const std::vector<std::size_t> order{0, 1};
    const SchedulingMap m = factorize(rows({kMsd}, 2), order, Vector::Zero(1));
    REQUIRE(m.at(0, 0).kind == EntryKind::Exact);
    REQUIRE(m.at(0, 1).kind == EntryKind::Exact);
    CHECK(m.at(0, 0).exact == parse("10*z1^2", 2));
    CHECK(m.at(0, 1).exact == parse("0.1*sin(10*z1) + 0.2*z2", 2));
    CHECK(m.at(0, 0).to_string() == "10*z1^2");
}

TEST_CASE("msd with ordering 2,1 guards the z1 entry") {
    const std::vector<std::size_t> order{1, 0};
    const SchedulingMap m = factorize(rows({kMsd}, 2), order, Vector::Zero(1));
    REQUIRE(m.at(0, 1).kind == EntryKind::Exact);
    CHECK(m.at(0, 1).exact == parse("0.2*z2", 2));
    REQUIRE(m.at(0, 0).kind == EntryKind::Guarded);
    const GuardedQuotient& q = m.at(0, 0).guarded;
    CHECK(q.divisor == 0);
    CHECK(q.numerator == parse("0.1*sin(10*z1)*z2 + 10*z1^3", 2));
    CHECK(q.derivative == parse("cos(10*z1)*z2 + 30*z1^2", 2));
    const std::vector<double> z{0.3, 0.5};
    CHECK(m.at(0, 0).evaluate(z) == doctest::Approx((0.1 * std::sin(3.0) * 0.5 + 10 * 0.027) / 0.3).epsilon(1e-14));
}

TEST_CASE("single cross term") {
    const SchedulingMap m = factorize(rows({"z1*z2"}, 2), std::vector<std::size_t>{0, 1}, Vector());
    CHECK(m.at(0, 0).kind == EntryKind::Zero);
    REQUIRE(m.at(0, 1).kind == EntryKind::Exact);
    CHECK(m.at(0, 1).exact == parse("z1", 2));
}

TEST_CASE("evaluate_map values") {
    const SchedulingMap m = factorize(rows({kMsd}, 2), std::vector<std::size_t>{0, 1}, Vector::Zero(1));
    const Matrix p = evaluate_map(m, std::vector{1.0, 2.0});
    CHECK(p(0, 0) == doctest::Approx(10.0));
    CHECK(p(0, 1) == doctest::Approx(0.1 * std::sin(10.0) + 0.4));
    const Matrix p0 = evaluate_map(m, std::vector{0.0, 0.0});
    CHECK(p0(0, 0) == 0.0);
    CHECK(p0(0, 1) == 0.0);

    const SchedulingMap g = factorize(rows({kMsd}, 2), std::vector<std::size_t>{1, 0}, Vector::Zero(1));
    // derivative branch at the origin: cos(0)*0 + 0
    CHECK(evaluate_map(g, std::vector{0.0, 0.0})(0, 0) == 0.0);
    CHECK(evaluate_map(g, std::vector{0.0, 1.0})(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("errors") {
    CHECK_THROWS_WITH_AS(factorize(rows({"z1 + 1"}, 1), std::vector<std::size_t>{0}, Vector()),
                         doctest::Contains("z = 0"), Error);
    try {
        factorize(rows({"z1 + 1"}, 1), std::vector<std::size_t>{0}, Vector());
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonzeroAtOrigin);
    }
    try {
        factorize(rows({kMsd}, 2), std::vector<std::size_t>{0, 0}, Vector());
        FAIL("accepted a repeated index");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidOrdering);
    }
    CHECK_FALSE(is_valid_ordering(std::vector<std::size_t>{0, 2}, 2));
    CHECK(is_valid_ordering(std::vector<std::size_t>{2, 0, 1}, 3));
}

TEST_CASE("both msd orderings reconstruct f") {
    Rng rng(2);
    const auto f = rows({kMsd}, 2);
    const auto pts = samples(rng, 2, 1000, 2.0);
    for (auto order : {std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{1, 0}}) {
        const SchedulingMap m = factorize(f, order, Vector::Zero(1));
        const ReconstructionReport rep = check_reconstruction(m, f, pts);
        CHECK_MESSAGE(rep.passed, rep.describe());
        CHECK(rep.samples == 1000);
    }
}

TEST_CASE("a zeroed entry fails reconstruction with a localized report") {
    Rng rng(4);
    const auto f = rows({"z1^2", kMsd}, 2);
    SchedulingMap m = factorize(f, std::vector<std::size_t>{0, 1}, Vector::Zero(2));
    m.at(1, 1).kind = EntryKind::Zero;
    const ReconstructionReport rep = check_reconstruction(m, f, samples(rng, 2, 50, 2.0));
    CHECK_FALSE(rep.passed);
    REQUIRE(rep.failing_rows.size() == 1);
    CHECK(rep.failing_rows[0] == 1);
    CHECK(rep.worst_row == 1);
    CHECK(rep.describe().find("failing rows: 2") != std::string::npos);
}

TEST_CASE("reconstruction with an offset") {
    Rng rng(6);
    const auto f = rows({"sin(z1) + cos(z2)", "exp(z1 - z2) + z1*z2"}, 2);
    const OffsetSplit s = extract_offset(f);
    CHECK(s.c[0] == 1.0);
    CHECK(s.c[1] == 1.0);
    const SchedulingMap m = factorize(s.reduced, std::vector<std::size_t>{1, 0}, s.c);
    const auto rep = check_reconstruction(m, f, samples(rng, 2, 500, 3.0));
    CHECK_MESSAGE(rep.passed, rep.describe());
}

TEST_CASE("entries depend only on variables up to their position") {
    Rng rng(8);
    testsupport::ExprShape shape;
    shape.zero_constant = true;
    for (int k = 0; k < 40; ++k) {
        const std::size_t n = 2 + rng.index(3);
        ExpressionVector f{testsupport::random_expression(rng, n, shape)};
        std::vector<std::size_t> order = identity_ordering(n);
        std::shuffle(order.begin(), order.end(), rng.engine());
        const SchedulingMap m = factorize(f, order, Vector());
        for (std::size_t pos = 0; pos < n; ++pos) {
            const MapEntry& e = m.at(0, order[pos]);
            for (int p = 0; p < 5; ++p) {
                const Vector zv = rng.point(n, 2.0);
                std::vector<double> z(zv.data(), zv.data() + zv.size());
                const double base = e.evaluate(z);
                for (std::size_t later = pos + 1; later < n; ++later) {
                    auto moved = z;
                    moved[order[later]] += 1e-3;
                    const double sens = std::abs(e.evaluate(moved) - base) / 1e-3;
                    CHECK(sens <= 1e-8);
                }
            }
        }
    }
}

TEST_CASE("polynomial nonlinearities factor without guards") {
    Rng rng(9);
    testsupport::ExprShape shape;
    shape.max_factors = 0;
    shape.zero_constant = true;
    for (int k = 0; k < 60; ++k) {
        const std::size_t n = 1 + rng.index(4);
        ExpressionVector f{testsupport::random_expression(rng, n, shape)};
        std::vector<std::size_t> order = identity_ordering(n);
        std::shuffle(order.begin(), order.end(), rng.engine());
        const SchedulingMap m = factorize(f, order, Vector());
        for (const MapEntry& e : m.entries) CHECK(e.kind != EntryKind::Guarded);
    }
}

TEST_CASE("random nonlinearities reconstruct under every ordering") {
    Rng rng(10);
    testsupport::ExprShape shape;
    for (int k = 0; k < 30; ++k) {
        const std::size_t n_z = 1 + rng.index(3);
        const std::size_t n_w = 1 + rng.index(3);
        ExpressionVector f;
        for (std::size_t r = 0; r < n_w; ++r) f.push_back(testsupport::random_expression(rng, n_z, shape));
        const OffsetSplit s = extract_offset(f);
        const auto pts = samples(rng, n_z, 200, 3.0);
        std::vector<std::size_t> order = identity_ordering(n_z);
        do {
            const SchedulingMap m = factorize(s.reduced, order, s.c);
            const auto rep = check_reconstruction(m, f, pts);
            REQUIRE_MESSAGE(rep.passed, rep.describe());
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

}
