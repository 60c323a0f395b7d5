#include "lpvembed/builtin_examples.hpp"

#include "lpvembed/error.hpp"
#include "lpvembed/expr.hpp"

#include <numbers>

namespace lpvembed {

namespace {

// Two masses, ground spring k1 with a cubic hardening term, coupling spring k2,
// state x = (q1, q2, q1', q2'), nonlinearity acting on mass 1.
NlfrModel msd2dof() {
    constexpr double pi = std::numbers::pi;
    const double k1 = pi * pi;
    const double k2 = (1.2 * pi) * (1.2 * pi);
    const double c1 = 0.1;
    const double c2 = 0.01;

    NlfrModel m;
    m.A.resize(4, 4);
    m.A << 0, 0, 1, 0,
           0, 0, 0, 1,
           -k1 - k2, k2, -c1 - c2, c2,
           k2, -k2, c2, -c2;
    m.Bw = Matrix::Zero(4, 1);
    m.Bw(2, 0) = -1.0;
    m.Bu = Matrix::Zero(4, 2);
    m.Bu(2, 0) = 1.0;
    m.Bu(3, 1) = 1.0;
    m.Cz = Matrix::Zero(2, 4);
    m.Cz(0, 0) = 1.0;
    m.Cz(1, 2) = 1.0;
    m.Cy = Matrix::Zero(2, 4);
    m.Cy(0, 0) = 1.0;
    m.Cy(1, 1) = 1.0;
    m.Dzu = Matrix::Zero(2, 2);
    m.Dyw = Matrix::Zero(2, 1);
    m.Dyu = Matrix::Zero(2, 2);
    m.f = {parse("0.1*sin(10*z1)*z2 + 0.2*z2^2 + 10*z1^3", 2)};
    return m;
}

}  // namespace

std::vector<std::string> example_names() { return {"msd2dof"}; }

NlfrModel example_model(std::string_view name) {
    if (name == "msd2dof") return msd2dof();
    throw Error(ErrorCode::UnknownExample, "unknown example '" + std::string(name) + "'; available: msd2dof");
}

}  // namespace lpvembed
