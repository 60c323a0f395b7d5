#pragma once

// Seeded generators and numeric oracles shared by the unit and acceptance tests.

#include "lpvembed/expr.hpp"
#include "lpvembed/model.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace testsupport {

using lpvembed::Expression;
using lpvembed::Func;
using lpvembed::FuncFactor;
using lpvembed::Matrix;
using lpvembed::Term;
using lpvembed::Vector;

struct ExprShape {
    std::size_t max_terms = 6;
    int max_degree = 3;          // total polynomial degree per term
    std::size_t max_factors = 2;  // function factors per term
    double coeff = 2.0;           // coefficients in [-coeff, coeff]
    double weight = 0.5;          // function weights and biases in [-weight, weight]
    bool zero_constant = false;   // drop the constant term
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }

    Vector point(std::size_t n, double half_width) {
        Vector z(static_cast<Eigen::Index>(n));
        for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = uniform(-half_width, half_width);
        return z;
    }

    Matrix matrix(std::size_t rows, std::size_t cols, double half_width = 1.0) {
        Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = uniform(-half_width, half_width);
        return m;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

inline FuncFactor random_factor(Rng& rng, std::size_t n_vars, const ExprShape& shape) {
    FuncFactor g;
    g.func = static_cast<Func>(rng.integer(0, 5));
    g.weights.assign(n_vars, 0.0);
    // at least one nonzero weight, others sparse
    g.weights[rng.index(n_vars)] = rng.uniform(-shape.weight, shape.weight);
    for (auto& w : g.weights)
        if (w == 0.0 && rng.coin(0.4)) w = rng.uniform(-shape.weight, shape.weight);
    g.bias = rng.coin(0.5) ? rng.uniform(-shape.weight, shape.weight) : 0.0;
    return g;
}

inline Expression random_expression(Rng& rng, std::size_t n_vars, const ExprShape& shape = {}) {
    std::vector<Term> terms;
    const std::size_t n_terms = 1 + rng.index(shape.max_terms);
    for (std::size_t k = 0; k < n_terms; ++k) {
        Term t;
        t.coeff = rng.uniform(-shape.coeff, shape.coeff);
        t.exponents.assign(n_vars, 0);
        const int degree = rng.integer(0, shape.max_degree);
        for (int d = 0; d < degree; ++d) ++t.exponents[rng.index(n_vars)];
        const std::size_t n_factors = rng.index(shape.max_factors + 1);
        for (std::size_t f = 0; f < n_factors; ++f) t.factors.push_back(random_factor(rng, n_vars, shape));
        terms.push_back(std::move(t));
    }
    Expression e = Expression::from_terms(n_vars, std::move(terms));
    if (shape.zero_constant) {
        const std::vector<double> origin(n_vars, 0.0);
        e = e - Expression::constant(n_vars, e.evaluate(origin));
    }
    return e;
}

/// Central finite difference of e along variable i.
inline double central_difference(const Expression& e, std::vector<double> z, std::size_t i, double h) {
    const double z0 = z[i];
    z[i] = z0 + h;
    const double up = e.evaluate(z);
    z[i] = z0 - h;
    const double down = e.evaluate(z);
    return (up - down) / (2.0 * h);
}

inline double abs_derivative_bound(Func f, double x) {
    switch (f) {
        case Func::Sin: return std::abs(std::cos(x));
        case Func::Cos: return std::abs(std::sin(x));
        case Func::Exp: return std::exp(x);
        case Func::Tanh: return 1.0 - std::tanh(x) * std::tanh(x);
        case Func::Sinh: return std::cosh(x);
        case Func::Cosh: return std::abs(std::sinh(x));
    }
    return 0.0;
}

/// Sum over terms of a magnitude bound that dominates the floating-point
/// error of evaluating each term, in units of machine epsilon. Includes
/// the sensitivity of each function factor to rounding in its argument.
inline double rounding_scale(const Expression& e, const std::vector<double>& z) {
    double total = 0.0;
    for (const Term& t : e.terms()) {
        double m = std::abs(t.coeff);
        for (std::size_t j = 0; j < z.size(); ++j) m *= std::pow(std::abs(z[j]), t.exponents[j]);
        for (const FuncFactor& g : t.factors) {
            double arg_mag = std::abs(g.bias);
            for (std::size_t j = 0; j < z.size(); ++j) arg_mag += std::abs(g.weights[j] * z[j]);
            const double a = g.argument(z);
            m *= std::abs(lpvembed::apply(g.func, a)) + abs_derivative_bound(g.func, a) * (1.0 + arg_mag);
        }
        total += m;
    }
    return total;
}

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Random stable matrix: random entries shifted left past the spectral radius bound.
inline Matrix random_stable(Rng& rng, std::size_t n, double margin = 0.5) {
    Matrix a = rng.matrix(n, n);
    double bound = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) bound = std::max(bound, a.row(i).cwiseAbs().sum());
    a -= (bound + margin) * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return a;
}

}  // namespace testsupport
