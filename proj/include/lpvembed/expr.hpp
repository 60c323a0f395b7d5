#pragma once

// Symbolic term-sum expressions for static multivariate nonlinearities.
//
// An Expression over variables z1..zn is a finite sum of terms
//
//     coeff * z1^e1 * ... * zn^en * g1(a1'z + b1) * ... * gm(am'z + bm)
//
// with g drawn from {sin, cos, exp, tanh, sinh, cosh}. The language has no
// division, so every expression is finite wherever z is finite, and it is
// closed under partial differentiation.
//
// Variable indices are zero-based in this API; the textual form uses z1..zn.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lpvembed {

enum class Func : std::uint8_t { Sin, Cos, Exp, Tanh, Sinh, Cosh };

const char* to_string(Func f) noexcept;
std::optional<Func> func_from_name(std::string_view name) noexcept;
double apply(Func f, double x) noexcept;

/// g(weights'z + bias). Weights and bias are finite; -0.0 is stored as +0.0.
struct FuncFactor {
    Func func = Func::Sin;
    std::vector<double> weights;
    double bias = 0.0;

    double argument(std::span<const double> z) const noexcept;
    bool is_constant() const noexcept;
};

struct Term {
    double coeff = 0.0;
    std::vector<int> exponents;
    std::vector<FuncFactor> factors;  // sorted; repeats allowed

    double evaluate(std::span<const double> z) const noexcept;
    int degree() const noexcept;
};

// Total order on (exponents, factors); equality is bitwise on the doubles.
std::strong_ordering compare_factor(const FuncFactor& a, const FuncFactor& b) noexcept;
std::strong_ordering compare_key(const Term& a, const Term& b) noexcept;

class Expression {
public:
    Expression() = default;
    explicit Expression(std::size_t n_vars) : n_vars_(n_vars) {}

    static Expression constant(std::size_t n_vars, double value);
    static Expression variable(std::size_t n_vars, std::size_t index);
    static Expression function(Func f, std::vector<double> weights, double bias);
    /// Builds the canonical form: constant factors folded, equal keys merged,
    /// zero coefficients dropped, terms sorted.
    static Expression from_terms(std::size_t n_vars, std::vector<Term> terms);

    std::size_t n_vars() const noexcept { return n_vars_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }
    bool is_polynomial() const noexcept;

    /// Throws ArityMismatch when z.size() != n_vars().
    double evaluate(std::span<const double> z) const;
    double operator()(std::span<const double> z) const { return evaluate(z); }

    Expression operator-() const;
    Expression scaled(double factor) const;
    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    Expression pow(unsigned exponent) const;

    /// Canonical printed form; parse(to_string(e)) == e.
    std::string to_string() const;

    friend bool operator==(const Expression& a, const Expression& b) noexcept;

private:
    std::size_t n_vars_ = 0;
    std::vector<Term> terms_;
};

using ExpressionVector = std::vector<Expression>;

/// Grammar (see docs/expression-grammar.md):
///   expr    := term (('+' | '-') term)*
///   term    := unary ('*' unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' integer)?
///   primary := number | 'pi' | 'z' index | func '(' expr ')' | '(' expr ')'
/// Function arguments must be affine in z.
Expression parse(std::string_view text, std::size_t n_vars);

Expression partial(const Expression& e, std::size_t index);

/// Substitutes z_j = 0 for every j >= keep.
Expression restrict(const Expression& e, std::size_t keep);
/// Substitutes z_j = 0 for every j with keep[j] == false.
Expression restrict_to(const Expression& e, const std::vector<bool>& keep);

/// e / z_index when every term carries z_index with exponent >= 1.
std::optional<Expression> try_exact_divide(const Expression& e, std::size_t index);

inline constexpr double kDefaultGuardTau = 1e-7;

/// numerator / z_divisor, continued by the partial derivative of the
/// numerator when |z_divisor| <= tau * (1 + max|z|).
struct GuardedQuotient {
    Expression numerator;
    std::size_t divisor = 0;
    Expression derivative;
    double tau = kDefaultGuardTau;

    double threshold(std::span<const double> z) const noexcept;
    bool uses_derivative(std::span<const double> z) const noexcept;
};

GuardedQuotient make_guarded(Expression numerator, std::size_t divisor,
                             double tau = kDefaultGuardTau);
double eval_guarded(const GuardedQuotient& q, std::span<const double> z);

/// Shortest representation that reads back to the same double.
std::string format_double(double value);

}  // namespace lpvembed
