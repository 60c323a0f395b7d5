#include "lpvembed/expr.hpp"

#include "lpvembed/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <system_error>

namespace lpvembed {

namespace {

double normalized(double v) noexcept { return v == 0.0 ? 0.0 : v; }

std::strong_ordering compare_double(double a, double b) noexcept {
    if (a < b) return std::strong_ordering::less;
    if (b < a) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Term multiply_terms(const Term& a, const Term& b) {
    Term t;
    t.coeff = a.coeff * b.coeff;
    t.exponents.resize(a.exponents.size());
    for (std::size_t j = 0; j < a.exponents.size(); ++j) t.exponents[j] = a.exponents[j] + b.exponents[j];
    t.factors = a.factors;
    t.factors.insert(t.factors.end(), b.factors.begin(), b.factors.end());
    return t;
}

// Folds constant factors into the coefficient and sorts the factor list.
// Returns false when the term vanishes.
bool normalize_term(Term& t) {
    for (auto& f : t.factors) {
        for (auto& w : f.weights) w = normalized(w);
        f.bias = normalized(f.bias);
    }
    std::stable_sort(t.factors.begin(), t.factors.end(),
                     [](const FuncFactor& a, const FuncFactor& b) { return compare_factor(a, b) < 0; });
    std::vector<FuncFactor> kept;
    kept.reserve(t.factors.size());
    for (auto& f : t.factors) {
        if (f.is_constant())
            t.coeff *= apply(f.func, f.bias);
        else
            kept.push_back(std::move(f));
    }
    t.factors = std::move(kept);
    t.coeff = normalized(t.coeff);
    return t.coeff != 0.0;
}

}  // namespace

const char* to_string(Func f) noexcept {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Tanh: return "tanh";
        case Func::Sinh: return "sinh";
        case Func::Cosh: return "cosh";
    }
    return "?";
}

std::optional<Func> func_from_name(std::string_view name) noexcept {
    if (name == "sin") return Func::Sin;
    if (name == "cos") return Func::Cos;
    if (name == "exp") return Func::Exp;
    if (name == "tanh") return Func::Tanh;
    if (name == "sinh") return Func::Sinh;
    if (name == "cosh") return Func::Cosh;
    return std::nullopt;
}

double apply(Func f, double x) noexcept {
    switch (f) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Exp: return std::exp(x);
        case Func::Tanh: return std::tanh(x);
        case Func::Sinh: return std::sinh(x);
        case Func::Cosh: return std::cosh(x);
    }
    return 0.0;
}

double FuncFactor::argument(std::span<const double> z) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (weights[j] != 0.0) s += weights[j] * z[j];
    return s + bias;
}

bool FuncFactor::is_constant() const noexcept {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
}

double Term::evaluate(std::span<const double> z) const noexcept {
    double v = coeff;
    for (std::size_t j = 0; j < exponents.size(); ++j)
        for (int k = 0; k < exponents[j]; ++k) v *= z[j];
    for (const auto& f : factors) v *= apply(f.func, f.argument(z));
    return v;
}

int Term::degree() const noexcept {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
}

std::strong_ordering compare_factor(const FuncFactor& a, const FuncFactor& b) noexcept {
    if (auto c = a.func <=> b.func; c != 0) return c;
    const std::size_t n = std::min(a.weights.size(), b.weights.size());
    for (std::size_t j = 0; j < n; ++j)
        if (auto c = compare_double(a.weights[j], b.weights[j]); c != 0) return c;
    if (auto c = a.weights.size() <=> b.weights.size(); c != 0) return c;
    return compare_double(a.bias, b.bias);
}

std::strong_ordering compare_key(const Term& a, const Term& b) noexcept {
    if (auto c = std::lexicographical_compare_three_way(a.exponents.begin(), a.exponents.end(),
                                                        b.exponents.begin(), b.exponents.end());
        c != 0)
        return c;
    const std::size_t n = std::min(a.factors.size(), b.factors.size());
    for (std::size_t k = 0; k < n; ++k)
        if (auto c = compare_factor(a.factors[k], b.factors[k]); c != 0) return c;
    return a.factors.size() <=> b.factors.size();
}

// ---------------------------------------------------------------------------
// Expression

Expression Expression::constant(std::size_t n_vars, double value) {
    Term t;
    t.coeff = value;
    t.exponents.assign(n_vars, 0);
    return from_terms(n_vars, {std::move(t)});
}

Expression Expression::variable(std::size_t n_vars, std::size_t index) {
    if (index >= n_vars)
        throw Error(ErrorCode::ArityMismatch, "variable index " + std::to_string(index + 1) +
                                                  " exceeds arity " + std::to_string(n_vars));
    Term t;
    t.coeff = 1.0;
    t.exponents.assign(n_vars, 0);
    t.exponents[index] = 1;
    return from_terms(n_vars, {std::move(t)});
}

Expression Expression::function(Func f, std::vector<double> weights, double bias) {
    const std::size_t n = weights.size();
    Term t;
    t.coeff = 1.0;
    t.exponents.assign(n, 0);
    t.factors.push_back(FuncFactor{f, std::move(weights), bias});
    return from_terms(n, {std::move(t)});
}

Expression Expression::from_terms(std::size_t n_vars, std::vector<Term> terms) {
    Expression e(n_vars);
    std::vector<Term> live;
    live.reserve(terms.size());
    for (auto& t : terms) {
        if (t.exponents.size() != n_vars)
            throw Error(ErrorCode::ArityMismatch, "term arity does not match expression arity");
        for (const auto& f : t.factors)
            if (f.weights.size() != n_vars)
                throw Error(ErrorCode::ArityMismatch, "function weights do not match expression arity");
        if (normalize_term(t)) live.push_back(std::move(t));
    }
    std::stable_sort(live.begin(), live.end(),
                     [](const Term& a, const Term& b) { return compare_key(a, b) < 0; });
    for (auto& t : live) {
        if (!e.terms_.empty() && compare_key(e.terms_.back(), t) == 0) {
            e.terms_.back().coeff += t.coeff;
        } else {
            e.terms_.push_back(std::move(t));
        }
    }
    std::erase_if(e.terms_, [](const Term& t) { return t.coeff == 0.0; });
    for (auto& t : e.terms_) t.coeff = normalized(t.coeff);
    return e;
}

bool Expression::is_polynomial() const noexcept {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.factors.empty(); });
}

double Expression::evaluate(std::span<const double> z) const {
    if (z.size() != n_vars_)
        throw Error(ErrorCode::ArityMismatch, "expression expects " + std::to_string(n_vars_) +
                                                  " variables, got " + std::to_string(z.size()));
    double s = 0.0;
    for (const auto& t : terms_) s += t.evaluate(z);
    return s;
}

Expression Expression::operator-() const { return scaled(-1.0); }

Expression Expression::scaled(double factor) const {
    std::vector<Term> terms = terms_;
    for (auto& t : terms) t.coeff *= factor;
    return from_terms(n_vars_, std::move(terms));
}

Expression operator+(const Expression& a, const Expression& b) {
    if (a.n_vars_ != b.n_vars_) throw Error(ErrorCode::ArityMismatch, "adding expressions of different arity");
    std::vector<Term> terms = a.terms_;
    terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
    return Expression::from_terms(a.n_vars_, std::move(terms));
}

Expression operator-(const Expression& a, const Expression& b) { return a + (-b); }

Expression operator*(const Expression& a, const Expression& b) {
    if (a.n_vars_ != b.n_vars_)
        throw Error(ErrorCode::ArityMismatch, "multiplying expressions of different arity");
    std::vector<Term> terms;
    terms.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_)
        for (const auto& tb : b.terms_) terms.push_back(multiply_terms(ta, tb));
    return Expression::from_terms(a.n_vars_, std::move(terms));
}

Expression Expression::pow(unsigned exponent) const {
    Expression result = constant(n_vars_, 1.0);
    for (unsigned k = 0; k < exponent; ++k) result = result * *this;
    return result;
}

bool operator==(const Expression& a, const Expression& b) noexcept {
    if (a.n_vars_ != b.n_vars_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k) {
        if (compare_key(a.terms_[k], b.terms_[k]) != 0) return false;
        if (a.terms_[k].coeff != b.terms_[k].coeff) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Printing

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), normalized(value));
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

namespace {

std::string format_affine(const FuncFactor& f) {
    std::string out;
    bool first = true;
    for (std::size_t j = 0; j < f.weights.size(); ++j) {
        const double w = f.weights[j];
        if (w == 0.0) continue;
        if (first)
            out += w < 0 ? "-" : "";
        else
            out += w < 0 ? " - " : " + ";
        if (std::abs(w) != 1.0) out += format_double(std::abs(w)) + "*";
        out += "z" + std::to_string(j + 1);
        first = false;
    }
    if (f.bias != 0.0) {
        out += f.bias < 0 ? " - " : " + ";
        out += format_double(std::abs(f.bias));
    }
    return out;
}

// Term without its sign.
std::string format_term_body(const Term& t) {
    std::vector<std::string> parts;
    for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        if (t.exponents[j] == 0) continue;
        std::string p = "z" + std::to_string(j + 1);
        if (t.exponents[j] > 1) p += "^" + std::to_string(t.exponents[j]);
        parts.push_back(std::move(p));
    }
    for (const auto& f : t.factors) parts.push_back(std::string(to_string(f.func)) + "(" + format_affine(f) + ")");

    const double mag = std::abs(t.coeff);
    if (parts.empty()) return format_double(mag);
    std::string out = mag == 1.0 ? std::string() : format_double(mag) + "*";
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (k) out += "*";
        out += parts[k];
    }
    return out;
}

}  // namespace

std::string Expression::to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const bool neg = terms_[k].coeff < 0;
        if (k == 0)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += format_term_body(terms_[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    Parser(std::string_view text, std::size_t n_vars) : s_(text), n_(n_vars) {}

    Expression run() {
        skip_ws();
        if (pos_ == s_.size()) fail(ErrorCode::SyntaxError, "empty expression");
        Expression e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail(ErrorCode::SyntaxError, std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(ErrorCode code, const std::string& msg) const { throw ParseError(code, pos_, msg); }
    [[noreturn]] void fail_at(ErrorCode code, std::size_t at, const std::string& msg) const {
        throw ParseError(code, at, msg);
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expression expr() {
        Expression e = term();
        for (;;) {
            if (accept('+'))
                e = e + term();
            else if (accept('-'))
                e = e - term();
            else
                return e;
        }
    }

    Expression term() {
        Expression e = unary();
        while (accept('*')) e = e * unary();
        return e;
    }

    Expression unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t at = pos_;
        if (pos_ < s_.size() && s_[pos_] == '-') fail(ErrorCode::NegativeExponent, "negative exponent");
        if (pos_ < s_.size() && s_[pos_] == '+') ++pos_;
        const std::size_t begin = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (begin == pos_) fail_at(ErrorCode::SyntaxError, at, "exponent must be a non-negative integer");
        if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
            fail_at(ErrorCode::SyntaxError, at, "exponent must be a non-negative integer");
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + begin, s_.data() + pos_, value);
        if (ec != std::errc{} || value > 64) fail_at(ErrorCode::SyntaxError, at, "exponent out of range");
        return base.pow(value);
    }

    Expression primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail(ErrorCode::SyntaxError, "unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expression e = expr();
            if (!accept(')')) fail(ErrorCode::SyntaxError, "expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expression::constant(n_, number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(ErrorCode::SyntaxError, std::string("unexpected '") + c + "'");
    }

    double number() {
        const std::size_t begin = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            const std::size_t exp_begin = pos_;
            digits();
            if (exp_begin == pos_) fail(ErrorCode::SyntaxError, "malformed number");
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + begin, s_.data() + pos_, value);
        if (ec != std::errc{} || ptr != s_.data() + pos_ || !std::isfinite(value))
            fail_at(ErrorCode::SyntaxError, begin, "malformed number");
        return value;
    }

    Expression identifier() {
        const std::size_t begin = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view name = s_.substr(begin, pos_ - begin);

        std::size_t look = pos_;
        while (look < s_.size() && (s_[look] == ' ' || s_[look] == '\t')) ++look;
        if (look < s_.size() && s_[look] == '(') {
            const auto func = func_from_name(name);
            if (!func) fail_at(ErrorCode::UnsupportedFunction, begin, "unsupported function '" + std::string(name) + "'");
            pos_ = look + 1;
            Expression arg = expr();
            if (!accept(')')) fail(ErrorCode::SyntaxError, "expected ')'");
            return affine_call(*func, arg, begin);
        }
        if (name == "pi") return Expression::constant(n_, std::numbers::pi);
        if (name.size() > 1 && name[0] == 'z' &&
            std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            std::size_t index = 0;
            std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (index == 0 || index > n_)
                fail_at(ErrorCode::ArityMismatch, begin,
                        "variable '" + std::string(name) + "' outside z1..z" + std::to_string(n_));
            return Expression::variable(n_, index - 1);
        }
        fail_at(ErrorCode::SyntaxError, begin, "unknown identifier '" + std::string(name) + "'");
    }

    Expression affine_call(Func func, const Expression& arg, std::size_t at) const {
        std::vector<double> weights(n_, 0.0);
        double bias = 0.0;
        for (const auto& t : arg.terms()) {
            if (!t.factors.empty() || t.degree() > 1)
                fail_at(ErrorCode::NonAffineFunctionArgument, at,
                        std::string("argument of ") + to_string(func) + " is not affine in z");
            if (t.degree() == 0) {
                bias = t.coeff;
                continue;
            }
            for (std::size_t j = 0; j < n_; ++j)
                if (t.exponents[j] == 1) weights[j] = t.coeff;
        }
        return Expression::function(func, std::move(weights), bias);
    }

    std::string_view s_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression parse(std::string_view text, std::size_t n_vars) { return Parser(text, n_vars).run(); }

// ---------------------------------------------------------------------------
// Calculus

Expression partial(const Expression& e, std::size_t index) {
    const std::size_t n = e.n_vars();
    if (index >= n) throw Error(ErrorCode::ArityMismatch, "partial derivative index out of range");
    std::vector<Term> out;
    for (const auto& t : e.terms()) {
        if (t.exponents[index] > 0) {
            Term d = t;
            d.coeff *= t.exponents[index];
            d.exponents[index] -= 1;
            out.push_back(std::move(d));
        }
        for (std::size_t k = 0; k < t.factors.size(); ++k) {
            const FuncFactor& f = t.factors[k];
            const double w = f.weights[index];
            if (w == 0.0) continue;
            Term d = t;
            d.coeff *= w;
            FuncFactor& g = d.factors[k];
            switch (f.func) {
                case Func::Sin: g.func = Func::Cos; break;
                case Func::Cos:
                    g.func = Func::Sin;
                    d.coeff = -d.coeff;
                    break;
                case Func::Exp: break;
                case Func::Sinh: g.func = Func::Cosh; break;
                case Func::Cosh: g.func = Func::Sinh; break;
                case Func::Tanh: {
                    // tanh' = 1 - tanh^2
                    Term squared = d;
                    squared.coeff = -squared.coeff;
                    squared.factors.push_back(f);
                    out.push_back(std::move(squared));
                    d.factors.erase(d.factors.begin() + static_cast<std::ptrdiff_t>(k));
                    break;
                }
            }
            out.push_back(std::move(d));
        }
    }
    return Expression::from_terms(n, std::move(out));
}

Expression restrict_to(const Expression& e, const std::vector<bool>& keep) {
    const std::size_t n = e.n_vars();
    if (keep.size() != n) throw Error(ErrorCode::ArityMismatch, "restriction mask does not match arity");
    std::vector<Term> out;
    for (const auto& t : e.terms()) {
        bool vanishes = false;
        for (std::size_t j = 0; j < n; ++j)
            if (!keep[j] && t.exponents[j] > 0) vanishes = true;
        if (vanishes) continue;
        Term r = t;
        for (auto& f : r.factors)
            for (std::size_t j = 0; j < n; ++j)
                if (!keep[j]) f.weights[j] = 0.0;
        out.push_back(std::move(r));
    }
    return Expression::from_terms(n, std::move(out));
}

Expression restrict(const Expression& e, std::size_t keep) {
    std::vector<bool> mask(e.n_vars(), false);
    for (std::size_t j = 0; j < std::min(keep, e.n_vars()); ++j) mask[j] = true;
    return restrict_to(e, mask);
}

std::optional<Expression> try_exact_divide(const Expression& e, std::size_t index) {
    if (index >= e.n_vars()) throw Error(ErrorCode::ArityMismatch, "division index out of range");
    std::vector<Term> out;
    out.reserve(e.terms().size());
    for (const auto& t : e.terms()) {
        if (t.exponents[index] < 1) return std::nullopt;
        Term q = t;
        q.exponents[index] -= 1;
        out.push_back(std::move(q));
    }
    return Expression::from_terms(e.n_vars(), std::move(out));
}

// ---------------------------------------------------------------------------
// Guarded quotient

double GuardedQuotient::threshold(std::span<const double> z) const noexcept {
    double inf_norm = 0.0;
    for (double v : z) inf_norm = std::max(inf_norm, std::abs(v));
    return tau * (1.0 + inf_norm);
}

bool GuardedQuotient::uses_derivative(std::span<const double> z) const noexcept {
    return !(std::abs(z[divisor]) > threshold(z));
}

GuardedQuotient make_guarded(Expression numerator, std::size_t divisor, double tau) {
    if (divisor >= numerator.n_vars()) throw Error(ErrorCode::ArityMismatch, "divisor index out of range");
    if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "guard threshold must be positive");
    GuardedQuotient q;
    q.derivative = partial(numerator, divisor);
    q.numerator = std::move(numerator);
    q.divisor = divisor;
    q.tau = tau;
    return q;
}

double eval_guarded(const GuardedQuotient& q, std::span<const double> z) {
    if (z.size() != q.numerator.n_vars())
        throw Error(ErrorCode::ArityMismatch, "guarded quotient arity mismatch");
    if (q.uses_derivative(z)) return q.derivative.evaluate(z);
    return q.numerator.evaluate(z) / z[q.divisor];
}

}  // namespace lpvembed
