#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "orbitshift/errors.hpp"
#include "orbitshift/matrix.hpp"

namespace orbitshift {

enum class expr_kind {
    constant,
    variable,  // x1, x2, ... (1-based)
    sum,
    difference,
    product,
    quotient,
    power,  // integer exponent
    negation,
    sin_fn,
    cos_fn,
    exp_fn,
    log_fn,
};

class expr;
using expr_ptr = std::shared_ptr<const expr>;

namespace detail {
expr_ptr make_node(expr_kind kind, double value, int index, expr_ptr lhs, expr_ptr rhs);
}

// Immutable arithmetic expression over variables x1..xm.  Trees are built
// only through the make_* factories below, which fold constant subtrees and
// drop arithmetic identities; printing a factory-built tree and parsing the
// result reproduces the tree exactly.
class expr {
public:
    expr_kind kind() const noexcept { return kind_; }
    double constant_value() const noexcept { return value_; }  // kind constant
    int variable_index() const noexcept { return index_; }     // kind variable
    int exponent() const noexcept { return index_; }           // kind power
    const expr_ptr& lhs() const noexcept { return lhs_; }
    const expr_ptr& rhs() const noexcept { return rhs_; }

private:
    expr(expr_kind kind, double value, int index, expr_ptr lhs, expr_ptr rhs)
        : kind_(kind), value_(value), index_(index),
          lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

    friend expr_ptr detail::make_node(expr_kind, double, int, expr_ptr, expr_ptr);

    expr_kind kind_;
    double value_;
    int index_;
    expr_ptr lhs_;
    expr_ptr rhs_;
};

namespace detail {

inline expr_ptr make_node(expr_kind kind, double value, int index, expr_ptr lhs,
                          expr_ptr rhs) {
    return expr_ptr(new expr(kind, value, index, std::move(lhs), std::move(rhs)));
}

inline bool is_const(const expr_ptr& e) { return e->kind() == expr_kind::constant; }

inline bool is_const(const expr_ptr& e, double v) {
    return is_const(e) && e->constant_value() == v;
}

// Exponentiation by squaring; negative exponents go through the reciprocal.
inline double ipow(double base, int exponent) {
    if (exponent < 0) return 1.0 / ipow(base, -exponent);
    double r = 1.0;
    double b = base;
    for (unsigned e = static_cast<unsigned>(exponent); e != 0; e >>= 1) {
        if (e & 1u) r *= b;
        b *= b;
    }
    return r;
}

}  // namespace detail

inline expr_ptr make_constant(double value) {
    return detail::make_node(expr_kind::constant, value, 0, nullptr, nullptr);
}

inline expr_ptr make_variable(int index) {
    if (index < 1) throw domain_error("make_variable: indices are 1-based");
    return detail::make_node(expr_kind::variable, 0.0, index, nullptr, nullptr);
}

inline expr_ptr make_negation(expr_ptr a) {
    if (detail::is_const(a)) return make_constant(-a->constant_value());
    if (a->kind() == expr_kind::negation) return a->lhs();
    return detail::make_node(expr_kind::negation, 0.0, 0, std::move(a), nullptr);
}

inline expr_ptr make_sum(expr_ptr a, expr_ptr b) {
    if (detail::is_const(a) && detail::is_const(b)) {
        const double v = a->constant_value() + b->constant_value();
        if (std::isfinite(v)) return make_constant(v);
    }
    if (detail::is_const(a, 0.0)) return b;
    if (detail::is_const(b, 0.0)) return a;
    return detail::make_node(expr_kind::sum, 0.0, 0, std::move(a), std::move(b));
}

inline expr_ptr make_difference(expr_ptr a, expr_ptr b) {
    if (detail::is_const(a) && detail::is_const(b)) {
        const double v = a->constant_value() - b->constant_value();
        if (std::isfinite(v)) return make_constant(v);
    }
    if (detail::is_const(b, 0.0)) return a;
    if (detail::is_const(a, 0.0)) return make_negation(std::move(b));
    return detail::make_node(expr_kind::difference, 0.0, 0, std::move(a), std::move(b));
}

inline expr_ptr make_product(expr_ptr a, expr_ptr b) {
    if (detail::is_const(a) && detail::is_const(b)) {
        const double v = a->constant_value() * b->constant_value();
        if (std::isfinite(v)) return make_constant(v);
    }
    if (detail::is_const(a, 0.0) || detail::is_const(b, 0.0)) return make_constant(0.0);
    if (detail::is_const(a, 1.0)) return b;
    if (detail::is_const(b, 1.0)) return a;
    return detail::make_node(expr_kind::product, 0.0, 0, std::move(a), std::move(b));
}

// 0/u is NOT folded to 0: u may vanish where the quotient must still fail.
inline expr_ptr make_quotient(expr_ptr a, expr_ptr b) {
    if (detail::is_const(a) && detail::is_const(b) && b->constant_value() != 0.0) {
        const double v = a->constant_value() / b->constant_value();
        if (std::isfinite(v)) return make_constant(v);
    }
    if (detail::is_const(b, 1.0)) return a;
    return detail::make_node(expr_kind::quotient, 0.0, 0, std::move(a), std::move(b));
}

inline expr_ptr make_power(expr_ptr base, int exponent) {
    if (exponent == 0) return make_constant(1.0);
    if (exponent == 1) return base;
    if (detail::is_const(base) && !(base->constant_value() == 0.0 && exponent < 0)) {
        const double v = detail::ipow(base->constant_value(), exponent);
        if (std::isfinite(v)) return make_constant(v);
    }
    return detail::make_node(expr_kind::power, 0.0, exponent, std::move(base), nullptr);
}

// Transcendental applications are never folded, even on constants; the
// printed form stays what was written.
inline expr_ptr make_sin(expr_ptr a) {
    return detail::make_node(expr_kind::sin_fn, 0.0, 0, std::move(a), nullptr);
}
inline expr_ptr make_cos(expr_ptr a) {
    return detail::make_node(expr_kind::cos_fn, 0.0, 0, std::move(a), nullptr);
}
inline expr_ptr make_exp(expr_ptr a) {
    return detail::make_node(expr_kind::exp_fn, 0.0, 0, std::move(a), nullptr);
}
inline expr_ptr make_log(expr_ptr a) {
    return detail::make_node(expr_kind::log_fn, 0.0, 0, std::move(a), nullptr);
}

inline bool structurally_equal(const expr_ptr& a, const expr_ptr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind() != b->kind()) return false;
    switch (a->kind()) {
        case expr_kind::constant:
            return a->constant_value() == b->constant_value();
        case expr_kind::variable:
            return a->variable_index() == b->variable_index();
        case expr_kind::power:
            return a->exponent() == b->exponent() &&
                   structurally_equal(a->lhs(), b->lhs());
        case expr_kind::sum:
        case expr_kind::difference:
        case expr_kind::product:
        case expr_kind::quotient:
            return structurally_equal(a->lhs(), b->lhs()) &&
                   structurally_equal(a->rhs(), b->rhs());
        default:
            return structurally_equal(a->lhs(), b->lhs());
    }
}

inline int max_variable_index(const expr& e) {
    switch (e.kind()) {
        case expr_kind::constant:
            return 0;
        case expr_kind::variable:
            return e.variable_index();
        case expr_kind::sum:
        case expr_kind::difference:
        case expr_kind::product:
        case expr_kind::quotient:
            return std::max(max_variable_index(*e.lhs()), max_variable_index(*e.rhs()));
        default:
            return max_variable_index(*e.lhs());
    }
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Printer precedence levels: 0 additive, 1 multiplicative, 2 power, 3 base.
// A child printed into a slot of higher level gets parenthesized, which turns
// it into a base again.
inline int print_level(const expr& e) {
    switch (e.kind()) {
        case expr_kind::sum:
        case expr_kind::difference:
            return 0;
        case expr_kind::product:
        case expr_kind::quotient:
            return 1;
        case expr_kind::power:
            return 2;
        default:
            return 3;
    }
}

inline std::string print_expr(const expr& e, int slot_level) {
    std::string s;
    switch (e.kind()) {
        case expr_kind::constant:
            s = format_double(e.constant_value());
            break;
        case expr_kind::variable:
            s = "x" + std::to_string(e.variable_index());
            break;
        case expr_kind::sum:
            s = print_expr(*e.lhs(), 0) + " + " + print_expr(*e.rhs(), 1);
            break;
        case expr_kind::difference:
            s = print_expr(*e.lhs(), 0) + " - " + print_expr(*e.rhs(), 1);
            break;
        case expr_kind::product:
            s = print_expr(*e.lhs(), 1) + "*" + print_expr(*e.rhs(), 2);
            break;
        case expr_kind::quotient:
            s = print_expr(*e.lhs(), 1) + "/" + print_expr(*e.rhs(), 2);
            break;
        case expr_kind::power:
            s = print_expr(*e.lhs(), 3) + "^" + std::to_string(e.exponent());
            break;
        case expr_kind::negation:
            s = "-" + print_expr(*e.lhs(), 3);
            break;
        case expr_kind::sin_fn:
            s = "sin(" + print_expr(*e.lhs(), 0) + ")";
            break;
        case expr_kind::cos_fn:
            s = "cos(" + print_expr(*e.lhs(), 0) + ")";
            break;
        case expr_kind::exp_fn:
            s = "exp(" + print_expr(*e.lhs(), 0) + ")";
            break;
        case expr_kind::log_fn:
            s = "log(" + print_expr(*e.lhs(), 0) + ")";
            break;
    }
    if (print_level(e) < slot_level) return "(" + s + ")";
    return s;
}

}  // namespace detail

inline std::string to_string(const expr& e) { return detail::print_expr(e, 0); }
inline std::string to_string(const expr_ptr& e) { return detail::print_expr(*e, 0); }

// Evaluate at x (x[0] holds x1).  Domain violations and non-finite
// intermediates raise eval_error carrying the offending subexpression.
inline double eval(const expr& e, const vec& x) {
    double v = 0.0;
    switch (e.kind()) {
        case expr_kind::constant:
            v = e.constant_value();
            break;
        case expr_kind::variable: {
            const int idx = e.variable_index();
            if (static_cast<std::size_t>(idx) > x.size())
                throw dimension_error("eval: variable x" + std::to_string(idx) +
                                      " exceeds point dimension " +
                                      std::to_string(x.size()));
            v = x[static_cast<std::size_t>(idx) - 1];
            break;
        }
        case expr_kind::sum:
            v = eval(*e.lhs(), x) + eval(*e.rhs(), x);
            break;
        case expr_kind::difference:
            v = eval(*e.lhs(), x) - eval(*e.rhs(), x);
            break;
        case expr_kind::product:
            v = eval(*e.lhs(), x) * eval(*e.rhs(), x);
            break;
        case expr_kind::quotient: {
            const double den = eval(*e.rhs(), x);
            if (den == 0.0) throw eval_error("division by zero", to_string(e));
            v = eval(*e.lhs(), x) / den;
            break;
        }
        case expr_kind::power: {
            const double base = eval(*e.lhs(), x);
            if (base == 0.0 && e.exponent() < 0)
                throw eval_error("zero base with negative exponent", to_string(e));
            v = detail::ipow(base, e.exponent());
            break;
        }
        case expr_kind::negation:
            v = -eval(*e.lhs(), x);
            break;
        case expr_kind::sin_fn:
            v = std::sin(eval(*e.lhs(), x));
            break;
        case expr_kind::cos_fn:
            v = std::cos(eval(*e.lhs(), x));
            break;
        case expr_kind::exp_fn:
            v = std::exp(eval(*e.lhs(), x));
            break;
        case expr_kind::log_fn: {
            const double arg = eval(*e.lhs(), x);
            if (arg <= 0.0)
                throw eval_error("logarithm of a non-positive value", to_string(e));
            v = std::log(arg);
            break;
        }
    }
    if (!std::isfinite(v)) throw eval_error("non-finite value", to_string(e));
    return v;
}

inline double eval(const expr_ptr& e, const vec& x) { return eval(*e, x); }

// Partial derivative with respect to x_{var_index}; the result runs through
// the folding factories, so vanished branches disappear.
inline expr_ptr diff(const expr_ptr& e, int var_index) {
    switch (e->kind()) {
        case expr_kind::constant:
            return make_constant(0.0);
        case expr_kind::variable:
            return make_constant(e->variable_index() == var_index ? 1.0 : 0.0);
        case expr_kind::sum:
            return make_sum(diff(e->lhs(), var_index), diff(e->rhs(), var_index));
        case expr_kind::difference:
            return make_difference(diff(e->lhs(), var_index), diff(e->rhs(), var_index));
        case expr_kind::product:
            return make_sum(make_product(diff(e->lhs(), var_index), e->rhs()),
                            make_product(e->lhs(), diff(e->rhs(), var_index)));
        case expr_kind::quotient:
            return make_quotient(
                make_difference(make_product(diff(e->lhs(), var_index), e->rhs()),
                                make_product(e->lhs(), diff(e->rhs(), var_index))),
                make_power(e->rhs(), 2));
        case expr_kind::power:
            return make_product(
                make_product(make_constant(static_cast<double>(e->exponent())),
                             make_power(e->lhs(), e->exponent() - 1)),
                diff(e->lhs(), var_index));
        case expr_kind::negation:
            return make_negation(diff(e->lhs(), var_index));
        case expr_kind::sin_fn:
            return make_product(make_cos(e->lhs()), diff(e->lhs(), var_index));
        case expr_kind::cos_fn:
            return make_negation(
                make_product(make_sin(e->lhs()), diff(e->lhs(), var_index)));
        case expr_kind::exp_fn:
            return make_product(make_exp(e->lhs()), diff(e->lhs(), var_index));
        case expr_kind::log_fn:
            return make_quotient(diff(e->lhs(), var_index), e->lhs());
    }
    throw domain_error("diff: unreachable expression kind");
}

namespace detail {

// Recursive-descent parser for the grammar
//     expression := term (('+' | '-') term)*
//     term       := factor (('*' | '/') factor)*
//     factor     := base ('^' integer)?
//     base       := number | 'x' integer | '(' expression ')'
//                 | ('-' | 'sin' | 'cos' | 'exp' | 'log') base
// Whitespace is insignificant.  Note that '^' applies to a whole base, so
// "-x1^2" squares the negation.
class parser {
public:
    parser(std::string_view src, int ambient_dim) : src_(src), dim_(ambient_dim) {}

    expr_ptr run() {
        expr_ptr e = parse_expression();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    expr_ptr parse_expression() {
        expr_ptr e = parse_term();
        for (;;) {
            skip_ws();
            if (consume('+')) e = make_sum(e, parse_term());
            else if (consume('-')) e = make_difference(e, parse_term());
            else return e;
        }
    }

    expr_ptr parse_term() {
        expr_ptr e = parse_factor();
        for (;;) {
            skip_ws();
            if (consume('*')) e = make_product(e, parse_factor());
            else if (consume('/')) e = make_quotient(e, parse_factor());
            else return e;
        }
    }

    expr_ptr parse_factor() {
        expr_ptr base = parse_base();
        skip_ws();
        if (consume('^')) return make_power(base, parse_integer("exponent"));
        return base;
    }

    expr_ptr parse_base() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (is_digit(c) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            expr_ptr e = parse_expression();
            skip_ws();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (c == '-') {
            ++pos_;
            return make_negation(parse_base());
        }
        if (is_alpha(c)) return parse_name();
        fail(std::string("unexpected character '") + c + "'");
    }

    expr_ptr parse_number() {
        double value = 0.0;
        const char* begin = src_.data() + pos_;
        const char* end = src_.data() + src_.size();
        const auto res = std::from_chars(begin, end, value);
        if (res.ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(res.ptr - begin);
        return make_constant(value);
    }

    expr_ptr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_alpha(src_[pos_])) ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") {
            if (pos_ >= src_.size() || !is_digit(src_[pos_]))
                fail_at(start, "expected variable index after 'x'");
            int index = 0;
            const char* begin = src_.data() + pos_;
            const auto res = std::from_chars(begin, src_.data() + src_.size(), index);
            pos_ += static_cast<std::size_t>(res.ptr - begin);
            if (index < 1) fail_at(start, "variable indices start at x1");
            if (index > dim_)
                fail_at(start, "variable x" + std::to_string(index) +
                                   " exceeds dimension " + std::to_string(dim_));
            return make_variable(index);
        }
        if (name == "sin") return make_sin(parse_base());
        if (name == "cos") return make_cos(parse_base());
        if (name == "exp") return make_exp(parse_base());
        if (name == "log") return make_log(parse_base());
        fail_at(start, "unknown identifier '" + std::string(name) + "'");
    }

    int parse_integer(const char* what) {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ >= src_.size() || !is_digit(src_[pos_]))
            fail_at(start, std::string("expected integer ") + what);
        int value = 0;
        // from_chars takes '-' but not an explicit '+', so drop the latter.
        const std::size_t num_start = src_[start] == '+' ? start + 1 : start;
        const char* begin = src_.data() + num_start;
        const auto res = std::from_chars(begin, src_.data() + src_.size(), value);
        if (res.ec != std::errc())
            fail_at(start, std::string("integer ") + what + " out of range");
        pos_ = num_start + static_cast<std::size_t>(res.ptr - begin);
        return value;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                src_[pos_] == '\r'))
            ++pos_;
    }

    bool consume(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& message) { fail_at(pos_, message); }

    [[noreturn]] void fail_at(std::size_t pos, const std::string& message) {
        int line = 1, column = 1;
        for (std::size_t i = 0; i < pos && i < src_.size(); ++i) {
            if (src_[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw parse_error(message, line, column);
    }

    std::string_view src_;
    int dim_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Parse an expression over x1..x{ambient_dim}.  Errors carry line and column.
inline expr_ptr parse_expr(std::string_view src, int ambient_dim) {
    if (ambient_dim < 1) throw domain_error("parse_expr: ambient_dim must be >= 1");
    return detail::parser(src, ambient_dim).run();
}

}  // namespace orbitshift
