#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "orbitshift/expr.hpp"
#include "orbitshift/matrix.hpp"

namespace orbitshift {

// Scalar field on R^m.  Either expression-backed, with the gradient held as
// symbolically differentiated trees, or numeric-backed (an opaque function,
// gradient by central differences).  The numeric form exists because
// reconstructed shift functions are defined pointwise by a solver, not by a
// formula.
class scalar_field {
public:
    scalar_field(int ambient_dim, expr_ptr body)
        : dim_(ambient_dim), body_(std::move(body)) {
        if (dim_ < 1) throw dimension_error("scalar_field: ambient_dim must be >= 1");
        if (!body_) throw domain_error("scalar_field: null expression");
        if (max_variable_index(*body_) > dim_)
            throw dimension_error("scalar_field: expression uses x" +
                                  std::to_string(max_variable_index(*body_)) +
                                  " but ambient_dim is " + std::to_string(dim_));
        gradient_.reserve(static_cast<std::size_t>(dim_));
        for (int j = 1; j <= dim_; ++j) gradient_.push_back(diff(body_, j));
    }

    scalar_field(int ambient_dim, std::string_view source)
        : scalar_field(ambient_dim, parse_expr(source, ambient_dim)) {}

    static scalar_field constant(int ambient_dim, double value) {
        return scalar_field(ambient_dim, make_constant(value));
    }

    static scalar_field numeric(int ambient_dim, std::function<double(const vec&)> fn) {
        scalar_field f;
        f.dim_ = ambient_dim;
        f.fn_ = std::move(fn);
        if (f.dim_ < 1) throw dimension_error("scalar_field: ambient_dim must be >= 1");
        if (!f.fn_) throw domain_error("scalar_field: null function");
        return f;
    }

    int ambient_dim() const noexcept { return dim_; }
    bool is_expression() const noexcept { return body_ != nullptr; }

    // Null for numeric-backed fields.
    const expr_ptr& body() const noexcept { return body_; }

    double value(const vec& x) const {
        check_point(x);
        return body_ ? eval(body_, x) : fn_(x);
    }

    vec gradient(const vec& x) const {
        check_point(x);
        vec g(static_cast<std::size_t>(dim_));
        if (body_) {
            for (int j = 0; j < dim_; ++j)
                g[static_cast<std::size_t>(j)] =
                    eval(gradient_[static_cast<std::size_t>(j)], x);
            return g;
        }
        // Central differences with a per-coordinate step.
        vec p = x;
        for (int j = 0; j < dim_; ++j) {
            const auto k = static_cast<std::size_t>(j);
            const double h = 1e-6 * (1.0 + std::abs(x[k]));
            p[k] = x[k] + h;
            const double plus = fn_(p);
            p[k] = x[k] - h;
            const double minus = fn_(p);
            p[k] = x[k];
            g[k] = (plus - minus) / (2.0 * h);
        }
        return g;
    }

private:
    scalar_field() = default;

    void check_point(const vec& x) const {
        if (x.size() != static_cast<std::size_t>(dim_))
            throw dimension_error("scalar_field: point dimension " +
                                  std::to_string(x.size()) + " != ambient " +
                                  std::to_string(dim_));
    }

    int dim_ = 0;
    expr_ptr body_;
    std::vector<expr_ptr> gradient_;
    std::function<double(const vec&)> fn_;
};

inline scalar_field operator-(const scalar_field& a) {
    if (a.is_expression()) return scalar_field(a.ambient_dim(), make_negation(a.body()));
    return scalar_field::numeric(a.ambient_dim(),
                                 [a](const vec& x) { return -a.value(x); });
}

inline scalar_field operator+(const scalar_field& a, const scalar_field& b) {
    if (a.ambient_dim() != b.ambient_dim())
        throw dimension_error("scalar_field addition: ambient dimensions differ");
    if (a.is_expression() && b.is_expression())
        return scalar_field(a.ambient_dim(), make_sum(a.body(), b.body()));
    return scalar_field::numeric(
        a.ambient_dim(), [a, b](const vec& x) { return a.value(x) + b.value(x); });
}

enum class field_kind { zero, translation, linear, expression };

inline const char* to_string(field_kind k) {
    switch (k) {
        case field_kind::zero: return "zero";
        case field_kind::translation: return "translation";
        case field_kind::linear: return "linear";
        case field_kind::expression: return "expression";
    }
    return "?";
}

// Vector field on R^m.  The linear kind stores F(x) = A x with A acting on
// column vectors.  Structured kinds are kept symbolic so flows can use their
// closed forms.
class vector_field {
public:
    static vector_field zero(int ambient_dim) {
        vector_field f;
        f.kind_ = field_kind::zero;
        f.dim_ = ambient_dim;
        if (ambient_dim < 1)
            throw dimension_error("vector_field: ambient_dim must be >= 1");
        return f;
    }

    static vector_field translation(vec direction) {
        vector_field f;
        f.kind_ = field_kind::translation;
        f.dim_ = static_cast<int>(direction.size());
        f.direction_ = std::move(direction);
        if (f.dim_ < 1) throw dimension_error("vector_field: empty direction");
        return f;
    }

    static vector_field linear(matrix coefficient) {
        if (!coefficient.square())
            throw dimension_error("vector_field: coefficient must be square");
        vector_field f;
        f.kind_ = field_kind::linear;
        f.dim_ = static_cast<int>(coefficient.rows());
        f.coefficient_ = std::move(coefficient);
        return f;
    }

    static vector_field expression(int ambient_dim, std::vector<expr_ptr> components) {
        vector_field f;
        f.kind_ = field_kind::expression;
        f.dim_ = ambient_dim;
        if (ambient_dim < 1)
            throw dimension_error("vector_field: ambient_dim must be >= 1");
        if (components.size() != static_cast<std::size_t>(ambient_dim))
            throw dimension_error("vector_field: need one component per coordinate");
        for (const expr_ptr& c : components) {
            if (!c) throw domain_error("vector_field: null component");
            if (max_variable_index(*c) > ambient_dim)
                throw dimension_error("vector_field: component variable exceeds dimension");
        }
        f.components_ = std::move(components);
        return f;
    }

    static vector_field expression(int ambient_dim,
                                   const std::vector<std::string>& components) {
        std::vector<expr_ptr> parsed;
        parsed.reserve(components.size());
        for (const std::string& s : components)
            parsed.push_back(parse_expr(s, ambient_dim));
        return expression(ambient_dim, std::move(parsed));
    }

    // Braced lists of string literals would otherwise be ambiguous between
    // the two overloads above (two const char* qualify as an iterator pair).
    static vector_field expression(int ambient_dim,
                                   std::initializer_list<const char*> components) {
        return expression(ambient_dim,
                          std::vector<std::string>(components.begin(), components.end()));
    }

    int ambient_dim() const noexcept { return dim_; }
    field_kind kind() const noexcept { return kind_; }

    vec value(const vec& x) const {
        if (x.size() != static_cast<std::size_t>(dim_))
            throw dimension_error("vector_field: point dimension " +
                                  std::to_string(x.size()) + " != ambient " +
                                  std::to_string(dim_));
        switch (kind_) {
            case field_kind::zero:
                return vec(static_cast<std::size_t>(dim_), 0.0);
            case field_kind::translation:
                return direction_;
            case field_kind::linear:
                return coefficient_ * x;
            case field_kind::expression: {
                vec y(static_cast<std::size_t>(dim_));
                for (std::size_t i = 0; i < components_.size(); ++i)
                    y[i] = eval(components_[i], x);
                return y;
            }
        }
        throw domain_error("vector_field: unreachable kind");
    }

    const vec& direction() const {
        if (kind_ != field_kind::translation)
            throw domain_error("vector_field: not a translation field");
        return direction_;
    }

    const matrix& coefficient() const {
        if (kind_ != field_kind::linear)
            throw domain_error("vector_field: not a linear field");
        return coefficient_;
    }

    const std::vector<expr_ptr>& components() const {
        if (kind_ != field_kind::expression)
            throw domain_error("vector_field: not an expression field");
        return components_;
    }

private:
    vector_field() = default;

    field_kind kind_ = field_kind::zero;
    int dim_ = 0;
    vec direction_;
    matrix coefficient_;
    std::vector<expr_ptr> components_;
};

// Derivative of f along F at x: <F(x), grad f(x)>.
inline double directional_derivative(const scalar_field& f, const vector_field& F,
                                     const vec& x) {
    if (f.ambient_dim() != F.ambient_dim())
        throw dimension_error("directional_derivative: ambient dimensions differ");
    return dot(F.value(x), f.gradient(x));
}

}  // namespace orbitshift
