#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "orbitshift/field.hpp"
#include "orbitshift/random.hpp"
#include "oracles.hpp"

using namespace orbitshift;

namespace {

// Test-local finite differences, independent of the gradient path under test.
vec fd_gradient(const scalar_field& f, const vec& x) {
    vec g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x[j]));
        vec hi = x, lo = x;
        hi[j] += h;
        lo[j] -= h;
        g[j] = (f.value(hi) - f.value(lo)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("scalar field values and exact gradients", "[field]") {
    const scalar_field f(2, "x1^2 - x2^2");
    CHECK(f.ambient_dim() == 2);
    CHECK(f.is_expression());
    CHECK(f.value({3.0, 2.0}) == 5.0);
    const vec g = f.gradient({3.0, 2.0});
    CHECK(g[0] == 6.0);
    CHECK(g[1] == -4.0);
}

TEST_CASE("symbolic gradients agree with finite differences", "[field]") {
    const std::vector<scalar_field> fields = {
        scalar_field(2, "sin(x1*x2) + exp(x2)"),
        scalar_field(2, "x1^3 - 2*x1*x2 + 1/(1 + x1^2)"),
        scalar_field(2, "log(2 + sin(x1)) * cos(x2)"),
    };
    rng64 rng(77);
    for (const auto& f : fields) {
        for (int rep = 0; rep < 100; ++rep) {
            const vec x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            const vec g = f.gradient(x);
            const vec fd = fd_gradient(f, x);
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(std::abs(g[j] - fd[j]) <= 1e-5 * (1.0 + std::abs(fd[j])));
        }
    }
}

TEST_CASE("field arithmetic stays symbolic", "[field]") {
    const scalar_field f(2, "x1*x2");
    const scalar_field g(2, "x1 + 1");
    const scalar_field s = f + g;
    const scalar_field n = -f;
    CHECK(s.is_expression());
    CHECK(n.is_expression());
    const vec x = {2.0, 3.0};
    CHECK(s.value(x) == f.value(x) + g.value(x));
    CHECK(n.value(x) == -f.value(x));
    // Sum gradient is the sum of gradients, exactly: the derivative trees
    // combine through the same fold-free sum node.
    const vec gs = s.gradient(x);
    const vec gf = f.gradient(x);
    const vec gg = g.gradient(x);
    CHECK(gs[0] == gf[0] + gg[0]);
    CHECK(gs[1] == gf[1] + gg[1]);
}

TEST_CASE("numeric scalar fields differentiate by central differences", "[field]") {
    const scalar_field f = scalar_field::numeric(
        2, [](const vec& x) { return x[0] * x[0] * x[1]; });
    CHECK_FALSE(f.is_expression());
    CHECK(f.body() == nullptr);
    CHECK(f.value({2.0, 3.0}) == 12.0);
    const vec g = f.gradient({2.0, 3.0});
    CHECK(std::abs(g[0] - 12.0) <= 1e-5);
    CHECK(std::abs(g[1] - 4.0) <= 1e-5);

    const scalar_field c = scalar_field::constant(3, 2.5);
    CHECK(c.value({1.0, 2.0, 3.0}) == 2.5);
    const vec gc = c.gradient({1.0, 2.0, 3.0});
    CHECK(gc[0] == 0.0);
    CHECK(gc[1] == 0.0);
    CHECK(gc[2] == 0.0);
}

TEST_CASE("negating a numeric field keeps the numeric backing", "[field]") {
    const scalar_field f = scalar_field::numeric(
        1, [](const vec& x) { return std::tanh(x[0]); });
    const scalar_field n = -f;
    CHECK_FALSE(n.is_expression());
    CHECK(n.value({0.3}) == -std::tanh(0.3));
}

TEST_CASE("vector field kinds evaluate by their closed forms", "[field]") {
    const vector_field z = vector_field::zero(3);
    CHECK(z.kind() == field_kind::zero);
    CHECK(z.value({1.0, 2.0, 3.0}) == vec{0.0, 0.0, 0.0});

    const vector_field t = vector_field::translation({1.0, -2.0});
    CHECK(t.kind() == field_kind::translation);
    CHECK(t.value({5.0, 5.0}) == vec{1.0, -2.0});
    CHECK(t.direction() == vec{1.0, -2.0});

    const matrix a = {{0.0, -1.0}, {1.0, 0.0}};
    const vector_field lin = vector_field::linear(a);
    CHECK(lin.kind() == field_kind::linear);
    // F(x) = A*x with columns acting on coordinates.
    CHECK(lin.value({1.0, 0.0}) == vec{0.0, 1.0});
    CHECK(lin.value({0.0, 1.0}) == vec{-1.0, 0.0});

    const vector_field e = vector_field::expression(2, {"-x2", "x1"});
    CHECK(e.kind() == field_kind::expression);
    CHECK(e.value({1.0, 0.0}) == vec{0.0, 1.0});
    CHECK(e.components().size() == 2);
}

TEST_CASE("vector field accessors guard their kind", "[field]") {
    const vector_field z = vector_field::zero(2);
    CHECK_THROWS_AS(z.direction(), domain_error);
    CHECK_THROWS_AS(z.coefficient(), domain_error);
    CHECK_THROWS_AS(z.components(), domain_error);
    CHECK_THROWS_AS(vector_field::translation({}), dimension_error);
    CHECK_THROWS_AS(vector_field::linear(matrix(2, 3, 0.0)), dimension_error);
    CHECK_THROWS_AS(vector_field::expression(2, {"x1"}), dimension_error);
}

TEST_CASE("dimension mismatches are rejected at evaluation", "[field]") {
    const scalar_field f(2, "x1 + x2");
    CHECK_THROWS_AS(f.value({1.0}), dimension_error);
    CHECK_THROWS_AS(f.gradient({1.0, 2.0, 3.0}), dimension_error);
    const vector_field t = vector_field::translation({1.0, 0.0});
    CHECK_THROWS_AS(t.value({1.0}), dimension_error);
    // The string constructor validates while parsing; the tree constructor
    // validates the finished tree.
    CHECK_THROWS_AS(scalar_field(1, "x2"), parse_error);
    CHECK_THROWS_AS(scalar_field(1, parse_expr("x2", 2)), dimension_error);
}

TEST_CASE("directional derivative of a rotation invariant vanishes", "[field]") {
    // F = (-x2, x1) rotates, f = x1^2 + x2^2 is constant along its orbits.
    const vector_field rot = vector_field::linear({{0.0, -1.0}, {1.0, 0.0}});
    const scalar_field f(2, "x1^2 + x2^2");
    rng64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const vec x = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        CHECK(std::abs(directional_derivative(f, rot, x)) <= 1e-12);
    }
    // Along the radial field the derivative is 2|x|^2.
    const vector_field rad = vector_field::linear({{1.0, 0.0}, {0.0, 1.0}});
    const vec x = {1.0, 2.0};
    CHECK(std::abs(directional_derivative(f, rad, x) - 10.0) <= 1e-12);
}
