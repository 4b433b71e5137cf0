#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "orbitshift/matrix_exp.hpp"
#include "orbitshift/random.hpp"

#include "oracles.hpp"

using namespace orbitshift;

TEST_CASE("matrix_exp at t = 0 is exactly the identity", "[matexp]") {
    rng64 rng(111);
    const matrix m = oracle::random_matrix(rng, 3, 3);
    const matrix e = matrix_exp(m, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(e(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("matrix_exp of the rotation generator", "[matexp]") {
    const matrix j{{0.0, -1.0}, {1.0, 0.0}};
    const double t = 1.5707963267948966;  // pi/2
    const matrix e = matrix_exp(j, t);
    CHECK(std::abs(e(0, 0) - 0.0) <= 1e-10);
    CHECK(std::abs(e(0, 1) - -1.0) <= 1e-10);
    CHECK(std::abs(e(1, 0) - 1.0) <= 1e-10);
    CHECK(std::abs(e(1, 1) - 0.0) <= 1e-10);
}

TEST_CASE("matrix_exp of a diagonal matrix", "[matexp]") {
    const matrix d{{0.3, 0.0}, {0.0, -1.2}};
    const matrix e = matrix_exp(d, 2.0);
    CHECK(std::abs(e(0, 0) - std::exp(0.6)) <= 1e-12 * std::exp(0.6));
    CHECK(std::abs(e(1, 1) - std::exp(-2.4)) <= 1e-12);
    CHECK(std::abs(e(0, 1)) <= 1e-15);
    CHECK(std::abs(e(1, 0)) <= 1e-15);
}

TEST_CASE("matrix_exp of a nilpotent matrix truncates", "[matexp]") {
    const matrix n{{0.0, 1.0}, {0.0, 0.0}};
    const matrix e = matrix_exp(n, 2.5);
    CHECK(std::abs(e(0, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(e(0, 1) - 2.5) <= 1e-12);
    CHECK(std::abs(e(1, 0)) <= 1e-15);
    CHECK(std::abs(e(1, 1) - 1.0) <= 1e-12);
}

TEST_CASE("det of the exponential is the exponential of the trace", "[matexp]") {
    rng64 rng(222);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 5));
        const matrix m = oracle::random_matrix(rng, n, n);
        const double t = rng.uniform(-2.0, 2.0);
        const double lhs = det(matrix_exp(m, t));
        const double rhs = std::exp(t * trace(m));
        CHECK(std::abs(lhs - rhs) <= 1e-8 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("matrix_exp group property", "[matexp]") {
    rng64 rng(333);
    const matrix m = oracle::random_matrix(rng, 4, 4);
    const matrix a = matrix_exp(m, 0.7) * matrix_exp(m, 0.4);
    const matrix b = matrix_exp(m, 1.1);
    CHECK(frobenius_norm(a - b) <= 1e-10 * (1.0 + frobenius_norm(b)));
}

TEST_CASE("matrix_exp dimension cap", "[matexp]") {
    CHECK_THROWS_AS(matrix_exp(matrix(17, 17, 0.0), 1.0), dimension_error);
    CHECK_THROWS_AS(matrix_exp(matrix(2, 3), 1.0), dimension_error);
}
