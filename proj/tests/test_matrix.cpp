#include <catch2/catch_amalgamated.hpp>

#include "orbitshift/matrix.hpp"
#include "orbitshift/random.hpp"

#include "oracles.hpp"

using namespace orbitshift;

TEST_CASE("det matches hand values", "[matrix]") {
    CHECK(det(matrix{{2.0, 1.0}, {1.0, 3.0}}) == 5.0);
    CHECK(det(matrix::identity(4)) == 1.0);
    CHECK(det(matrix{{3.0}}) == 3.0);
}

TEST_CASE("det of a degenerate product is exactly zero", "[matrix]") {
    const matrix a{{1.0, 0.0}, {0.0, 0.0}};
    const matrix b{{0.0, 1.0}, {0.0, 0.0}};
    CHECK(det(a * b) == 0.0);
}

TEST_CASE("det agrees with cofactor expansion on random matrices", "[matrix]") {
    rng64 rng(101);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 5));
        const matrix m = oracle::random_matrix(rng, n, n);
        const double expected = oracle::cofactor_det(m);
        CHECK(std::abs(det(m) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("det is exact on triangular matrices", "[matrix]") {
    // Lower-triangular would pick up rounding if the pivot search swapped
    // rows; the diagonal-product fast path keeps it exact.
    CHECK(det(matrix{{1.0, 0.0}, {5.0, 3.0}}) == 3.0);
    CHECK(det(matrix{{2.0, 7.0}, {0.0, 4.0}}) == 8.0);
    CHECK(det(matrix{{0.1, 0.0, 0.0}, {9.0, 0.3, 0.0}, {4.0, 5.0, 0.7}}) ==
          0.1 * 0.3 * 0.7);
}

TEST_CASE("det requires a square matrix", "[matrix]") {
    CHECK_THROWS_AS(det(matrix(2, 3)), dimension_error);
}

TEST_CASE("matrix arithmetic basics", "[matrix]") {
    const matrix a{{1.0, 2.0}, {3.0, 4.0}};
    const matrix b{{0.0, 1.0}, {1.0, 0.0}};
    const matrix ab = a * b;
    CHECK(ab(0, 0) == 2.0);
    CHECK(ab(0, 1) == 1.0);
    CHECK(ab(1, 0) == 4.0);
    CHECK(ab(1, 1) == 3.0);

    const matrix at = transpose(a);
    CHECK(at(0, 1) == 3.0);
    CHECK(trace(a) == 5.0);
    CHECK(frobenius_norm(b) == Catch::Approx(std::sqrt(2.0)));

    const vec x{1.0, 1.0};
    const vec y = a * x;
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 7.0);

    CHECK_THROWS_AS(a * matrix(3, 2), dimension_error);
    CHECK_THROWS_AS(trace(matrix(2, 3)), dimension_error);
}

TEST_CASE("outer product and dot", "[matrix]") {
    const vec u{1.0, 2.0};
    const vec v{3.0, 4.0, 5.0};
    const matrix m = outer(u, v);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 10.0);
    CHECK(dot(u, u) == 5.0);
    CHECK_THROWS_AS(dot(u, v), dimension_error);
}
