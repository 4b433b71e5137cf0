#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "orbitshift/char_poly.hpp"
#include "orbitshift/random.hpp"

#include "oracles.hpp"

using namespace orbitshift;

namespace {

// Independent route to the coefficients: sample det(M - lambda E) at
// degree+1 points and solve the Vandermonde system.
poly_coeffs interpolated_char_poly(const matrix& m) {
    const std::size_t n = m.rows();
    const std::size_t pts = n + 1;
    matrix vander(pts, pts);
    vec rhs(pts);
    for (std::size_t k = 0; k < pts; ++k) {
        const double lambda = -2.0 + 4.0 * static_cast<double>(k) /
                                         static_cast<double>(pts - 1);
        double p = 1.0;
        for (std::size_t j = 0; j < pts; ++j) {
            vander(k, j) = p;
            p *= lambda;
        }
        matrix shifted = m;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lambda;
        rhs[k] = oracle::cofactor_det(shifted);
    }
    return {oracle::solve(vander, rhs)};
}

}  // namespace

TEST_CASE("char_poly hand values", "[charpoly]") {
    // Zero 2x2: |M - lambda E| = lambda^2.
    const poly_coeffs z = char_poly(matrix(2, 2, 0.0));
    CHECK(z.coeffs == std::vector<double>{0.0, 0.0, 1.0});

    // Nilpotent shear has the same characteristic polynomial.
    const poly_coeffs s = char_poly(matrix{{0.0, 1.0}, {0.0, 0.0}});
    CHECK(s.coeffs == std::vector<double>{0.0, 0.0, 1.0});

    // diag(1,2,3): (1-l)(2-l)(3-l) = -l^3 + 6l^2 - 11l + 6.
    const poly_coeffs d = char_poly(matrix{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, 3.0}});
    REQUIRE(d.degree() == 3);
    CHECK(d[0] == Catch::Approx(6.0));
    CHECK(d[1] == Catch::Approx(-11.0));
    CHECK(d[2] == Catch::Approx(6.0));
    CHECK(d[3] == -1.0);
}

TEST_CASE("char_poly leading and constant coefficients", "[charpoly]") {
    rng64 rng(202);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 6));
        const matrix m = oracle::random_matrix(rng, n, n);
        const poly_coeffs p = char_poly(m);
        REQUIRE(p.degree() == n);
        // Leading coefficient is (-1)^n by construction, no roundoff.
        CHECK(p[n] == (n % 2 == 0 ? 1.0 : -1.0));
        // Constant term is det(M).
        CHECK(std::abs(p[0] - det(m)) <= 1e-9 * (1.0 + std::abs(det(m))));
    }
}

TEST_CASE("char_poly agrees with determinant interpolation", "[charpoly]") {
    rng64 rng(303);
    for (int rep = 0; rep < 10; ++rep) {
        const matrix m = oracle::random_matrix(rng, 4, 4);
        const poly_coeffs fast = char_poly(m);
        const poly_coeffs ref = interpolated_char_poly(m);
        REQUIRE(fast.coeffs.size() == ref.coeffs.size());
        for (std::size_t k = 0; k < fast.coeffs.size(); ++k)
            CHECK(std::abs(fast[k] - ref[k]) <= 1e-8);
    }
}

TEST_CASE("products in both orders share a characteristic polynomial", "[charpoly]") {
    rng64 rng(404);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 5));
        const matrix a = oracle::random_matrix(rng, n, n);
        const matrix b = oracle::random_matrix(rng, n, n);
        const poly_coeffs pab = char_poly(a * b);
        const poly_coeffs pba = char_poly(b * a);
        for (std::size_t k = 0; k <= n; ++k)
            CHECK(std::abs(pab[k] - pba[k]) <= 1e-10 * (1.0 + std::abs(pab[k])));
    }
}

TEST_CASE("degenerate pair keeps lambda^2 in both orders", "[charpoly]") {
    const matrix a{{1.0, 0.0}, {0.0, 0.0}};
    const matrix b{{0.0, 1.0}, {0.0, 0.0}};
    const poly_coeffs pab = char_poly(a * b);
    const poly_coeffs pba = char_poly(b * a);
    CHECK(pab.coeffs == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(pba.coeffs == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(verify_product_char_identity(a, b) == 0.0);
}

TEST_CASE("rectangular product identity", "[charpoly]") {
    rng64 rng(505);
    SECTION("more rows than columns") {
        for (int rep = 0; rep < 10; ++rep) {
            const matrix a = oracle::random_matrix(rng, 5, 3);
            const matrix b = oracle::random_matrix(rng, 5, 3);
            CHECK(verify_product_char_identity(a, b) <= 1e-10 *
                  (1.0 + frobenius_norm(a) * frobenius_norm(b)));
        }
    }
    SECTION("more columns than rows transposes the roles") {
        for (int rep = 0; rep < 10; ++rep) {
            const matrix a = oracle::random_matrix(rng, 2, 6);
            const matrix b = oracle::random_matrix(rng, 2, 6);
            CHECK(verify_product_char_identity(a, b) <= 1e-10 *
                  (1.0 + frobenius_norm(a) * frobenius_norm(b)));
        }
    }
    SECTION("rank-deficient inputs") {
        for (int rep = 0; rep < 10; ++rep) {
            // Rank <= 2 by construction.
            const matrix u = oracle::random_matrix(rng, 4, 2);
            const matrix v = oracle::random_matrix(rng, 2, 3);
            const matrix a = u * v;
            const matrix b = oracle::random_matrix(rng, 4, 3);
            CHECK(verify_product_char_identity(a, b) <= 1e-10 *
                  (1.0 + frobenius_norm(a) * frobenius_norm(b)));
        }
    }
    CHECK_THROWS_AS(verify_product_char_identity(matrix(2, 3), matrix(3, 2)),
                    dimension_error);
}

TEST_CASE("char_poly dimension cap", "[charpoly]") {
    CHECK_THROWS_AS(char_poly(matrix(65, 65, 0.0)), dimension_error);
    CHECK_THROWS_AS(char_poly(matrix(2, 3)), dimension_error);
}

TEST_CASE("eval_poly uses ascending coefficients", "[charpoly]") {
    const poly_coeffs p{{6.0, -11.0, 6.0, -1.0}};
    CHECK(eval_poly(p, 0.0) == 6.0);
    CHECK(eval_poly(p, 1.0) == 0.0);
    CHECK(eval_poly(p, 2.0) == 0.0);
}
