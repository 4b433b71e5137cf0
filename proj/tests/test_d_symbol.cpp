#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "orbitshift/d_symbol.hpp"
#include "orbitshift/random.hpp"

#include "oracles.hpp"

using namespace orbitshift;

TEST_CASE("single pair reduces to 1 + <F, A>", "[dsymbol]") {
    const vector_pair p{{{1.0, 2.0}}, {{3.0, -1.0}}};
    const d_symbol_result r = d_symbol(p);
    CHECK(r.value == Catch::Approx(2.0).margin(1e-14));
    CHECK(r.cross_residual <= 1e-14);
}

TEST_CASE("two pairs match the quadratic expansion", "[dsymbol]") {
    rng64 rng(606);
    for (int rep = 0; rep < 20; ++rep) {
        vector_pair p;
        p.f_vectors = {oracle::random_vec(rng, 3), oracle::random_vec(rng, 3)};
        p.a_vectors = {oracle::random_vec(rng, 3), oracle::random_vec(rng, 3)};
        const double f1a1 = dot(p.f_vectors[0], p.a_vectors[0]);
        const double f2a2 = dot(p.f_vectors[1], p.a_vectors[1]);
        const double f1a2 = dot(p.f_vectors[0], p.a_vectors[1]);
        const double f2a1 = dot(p.f_vectors[1], p.a_vectors[0]);
        const double expansion = 1.0 + f1a1 + f2a2 + (f1a1 * f2a2 - f1a2 * f2a1);
        const d_symbol_result r = d_symbol(p);
        CHECK(std::abs(r.value - expansion) <= 1e-10);
    }
}

TEST_CASE("both determinant forms agree", "[dsymbol]") {
    rng64 rng(707);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 5));
        const std::size_t m = static_cast<std::size_t>(rng.uniform_int(1, 7));
        vector_pair p;
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p.f_vectors.push_back(oracle::random_vec(rng, m));
            p.a_vectors.push_back(oracle::random_vec(rng, m));
            scale += norm(p.f_vectors.back()) * norm(p.a_vectors.back());
        }
        CHECK(d_symbol(p).cross_residual <= 1e-10 * (1.0 + scale));
    }
}

TEST_CASE("value is invariant under simultaneous reordering", "[dsymbol]") {
    rng64 rng(808);
    vector_pair p;
    for (int i = 0; i < 3; ++i) {
        p.f_vectors.push_back(oracle::random_vec(rng, 4));
        p.a_vectors.push_back(oracle::random_vec(rng, 4));
    }
    const double base = d_symbol(p).value;
    const std::size_t perms[][3] = {{0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& sigma : perms) {
        vector_pair q;
        for (std::size_t s : sigma) {
            q.f_vectors.push_back(p.f_vectors[s]);
            q.a_vectors.push_back(p.a_vectors[s]);
        }
        CHECK(std::abs(d_symbol(q).value - base) <= 1e-12 * (1.0 + std::abs(base)));
    }
}

TEST_CASE("gram determinant", "[dsymbol]") {
    SECTION("orthonormal vectors give exactly 1") {
        CHECK(gram_det({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}) == 1.0);
    }
    SECTION("matches the explicit inner-product determinant") {
        rng64 rng(909);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<vec> vs;
            for (int i = 0; i < 3; ++i) vs.push_back(oracle::random_vec(rng, 5));
            matrix g(3, 3);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) g(i, j) = dot(vs[i], vs[j]);
            CHECK(std::abs(gram_det(vs) - oracle::cofactor_det(g)) <= 1e-10);
        }
    }
    SECTION("dependent tuples vanish, never below roundoff") {
        rng64 rng(1010);
        for (int rep = 0; rep < 10; ++rep) {
            const vec v1 = oracle::random_vec(rng, 4);
            const vec v2 = oracle::random_vec(rng, 4);
            vec v3(4);
            for (std::size_t i = 0; i < 4; ++i) v3[i] = v1[i] + v2[i];
            const double g = gram_det({v1, v2, v3});
            CHECK(g >= -1e-12);
            CHECK(g <= 1e-10);
        }
    }
}

TEST_CASE("d_symbol validates its input", "[dsymbol]") {
    CHECK_THROWS_AS(d_symbol(vector_pair{}), dimension_error);
    CHECK_THROWS_AS(d_symbol(vector_pair{{{1.0}}, {}}), dimension_error);
    CHECK_THROWS_AS(d_symbol(vector_pair{{{1.0, 2.0}}, {{1.0}}}), dimension_error);
    CHECK_THROWS_AS(gram_det({}), dimension_error);
}
