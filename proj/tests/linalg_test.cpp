#include <doctest.h>

#include <cmath>

#include "cafl/errors.hpp"
#include "cafl/linalg.hpp"
#include "cafl/rng.hpp"

using namespace cafl;

namespace {

Mat random_mat(int rows, int cols, std::uint64_t tag) {
    RngStream s(tag, StreamKind::mc_draw);
    Mat a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = s.next_gaussian();
    return a;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("matvec and matmul on a worked 2x3 example") {
    Mat a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    const Vec y = matvec(a, {1.0, 0.0, -1.0});
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(-2.0).epsilon(1e-15));

    Mat b(3, 2);
    b(0, 0) = 1; b(0, 1) = 0;
    b(1, 0) = 0; b(1, 1) = 1;
    b(2, 0) = 1; b(2, 1) = 1;
    const Mat c = matmul(a, b);
    CHECK(c(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(c(0, 1) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(c(1, 0) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(c(1, 1) == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("gram matrix is bitwise symmetric") {
    const Mat a = random_mat(7, 5, 11);
    const Mat g = gram(a);
    REQUIRE(g.rows() == 5);
    REQUIRE(g.cols() == 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(g(i, j) == g(j, i));
    // Against the definition.
    const Mat at_a = [&] {
        Mat t(5, 7);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 5; ++j) t(j, i) = a(i, j);
        return matmul(t, a);
    }();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(g(i, j) == doctest::Approx(at_a(i, j)).epsilon(1e-13));
}

TEST_CASE("vector helpers") {
    const Vec a{3.0, 4.0};
    const Vec b{0.0, 0.0};
    CHECK(dot(a, a) == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(norm(a) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(squared_distance(a, b) == doctest::Approx(25.0).epsilon(1e-15));
    Vec y{1.0, 1.0};
    axpy(2.0, a, y);
    CHECK(y[0] == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("cholesky_solve recovers a known solution") {
    // A = L L^T with L = [[2,0],[1,3]] -> A = [[4,2],[2,10]].
    Mat a(2, 2);
    a(0, 0) = 4; a(0, 1) = 2; a(1, 0) = 2; a(1, 1) = 10;
    const Vec want{1.0, -2.0};
    const Vec rhs = matvec(a, want);
    const Vec got = cholesky_solve(a, rhs);
    REQUIRE(got.size() == 2);
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-14));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-14));
}

TEST_CASE("cholesky_solve rejects indefinite systems") {
    Mat a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2; a(1, 0) = 2; a(1, 1) = 1;  // eigenvalues 3, -1
    CHECK_THROWS_AS(cholesky_solve(a, Vec{1.0, 1.0}), NumericalError);
}

TEST_CASE("qr_orthonormal returns an orthonormal factor") {
    const Mat a = random_mat(6, 6, 17);
    const Mat q = qr_orthonormal(a);
    REQUIRE(q.rows() == 6);
    REQUIRE(q.cols() == 6);
    const Mat qtq = gram(q);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(qtq(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));

    // R = Q^T A must be upper triangular with nonnegative diagonal, which
    // pins the factorization down uniquely.
    Mat qt(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) qt(i, j) = q(j, i);
    const Mat r = matmul(qt, a);
    for (int i = 0; i < 6; ++i) {
        CHECK(r(i, i) >= -1e-12);
        for (int j = 0; j < i; ++j) CHECK(std::abs(r(i, j)) < 1e-12);
    }
}

TEST_CASE("size mismatches are rejected") {
    CHECK_THROWS_AS(matvec(Mat(2, 3), Vec{1.0, 2.0}), InvariantViolation);
    CHECK_THROWS_AS(dot(Vec{1.0}, Vec{1.0, 2.0}), InvariantViolation);
    CHECK_THROWS_AS(matmul(Mat(2, 3), Mat(2, 3)), InvariantViolation);
}

}  // TEST_SUITE
