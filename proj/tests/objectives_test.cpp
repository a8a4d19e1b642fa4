#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "cafl/errors.hpp"
#include "cafl/objectives.hpp"
#include "cafl/rng.hpp"
#include "cafl/spectral.hpp"

using namespace cafl;

namespace {

// Central difference on each coordinate.
Vec numeric_gradient(const ObjectiveSuite& task, int client, const Vec& x) {
    const double h = 1e-6;
    Vec g(x.size(), 0.0);
    Vec xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (task.local_loss(client, xp) - task.local_loss(client, xm)) / (2 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

Vec random_point(int p, std::uint64_t tag, double scale) {
    RngStream s(tag, StreamKind::mc_draw);
    Vec x(p);
    for (double& v : x) v = scale * s.next_gaussian();
    return x;
}

QuadraticTask two_client_oracle() {
    std::vector<Mat> q{Mat::identity(2), Mat::identity(2)};
    std::vector<Vec> b{{1.0, 0.0}, {-1.0, 0.0}};
    return QuadraticTask(std::move(q), std::move(b), 1.0, 1.0, 0.0, 1.0);
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("two symmetric clients pin down the heterogeneity constants") {
    const auto task = two_client_oracle();
    REQUIRE(task.n_clients() == 2);
    REQUIRE(task.dim() == 2);
    const auto& h = task.heterogeneity();
    CHECK(norm(h.x_star) < 1e-14);
    CHECK(h.delta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h.gamma == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(task.global_loss(h.x_star) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(norm(task.global_gradient(h.x_star)) < 1e-14);
}

TEST_CASE("generated quadratic suite meets its spectrum contract") {
    const auto task = build_quadratic_suite(12, 6, 1.0, 4.0, 5.0, 0.0, 101);
    REQUIRE(task.n_clients() == 12);
    REQUIRE(task.dim() == 6);
    for (int i = 0; i < 12; ++i) {
        const auto eig = sym_eigenvalues(task.curvature(i));
        CHECK(eig.front() <= 4.0 + 1e-9);
        CHECK(eig.back() >= 1.0 - 1e-9);
        CHECK(norm(task.local_optimum(i)) <= 5.0 + 1e-9);
    }
    // The optimum solves the stationarity condition.
    CHECK(norm(task.global_gradient(task.optimum())) < 1e-8);
    // delta and gamma follow their definitions.
    double maxdist = 0.0;
    for (int i = 0; i < 12; ++i) {
        maxdist = std::max(maxdist,
                           std::sqrt(squared_distance(task.optimum(), task.local_optimum(i))));
    }
    CHECK(task.heterogeneity().delta == doctest::Approx(4.0 * maxdist).epsilon(1e-12));
    CHECK(task.heterogeneity().gamma ==
          doctest::Approx(task.global_loss(task.optimum())).epsilon(1e-12));
    CHECK(task.heterogeneity().gamma > 0.0);
}

TEST_CASE("construction is deterministic in the seed") {
    const auto a = build_quadratic_suite(5, 4, 1.0, 3.0, 2.0, 0.1, 7);
    const auto b = build_quadratic_suite(5, 4, 1.0, 3.0, 2.0, 0.1, 7);
    const auto c = build_quadratic_suite(5, 4, 1.0, 3.0, 2.0, 0.1, 8);
    CHECK(a.optimum() == b.optimum());
    bool any_diff = false;
    for (int i = 0; i < 5 && !any_diff; ++i)
        any_diff = !(a.local_optimum(i) == c.local_optimum(i));
    CHECK(any_diff);
}

TEST_CASE("analytic gradients match finite differences") {
    const auto task = build_quadratic_suite(4, 5, 1.0, 4.0, 3.0, 0.0, 11);
    for (int i = 0; i < 4; ++i) {
        const Vec x = random_point(5, 40 + i, 2.0);
        const Vec g = task.gradient(i, x);
        const Vec fd = numeric_gradient(task, i, x);
        for (int j = 0; j < 5; ++j) CHECK(g[j] == doctest::Approx(fd[j]).epsilon(5e-6));
    }
}

TEST_CASE("stochastic gradient is unbiased with calibrated noise power") {
    const auto task = build_quadratic_suite(3, 4, 1.0, 2.0, 1.0, 0.7, 13);
    const Vec x = random_point(4, 99, 1.0);
    const Vec exact = task.gradient(1, x);
    Vec mean(4, 0.0);
    double power = 0.0;
    const int draws = 60000;
    RngStream noise(5, StreamKind::sgd_noise, 0, 1);
    for (int d = 0; d < draws; ++d) {
        const Vec g = task.stochastic_gradient(1, x, noise);
        Vec diff = g;
        axpy(-1.0, exact, diff);
        power += dot(diff, diff);
        axpy(1.0 / draws, g, mean);
    }
    power /= draws;
    for (int j = 0; j < 4; ++j) CHECK(mean[j] == doctest::Approx(exact[j]).epsilon(0.02));
    CHECK(power == doctest::Approx(0.49).epsilon(0.05));  // rho^2 = 0.49
    // rho = 0 must reproduce the exact gradient bitwise.
    const auto clean = build_quadratic_suite(3, 4, 1.0, 2.0, 1.0, 0.0, 13);
    RngStream unused(5, StreamKind::sgd_noise, 0, 2);
    CHECK(clean.stochastic_gradient(1, x, unused) == clean.gradient(1, x));
}

TEST_CASE("quadratic suites round-trip through the text format") {
    const auto task = build_quadratic_suite(6, 5, 1.0, 4.0, 6.0, 0.5, 101);
    std::ostringstream out;
    task.save(out);
    std::istringstream in(out.str());
    const auto loaded = QuadraticTask::load(in, "roundtrip");
    REQUIRE(loaded.n_clients() == 6);
    REQUIRE(loaded.dim() == 5);
    CHECK(loaded.mu() == task.mu());
    CHECK(loaded.beta() == task.beta());
    CHECK(loaded.rho() == task.rho());
    CHECK(loaded.optimum() == task.optimum());
    for (int i = 0; i < 6; ++i) {
        CHECK(loaded.curvature(i) == task.curvature(i));
        CHECK(loaded.local_optimum(i) == task.local_optimum(i));
    }
    const Vec x = random_point(5, 123, 1.5);
    for (int i = 0; i < 6; ++i) {
        CHECK(loaded.local_loss(i, x) == task.local_loss(i, x));
    }
}

TEST_CASE("malformed suite files are rejected with line numbers") {
    const auto expect_error = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(QuadraticTask::load(in, "bad"), ConfigError);
    };
    expect_error("");
    expect_error("not_the_format\n");
    expect_error("quadratic_suite_v1\nn 2 dim oops\n");
    expect_error("quadratic_suite_v1\nn 2 dim 2\nmu 1 beta 1 rho 0 spread 1\nclient 0\n1 0\n");
}

TEST_CASE("logistic suite meets the smoothness contract") {
    const auto task = build_logistic_suite(6, 4, 12, 4, 0.1, 0.0, 55);
    REQUIRE(task.n_clients() == 6);
    REQUIRE(task.dim() == 4);
    CHECK(task.mu() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(task.beta() > task.mu());
    CHECK(norm(task.global_gradient(task.optimum())) < 1e-9);
    CHECK(task.heterogeneity().delta > 0.0);
    CHECK(task.heterogeneity().gamma > 0.0);
    for (int i = 0; i < 6; ++i) {
        const Vec x = random_point(4, 70 + i, 0.5);
        const Vec g = task.gradient(i, x);
        const Vec fd = numeric_gradient(task, i, x);
        for (int j = 0; j < 4; ++j) {
            CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("gradient diversity holds at the optimum and beyond") {
    const auto task = build_quadratic_suite(10, 6, 1.0, 4.0, 6.0, 0.0, 101);
    std::vector<Vec> points{task.optimum()};
    for (int k = 0; k < 20; ++k) points.push_back(random_point(6, 200 + k, 3.0));
    const auto rep = gradient_diversity_check(task, points);
    CHECK(rep.points_checked == 21);
    CHECK(rep.violations == 0);
    CHECK(rep.min_slack >= 0.0);
}

}  // TEST_SUITE
