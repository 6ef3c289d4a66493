#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "mlrate/numerics.hpp"
#include "oracles.hpp"

using namespace mlrate;

namespace {

DenseMatrix from_columns(const std::vector<std::vector<double>>& cols) {
    DenseMatrix m(cols[0].size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        for (std::size_t r = 0; r < cols[c].size(); ++r) m(r, c) = cols[c][r];
    }
    return m;
}

}  // namespace

TEST_CASE("least_squares solves the identity system exactly") {
    DenseMatrix eye(3, 3);
    for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
    const std::vector<double> y{1.0, 2.0, 3.0};
    const auto res = least_squares(eye, y);
    CHECK(res.rank == 3);
    CHECK(res.coefficients[0] == doctest::Approx(1.0));
    CHECK(res.coefficients[1] == doctest::Approx(2.0));
    CHECK(res.coefficients[2] == doctest::Approx(3.0));
}

TEST_CASE("least_squares drops an exactly collinear column") {
    DenseMatrix m(2, 2, std::vector<double>{1.0, 1.0, 1.0, 1.0});
    const std::vector<double> y{2.0, 2.0};
    const auto res = least_squares(m, y);
    CHECK(res.rank == 1);
    const int zeros = (res.coefficients[0] == 0.0) + (res.coefficients[1] == 0.0);
    CHECK(zeros == 1);
    // Fit is still exact: retained column carries the whole solution.
    CHECK(res.coefficients[0] + res.coefficients[1] == doctest::Approx(2.0));
}

TEST_CASE("least_squares recovers a hand-solved line fit") {
    // Normal equations for intercept/slope on x = 0..3, y = 1,3,5,7 give (1, 2).
    DenseMatrix m(4, 2);
    const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
    for (std::size_t i = 0; i < 4; ++i) {
        m(i, 0) = 1.0;
        m(i, 1) = static_cast<double>(i);
    }
    const auto res = least_squares(m, y);
    CHECK(res.rank == 2);
    CHECK(res.coefficients[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("least_squares rejects bad input") {
    DenseMatrix m(2, 3);
    CHECK_THROWS_AS(least_squares(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    DenseMatrix ok(3, 2, std::vector<double>{1, 0, 0, 1, 0, 0});
    CHECK_THROWS_AS(least_squares(ok, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    DenseMatrix bad(2, 1, std::vector<double>{1.0, std::nan("")});
    CHECK_THROWS_AS(least_squares(bad, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("least_squares matches the normal-equations oracle on random problems") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 10 + gen() % 30;
        const std::size_t d = 2 + gen() % 5;
        std::vector<std::vector<double>> cols(d, std::vector<double>(n));
        std::vector<double> y(n);
        for (auto& col : cols) {
            for (auto& v : col) v = unif(gen);
        }
        for (auto& v : y) v = unif(gen);
        const auto mine = least_squares(from_columns(cols), y);
        const auto ref = oracle::normal_equations_ols(cols, y);
        REQUIRE(mine.rank == d);
        for (std::size_t j = 0; j < d; ++j) {
            CHECK(std::abs(mine.coefficients[j] - ref[j]) < 1e-8 * (1.0 + std::abs(ref[j])));
        }

        // Residuals orthogonal to every retained column.
        std::vector<double> resid(y);
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < n; ++i) resid[i] -= mine.coefficients[j] * cols[j][i];
        }
        double rnorm = 0.0;
        for (double v : resid) rnorm += v * v;
        rnorm = std::sqrt(rnorm);
        for (std::size_t j = 0; j < d; ++j) {
            double dot = 0.0, cnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += cols[j][i] * resid[i];
                cnorm += cols[j][i] * cols[j][i];
            }
            cnorm = std::sqrt(cnorm);
            CHECK(std::abs(dot) < 1e-8 * std::max(1e-30, cnorm * rnorm) + 1e-10);
        }
    }
}

TEST_CASE("normal_quantile hits known values") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(std::abs(normal_quantile(0.975) - 1.959963985) < 1e-8);
    CHECK(std::abs(normal_quantile(0.975) - oracle::normal_quantile(0.975)) < 1e-9);
    CHECK(std::abs(normal_quantile(0.005) - oracle::normal_quantile(0.005)) < 1e-9);
    CHECK(std::abs(normal_quantile(0.84) - oracle::normal_quantile(0.84)) < 1e-9);
}

TEST_CASE("normal_quantile is antisymmetric about one half") {
    for (double p : {0.975, 0.9, 0.75, 0.6, 0.999, 0.9999}) {
        CHECK(std::abs(normal_quantile(p) + normal_quantile(1.0 - p)) < 1e-12);
    }
}

TEST_CASE("normal_quantile inverts the oracle CDF on [-6, 6]") {
    for (double x = -6.0; x <= 6.0 + 1e-12; x += 0.25) {
        const double p = static_cast<double>(oracle::normal_cdf(x));
        CHECK(std::abs(normal_quantile(p) - x) < 1e-7);
    }
}

TEST_CASE("normal_quantile rejects probabilities outside (0,1)") {
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(-0.2), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(std::nan("")), std::invalid_argument);
}

TEST_CASE("sample_variance basics") {
    const std::vector<double> constant{3.5, 3.5, 3.5};
    CHECK(sample_variance(constant) == 0.0);
    const std::vector<double> two{0.0, 2.0};
    CHECK(sample_variance(two) == doctest::Approx(2.0));
    CHECK_THROWS_AS(sample_variance(std::vector<double>{1.0}), std::invalid_argument);

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v(10);
        for (auto& x : v) x = unif(gen);
        const double s = unif(gen);
        std::vector<double> scaled(v);
        for (auto& x : scaled) x *= s;
        CHECK(sample_variance(scaled) ==
              doctest::Approx(s * s * sample_variance(v)).epsilon(1e-11));
    }
}

TEST_CASE("random streams are reproducible and independent of interleaving") {
    RandomStream a(123, 5);
    RandomStream b(123, 5);
    RandomStream noise(123, 6);
    std::vector<double> va, vb;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.uniform());
        noise.uniform();
        noise.normal();
    }
    for (int i = 0; i < 100; ++i) vb.push_back(b.uniform());
    CHECK(va == vb);

    RandomStream c(124, 5);
    CHECK(c.uniform() != va[0]);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
    RandomStream s(99);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("bernoulli mean concentrates at one million draws") {
    RandomStream s(2024, 1);
    std::size_t ones = 0;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) ones += s.bernoulli(0.5);
    const double mean = static_cast<double>(ones) / static_cast<double>(n);
    CHECK(std::abs(mean - 0.5) < 0.002);  // binomial 3-sigma is ~0.0015
}

TEST_CASE("permutation contains each index exactly once") {
    RandomStream s(17, 3);
    for (std::size_t n : {1ul, 2ul, 7ul, 100ul}) {
        const auto perm = s.permutation(n);
        std::set<std::size_t> seen(perm.begin(), perm.end());
        CHECK(perm.size() == n);
        CHECK(seen.size() == n);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == n - 1);
    }
}

TEST_CASE("normal draws match moments loosely") {
    RandomStream s(5, 0);
    const auto z = s.normals(200000);
    CHECK(std::abs(sample_mean(z)) < 0.01);
    CHECK(std::abs(sample_variance(z) - 1.0) < 0.02);
}
