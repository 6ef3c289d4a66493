#pragma once

// Test-only reference implementations, deliberately independent of the
// library's code paths: a series/continued-fraction normal CDF, a bisection
// inverse CDF, and a normal-equations least-squares solver.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

// erf via its Maclaurin series, long double. Accurate for |z| < ~2.5.
inline long double erf_series(long double z) {
    const long double two_over_sqrt_pi = 1.12837916709551257389615890312154517L;
    long double term = z;
    long double sum = z;
    for (int n = 1; n < 300; ++n) {
        term *= -z * z / n * (2.0L * n - 1.0L) / (2.0L * n + 1.0L);
        sum += term;
        if (std::abs(term) < 1e-25L * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// erfc via the classical continued fraction (modified Lentz), for z >= 1.5.
inline long double erfc_cf(long double z) {
    const long double sqrt_pi = 1.77245385090551602729816748334114518L;
    const long double tiny = 1e-300L;
    long double f = tiny, c = f, d = 0.0L;
    for (int k = 0; k < 500; ++k) {
        const long double a = k == 0 ? 1.0L : k / 2.0L;
        const long double b = k == 0 ? z : z;
        d = b + a * d;
        if (d == 0.0L) d = tiny;
        c = b + a / c;
        if (c == 0.0L) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0L) < 1e-22L) break;
    }
    return std::exp(-z * z) / sqrt_pi * f;
}

// Standard normal CDF combining the two expansions.
inline long double normal_cdf(long double x) {
    const long double sqrt2 = 1.41421356237309504880168872420969808L;
    const long double z = std::abs(x) / sqrt2;
    long double tail;  // P(|X| side beyond |x|)
    if (z >= 1.5L) {
        tail = 0.5L * erfc_cf(z);
    } else {
        tail = 0.5L * (1.0L - erf_series(z));
    }
    return x >= 0.0L ? 1.0L - tail : tail;
}

// Inverse normal CDF by bisection on the oracle CDF.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("oracle quantile: bad p");
    long double lo = -40.0L, hi = 40.0L;
    for (int it = 0; it < 200; ++it) {
        const long double mid = (lo + hi) / 2.0L;
        if (normal_cdf(mid) < static_cast<long double>(p)) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15L) break;
    }
    return static_cast<double>((lo + hi) / 2.0L);
}

// Least squares via the normal equations, Gaussian elimination with partial
// pivoting in long double. Requires a full-rank design.
inline std::vector<double> normal_equations_ols(const std::vector<std::vector<double>>& columns,
                                                std::span<const double> y) {
    const std::size_t d = columns.size();
    const std::size_t n = y.size();
    std::vector<std::vector<long double>> a(d, std::vector<long double>(d + 1, 0.0L));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            long double s = 0.0L;
            for (std::size_t r = 0; r < n; ++r) {
                s += static_cast<long double>(columns[i][r]) * columns[j][r];
            }
            a[i][j] = s;
        }
        long double s = 0.0L;
        for (std::size_t r = 0; r < n; ++r) {
            s += static_cast<long double>(columns[i][r]) * y[r];
        }
        a[i][d] = s;
    }
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < d; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        }
        std::swap(a[k], a[piv]);
        if (a[k][k] == 0.0L) throw std::runtime_error("oracle ols: singular system");
        for (std::size_t i = k + 1; i < d; ++i) {
            const long double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j <= d; ++j) a[i][j] -= f * a[k][j];
        }
    }
    std::vector<double> beta(d, 0.0);
    std::vector<long double> x(d, 0.0L);
    for (std::size_t k = d; k-- > 0;) {
        long double s = a[k][d];
        for (std::size_t j = k + 1; j < d; ++j) s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
        beta[k] = static_cast<double>(x[k]);
    }
    return beta;
}

}  // namespace oracle
