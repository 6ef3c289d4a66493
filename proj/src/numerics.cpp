#include "mlrate/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mlrate {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("DenseMatrix: entries length must equal rows*cols");
    }
}

bool DenseMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix DenseMatrix::gather_rows(std::span<const std::size_t> row_indices) const {
    DenseMatrix out(row_indices.size(), cols_);
    for (std::size_t r = 0; r < row_indices.size(); ++r) {
        auto src = row(row_indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

DenseMatrix DenseMatrix::select_columns(std::span<const std::size_t> col_indices) const {
    DenseMatrix out(rows_, col_indices.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < col_indices.size(); ++c) {
            out(r, c) = (*this)(r, col_indices[c]);
        }
    }
    return out;
}

LeastSquaresResult least_squares(const DenseMatrix& design, std::span<const double> response) {
    const std::size_t m = design.rows();
    const std::size_t n = design.cols();
    if (n < 1 || m < n) {
        throw std::invalid_argument("least_squares: need rows >= cols >= 1");
    }
    if (response.size() != m) {
        throw std::invalid_argument("least_squares: response length must equal design rows");
    }
    if (!design.all_finite()) {
        throw std::invalid_argument("least_squares: non-finite design entry");
    }
    for (double v : response) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("least_squares: non-finite response entry");
        }
    }

    // Working copies: a is column-pivoted and overwritten by the factorization,
    // b accumulates Q^T * response.
    DenseMatrix a = design;
    std::vector<double> b(response.begin(), response.end());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> r_diag(n, 0.0);
    std::vector<double> v(m);

    std::size_t steps = 0;
    for (std::size_t k = 0; k < n; ++k) {
        // Pivot: remaining column with the largest subcolumn norm, lowest index on ties.
        std::size_t best = k;
        double best_norm2 = -1.0;
        for (std::size_t j = k; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += a(i, j) * a(i, j);
            if (s > best_norm2) {
                best_norm2 = s;
                best = j;
            }
        }
        if (best != k) {
            for (std::size_t i = 0; i < m; ++i) std::swap(a(i, k), a(i, best));
            std::swap(perm[k], perm[best]);
        }
        const double normx = std::sqrt(std::max(best_norm2, 0.0));
        r_diag[k] = normx;
        if (normx == 0.0) break;  // all remaining columns are zero
        ++steps;

        const double alpha = a(k, k) >= 0.0 ? -normx : normx;
        for (std::size_t i = k; i < m; ++i) v[i] = a(i, k);
        v[k] -= alpha;
        const double vtv = -2.0 * alpha * v[k];  // == v'v since |x| = |alpha|
        a(k, k) = alpha;
        if (vtv > 0.0) {
            for (std::size_t j = k + 1; j < n; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < m; ++i) dot += v[i] * a(i, j);
                const double c = 2.0 * dot / vtv;
                for (std::size_t i = k; i < m; ++i) a(i, j) -= c * v[i];
            }
            double dot = 0.0;
            for (std::size_t i = k; i < m; ++i) dot += v[i] * b[i];
            const double c = 2.0 * dot / vtv;
            for (std::size_t i = k; i < m; ++i) b[i] -= c * v[i];
        }
    }

    // Column pivoting yields a non-increasing |R_kk| sequence; rank ends at the
    // first pivot below the relative tolerance.
    const double pivot0 = steps > 0 ? std::abs(r_diag[0]) : 0.0;
    std::size_t rank = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        if (std::abs(r_diag[k]) < kRankRelTol * pivot0 || r_diag[k] == 0.0) break;
        ++rank;
    }

    LeastSquaresResult result;
    result.coefficients.assign(n, 0.0);
    result.column_retained.assign(n, false);
    result.rank = rank;
    if (rank == 0) return result;

    std::vector<double> w(rank, 0.0);
    for (std::size_t ki = rank; ki-- > 0;) {
        double s = b[ki];
        for (std::size_t j = ki + 1; j < rank; ++j) s -= a(ki, j) * w[j];
        w[ki] = s / a(ki, ki);
    }
    for (std::size_t k = 0; k < rank; ++k) {
        result.coefficients[perm[k]] = w[k];
        result.column_retained[perm[k]] = true;
    }
    return result;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
    }

    // Acklam's rational approximation, then one Halley step against the CDF.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    if (std::abs(x) < 37.0) {
        const double e = normal_cdf(x) - p;
        const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
        x = x - u / (1.0 + x * u / 2.0);
    }
    return x;
}

double sample_mean(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("sample_mean: empty input");
    }
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) {
        throw std::invalid_argument("sample_variance: need at least 2 values");
    }
    const double m = sample_mean(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(values.size() - 1);
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("sample_correlation: need equal lengths >= 2");
    }
    const double ma = sample_mean(a);
    const double mb = sample_mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    key_ = mix64(seed + kGolden) ^ mix64(stream_id + 0xD1B54A32D192ED03ULL);
}

std::uint64_t RandomStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform() {
    const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    return normal_quantile(uniform());
}

bool RandomStream::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bernoulli: p must lie in [0,1]");
    }
    return uniform() < p;
}

std::uint64_t RandomStream::bounded(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("bounded: n must be positive");
    }
    // Reject the low sliver so the remaining range is a multiple of n.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

std::vector<double> RandomStream::uniforms(std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = uniform();
    return out;
}

std::vector<double> RandomStream::normals(std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = normal();
    return out;
}

std::vector<int> RandomStream::bernoullis(double p, std::size_t count) {
    std::vector<int> out(count);
    for (auto& v : out) v = bernoulli(p) ? 1 : 0;
    return out;
}

std::vector<std::size_t> RandomStream::permutation(std::size_t n) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(i));
        std::swap(out[i - 1], out[j]);
    }
    return out;
}

}  // namespace mlrate
