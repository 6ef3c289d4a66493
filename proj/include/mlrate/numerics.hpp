#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mlrate {

// Dense row-major matrix of doubles. Values are filled during construction
// and treated as immutable afterwards; shared read-only across threads.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& entries() const { return data_; }

    bool all_finite() const;

    // New matrix containing the given rows, in the given order.
    DenseMatrix gather_rows(std::span<const std::size_t> row_indices) const;
    // New matrix containing the given columns, in the given order.
    DenseMatrix select_columns(std::span<const std::size_t> col_indices) const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct LeastSquaresResult {
    std::vector<double> coefficients;  // one per design column; dropped columns get 0
    std::size_t rank = 0;
    std::vector<bool> column_retained;
};

// Minimum-residual solution of design * x = response via column-pivoted
// Householder QR. Columns whose pivot falls below 1e-10 times the largest
// pivot are dropped from the solve and report coefficient 0.
LeastSquaresResult least_squares(const DenseMatrix& design, std::span<const double> response);

// Relative pivot threshold used by least_squares for rank detection.
inline constexpr double kRankRelTol = 1e-10;

// Inverse standard normal CDF, absolute error below 1e-9 on (0,1).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

double sample_mean(std::span<const double> values);

// Unbiased sample variance, divisor n-1. Requires length >= 2.
double sample_variance(std::span<const double> values);

// Pearson correlation; 0 when either argument has zero variance.
double sample_correlation(std::span<const double> a, std::span<const double> b);

// Counter-based deterministic random stream. A (seed, stream_id) pair fully
// determines the draw sequence, independent of host, thread scheduling, and
// activity on other streams. Copy a stream to replay it.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double uniform();
    // Standard normal via the inverse-CDF of a uniform draw.
    double normal();
    bool bernoulli(double p);
    // Uniform integer in [0, n), unbiased. n must be positive.
    std::uint64_t bounded(std::uint64_t n);

    std::vector<double> uniforms(std::size_t count);
    std::vector<double> normals(std::size_t count);
    std::vector<int> bernoullis(double p, std::size_t count);
    // Uniformly random permutation of 0..n-1 (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n);

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mlrate
