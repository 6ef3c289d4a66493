#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mlrate/numerics.hpp"

namespace mlrate {

// One randomized experiment: outcome Y, binary treatment T, covariates X,
// aligned by row index. Immutable after construction.
struct ExperimentDataset {
    std::size_t n = 0;
    std::vector<double> outcome;
    std::vector<int> treatment;
    DenseMatrix covariates;
    std::vector<std::string> column_names;  // covariate column names, one per column
};

// ExperimentDataset extended with pre-experiment history. y_pre holds the
// previous-period outcome; the optional feature matrices hold covariates
// measured one and two periods before the experiment, for the pre-period
// training mode.
struct PanelDataset {
    ExperimentDataset data;
    std::vector<double> y_pre;
    std::optional<DenseMatrix> pre_features;      // measured at t-1, used to predict t
    std::optional<DenseMatrix> pre_features_lag;  // measured at t-2, used to train
    std::vector<std::string> pre_feature_names;
};

struct Violation {
    std::string code;  // machine-readable: degenerate-arm, non-finite, ...
    std::optional<std::size_t> row;
    std::string column;
    std::string message;
};

// Generic numeric table, for model training/apply files that are not full
// experiment datasets.
struct NumericTable {
    std::vector<std::string> column_names;
    DenseMatrix values;

    std::size_t column_index(const std::string& name) const;  // throws SchemaError
    std::vector<double> column(const std::string& name) const;
};

NumericTable load_table(const std::string& path);
void write_table(const std::string& path, const NumericTable& table);

// Parse a CSV into a validated dataset. The header row must contain the named
// columns; every named cell must parse as a number; treatment must be the
// literal 0 or 1; both arms must be non-empty.
ExperimentDataset load_csv(const std::string& path, const std::string& outcome_col,
                           const std::string& treatment_col,
                           const std::vector<std::string>& feature_cols);

void write_csv(const std::string& path, const ExperimentDataset& ds,
               const std::string& outcome_col = "y", const std::string& treatment_col = "t");

// Invariant check for programmatically built datasets. Empty result means valid.
std::vector<Violation> validate(const ExperimentDataset& ds);

// Random fold assignment: a seeded permutation chopped into contiguous blocks.
// Fold sizes differ by at most one. Returns fold index per row.
std::vector<std::size_t> split_folds(std::size_t n, std::size_t k, RandomStream& stream);

}  // namespace mlrate
