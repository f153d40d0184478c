#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mws {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A numeric regression dataset after preprocessing: no NaN/Inf, target length
// equals row count, unique column names.
struct Dataset {
    Matrix features;                        // n x d
    Vector target;                          // n
    std::vector<std::string> column_names;  // d
    std::string name;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    void validate() const;  // throws on invariant violation
};

struct PreprocessSpec {
    std::vector<std::string> drop_columns;
    // Explicit categorical columns; any column with a cell that fails numeric
    // parse is additionally treated as categorical.
    std::vector<std::string> categorical_columns;
    std::string target_column = "target";
};

// CSV ingestion: comma-separated, mandatory header, UTF-8, '.' decimal.
// Rows with any missing cell are dropped; categorical columns are one-hot
// encoded with the lexicographically first level dropped as reference.
Dataset load_csv(const std::string& path, const PreprocessSpec& spec);

// Synthetic layout: columns f0..f{d-1} then "target".
void save_csv(const Dataset& d, const std::string& path);

// Maps every feature column and the target to [0,1]; constant columns map to
// all-zeros.
Dataset minmax_normalize(const Dataset& d);
Matrix minmax_normalize(const Matrix& m);
Vector minmax_normalize(const Vector& v);

// Train-fitted min-max pipeline stage: constant columns map to zero, test
// values may land outside [0,1].
struct MinMaxParams {
    Vector lo;
    Vector range;  // hi - lo; zero replaced by 1 with lo kept
};

MinMaxParams minmax_fit(const Matrix& train);
Matrix minmax_apply(const Matrix& m, const MinMaxParams& p);

struct ScalerParams {
    Vector mean;
    Vector scale;  // population stdev; zero-variance columns get scale 1
};

// Per-column mean 0 / population-stdev 1 fit on `train`; `apply_to` is
// transformed with train's parameters.
std::pair<Matrix, ScalerParams> standardize_fit(const Matrix& train);
Matrix standardize_apply(const Matrix& m, const ScalerParams& p);

struct TargetScaler {
    double mean = 0.0;
    double scale = 1.0;
};

TargetScaler standardize_target_fit(const Vector& y);
Vector standardize_target_apply(const Vector& y, const TargetScaler& s);
Vector standardize_target_invert(const Vector& y, const TargetScaler& s);

}  // namespace mws
