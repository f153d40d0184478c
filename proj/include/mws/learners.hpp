#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mws/dataset.hpp"

namespace mws {

struct LinearModel {
    Vector coefficients;
    double intercept = 0.0;
    bool converged = true;  // coordinate-descent solvers flag non-convergence
    int sweeps = 0;

    Vector predict(const Matrix& X) const {
        return (X * coefficients).array() + intercept;
    }
};

// Normal equations with a 1e-10 ridge-jitter fallback when the Gram matrix is
// singular.
LinearModel fit_ols(const Matrix& X, const Vector& y);

// Closed form (X'X + alpha I)^-1 X'y on centered data.
LinearModel fit_ridge(const Matrix& X, const Vector& y, double alpha);

// Cyclic coordinate descent with soft-thresholding. Objective convention:
// (1/2n)||y - Xb||^2 + alpha * (l1_ratio ||b||_1 + (1-l1_ratio)/2 ||b||_2^2).
LinearModel fit_lasso(const Matrix& X, const Vector& y, double alpha,
                      double tol = 1e-6, int max_iter = 10000);
LinearModel fit_elasticnet(const Matrix& X, const Vector& y, double alpha,
                           double l1_ratio, double tol = 1e-6, int max_iter = 10000);

// Same solver, recording the objective value after every sweep.
LinearModel fit_elasticnet_traced(const Matrix& X, const Vector& y, double alpha,
                                  double l1_ratio, std::vector<double>* trace,
                                  double tol = 1e-6, int max_iter = 10000);

enum class KnnWeighting { kUniform, kDistance };

struct KnnModel {
    int k = 5;
    KnnWeighting weighting = KnnWeighting::kUniform;
    Matrix train_x;
    Vector train_y;
};

KnnModel fit_knn(const Matrix& X, const Vector& y, int k, KnnWeighting w);
Vector knn_predict(const KnnModel& model, const Matrix& query);

struct SvrModel {
    double c = 1.0;
    double epsilon = 0.1;
    double gamma = 1.0;
    Matrix support_vectors;
    Vector dual_coefs;  // beta_i = alpha_i - alpha_i^*, |beta_i| <= C
    double bias = 0.0;
    bool converged = true;
};

// epsilon-insensitive RBF SVR, SMO-style maximal-violating-pair optimization.
// gamma_scale=true means gamma = 1 / (d * Var(X entries)).
SvrModel fit_svr(const Matrix& X, const Vector& y, double c = 1.0,
                 double epsilon = 0.1, bool gamma_scale = true,
                 double gamma = 1.0, double tol = 1e-3);
Vector svr_predict(const SvrModel& model, const Matrix& query);

// Binary-relevance Gaussian naive Bayes for one label. Single-class training
// predicts that class everywhere; posterior ties break toward class 0.
std::vector<int> gnb_fit_predict(const Matrix& train_x, const std::vector<int>& labels,
                                 const Matrix& query_x);

// 1 - SSE/SST about mean(y_true). SST = 0: returns 0 when SSE = 0, else -inf
// (flagged through the optional output).
double r2_score(const Vector& y_true, const Vector& y_pred, bool* degenerate = nullptr);

}  // namespace mws
