#include "mws/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mws {

namespace {

struct Centered {
    Matrix x;
    Vector y;
    Vector x_mean;
    double y_mean;
};

Centered center(const Matrix& X, const Vector& y) {
    Centered c;
    c.x_mean = X.colwise().mean();
    c.y_mean = y.mean();
    c.x = X.rowwise() - c.x_mean.transpose();
    c.y = y.array() - c.y_mean;
    return c;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

LinearModel coordinate_descent(const Matrix& X, const Vector& y, double alpha,
                               double l1_ratio, double tol, int max_iter,
                               std::vector<double>* objective_trace) {
    if (alpha <= 0.0) throw std::invalid_argument("coordinate descent: alpha > 0");
    const auto c = center(X, y);
    const Eigen::Index n = X.rows(), d = X.cols();
    const double dn = static_cast<double>(n);
    const double l1 = alpha * l1_ratio;
    const double l2 = alpha * (1.0 - l1_ratio);

    Vector col_sq(d);
    for (Eigen::Index j = 0; j < d; ++j) col_sq(j) = c.x.col(j).squaredNorm() / dn;

    Vector beta = Vector::Zero(d);
    Vector r = c.y;  // residual y_c - Xc beta

    auto objective = [&]() {
        return r.squaredNorm() / (2.0 * dn) + l1 * beta.array().abs().sum() +
               0.5 * l2 * beta.squaredNorm();
    };
    if (objective_trace) objective_trace->push_back(objective());

    LinearModel m;
    m.converged = false;
    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (col_sq(j) == 0.0) continue;
            const double old = beta(j);
            const double rho = c.x.col(j).dot(r) / dn + col_sq(j) * old;
            const double next = soft_threshold(rho, l1) / (col_sq(j) + l2);
            if (next != old) {
                r += c.x.col(j) * (old - next);
                beta(j) = next;
                max_change = std::max(max_change, std::fabs(next - old));
            }
        }
        m.sweeps = sweep + 1;
        if (objective_trace) objective_trace->push_back(objective());
        if (max_change < tol) {
            m.converged = true;
            break;
        }
    }
    m.coefficients = beta;
    m.intercept = c.y_mean - beta.dot(c.x_mean);
    return m;
}

}  // namespace

LinearModel fit_ols(const Matrix& X, const Vector& y) {
    if (X.rows() < 1 || X.rows() != y.size())
        throw std::invalid_argument("fit_ols: shape mismatch");
    const auto c = center(X, y);
    const Matrix gram = c.x.transpose() * c.x;
    const Vector rhs = c.x.transpose() * c.y;

    Vector w = gram.ldlt().solve(rhs);
    const double ref = std::max(1.0, rhs.norm());
    if (!w.allFinite() || (gram * w - rhs).norm() > 1e-8 * ref) {
        // Singular Gram matrix: ridge jitter keeps the solve near-exact.
        Matrix jittered = gram;
        jittered.diagonal().array() += 1e-10;
        w = jittered.ldlt().solve(rhs);
    }
    LinearModel m;
    m.coefficients = w;
    m.intercept = c.y_mean - w.dot(c.x_mean);
    return m;
}

LinearModel fit_ridge(const Matrix& X, const Vector& y, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("fit_ridge: alpha > 0");
    const auto c = center(X, y);
    Matrix gram = c.x.transpose() * c.x;
    gram.diagonal().array() += alpha;
    const Vector w = gram.ldlt().solve(c.x.transpose() * c.y);
    LinearModel m;
    m.coefficients = w;
    m.intercept = c.y_mean - w.dot(c.x_mean);
    return m;
}

LinearModel fit_lasso(const Matrix& X, const Vector& y, double alpha, double tol,
                      int max_iter) {
    return coordinate_descent(X, y, alpha, 1.0, tol, max_iter, nullptr);
}

LinearModel fit_elasticnet(const Matrix& X, const Vector& y, double alpha,
                           double l1_ratio, double tol, int max_iter) {
    if (l1_ratio <= 0.0 || l1_ratio > 1.0)
        throw std::invalid_argument("fit_elasticnet: l1_ratio in (0, 1]");
    return coordinate_descent(X, y, alpha, l1_ratio, tol, max_iter, nullptr);
}

LinearModel fit_elasticnet_traced(const Matrix& X, const Vector& y, double alpha,
                                  double l1_ratio, std::vector<double>* trace,
                                  double tol, int max_iter) {
    return coordinate_descent(X, y, alpha, l1_ratio, tol, max_iter, trace);
}

KnnModel fit_knn(const Matrix& X, const Vector& y, int k, KnnWeighting w) {
    if (k < 1 || k > X.rows())
        throw std::invalid_argument("fit_knn: need 1 <= k <= n_train");
    return KnnModel{k, w, X, y};
}

Vector knn_predict(const KnnModel& model, const Matrix& query) {
    const Eigen::Index n = model.train_x.rows();
    Vector out(query.rows());
    std::vector<std::pair<double, int>> dist(static_cast<size_t>(n));
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
        for (Eigen::Index i = 0; i < n; ++i)
            dist[static_cast<size_t>(i)] = {
                (model.train_x.row(i) - query.row(q)).norm(), static_cast<int>(i)};
        // Ties in distance break toward the lower training-row index.
        std::partial_sort(dist.begin(), dist.begin() + model.k, dist.end());
        if (model.weighting == KnnWeighting::kUniform) {
            double sum = 0.0;
            for (int t = 0; t < model.k; ++t)
                sum += model.train_y(dist[static_cast<size_t>(t)].second);
            out(q) = sum / model.k;
        } else {
            // Zero-distance neighbors share full weight equally.
            int exact = 0;
            double exact_sum = 0.0;
            for (int t = 0; t < model.k; ++t) {
                if (dist[static_cast<size_t>(t)].first == 0.0) {
                    ++exact;
                    exact_sum += model.train_y(dist[static_cast<size_t>(t)].second);
                }
            }
            if (exact > 0) {
                out(q) = exact_sum / exact;
            } else {
                double wsum = 0.0, vsum = 0.0;
                for (int t = 0; t < model.k; ++t) {
                    const double w = 1.0 / dist[static_cast<size_t>(t)].first;
                    wsum += w;
                    vsum += w * model.train_y(dist[static_cast<size_t>(t)].second);
                }
                out(q) = vsum / wsum;
            }
        }
    }
    return out;
}

namespace {

Matrix rbf_kernel(const Matrix& A, const Matrix& B, double gamma) {
    Matrix K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j)
            K(i, j) = std::exp(-gamma * (A.row(i) - B.row(j)).squaredNorm());
    return K;
}

}  // namespace

SvrModel fit_svr(const Matrix& X, const Vector& y, double c, double epsilon,
                 bool gamma_scale, double gamma, double tol) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw std::invalid_argument("fit_svr: need n >= 2");
    if (c <= 0.0 || epsilon < 0.0) throw std::invalid_argument("fit_svr: bad C/epsilon");

    SvrModel model;
    model.c = c;
    model.epsilon = epsilon;
    if (gamma_scale) {
        const double mean = X.mean();
        const double var = (X.array() - mean).square().sum() /
                           static_cast<double>(X.size());
        model.gamma = var > 0.0 ? 1.0 / (static_cast<double>(X.cols()) * var) : 1.0;
    } else {
        if (gamma <= 0.0) throw std::invalid_argument("fit_svr: gamma > 0");
        model.gamma = gamma;
    }

    const Matrix K = rbf_kernel(X, X, model.gamma);

    // SMO on the 2n-variable dual: t[p] = alpha_i for p < n, alpha_i^* for
    // p >= n; sign s_p = +1 / -1; beta_i = t[i] - t[i+n].
    const Eigen::Index N2 = 2 * n;
    auto idx = [n](Eigen::Index p) { return p < n ? p : p - n; };
    auto sgn = [n](Eigen::Index p) { return p < n ? 1.0 : -1.0; };

    Vector t = Vector::Zero(N2);
    Vector grad(N2);  // G_p = (Qt)_p + p_p; starts at the linear term
    for (Eigen::Index p = 0; p < N2; ++p) grad(p) = epsilon - sgn(p) * y(idx(p));

    const long max_iter = 200L * static_cast<long>(n);
    model.converged = false;
    long iter = 0;
    for (; iter < max_iter; ++iter) {
        // Maximal violating pair.
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        Eigen::Index pi = -1, pj = -1;
        for (Eigen::Index p = 0; p < N2; ++p) {
            const double s = sgn(p);
            const double v = -s * grad(p);
            const bool in_up = (s > 0 && t(p) < c) || (s < 0 && t(p) > 0);
            const bool in_low = (s > 0 && t(p) > 0) || (s < 0 && t(p) < c);
            if (in_up && v > m_up) {
                m_up = v;
                pi = p;
            }
            if (in_low && v < m_low) {
                m_low = v;
                pj = p;
            }
        }
        if (pi < 0 || pj < 0 || m_up - m_low < tol) {
            model.converged = true;
            break;
        }

        const Eigen::Index i = idx(pi), j = idx(pj);
        const double si = sgn(pi), sj = sgn(pj);
        const double eta = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), 1e-12);
        // t_pi moves by si*lambda, t_pj by -sj*lambda (keeps sum s_p t_p).
        double lambda = -(si * grad(pi) - sj * grad(pj)) / eta;
        auto bound = [&](double s, double tv) {
            // admissible lambda range from 0 <= tv + s*lambda <= C
            return s > 0 ? std::pair<double, double>{-tv, c - tv}
                         : std::pair<double, double>{tv - c, tv};
        };
        const auto bi = bound(si, t(pi));
        const auto bj = bound(-sj, t(pj));
        lambda = std::clamp(lambda, std::max(bi.first, bj.first),
                            std::min(bi.second, bj.second));
        if (lambda == 0.0) {  // numerically stuck pair
            model.converged = true;
            break;
        }
        const double dti = si * lambda, dtj = -sj * lambda;
        t(pi) += dti;
        t(pj) += dtj;
        for (Eigen::Index p = 0; p < N2; ++p) {
            const double s = sgn(p);
            grad(p) += s * si * K(idx(p), i) * dti + s * sj * K(idx(p), j) * dtj;
        }
    }

    // Bias from the KKT band midpoint at the final iterate.
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (Eigen::Index p = 0; p < N2; ++p) {
        const double s = sgn(p);
        const double v = -s * grad(p);
        if (((s > 0 && t(p) < c) || (s < 0 && t(p) > 0)) && v > m_up) m_up = v;
        if (((s > 0 && t(p) > 0) || (s < 0 && t(p) < c)) && v < m_low) m_low = v;
    }
    model.bias = 0.5 * (m_up + m_low);

    Vector beta = t.head(n) - t.tail(n);
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::fabs(beta(i)) > 1e-12) sv.push_back(i);
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
    for (size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
        model.dual_coefs(static_cast<Eigen::Index>(k)) = beta(sv[k]);
    }
    return model;
}

Vector svr_predict(const SvrModel& model, const Matrix& query) {
    if (model.support_vectors.rows() == 0)
        return Vector::Constant(query.rows(), model.bias);
    const Matrix K = rbf_kernel(query, model.support_vectors, model.gamma);
    return (K * model.dual_coefs).array() + model.bias;
}

std::vector<int> gnb_fit_predict(const Matrix& train_x, const std::vector<int>& labels,
                                 const Matrix& query_x) {
    const Eigen::Index n = train_x.rows(), d = train_x.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw std::invalid_argument("gnb_fit_predict: label count mismatch");

    int n1 = 0;
    for (int l : labels) n1 += (l != 0);
    const int n0 = static_cast<int>(n) - n1;
    if (n0 == 0 || n1 == 0) {
        // Single-class training set predicts that class everywhere.
        return std::vector<int>(static_cast<size_t>(query_x.rows()), n1 > 0 ? 1 : 0);
    }

    // Variance smoothing relative to the largest overall feature variance.
    double max_var = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double mu = train_x.col(j).mean();
        max_var = std::max(max_var, (train_x.col(j).array() - mu).square().sum() /
                                        static_cast<double>(n));
    }
    const double smoothing = 1e-9 * std::max(max_var, 1e-300);

    Matrix mean(2, d);
    Matrix var(2, d);
    mean.setZero();
    var.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
        mean.row(labels[static_cast<size_t>(i)] != 0 ? 1 : 0) += train_x.row(i);
    mean.row(0) /= n0;
    mean.row(1) /= n1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int cls = labels[static_cast<size_t>(i)] != 0 ? 1 : 0;
        var.row(cls) += (train_x.row(i) - mean.row(cls)).array().square().matrix();
    }
    var.row(0) /= n0;
    var.row(1) /= n1;
    var.array() += smoothing;

    const double log_prior0 = std::log(static_cast<double>(n0) / n);
    const double log_prior1 = std::log(static_cast<double>(n1) / n);
    const double log2pi = std::log(2.0 * 3.14159265358979323846);

    std::vector<int> out(static_cast<size_t>(query_x.rows()));
    for (Eigen::Index q = 0; q < query_x.rows(); ++q) {
        double lp0 = log_prior0, lp1 = log_prior1;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double x = query_x(q, j);
            lp0 += -0.5 * (log2pi + std::log(var(0, j))) -
                   0.5 * (x - mean(0, j)) * (x - mean(0, j)) / var(0, j);
            lp1 += -0.5 * (log2pi + std::log(var(1, j))) -
                   0.5 * (x - mean(1, j)) * (x - mean(1, j)) / var(1, j);
        }
        // Ties break toward class 0.
        out[static_cast<size_t>(q)] = lp1 > lp0 ? 1 : 0;
    }
    return out;
}

double r2_score(const Vector& y_true, const Vector& y_pred, bool* degenerate) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2)
        throw std::invalid_argument("r2_score: need equal lengths >= 2");
    const double mean = y_true.mean();
    const double sst = (y_true.array() - mean).square().sum();
    const double sse = (y_true - y_pred).squaredNorm();
    if (degenerate) *degenerate = false;
    if (sst == 0.0) {
        if (sse == 0.0) return 0.0;
        if (degenerate) *degenerate = true;
        return -std::numeric_limits<double>::infinity();
    }
    return 1.0 - sse / sst;
}

}  // namespace mws
