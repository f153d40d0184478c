#include "mws/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mws/learners.hpp"
#include "mws/stats.hpp"

namespace mws {

const std::array<const char*, 12>& MetaFeatureVector::names() {
    static const std::array<const char*, 12> kNames = {
        "c1", "c2", "c3", "c4", "l1", "l2", "l3", "s1", "s2", "s3", "s4", "t2"};
    return kNames;
}

namespace {

Vector subset(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

double abs_spearman(const Vector& x, const Vector& y) {
    bool degenerate = false;
    const double rho = spearman(x, y, &degenerate);
    return degenerate ? 0.0 : std::fabs(rho);
}

// Smallest removal count driving |spearman| above 0.9: repeatedly drop the
// example with the largest rank disagreement.
int c3_removals(const Vector& x, const Vector& y) {
    std::vector<int> idx(static_cast<size_t>(x.size()));
    std::iota(idx.begin(), idx.end(), 0);
    int removed = 0;
    while (idx.size() >= 2) {
        const Vector xs = subset(x, idx), ys = subset(y, idx);
        if (abs_spearman(xs, ys) > 0.9) break;
        const Vector rx = average_ranks(xs), ry = average_ranks(ys);
        Eigen::Index worst = 0;
        double worst_gap = -1.0;
        for (Eigen::Index i = 0; i < rx.size(); ++i) {
            const double gap = std::fabs(rx(i) - ry(i));
            if (gap > worst_gap) {
                worst_gap = gap;
                worst = i;
            }
        }
        idx.erase(idx.begin() + worst);
        ++removed;
    }
    return removed;
}

int nearest_neighbor(const Matrix& X, Eigen::Index i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        if (j == i) continue;
        const double dist = (X.row(i) - X.row(j)).squaredNorm();
        if (dist < best) {  // ties break toward the lower index
            best = dist;
            best_j = static_cast<int>(j);
        }
    }
    return best_j;
}

// Prim MST over the Euclidean distance matrix; ties break by lower index.
std::vector<std::pair<int, int>> prim_mst(const Matrix& X) {
    const Eigen::Index n = X.rows();
    std::vector<bool> in_tree(static_cast<size_t>(n), false);
    std::vector<double> best_dist(static_cast<size_t>(n),
                                  std::numeric_limits<double>::infinity());
    std::vector<int> best_from(static_cast<size_t>(n), -1);
    std::vector<std::pair<int, int>> edges;
    in_tree[0] = true;
    for (Eigen::Index j = 1; j < n; ++j) {
        best_dist[static_cast<size_t>(j)] = (X.row(0) - X.row(j)).norm();
        best_from[static_cast<size_t>(j)] = 0;
    }
    for (Eigen::Index step = 1; step < n; ++step) {
        int pick = -1;
        double pick_dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (in_tree[static_cast<size_t>(j)]) continue;
            if (best_dist[static_cast<size_t>(j)] < pick_dist) {
                pick_dist = best_dist[static_cast<size_t>(j)];
                pick = static_cast<int>(j);
            }
        }
        in_tree[static_cast<size_t>(pick)] = true;
        edges.emplace_back(best_from[static_cast<size_t>(pick)], pick);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (in_tree[static_cast<size_t>(j)]) continue;
            const double dist = (X.row(pick) - X.row(j)).norm();
            if (dist < best_dist[static_cast<size_t>(j)]) {
                best_dist[static_cast<size_t>(j)] = dist;
                best_from[static_cast<size_t>(j)] = pick;
            }
        }
    }
    return edges;
}

}  // namespace

MetaFeatureVector compute_meta_features(const Dataset& raw) {
    raw.validate();
    const Eigen::Index n = raw.rows(), d = raw.cols();
    if (n < 3) throw std::invalid_argument("compute_meta_features: need n >= 3");

    const Dataset nd = minmax_normalize(raw);
    const Matrix& X = nd.features;
    const Vector& y = nd.target;
    const double dn = static_cast<double>(n);

    MetaFeatureVector mf;
    mf.t2 = dn / static_cast<double>(d);

    // C1/C2: per-feature Spearman correlation with the target.
    Vector rho(d);
    for (Eigen::Index j = 0; j < d; ++j) rho(j) = abs_spearman(X.col(j), y);
    mf.c1 = 1.0 - rho.maxCoeff();
    mf.c2 = 1.0 - rho.mean();

    // C3: minimum removal fraction over features.
    int min_removed = static_cast<int>(n);
    for (Eigen::Index j = 0; j < d; ++j)
        min_removed = std::min(min_removed, c3_removals(X.col(j), y));
    mf.c3 = static_cast<double>(min_removed) / dn;

    // C4: collective feature efficiency. Iteratively fit the single most
    // correlated remaining feature and drop examples with |residual| < 0.1.
    {
        std::vector<int> examples(static_cast<size_t>(n));
        std::iota(examples.begin(), examples.end(), 0);
        std::vector<int> features(static_cast<size_t>(d));
        std::iota(features.begin(), features.end(), 0);
        while (!examples.empty() && !features.empty() && examples.size() >= 2) {
            const Vector ys = subset(y, examples);
            int best_f = -1;
            double best_rho = -1.0;
            for (int j : features) {
                const double r = abs_spearman(subset(X.col(j), examples), ys);
                if (r > best_rho) {
                    best_rho = r;
                    best_f = j;
                }
            }
            Matrix xm(static_cast<Eigen::Index>(examples.size()), 1);
            xm.col(0) = subset(X.col(best_f), examples);
            const LinearModel lm = fit_ols(xm, ys);
            const Vector res = ys - lm.predict(xm);
            std::vector<int> kept;
            for (size_t i = 0; i < examples.size(); ++i)
                if (std::fabs(res(static_cast<Eigen::Index>(i))) >= 0.1)
                    kept.push_back(examples[i]);
            examples = std::move(kept);
            features.erase(std::find(features.begin(), features.end(), best_f));
        }
        mf.c4 = static_cast<double>(examples.size()) / dn;
    }

    // L1/L2: OLS residuals on the full data.
    const LinearModel ols = fit_ols(X, y);
    const Vector res = y - ols.predict(X);
    mf.l1 = res.array().abs().mean();
    mf.l2 = res.array().square().mean();

    // Interpolated points: each example paired with its input-space nearest
    // neighbor, coordinate-wise midpoints of inputs and targets.
    Matrix interp_x(n, d);
    Vector interp_y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int j = nearest_neighbor(X, i);
        interp_x.row(i) = 0.5 * (X.row(i) + X.row(j));
        interp_y(i) = 0.5 * (y(i) + y(j));
    }
    mf.l3 = (interp_y - ols.predict(interp_x)).array().square().mean();

    // S1: mean target variation over MST edges.
    {
        double sum = 0.0;
        const auto edges = prim_mst(X);
        for (const auto& [a, b] : edges) sum += std::fabs(y(a) - y(b));
        mf.s1 = sum / static_cast<double>(edges.size());
    }

    // S2: mean input distance between examples adjacent in sorted-y order.
    {
        std::vector<int> order(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return y(a) < y(b); });
        double sum = 0.0;
        for (size_t i = 1; i < order.size(); ++i)
            sum += (X.row(order[i]) - X.row(order[i - 1])).norm();
        mf.s2 = sum / static_cast<double>(n - 1);
    }

    // S3: leave-one-out 1-NN mean squared error.
    {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int j = nearest_neighbor(X, i);
            sum += (y(i) - y(j)) * (y(i) - y(j));
        }
        mf.s3 = sum / dn;
    }

    // S4: 1-NN analogue of L3 on the interpolated points.
    {
        const KnnModel nn1 = fit_knn(X, y, 1, KnnWeighting::kUniform);
        mf.s4 = (interp_y - knn_predict(nn1, interp_x)).array().square().mean();
    }

    // Negative outputs clipped to zero (all but T2).
    for (double* v : {&mf.c1, &mf.c2, &mf.c3, &mf.c4, &mf.l1, &mf.l2, &mf.l3,
                      &mf.s1, &mf.s2, &mf.s3, &mf.s4})
        *v = std::max(0.0, *v);
    return mf;
}

}  // namespace mws
