#include "mws/metalabels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mws/resampling.hpp"
#include "mws/rng.hpp"
#include "mws/stats.hpp"

namespace mws {

namespace {

Matrix rows_of(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

Vector elems_of(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

Vector fit_predict(Algorithm algo, const AlgoConfig& cfg, const Matrix& train_x,
                   const Vector& train_y, const Matrix& test_x) {
    switch (algo) {
        case Algorithm::kLr:
            return fit_ols(train_x, train_y).predict(test_x);
        case Algorithm::kKnn: {
            const int k = std::min<int>(cfg.k, static_cast<int>(train_x.rows()));
            return knn_predict(fit_knn(train_x, train_y, std::max(1, k), cfg.weighting),
                               test_x);
        }
        case Algorithm::kLasso:
            return fit_lasso(train_x, train_y, cfg.alpha).predict(test_x);
        case Algorithm::kRidge:
            return fit_ridge(train_x, train_y, cfg.alpha).predict(test_x);
        case Algorithm::kElasticNet:
            return fit_elasticnet(train_x, train_y, cfg.alpha, cfg.l1_ratio)
                .predict(test_x);
    }
    throw std::logic_error("unknown algorithm");
}

// Min-max pipeline CV score: mean R^2 over the folds of `fa`, skipping
// degenerate test folds.
double cv_score(Algorithm algo, const AlgoConfig& cfg, const Dataset& d,
                const FoldAssignment& fa, int* excluded = nullptr,
                std::vector<double>* per_split = nullptr) {
    double sum = 0.0;
    int used = 0;
    for (int f = 0; f < fa.k; ++f) {
        const auto tr = fa.train_indices(f);
        const auto te = fa.test_indices(f);
        if (te.size() < 2) {
            if (excluded) ++*excluded;
            continue;
        }
        const Matrix train_raw = rows_of(d.features, tr);
        const MinMaxParams mm = minmax_fit(train_raw);
        const Matrix train_x = minmax_apply(train_raw, mm);
        const Matrix test_x = minmax_apply(rows_of(d.features, te), mm);
        const Vector train_y = elems_of(d.target, tr);
        const Vector test_y = elems_of(d.target, te);
        const Vector pred = fit_predict(algo, cfg, train_x, train_y, test_x);
        bool degenerate = false;
        const double r2 = r2_score(test_y, pred, &degenerate);
        if (degenerate) {
            if (excluded) ++*excluded;
            continue;
        }
        if (per_split) per_split->push_back(r2);
        sum += r2;
        ++used;
    }
    return used > 0 ? sum / used : -std::numeric_limits<double>::infinity();
}

}  // namespace

AlgoConfig tune(Algorithm algo, const Dataset& d, const TuningSpec& spec) {
    AlgoConfig best;
    if (algo == Algorithm::kLr) return best;  // empty search space

    const int n = static_cast<int>(d.rows());
    SeededRng rng(mix_seed(spec.seed, 0x74756e65ULL, static_cast<std::uint64_t>(algo)));
    const FoldAssignment inner =
        tscv_assign(d.target, std::min(spec.inner_folds, n), mix_seed(spec.seed, 1));

    double best_score = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (int trial = 0; trial < spec.trial_budget; ++trial) {
        AlgoConfig cfg;
        switch (algo) {
            case Algorithm::kKnn: {
                const int k_max = std::max(1, n / 3);
                cfg.k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k_max)));
                cfg.weighting = rng.below(2) == 0 ? KnnWeighting::kUniform
                                                  : KnnWeighting::kDistance;
                break;
            }
            case Algorithm::kRidge:
            case Algorithm::kLasso:
                cfg.alpha = std::pow(10.0, rng.uniform(-5.0, 1.0));
                break;
            case Algorithm::kElasticNet:
                cfg.alpha = std::pow(10.0, rng.uniform(-5.0, 1.0));
                cfg.l1_ratio = rng.uniform(1e-3, 1.0 - 1e-3);
                break;
            default:
                break;
        }
        const double score = cv_score(algo, cfg, d, inner);
        // Ties resolve toward the earlier trial.
        if (!have_best || score > best_score) {
            best_score = score;
            best = cfg;
            have_best = true;
        }
    }
    return best;
}

std::vector<double> outer_evaluate(const Dataset& d, Algorithm algo,
                                   const AlgoConfig& config, int outer_folds,
                                   int outer_repeats, std::uint64_t seed,
                                   int* excluded) {
    std::vector<double> scores;
    scores.reserve(static_cast<size_t>(outer_folds) * outer_repeats);
    if (excluded) *excluded = 0;
    for (int r = 0; r < outer_repeats; ++r) {
        const FoldAssignment fa = tscv_assign(
            d.target, std::min<int>(outer_folds, static_cast<int>(d.rows())), seed + r);
        cv_score(algo, config, d, fa, excluded, &scores);
    }
    return scores;
}

Matrix rank_splits(const PerformanceMatrix& perf) {
    const Eigen::Index rows = perf.scores.rows(), k = perf.scores.cols();
    Matrix ranks(rows, k);
    for (Eigen::Index i = 0; i < rows; ++i) {
        // Rank 1 = best: rank the negated scores ascending.
        ranks.row(i) = average_ranks(-perf.scores.row(i).transpose()).transpose();
    }
    return ranks;
}

std::pair<double, double> friedman_test(const Matrix& ranks) {
    const Eigen::Index n = ranks.rows(), k = ranks.cols();
    if (n < 2) throw std::invalid_argument("friedman_test: need N >= 2");
    if (k < 3) throw std::invalid_argument("friedman_test: need k >= 3");
    const double dn = static_cast<double>(n), dk = static_cast<double>(k);

    // Tie-adjusted chi-square (Conover form): numerator from column rank
    // sums, denominator from the total sum of squared ranks.
    double col_sq = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double rj = ranks.col(j).sum();
        col_sq += rj * rj;
    }
    const double a2 = ranks.array().square().sum();
    const double num = (dk - 1.0) * (col_sq - dn * dn * dk * (dk + 1.0) * (dk + 1.0) / 4.0);
    const double den = a2 - dn * dk * (dk + 1.0) * (dk + 1.0) / 4.0;
    if (den <= 0.0) return {0.0, 1.0};  // all ranks tied everywhere
    const double stat = num / den;
    return {stat, chi2_sf(stat, dk - 1.0)};
}

double nemenyi_cd(int k, int n, double alpha) {
    if (std::fabs(alpha - 0.05) > 1e-12)
        throw std::invalid_argument("nemenyi_cd: only alpha = 0.05 is tabulated");
    if (k < 2 || k > 20) throw std::invalid_argument("nemenyi_cd: k in [2, 20]");
    if (n < 1) throw std::invalid_argument("nemenyi_cd: N >= 1");
    // Two-tailed Nemenyi critical values at alpha = 0.05 (infinite-df
    // studentized range divided by sqrt(2)), k = 2..20.
    static const double kQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031,
                                  3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391,
                                  3.426, 3.458, 3.489, 3.517, 3.544};
    const double q = kQ05[k - 2];
    return q * std::sqrt(static_cast<double>(k) * (k + 1) / (6.0 * n));
}

std::array<int, kNumAlgorithms> assign_multilabel(const Vector& mean_ranks, double cd) {
    if (mean_ranks.size() != kNumAlgorithms)
        throw std::invalid_argument("assign_multilabel: expected 5 mean ranks");
    const double best = mean_ranks.minCoeff();
    std::array<int, kNumAlgorithms> bits{};
    for (int a = 0; a < kNumAlgorithms; ++a)
        bits[static_cast<size_t>(a)] = mean_ranks(a) <= best + cd ? 1 : 0;
    return bits;
}

MetaInstance label_dataset(const Dataset& d, const std::string& provenance,
                           const LabelingConfig& cfg) {
    MetaInstance row;
    row.name = d.name;
    row.provenance = provenance;
    row.features = compute_meta_features(d);

    PerformanceMatrix perf;
    perf.dataset_name = d.name;
    std::vector<std::vector<double>> cols(kNumAlgorithms);
    for (int a = 0; a < kNumAlgorithms; ++a) {
        const auto algo = static_cast<Algorithm>(a);
        TuningSpec tspec;
        tspec.algorithm = algo;
        tspec.trial_budget = cfg.trial_budget;
        tspec.seed = mix_seed(cfg.seed, 0x6c616265ULL, static_cast<std::uint64_t>(a));
        const AlgoConfig config = tune(algo, d, tspec);
        cols[static_cast<size_t>(a)] =
            outer_evaluate(d, algo, config, cfg.outer_folds, cfg.outer_repeats,
                           mix_seed(cfg.seed, 0x6f757465ULL));
    }
    const size_t splits = cols[0].size();
    for (const auto& c : cols)
        if (c.size() != splits)
            throw std::runtime_error("label_dataset: uneven split counts across algorithms");
    perf.scores.resize(static_cast<Eigen::Index>(splits), kNumAlgorithms);
    for (int a = 0; a < kNumAlgorithms; ++a)
        for (size_t s = 0; s < splits; ++s)
            perf.scores(static_cast<Eigen::Index>(s), a) = cols[static_cast<size_t>(a)][s];

    for (int a = 0; a < kNumAlgorithms; ++a)
        row.continuous[static_cast<size_t>(a)] = perf.scores.col(a).mean();

    const Matrix ranks = rank_splits(perf);
    const auto [stat, p] = friedman_test(ranks);
    row.friedman_p = p;
    const Vector mean_ranks = ranks.colwise().mean().transpose();
    if (p >= 0.05) {
        row.binary.fill(1);  // no significant differences: all applicable
        row.cd = std::numeric_limits<double>::quiet_NaN();
    } else {
        row.cd = nemenyi_cd(kNumAlgorithms, static_cast<int>(ranks.rows()));
        row.binary = assign_multilabel(mean_ranks, row.cd);
    }
    return row;
}

// --- meta-dataset CSV ---

void write_meta_csv(const std::vector<MetaInstance>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "name,provenance";
    for (const char* f : MetaFeatureVector::names()) out << "," << f;
    for (const char* a : kAlgorithmNames) out << ",r2_" << a;
    for (const char* a : kAlgorithmNames) out << ",meta_" << a;
    out << ",friedman_p,cd\n";
    for (const auto& r : rows) {
        out << r.name << "," << r.provenance;
        for (double v : r.features.as_array()) out << "," << v;
        for (double v : r.continuous) out << "," << v;
        for (int v : r.binary) out << "," << v;
        out << "," << r.friedman_p << ",";
        if (std::isnan(r.cd))
            out << "";
        else
            out << r.cd;
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failure on " + path);
}

std::vector<MetaInstance> read_meta_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

    std::vector<MetaInstance> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        if (cells.size() != 2 + 12 + 5 + 5 + 2)
            throw std::runtime_error(path + ": bad column count " +
                                     std::to_string(cells.size()));
        MetaInstance r;
        size_t i = 0;
        r.name = cells[i++];
        r.provenance = cells[i++];
        auto num = [&](const std::string& s) { return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); };
        double* feat[] = {&r.features.c1, &r.features.c2, &r.features.c3,
                          &r.features.c4, &r.features.l1, &r.features.l2,
                          &r.features.l3, &r.features.s1, &r.features.s2,
                          &r.features.s3, &r.features.s4, &r.features.t2};
        for (double* f : feat) *f = num(cells[i++]);
        for (int a = 0; a < kNumAlgorithms; ++a)
            r.continuous[static_cast<size_t>(a)] = num(cells[i++]);
        for (int a = 0; a < kNumAlgorithms; ++a)
            r.binary[static_cast<size_t>(a)] = static_cast<int>(std::lround(num(cells[i++])));
        r.friedman_p = num(cells[i++]);
        r.cd = num(cells[i++]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace mws
