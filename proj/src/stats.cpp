#include "mws/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mws {

namespace {

double ln_gamma(double x) { return std::lgamma(x); }

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
    }
    // Lentz continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - ln_gamma(a)) * h;
    return 1.0 - q;
}

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction.
double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                               a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double chi2_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return 1.0 - gamma_p(df / 2.0, x / 2.0);
}

double student_t_sf(double t, double df) {
    const double p = 0.5 * inc_beta(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0.0 ? p : 1.0 - p;
}

double student_t_two_sided_p(double t, double df) {
    return inc_beta(df / 2.0, 0.5, df / (df + t * t));
}

double student_t_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("t quantile: p in (0,1)");
    // Bisection on the CDF; plenty for report-grade confidence intervals.
    double lo = -1e3, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 1.0 - student_t_sf(mid, df);
        if (cdf < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Vector average_ranks(const Vector& v) {
    const Eigen::Index n = v.size();
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return v(a) < v(b); });
    Vector ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && v(order[static_cast<size_t>(j + 1)]) ==
                                v(order[static_cast<size_t>(i)]))
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index t = i; t <= j; ++t) ranks(order[static_cast<size_t>(t)]) = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const Vector& x, const Vector& y, bool* degenerate) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: need equal lengths >= 2");
    const Vector xc = x.array() - x.mean();
    const Vector yc = y.array() - y.mean();
    const double sx = xc.norm(), sy = yc.norm();
    if (degenerate) *degenerate = false;
    if (sx == 0.0 || sy == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return xc.dot(yc) / (sx * sy);
}

double spearman(const Vector& x, const Vector& y, bool* degenerate) {
    return pearson(average_ranks(x), average_ranks(y), degenerate);
}

TestResult paired_t_test(const Vector& a, const Vector& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("paired_t_test: need equal lengths >= 2");
    const Eigen::Index n = a.size();
    const Vector d = a - b;
    TestResult r;
    r.df = static_cast<double>(n - 1);
    r.mean_diff = d.mean();
    const double ss = (d.array() - r.mean_diff).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
        r.degenerate = true;
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.ci_lo = r.ci_hi = r.mean_diff;
        if (r.mean_diff == 0.0) r.ci_lo = r.ci_hi = 0.0;
        return r;
    }
    const double se = sd / std::sqrt(static_cast<double>(n));
    r.statistic = r.mean_diff / se;
    r.p_value = student_t_two_sided_p(r.statistic, r.df);
    const double tcrit = student_t_quantile(0.975, r.df);
    r.ci_lo = r.mean_diff - tcrit * se;
    r.ci_hi = r.mean_diff + tcrit * se;
    return r;
}

TestResult ks_two_sample(const Vector& a, const Vector& b) {
    if (a.size() < 1 || b.size() < 1)
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> sa(a.data(), a.data() + a.size());
    std::vector<double> sb(b.data(), b.data() + b.size());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double n = static_cast<double>(sa.size()), m = static_cast<double>(sb.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] <= x) ++i;
        while (j < sb.size() && sb[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n -
                                  static_cast<double>(j) / m));
    }
    TestResult r;
    r.statistic = d;
    const double ne = n * m / (n + m);
    const double lambda = std::sqrt(ne) * d;
    // Asymptotic Kolmogorov survival, truncated at 100 terms.
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
    }
    r.p_value = std::clamp(p, 0.0, 1.0);
    r.df = ne;
    return r;
}

double cohens_d(const Vector& a, const Vector& b, bool* degenerate) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("cohens_d: need sizes >= 2");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = (a.array() - a.mean()).square().sum() / (na - 1.0);
    const double vb = (b.array() - b.mean()).square().sum() / (nb - 1.0);
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if (degenerate) *degenerate = false;
    if (pooled <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (a.mean() - b.mean()) / std::sqrt(pooled);
}

double overlap_coefficient(const Vector& a, const Vector& b, int bins) {
    if (bins < 1) throw std::invalid_argument("overlap_coefficient: bins >= 1");
    if (a.size() < 1 || b.size() < 1)
        throw std::invalid_argument("overlap_coefficient: empty sample");
    const double lo = std::min(a.minCoeff(), b.minCoeff());
    const double hi = std::max(a.maxCoeff(), b.maxCoeff());
    if (hi <= lo) return 1.0;  // all mass in one point for both samples
    const double width = (hi - lo) / bins;
    std::vector<double> ha(static_cast<size_t>(bins), 0.0),
        hb(static_cast<size_t>(bins), 0.0);
    auto bin_of = [&](double v) {
        int k = static_cast<int>((v - lo) / width);
        return std::clamp(k, 0, bins - 1);
    };
    for (Eigen::Index i = 0; i < a.size(); ++i)
        ha[static_cast<size_t>(bin_of(a(i)))] += 1.0;
    for (Eigen::Index i = 0; i < b.size(); ++i)
        hb[static_cast<size_t>(bin_of(b(i)))] += 1.0;
    double overlap = 0.0;
    for (int k = 0; k < bins; ++k) {
        const double da = ha[static_cast<size_t>(k)] /
                          (static_cast<double>(a.size()) * width);
        const double db = hb[static_cast<size_t>(k)] /
                          (static_cast<double>(b.size()) * width);
        overlap += std::min(da, db) * width;
    }
    return std::clamp(overlap, 0.0, 1.0);
}

}  // namespace mws
