#pragma once

#include <vector>

#include "mws/dataset.hpp"

namespace mws {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double df = 0.0;
    double mean_diff = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool degenerate = false;
};

// Special functions (regularized incomplete gamma/beta based tails).
double chi2_sf(double x, double df);          // upper tail of chi-square
double student_t_sf(double t, double df);     // one-sided upper tail
double student_t_two_sided_p(double t, double df);
double student_t_quantile(double p, double df);  // inverse CDF, p in (0,1)

// Average ranks with ties sharing the mean of their occupied positions.
Vector average_ranks(const Vector& v);

// Pearson correlation of average-tied ranks. Constant input -> 0, flagged via
// the optional degenerate output.
double spearman(const Vector& x, const Vector& y, bool* degenerate = nullptr);
double pearson(const Vector& x, const Vector& y, bool* degenerate = nullptr);

// Two-sided paired Student's t-test with 95% CI on the mean difference.
// All-zero or zero-variance differences are degenerate: p = 1, CI = [0, 0].
TestResult paired_t_test(const Vector& a, const Vector& b);

// Two-sample KS: statistic = max ECDF gap, p via the asymptotic Kolmogorov
// series with effective size n*m/(n+m).
TestResult ks_two_sample(const Vector& a, const Vector& b);

// Pooled-sd Cohen's d (a minus b). Degenerate pooled variance -> 0, flagged.
double cohens_d(const Vector& a, const Vector& b, bool* degenerate = nullptr);

// Histogram overlap: sum over shared equal-width bins of min(density) * width.
double overlap_coefficient(const Vector& a, const Vector& b, int bins = 20);

}  // namespace mws
