#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace shen::stats {

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double var = 0.0;      // unbiased sample variance
    double stderr_ = 0.0;  // sqrt(var / count)
    double min = 0.0;
    double max = 0.0;
};
Summary summarize(const std::vector<double>& xs);

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se_slope = 0.0;  // OLS standard error
    double ci_low = 0.0;    // slope -/+ 1.96 se (normal approximation)
    double ci_high = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// OLS of log(y) on log(x); all entries must be positive.
LinFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double z);

// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_statistic_normal(std::vector<double> samples, double mean, double sd);

// Order statistic at level q in [0, 1] (linear interpolation between ranks).
double quantile(std::vector<double> xs, double q);
double median(std::vector<double> xs);

}  // namespace shen::stats
