#include "shen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shen::stats {

Summary summarize(const std::vector<double>& xs) {
    Summary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    s.min = xs[0];
    s.max = xs[0];
    for (double v : xs) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    const double n = static_cast<double>(s.count);
    s.mean = sum / n;
    if (s.count > 1) {
        double sq = 0.0;
        for (double v : xs) {
            const double d = v - s.mean;
            sq += d * d;
        }
        s.var = sq / (n - 1.0);
        s.stderr_ = std::sqrt(s.var / n);
    }
    return s;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("fit: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit: degenerate abscissa");

    LinFit f;
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    if (x.size() > 2) f.se_slope = std::sqrt(rss / (n - 2.0) / sxx);
    f.ci_low = f.slope - 1.96 * f.se_slope;
    f.ci_high = f.slope + 1.96 * f.se_slope;
    f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    return f;
}

LinFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw std::invalid_argument("loglog_fit: nonpositive x");
        lx[i] = std::log(x[i]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw std::invalid_argument("loglog_fit: nonpositive y");
        ly[i] = std::log(y[i]);
    }
    return linear_fit(lx, ly);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double ks_statistic_normal(std::vector<double> samples, double mean, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("ks: sd must be positive");
    return ks_statistic(std::move(samples),
                        [mean, sd](double v) { return normal_cdf((v - mean) / sd); });
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: level outside [0,1]");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * xs[lo] + w * xs[lo + 1];
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

}  // namespace shen::stats
