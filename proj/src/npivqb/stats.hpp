#pragma once

#include <functional>
#include <span>
#include <vector>

namespace npivqb::stats {

// Linear-interpolation sample quantile (type 7), p in [0,1].
double quantile(std::vector<double> values, double p);
inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }
double iqr(const std::vector<double>& values);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;  // NaN with fewer than three points
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

// sup_t |F_n(t) - F(t)|.
double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf);

// Geyer initial-positive-sequence estimate for one chain coordinate.
double effective_sample_size(std::span<const double> chain);

}  // namespace npivqb::stats
