#pragma once

#include <span>
#include <vector>

namespace mfnc {

double sample_mean(std::span<const double> x);
/// Unbiased (n - 1) standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> x);
/// Linear-interpolation quantile (Hyndman-Fan type 7), p in [0, 1].
double sample_quantile(std::vector<double> x, double p);
/// Pearson correlation; 0 if either input is constant.
double sample_correlation(std::span<const double> x, std::span<const double> y);
double lag1_autocorrelation(std::span<const double> x);

}  // namespace mfnc
