#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfnc/auxiliary_system.hpp"
#include "mfnc/model.hpp"
#include "mfnc/runner.hpp"

namespace mfnc {

// ---------------------------------------------------------------------------
// Per-run estimators
// ---------------------------------------------------------------------------

struct SupDistance {
  double value = 0.0;
  // alpha * max|x| * (largest substep): bound on the drift of either path
  // between evaluation points.
  double flow_modulus = 0.0;
  std::size_t points = 0;
};

/// Evaluation times used by sup_distance: substep grid plus every event time
/// of both systems, sorted and deduplicated, clipped to [0, horizon].
std::vector<double> evaluation_times(const CoupledRun& run);

/// sup |a(X^{N,i}_s) - a(X~^{N,i}_s)| over evaluation_times with both
/// one-sided limits.
SupDistance sup_distance(const CoupledRun& run, const DistanceMap& a, std::size_t neuron = 0);

/// max_k |a(x_k) - a(y_k)|.
double sup_distance_values(std::span<const double> x, std::span<const double> y,
                           const DistanceMap& a);

/// |S^N_t - sum_j a'(X_{t_j}) sqrt(fbar_j / N) dW_j - 1/2 sum_j a''(X_{t_j}) fbar_j / N h_j|
/// for the tagged neuron, where S^N_t sums the jumps of a(X^{N,i}) caused by
/// kicks from other neurons and fbar_j = sum_k f(X^{N,k}_{t_j}).
double remainder_probe(const CoupledRun& run, const DistanceMap& a, std::size_t neuron = 0);

// ---------------------------------------------------------------------------
// Monte Carlo aggregation
// ---------------------------------------------------------------------------

struct MeanCI {
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// mean +- 1.96 sd / sqrt(R).
MeanCI mean_ci(std::span<const double> x);

struct RateFit {
  bool valid = false;
  std::string note;
  double slope = 0.0;  // OLS of ln error on ln N
  double intercept = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  // OLS of ln error - (1/5) ln ln N on ln N; -0.1 for errors on the envelope.
  double adjusted_slope = 0.0;
  double c_hat = 0.0;        // max_N error / envelope
  double c_hat_first = 0.0;  // error / envelope at the first N
  std::vector<double> residuals;  // of the adjusted regression
};

/// (ln N)^{1/5} N^{-1/10}.
double rate_envelope(double n);

/// Throws std::invalid_argument for fewer than three points.
RateFit fit_rate(std::span<const double> n_values, std::span<const double> errors);

struct RateRecord {
  std::size_t n = 0;
  double delta = 0.0;
  std::size_t replicates = 0;
  MeanCI error;
  MeanCI remainder;
  double mean_k_stat = 0.0;
  double mean_e_stat = 0.0;
  double max_flow_modulus = 0.0;
  std::vector<double> errors;      // per replicate
  std::vector<double> remainders;  // per replicate
};

struct RateStudyResult {
  std::vector<RateRecord> records;
  RateFit fit;
};

struct ReplicateMetrics {
  std::uint64_t replicate = 0;
  double sup_distance = 0.0;
  double flow_modulus = 0.0;
  double remainder = 0.0;
  double mean_k_stat = 0.0;
  double mean_e_stat = 0.0;
  std::size_t finite_events = 0;
  std::size_t aux_events = 0;
};

ReplicateMetrics measure_replicate(const ModelParams& params, std::uint64_t replicate,
                                   const Coupler& coupler, const DistanceMap& a);

/// R coupled runs at `params` (replicates 0..R-1).
std::vector<ReplicateMetrics> run_point(const ModelParams& params, std::size_t replicates,
                                        Execution ex = Execution::openmp, int jobs = 0);

/// One record per N (params.n_neurons replaced, delta left to the default
/// unless set). on_record is called after each completed N. A fit with fewer
/// than three N values is flagged invalid rather than thrown.
RateStudyResult mc_rate_study(const ModelParams& base, std::span<const std::size_t> n_values,
                              std::size_t replicates, Execution ex = Execution::openmp,
                              int jobs = 0,
                              const std::function<void(const RateRecord&)>& on_record = {});

// ---------------------------------------------------------------------------
// Appendix checks
// ---------------------------------------------------------------------------

/// h(x) = (1 + x) ln(1 + x) - x.
double poisson_h(double x);

struct PoissonDeviationResult {
  std::size_t n_neurons = 0;
  double delta = 0.0;
  std::size_t samples = 0;
  double threshold = 0.0;  // N f_min delta / 2
  double t = 0.0;          // f_max N delta
  double x = 0.0;          // threshold / t
  double bound = 0.0;      // 2 exp(-t h(x))
  double empirical = 0.0;  // P(N^k_delta <= threshold)
  double mean_count = 0.0;
};

/// Frozen counts of one interval with f constant at f_min, thinned from the
/// rate-f_max candidate streams.
PoissonDeviationResult poisson_deviation_check(std::size_t samples, std::size_t n_neurons,
                                               double delta, double f_min, double f_max,
                                               std::uint64_t seed);

struct IncrementBoundResult {
  std::vector<double> deltas;
  std::vector<double> means;  // E|X_{k delta} - X_{(k+1) delta -}|
  double slope = 0.0;
  double intercept = 0.0;
};

IncrementBoundResult increment_bound_check(const ModelParams& params,
                                           std::span<const double> deltas,
                                           std::size_t replicates,
                                           Execution ex = Execution::openmp, int jobs = 0);

/// Largest ratio over pairs of
///   (|a''(x)-a''(y)| + |a'(x)-a'(y)| + |x a'(x) - y a'(y)| + |f(x)-f(y)|) / |a(x)-a(y)|.
double distance_bundle_constant(const DistanceMap& a, const RateFunction& f,
                                std::span<const double> xs, std::span<const double> ys);

/// Largest |central difference of a^{(order-1)} - a^{(order)}| over xs,
/// divided by max |a^{(order)}| over xs. order in 1..3.
double fd_derivative_error(const DistanceMap& a, int order, std::span<const double> xs, double h);

// ---------------------------------------------------------------------------
// Coupler comparison
// ---------------------------------------------------------------------------

struct PairedGap {
  CouplerMethod lower;   // expected smaller error
  CouplerMethod higher;
  double mean_diff = 0.0;  // mean(higher - lower) over shared replicates
  double se = 0.0;
  double z = 0.0;
  std::string verdict;  // "ordered", "indistinguishable" or "reversed" (4 sigma)
};

struct HierarchyResult {
  std::size_t n_neurons = 0;
  std::size_t replicates = 0;
  std::vector<CouplerMethod> methods;  // dyadic, comonotone, independent
  std::vector<MeanCI> errors;
  std::vector<PairedGap> gaps;         // (dyadic, comonotone), (comonotone, independent)
};

/// Same replicate indices (hence the same finite systems) for every method.
HierarchyResult coupler_hierarchy(const ModelParams& params, std::size_t replicates,
                                  Execution ex = Execution::openmp, int jobs = 0);

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

struct TestResult {
  double statistic = 0.0;
  double p_value = 0.0;
  double df = 0.0;
};

/// One-sample Kolmogorov-Smirnov test; p-value from the asymptotic Kolmogorov
/// law with the Stephens small-sample correction.
TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
double kolmogorov_q(double lambda);

/// Chi-square goodness of fit of counts to Poisson(mean); cells with expected
/// count below 5 are pooled.
TestResult chi_square_poisson(std::span<const std::size_t> counts, double mean);

}  // namespace mfnc
