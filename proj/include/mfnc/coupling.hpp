#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfnc/finite_system.hpp"
#include "mfnc/kmt.hpp"
#include "mfnc/noise.hpp"

namespace mfnc {

struct IntervalCoupling {
  std::size_t k = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  bool partial = false;        // final short interval: fresh increment, not coupled
  std::size_t n_frozen = 0;    // N^k_delta
  double w_increment = 0.0;    // W^{N,k}_delta ~ N(0, t_end - t_start)
  double k_stat = 0.0;         // |S_n - B_n|
  double e_stat = 0.0;         // |sqrt(n / delta) - sqrt(fbar)|, fbar = sum_i f(X_i(t_start))
  double rate_sum = 0.0;       // fbar
};

/// The coupler used for params: the configured method, except that the
/// standard-gaussian law (no lattice carrier) takes the comonotone coupler,
/// which is exact for it.
Coupler coupler_for(const ModelParams& params);

/// Couple one interval. Reads only the log's candidate flags and marks plus
/// the coupler stream (coupler_v, neuron 0, interval k) and, when the
/// interval is empty or partial, the bridge stream (neuron 0, interval k).
IntervalCoupling couple_interval(const IntervalLog& log, const Coupler& coupler,
                                 const StreamKey& replicate_key);

/// W^N on the coupling grid with bridge-filled substeps.
struct BrownianPath {
  double delta = 0.0;
  std::size_t substeps = 0;
  std::vector<double> edges;            // interval boundaries
  std::vector<double> grid_values;      // W at edges
  std::vector<double> substep_times;    // count() * substeps + 1 points
  std::vector<double> substep_values;

  /// Piecewise-linear interpolation of the substep values.
  double linear_at(double t) const;
  /// Index j of the substep (t_j, t_{j+1}] containing t (0 for t <= 0).
  std::size_t substep_index(double t) const;
};

/// Concatenate the increments and fill m substeps per interval from the
/// Brownian bridge. For m a power of two the fill is the nested Levy midpoint
/// construction, with the draw for dyadic position p / 2^r of interval k taken
/// from slot 2^{r-1} + (p-1)/2 of the bridge stream (neuron 1, interval k),
/// so m and 2m share their common points. Other m use the sequential bridge.
BrownianPath build_brownian(std::span<const IntervalCoupling> couplings, std::size_t m,
                            const StreamKey& replicate_key);

struct CouplingErrorSummary {
  std::size_t intervals = 0;  // coupled (non-partial) intervals
  double mean_n_frozen = 0.0;
  double mean_k_stat = 0.0;
  double p50_k_stat = 0.0;
  double p90_k_stat = 0.0;
  double p99_k_stat = 0.0;
  double mean_e_stat = 0.0;
  double p50_e_stat = 0.0;
  double p90_e_stat = 0.0;
  double p99_e_stat = 0.0;
  // Remainder bookkeeping: sums over intervals of k_stat * a'_max / sqrt(N)
  // and e_stat * |w_increment| / sqrt(N).
  double k_term = 0.0;
  double e_term = 0.0;
};

CouplingErrorSummary coupling_error_summary(std::span<const IntervalCoupling> couplings,
                                            std::size_t n_neurons, double a_prime_max);

}  // namespace mfnc
