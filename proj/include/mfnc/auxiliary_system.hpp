#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfnc/coupling.hpp"
#include "mfnc/finite_system.hpp"

namespace mfnc {

struct ResetEvent {
  double time = 0.0;
  std::size_t neuron = 0;
};

/// Mean-field auxiliary system on the substep grid of W. Inside substep
/// (t_j, t_{j+1}] neuron i evolves as
///   X(s) = flow(X(p), s - p) + sigma_j (W_lin(s) - W_lin(p)),
/// p = max(t_j, latest reset of i in (t_j, s)), with W_lin the linear
/// interpolation of W between substeps and sigma_j the frozen diffusion
/// coefficient. At substep ends this is the exponential-integrator Euler step.
class AuxPath {
 public:
  AuxPath() = default;

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& times() const { return times_; }
  /// values()[i][j]: neuron i at substep time j.
  const std::vector<std::vector<double>>& values() const { return values_; }
  const std::vector<double>& sigmas() const { return sigmas_; }
  const std::vector<ResetEvent>& events() const { return events_; }
  /// The (time, z) of every candidate processed, in processing order.
  const std::vector<std::pair<double, double>>& consumed() const { return consumed_; }

  /// Left-continuous by default; throws std::out_of_range outside the grid.
  double value_at(std::size_t neuron, double t, bool right_limit = false) const;

 private:
  friend AuxPath simulate_aux(const ModelParams&, const BrownianPath&,
                              std::span<const CandidateEvent>, std::span<const double>);
  double evolve(std::size_t neuron, std::size_t j, double t, bool right_limit) const;

  double alpha_ = 0.0;
  std::vector<double> times_;
  std::vector<double> sigmas_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<double>> resets_;  // per neuron, ascending
  std::vector<ResetEvent> events_;
  std::vector<std::pair<double, double>> consumed_;
  std::vector<double> w_;  // W at times_
};

/// candidates must be ordered by (time, neuron). The diffusion coefficient
/// sqrt(N^{-1} sum_j f(X_j)) is frozen per substep, or per coupling interval
/// when params.aux_freeze == interval. Throws NumericalError on a non-finite
/// state.
AuxPath simulate_aux(const ModelParams& params, const BrownianPath& W,
                     std::span<const CandidateEvent> candidates, std::span<const double> init);

struct CoupledRun {
  ModelParams params;
  std::uint64_t replicate = 0;
  FiniteRun finite;
  std::vector<IntervalCoupling> couplings;
  BrownianPath W;
  AuxPath aux;
};

/// All candidates of a finite run in (time, neuron) order.
std::vector<CandidateEvent> all_candidates(const FiniteRun& run);

/// Finite simulation, interval couplings, W^N and the auxiliary system on
/// shared candidates and initial values.
CoupledRun coupled_run(const ModelParams& params, std::uint64_t replicate, const Coupler& coupler);
CoupledRun coupled_run(const ModelParams& params, std::uint64_t replicate);

}  // namespace mfnc
