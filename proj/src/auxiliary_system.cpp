#include "mfnc/auxiliary_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfnc/errors.hpp"

namespace mfnc {

double AuxPath::evolve(std::size_t neuron, std::size_t j, double t, bool right_limit) const {
  const double t0 = times_[j], t1 = times_[j + 1];
  auto w_lin = [&](double s) { return w_[j] + (s - t0) / (t1 - t0) * (w_[j + 1] - w_[j]); };

  const auto& r = resets_[neuron];
  auto it = right_limit ? std::upper_bound(r.begin(), r.end(), t)
                        : std::lower_bound(r.begin(), r.end(), t);
  if (it != r.begin() && *std::prev(it) > t0) {
    const double p = *std::prev(it);
    return sigmas_[j] * (w_lin(t) - w_lin(p));
  }
  return flow(values_[neuron][j], t - t0, alpha_) + sigmas_[j] * (w_lin(t) - w_[j]);
}

double AuxPath::value_at(std::size_t neuron, double t, bool right_limit) const {
  if (neuron >= values_.size()) throw std::out_of_range("aux value_at: neuron index");
  if (times_.empty() || t < times_.front() || t > times_.back() * (1.0 + 1e-12) + 1e-15)
    throw std::out_of_range("aux value_at: t=" + std::to_string(t) + " outside the grid");
  if (times_.size() == 1) return values_[neuron][0];
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  std::size_t j = static_cast<std::size_t>(it - times_.begin());
  j = j == 0 ? 0 : std::min(j, times_.size() - 1) - 1;
  return evolve(neuron, j, std::min(t, times_.back()), right_limit);
}

AuxPath simulate_aux(const ModelParams& params, const BrownianPath& W,
                     std::span<const CandidateEvent> candidates, std::span<const double> init) {
  if (W.substep_times.size() != W.substep_values.size() || W.substep_times.empty())
    throw std::invalid_argument("simulate_aux: malformed Brownian path");
  const std::size_t n = init.size();
  const RateFunction& f = params.rate_fn;

  AuxPath a;
  a.alpha_ = params.alpha;
  a.times_ = W.substep_times;
  a.w_ = W.substep_values;
  a.values_.resize(n);
  a.resets_.resize(n);
  const std::size_t steps = a.times_.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    a.values_[i].reserve(steps + 1);
    a.values_[i].push_back(init[i]);
  }

  auto mean_rate = [&](std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(a.values_[i][j]);
    return s / static_cast<double>(n);
  };

  std::size_t c = 0;
  double frozen_sigma = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    if (params.aux_freeze == AuxFreeze::substep) {
      a.sigmas_.push_back(std::sqrt(mean_rate(j)));
    } else {
      if (j % W.substeps == 0) frozen_sigma = std::sqrt(mean_rate(j));
      a.sigmas_.push_back(frozen_sigma);
    }
    const double t1 = a.times_[j + 1];
    for (; c < candidates.size() && candidates[c].time <= t1; ++c) {
      const CandidateEvent& e = candidates[c];
      a.consumed_.emplace_back(e.time, e.z);
      const double x = a.evolve(e.neuron, j, e.time, false);
      if (!std::isfinite(x))
        throw NumericalError("aux system: non-finite potential at t=" + std::to_string(e.time));
      if (e.z <= f(x)) {
        a.resets_[e.neuron].push_back(e.time);
        a.events_.push_back({e.time, e.neuron});
      }
    }
    for (std::size_t i = 0; i < n; ++i) a.values_[i].push_back(a.evolve(i, j, t1, true));
  }
  return a;
}

std::vector<CandidateEvent> all_candidates(const FiniteRun& run) {
  std::vector<CandidateEvent> out;
  for (const IntervalLog& log : run.intervals)
    for (const IntervalCandidate& c : log.candidates) out.push_back(c.candidate);
  return out;
}

CoupledRun coupled_run(const ModelParams& params, std::uint64_t replicate, const Coupler& coupler) {
  CoupledRun run;
  run.params = params;
  run.replicate = replicate;
  run.finite = simulate(params, replicate);
  const StreamKey key = replicate_key(params, replicate);
  run.couplings.reserve(run.finite.intervals.size());
  for (const IntervalLog& log : run.finite.intervals)
    run.couplings.push_back(couple_interval(log, coupler, key));
  run.W = build_brownian(run.couplings, params.substeps_per_delta, key);
  run.W.delta = coupling_delta(params);

  std::vector<double> init(params.n_neurons);
  for (std::size_t i = 0; i < init.size(); ++i)
    init[i] = run.finite.path.segment_starts()[i].front().value;
  run.aux = simulate_aux(params, run.W, all_candidates(run.finite), init);
  return run;
}

CoupledRun coupled_run(const ModelParams& params, std::uint64_t replicate) {
  return coupled_run(params, replicate, coupler_for(params));
}

}  // namespace mfnc
