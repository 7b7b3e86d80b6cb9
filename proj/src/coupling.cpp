#include "mfnc/coupling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mfnc/normal.hpp"
#include "mfnc/summary.hpp"

namespace mfnc {

Coupler coupler_for(const ModelParams& params) {
  CouplerMethod m = params.coupler;
  if (m == CouplerMethod::dyadic && !params.jump_law.is_discrete()) m = CouplerMethod::comonotone;
  return Coupler(params.jump_law, m);
}

IntervalCoupling couple_interval(const IntervalLog& log, const Coupler& coupler,
                                 const StreamKey& replicate_key) {
  IntervalCoupling c;
  c.k = log.k;
  c.t_start = log.t_start;
  c.t_end = log.t_end;
  c.partial = log.partial;
  c.rate_sum = log.snapshot_rate_sum;
  const double len = log.t_end - log.t_start;

  StreamKey key = replicate_key;
  key.interval = log.k;
  key.neuron = 0;

  const std::vector<double> marks = log.frozen_marks();
  c.n_frozen = marks.size();
  if (c.n_frozen == 0 || c.partial) {
    c.w_increment = std::sqrt(len) * RandomStream(key.with(Purpose::bridge)).normal();
    return c;
  }
  const WalkCoupling w = coupler.couple(marks, RandomStream(key.with(Purpose::coupler_v)));
  const double n = static_cast<double>(c.n_frozen);
  c.w_increment = std::sqrt(len / n) * w.B.back();
  c.k_stat = std::abs(w.S.back() - w.B.back());
  c.e_stat = std::abs(std::sqrt(n / len) - std::sqrt(c.rate_sum));
  return c;
}

double BrownianPath::linear_at(double t) const {
  const std::size_t j = substep_index(t);
  if (j + 1 >= substep_times.size()) return substep_values.back();
  const double t0 = substep_times[j], t1 = substep_times[j + 1];
  const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  return substep_values[j] + w * (substep_values[j + 1] - substep_values[j]);
}

std::size_t BrownianPath::substep_index(double t) const {
  if (substep_times.size() < 2 || t <= substep_times.front()) return 0;
  auto it = std::lower_bound(substep_times.begin(), substep_times.end(), t);
  const auto j = static_cast<std::size_t>(it - substep_times.begin());
  return std::min(j, substep_times.size() - 1) - 1;
}

namespace {

void levy_fill(std::span<double> v, double len, const RandomStream& stream) {
  // v.front() and v.back() are set; v.size() - 1 is a power of two.
  const std::size_t m = v.size() - 1;
  for (std::size_t span = m, r = 1; span >= 2; span /= 2, ++r) {
    const double sd = std::sqrt(len * static_cast<double>(span) / static_cast<double>(m)) / 2.0;
    for (std::size_t a = 0, p = 1; a < m; a += span, p += 2) {
      const std::uint64_t slot = (std::uint64_t{1} << (r - 1)) + (p - 1) / 2;
      const double z = normal_quantile(stream.uniform_at(slot));
      v[a + span / 2] = 0.5 * (v[a] + v[a + span]) + sd * z;
    }
  }
}

void sequential_fill(std::span<double> v, double len, RandomStream stream) {
  const std::size_t m = v.size() - 1;
  const double h = len / static_cast<double>(m);
  const double end = v.back();
  for (std::size_t j = 1; j < m; ++j) {
    const double remaining = len - static_cast<double>(j - 1) * h;
    const double mean = v[j - 1] + (end - v[j - 1]) * h / remaining;
    const double var = h * (remaining - h) / remaining;
    v[j] = mean + std::sqrt(var) * stream.normal();
  }
}

}  // namespace

BrownianPath build_brownian(std::span<const IntervalCoupling> couplings, std::size_t m,
                            const StreamKey& replicate_key) {
  if (m == 0) throw std::invalid_argument("build_brownian: substeps must be >= 1");
  BrownianPath W;
  W.substeps = m;
  W.edges.push_back(couplings.empty() ? 0.0 : couplings.front().t_start);
  W.grid_values.push_back(0.0);
  W.substep_times.push_back(W.edges.front());
  W.substep_values.push_back(0.0);
  if (!couplings.empty()) W.delta = couplings.front().t_end - couplings.front().t_start;

  std::vector<double> fill(m + 1);
  for (const IntervalCoupling& c : couplings) {
    const double start = W.grid_values.back();
    const double end = start + c.w_increment;
    const double len = c.t_end - c.t_start;
    W.edges.push_back(c.t_end);
    W.grid_values.push_back(end);

    fill.front() = start;
    fill.back() = end;
    StreamKey key = replicate_key.with(Purpose::bridge);
    key.neuron = 1;
    key.interval = c.k;
    if (std::has_single_bit(m)) levy_fill(fill, len, RandomStream(key));
    else sequential_fill(fill, len, RandomStream(key));

    for (std::size_t j = 1; j <= m; ++j) {
      W.substep_times.push_back(j == m ? c.t_end
                                       : c.t_start + len * static_cast<double>(j) /
                                                         static_cast<double>(m));
      W.substep_values.push_back(fill[j]);
    }
  }
  return W;
}

CouplingErrorSummary coupling_error_summary(std::span<const IntervalCoupling> couplings,
                                            std::size_t n_neurons, double a_prime_max) {
  CouplingErrorSummary s;
  std::vector<double> k, e, n;
  const double root_n = std::sqrt(static_cast<double>(n_neurons));
  for (const IntervalCoupling& c : couplings) {
    if (c.partial) continue;
    k.push_back(c.k_stat);
    e.push_back(c.e_stat);
    n.push_back(static_cast<double>(c.n_frozen));
    s.k_term += c.k_stat * a_prime_max / root_n;
    s.e_term += c.e_stat * std::abs(c.w_increment) / root_n;
  }
  s.intervals = k.size();
  s.mean_n_frozen = sample_mean(n);
  s.mean_k_stat = sample_mean(k);
  s.mean_e_stat = sample_mean(e);
  s.p50_k_stat = sample_quantile(k, 0.5);
  s.p90_k_stat = sample_quantile(k, 0.9);
  s.p99_k_stat = sample_quantile(k, 0.99);
  s.p50_e_stat = sample_quantile(e, 0.5);
  s.p90_e_stat = sample_quantile(e, 0.9);
  s.p99_e_stat = sample_quantile(e, 0.99);
  return s;
}

}  // namespace mfnc
