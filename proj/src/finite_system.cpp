#include "mfnc/finite_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfnc/errors.hpp"

namespace mfnc {

SystemPath::SystemPath(double alpha, double horizon, std::vector<double> initial)
    : alpha_(alpha), horizon_(horizon), segments_(initial.size()) {
  for (std::size_t i = 0; i < initial.size(); ++i) segments_[i].push_back({0.0, initial[i], 0.0});
}

void SystemPath::append_event(const AcceptedEvent& e) {
  events_.push_back(e);
  segments_.at(e.spiker).push_back({e.time, 0.0, e.kick_level});
}

namespace {
void check_time(double t, double horizon) {
  if (!(t >= 0.0 && t <= horizon * (1.0 + 1e-12) + 1e-15))
    throw std::out_of_range("state_at: t=" + std::to_string(t) + " outside [0, horizon]");
}
}  // namespace

double SystemPath::kick_level_at(double t, bool right_limit) const {
  auto it = right_limit
                ? std::upper_bound(events_.begin(), events_.end(), t,
                                   [](double v, const AcceptedEvent& e) { return v < e.time; })
                : std::lower_bound(events_.begin(), events_.end(), t,
                                   [](const AcceptedEvent& e, double v) { return e.time < v; });
  if (it == events_.begin()) return 0.0;
  const AcceptedEvent& last = *std::prev(it);
  return last.kick_level * std::exp(-alpha_ * (t - last.time));
}

double SystemPath::value_at(std::size_t neuron, double t, bool right_limit) const {
  check_time(t, horizon_);
  const auto& segs = segments_.at(neuron);
  auto it = right_limit
                ? std::upper_bound(segs.begin() + 1, segs.end(), t,
                                   [](double v, const SegmentStart& s) { return v < s.time; })
                : std::lower_bound(segs.begin() + 1, segs.end(), t,
                                   [](const SegmentStart& s, double v) { return s.time < v; });
  const SegmentStart& seg = *std::prev(it);
  return (seg.value - seg.kick_level) * std::exp(-alpha_ * (t - seg.time)) +
         kick_level_at(t, right_limit);
}

std::vector<double> SystemPath::state_at(double t, bool right_limit) const {
  check_time(t, horizon_);
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = value_at(i, t, right_limit);
  return out;
}

std::size_t IntervalLog::frozen_count() const {
  return static_cast<std::size_t>(std::count_if(candidates.begin(), candidates.end(),
                                                [](const auto& c) { return c.accepted_frozen; }));
}

std::size_t IntervalLog::live_count() const {
  return static_cast<std::size_t>(std::count_if(candidates.begin(), candidates.end(),
                                                [](const auto& c) { return c.accepted_live; }));
}

std::vector<double> IntervalLog::frozen_marks() const {
  std::vector<double> out;
  for (const auto& c : candidates)
    if (c.accepted_frozen) out.push_back(c.candidate.u);
  return out;
}

StreamKey replicate_key(const ModelParams& params, std::uint64_t replicate) {
  StreamKey key;
  key.base_seed = params.base_seed;
  key.replicate = replicate;
  return key;
}

namespace {
std::size_t stream_of(std::span<const std::size_t> stream_index, std::size_t i) {
  return stream_index.empty() ? i : stream_index[i];
}
}  // namespace

std::vector<double> initial_values(const ModelParams& params, std::uint64_t replicate,
                                   std::span<const std::size_t> stream_index) {
  std::vector<double> x(params.n_neurons);
  StreamKey key = replicate_key(params, replicate).with(Purpose::init);
  for (std::size_t i = 0; i < x.size(); ++i) {
    key.neuron = stream_of(stream_index, i);
    x[i] = params.init_law.sample(RandomStream(key).uniform());
  }
  return x;
}

FiniteRun simulate(const ModelParams& params, std::uint64_t replicate,
                   std::span<const std::size_t> stream_index) {
  check_structure(params);
  if (!stream_index.empty() && stream_index.size() != params.n_neurons)
    throw std::invalid_argument("simulate: stream_index must have one entry per neuron");

  const std::size_t n = params.n_neurons;
  const double alpha = params.alpha;
  const double kick_scale = 1.0 / std::sqrt(static_cast<double>(n));
  const RateFunction& f = params.rate_fn;
  const IntervalGrid grid = make_grid(params);

  FiniteRun run;
  run.path = SystemPath(alpha, params.horizon, initial_values(params, replicate, stream_index));
  SystemPath& path = run.path;

  // Running common level: K(t) = level * exp(-alpha (t - level_time)).
  double level = 0.0;
  double level_time = 0.0;
  auto current_value = [&](std::size_t i, double t) {
    const SegmentStart& seg = path.segment_starts()[i].back();
    return (seg.value - seg.kick_level) * std::exp(-alpha * (t - seg.time)) +
           level * std::exp(-alpha * (t - level_time));
  };

  const StreamKey key = replicate_key(params, replicate);
  std::vector<CandidateEvent> merged;
  for (std::size_t k = 0; k < grid.count(); ++k) {
    IntervalLog log;
    log.k = k;
    log.t_start = grid.edges[k];
    log.t_end = grid.edges[k + 1];
    log.partial = grid.has_partial && k + 1 == grid.count();
    log.snapshot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      log.snapshot[i] = current_value(i, log.t_start);
      log.snapshot_rate_sum += f(log.snapshot[i]);
    }

    merged.clear();
    StreamKey interval_key = key;
    interval_key.interval = k;
    for (std::size_t i = 0; i < n; ++i) {
      auto c = candidates_in(interval_key, stream_of(stream_index, i), log.t_start, log.t_end,
                             f.f_max, params.jump_law);
      for (auto& e : c) e.neuron = i;
      merged.insert(merged.end(), c.begin(), c.end());
    }
    std::sort(merged.begin(), merged.end(), [](const CandidateEvent& a, const CandidateEvent& b) {
      return a.time < b.time || (a.time == b.time && a.neuron < b.neuron);
    });

    log.candidates.reserve(merged.size());
    for (const CandidateEvent& c : merged) {
      const double x = current_value(c.neuron, c.time);
      if (!std::isfinite(x))
        throw NumericalError("finite system: non-finite potential at t=" + std::to_string(c.time));
      IntervalCandidate ic{c, c.z <= f(x), c.z <= f(log.snapshot[c.neuron])};
      if (ic.accepted_live) {
        level = level * std::exp(-alpha * (c.time - level_time)) + c.u * kick_scale;
        level_time = c.time;
        path.append_event({c.time, c.neuron, c.u, level});
      }
      log.candidates.push_back(ic);
    }
    run.intervals.push_back(std::move(log));
  }
  return run;
}

}  // namespace mfnc
