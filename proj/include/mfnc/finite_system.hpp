#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfnc/model.hpp"
#include "mfnc/noise.hpp"

namespace mfnc {

struct AcceptedEvent {
  double time = 0.0;
  std::size_t spiker = 0;
  double u = 0.0;
  // Common kick level K right after the event (see SystemPath).
  double kick_level = 0.0;
};

struct SegmentStart {
  double time = 0.0;
  double value = 0.0;
  double kick_level = 0.0;
};

/// Piecewise-exact trajectory of the N-neuron system.
///
/// Every accepted event kicks all non-spiking neurons by the same u/sqrt(N),
/// so the kicks are stored once as the decaying common level
///   K(t) = sum_{events s_e <= t} (u_e / sqrt(N)) exp(-alpha (t - s_e)),
/// and a neuron only restarts its own segment at resets (and at time 0):
///   X_i(t) = (x_r - K(r)) exp(-alpha (t - r)) + K(t)
/// for its latest segment start (r, x_r, K(r)). Between two events every
/// neuron therefore follows flow() exactly.
class SystemPath {
 public:
  SystemPath() = default;
  SystemPath(double alpha, double horizon, std::vector<double> initial);

  std::size_t size() const { return segments_.size(); }
  double horizon() const { return horizon_; }
  double alpha() const { return alpha_; }
  const std::vector<AcceptedEvent>& events() const { return events_; }
  const std::vector<std::vector<SegmentStart>>& segment_starts() const { return segments_; }

  /// Left-continuous by default; right_limit includes events at exactly t.
  /// Throws std::out_of_range outside [0, horizon].
  std::vector<double> state_at(double t, bool right_limit = false) const;
  double value_at(std::size_t neuron, double t, bool right_limit = false) const;
  double kick_level_at(double t, bool right_limit = false) const;

  // Construction interface used by the simulator.
  void append_event(const AcceptedEvent& e);

 private:
  double alpha_ = 0.0;
  double horizon_ = 0.0;
  std::vector<AcceptedEvent> events_;
  std::vector<std::vector<SegmentStart>> segments_;
};

struct IntervalCandidate {
  CandidateEvent candidate;
  bool accepted_live = false;    // z <= f(X_i(s-))
  bool accepted_frozen = false;  // z <= f(X_i(t_start))
};

/// Everything the coupler needs about one interval (t_start, t_end].
struct IntervalLog {
  std::size_t k = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  bool partial = false;
  std::vector<double> snapshot;       // X^N at t_start, right limit
  double snapshot_rate_sum = 0.0;     // sum_i f(snapshot_i)
  std::vector<IntervalCandidate> candidates;  // ordered by (time, neuron)

  std::size_t frozen_count() const;
  std::size_t live_count() const;
  /// Marks of the frozen-accepted candidates in time order.
  std::vector<double> frozen_marks() const;
};

struct FiniteRun {
  SystemPath path;
  std::vector<IntervalLog> intervals;
};

/// Stream fields shared by every draw of one replicate.
StreamKey replicate_key(const ModelParams& params, std::uint64_t replicate);

/// Initial potentials X_0^i ~ nu_0 from the init streams.
std::vector<double> initial_values(const ModelParams& params, std::uint64_t replicate,
                                   std::span<const std::size_t> stream_index = {});

/// Exact event-driven simulation on [0, horizon]. stream_index[i], when given,
/// is the neuron field used for neuron i in every stream key (identity by default).
/// Throws NumericalError if a state becomes non-finite.
FiniteRun simulate(const ModelParams& params, std::uint64_t replicate,
                   std::span<const std::size_t> stream_index = {});

}  // namespace mfnc
