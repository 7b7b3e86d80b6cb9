#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfnc/model.hpp"
#include "mfnc/philox.hpp"

namespace mfnc {

enum class Purpose : std::uint64_t {
  candidates = 1,
  acceptance = 2,
  marks = 3,
  coupler_v = 4,
  bridge = 5,
  init = 6,
};

/// Identifies one independent stream. (base_seed, purpose) form the Philox key
/// and (replicate, neuron, interval) the high words of the counter, so distinct
/// keys can never share a block.
struct StreamKey {
  std::uint64_t base_seed = 0;
  std::uint64_t replicate = 0;
  Purpose purpose = Purpose::candidates;
  std::uint64_t neuron = 0;
  std::uint64_t interval = 0;

  StreamKey with(Purpose p) const {
    StreamKey k = *this;
    k.purpose = p;
    return k;
  }
};

/// Counter-based stream: any position can be regenerated without replaying
/// earlier draws. Value type; copy to fork.
class RandomStream {
 public:
  explicit RandomStream(const StreamKey& key);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double rate);
  double normal();

  /// The index-th 64-bit word of the stream, independent of the cursor.
  std::uint64_t u64_at(std::uint64_t index) const;
  double uniform_at(std::uint64_t index) const;

  std::uint64_t position() const { return position_; }
  void seek(std::uint64_t position) { position_ = position; }

 private:
  PhiloxKey key_;
  std::uint64_t replicate_, neuron_, interval_;
  std::uint64_t position_ = 0;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  PhiloxCounter cache_{};
};

double to_unit_open(std::uint64_t bits);

/// One atom of the dominating Poisson measure of a neuron: arrival time,
/// acceptance level z ~ U(0, f_max) and jump mark u ~ nu. Every candidate
/// carries a mark, accepted or not.
struct CandidateEvent {
  double time = 0.0;
  std::size_t neuron = 0;
  double z = 0.0;
  double u = 0.0;
};

/// Rate-f_max Poisson arrivals on the window (t0, t1] for `neuron`; an empty
/// window yields no candidates. Times, levels and
/// marks come from the candidates / acceptance / marks streams that share the
/// remaining fields of `key` (its purpose and neuron fields are overridden).
std::vector<CandidateEvent> candidates_in(const StreamKey& key, std::size_t neuron, double t0,
                                          double t1, double f_max, const JumpLaw& law);

/// The uniform V used by a coupler; first draw of the keyed stream.
double uniform_v(const StreamKey& key);

}  // namespace mfnc
