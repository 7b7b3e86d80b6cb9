#include "mfnc/noise.hpp"

#include <cmath>

#include "mfnc/normal.hpp"

namespace mfnc {

double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

RandomStream::RandomStream(const StreamKey& key)
    : key_{key.base_seed, static_cast<std::uint64_t>(key.purpose)},
      replicate_(key.replicate),
      neuron_(key.neuron),
      interval_(key.interval) {}

std::uint64_t RandomStream::u64_at(std::uint64_t index) const {
  const PhiloxCounter out = philox4x64({replicate_, neuron_, interval_, index / 4}, key_);
  return out[index % 4];
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t block = position_ / 4;
  if (block != cached_block_) {
    cache_ = philox4x64({replicate_, neuron_, interval_, block}, key_);
    cached_block_ = block;
  }
  return cache_[position_++ % 4];
}

double RandomStream::uniform() { return to_unit_open(next_u64()); }

double RandomStream::uniform_at(std::uint64_t index) const { return to_unit_open(u64_at(index)); }

double RandomStream::exponential(double rate) { return -std::log(uniform()) / rate; }

double RandomStream::normal() { return normal_quantile(uniform()); }

std::vector<CandidateEvent> candidates_in(const StreamKey& key, std::size_t neuron, double t0,
                                          double t1, double f_max, const JumpLaw& law) {
  std::vector<CandidateEvent> out;
  if (!(t1 > t0) || !(f_max > 0.0)) return out;
  StreamKey k = key;
  k.neuron = neuron;
  RandomStream times(k.with(Purpose::candidates));
  RandomStream levels(k.with(Purpose::acceptance));
  RandomStream marks(k.with(Purpose::marks));
  double t = t0;
  for (;;) {
    t += times.exponential(f_max);
    if (t > t1) break;
    out.push_back({t, neuron, f_max * levels.uniform(), sample_jump(law, marks.uniform())});
  }
  return out;
}

double uniform_v(const StreamKey& key) { return RandomStream(key).uniform(); }

}  // namespace mfnc
