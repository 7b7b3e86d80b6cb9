#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "mfnc/model.hpp"

namespace mfnc {

/// Probability table of a law on origin + step * {0, 1, ..., weights.size() - 1}.
struct LatticeDistribution {
  double origin = 0.0;
  double step = 1.0;
  std::vector<double> weights;

  double value(std::size_t j) const { return origin + step * static_cast<double>(j); }
  double total_mass() const;
};

/// Direct O(n m) convolution; kept as the reference for the FFT path.
std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b);
/// Full linear convolution through a real FFT (FFTW).
std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b);

/// A jump law on a uniform lattice, U = offset + step * Y with Y in {0..width},
/// together with the power-of-two ladder of its convolution powers: table
/// `level` is the law of Y_1 + ... + Y_{2^level}. Tables are built lazily by
/// repeated squaring and never change afterwards, so references stay valid
/// and the object can be shared across threads.
class LatticeLaw {
 public:
  static constexpr std::size_t kMaxLevels = 40;
  static constexpr std::size_t kDefaultCap = std::size_t{1} << 24;

  /// Throws std::invalid_argument if nu has no lattice carrier (continuous
  /// laws, or atoms that are not on a common grid).
  explicit LatticeLaw(const JumpLaw& nu, std::size_t max_entries = kDefaultCap);

  LatticeLaw(const LatticeLaw&) = delete;
  LatticeLaw& operator=(const LatticeLaw&) = delete;

  double offset() const { return offset_; }
  double step() const { return step_; }
  std::size_t width() const { return base_.size() - 1; }

  /// Lattice index Y of a mark (rounded to the nearest grid point).
  std::int64_t index_of(double mark) const;

  /// Table of Y_1 + ... + Y_{2^level}. Throws std::length_error when the
  /// table would exceed max_entries.
  const std::vector<double>& power(std::size_t level) const;

  /// The law of S_n = U_1 + ... + U_n for n a power of two.
  LatticeDistribution distribution(std::size_t n) const;

 private:
  double offset_ = 0.0;
  double step_ = 1.0;
  std::size_t max_entries_;
  std::vector<double> base_;
  mutable std::mutex mutex_;
  mutable std::array<std::unique_ptr<const std::vector<double>>, kMaxLevels> ladder_;
};

/// Exact table of S_n for a lattice law; n must be a power of two.
LatticeDistribution convolve_law(const JumpLaw& nu, std::size_t n);

}  // namespace mfnc
