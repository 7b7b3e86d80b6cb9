#include "mfnc/lattice_law.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

namespace mfnc {

double LatticeDistribution::total_mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

namespace {

// RAII holders for FFTW buffers and plans.
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;
using Plan = std::unique_ptr<fftw_plan_s, PlanDestroy>;

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t size = std::bit_ceil(out_len);
  const std::size_t bins = size / 2 + 1;

  RealBuffer ra(fftw_alloc_real(size)), rb(fftw_alloc_real(size));
  ComplexBuffer ca(fftw_alloc_complex(bins)), cb(fftw_alloc_complex(bins));
  Plan fa, fb, inv;
  {
    std::lock_guard lock(planner_mutex());
    const int n = static_cast<int>(size);
    fa.reset(fftw_plan_dft_r2c_1d(n, ra.get(), ca.get(), FFTW_ESTIMATE));
    fb.reset(fftw_plan_dft_r2c_1d(n, rb.get(), cb.get(), FFTW_ESTIMATE));
    inv.reset(fftw_plan_dft_c2r_1d(n, ca.get(), ra.get(), FFTW_ESTIMATE));
  }
  std::fill_n(ra.get(), size, 0.0);
  std::fill_n(rb.get(), size, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(fa.get());
  fftw_execute(fb.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> x(ca.get()[k][0], ca.get()[k][1]);
    const std::complex<double> y(cb.get()[k][0], cb.get()[k][1]);
    const std::complex<double> p = x * y;
    ca.get()[k][0] = p.real();
    ca.get()[k][1] = p.imag();
  }
  fftw_execute(inv.get());
  std::vector<double> out(ra.get(), ra.get() + out_len);
  const double scale = 1.0 / static_cast<double>(size);
  for (double& v : out) v *= scale;
  return out;
}

LatticeLaw::LatticeLaw(const JumpLaw& nu, std::size_t max_entries) : max_entries_(max_entries) {
  if (!nu.is_discrete())
    throw std::invalid_argument("lattice law: " + to_string(nu.kind) + " has no lattice carrier");
  const auto atoms = nu.atoms();
  offset_ = atoms.front().first;
  if (atoms.size() == 1) {
    step_ = 1.0;
    base_ = {atoms.front().second};
  } else {
    double min_gap = atoms[1].first - atoms[0].first;
    for (std::size_t i = 2; i < atoms.size(); ++i)
      min_gap = std::min(min_gap, atoms[i].first - atoms[i - 1].first);
    const double span = atoms.back().first - offset_;
    bool found = false;
    for (int q = 1; q <= 64 && !found; ++q) {
      const double s = min_gap / q;
      found = std::all_of(atoms.begin(), atoms.end(), [&](const auto& a) {
        const double r = (a.first - offset_) / s;
        return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
      });
      if (found) step_ = s;
    }
    if (!found) throw std::invalid_argument("lattice law: atoms do not lie on a common grid");
    const auto width = static_cast<std::size_t>(std::llround(span / step_));
    base_.assign(width + 1, 0.0);
    for (const auto& [x, p] : atoms) base_[static_cast<std::size_t>(index_of(x))] += p;
  }
  ladder_[0] = std::make_unique<const std::vector<double>>(base_);
}

std::int64_t LatticeLaw::index_of(double mark) const {
  return std::llround((mark - offset_) / step_);
}

const std::vector<double>& LatticeLaw::power(std::size_t level) const {
  if (level >= kMaxLevels) throw std::length_error("lattice law: level beyond ladder");
  std::lock_guard lock(mutex_);
  for (std::size_t l = 1; l <= level; ++l) {
    if (ladder_[l]) continue;
    const std::vector<double>& half = *ladder_[l - 1];
    const std::size_t entries = 2 * half.size() - 1;
    if (entries > max_entries_)
      throw std::length_error("lattice law: table for 2^" + std::to_string(l) +
                              " steps exceeds the configured cap");
    std::vector<double> full =
        half.size() <= 64 ? convolve_direct(half, half) : convolve_fft(half, half);
    // FFT round-off leaves ~1e-17 noise, including negative values, in the tails.
    for (double& v : full) v = std::max(v, 0.0);
    const double mass = std::accumulate(full.begin(), full.end(), 0.0);
    for (double& v : full) v /= mass;
    ladder_[l] = std::make_unique<const std::vector<double>>(std::move(full));
  }
  return *ladder_[level];
}

LatticeDistribution LatticeLaw::distribution(std::size_t n) const {
  if (n == 0 || !std::has_single_bit(n))
    throw std::invalid_argument("lattice law: n must be a power of two");
  const auto level = static_cast<std::size_t>(std::countr_zero(n));
  return {static_cast<double>(n) * offset_, step_, power(level)};
}

LatticeDistribution convolve_law(const JumpLaw& nu, std::size_t n) {
  return LatticeLaw(nu).distribution(n);
}

}  // namespace mfnc
