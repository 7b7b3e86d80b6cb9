#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mfnc/lattice_law.hpp"
#include "mfnc/model.hpp"
#include "mfnc/noise.hpp"

namespace mfnc {

struct WalkCoupling {
  std::size_t n = 0;
  std::vector<double> U;  // marks U_1..U_n
  std::vector<double> S;  // S_m, m = 1..n
  std::vector<double> B;  // coupled Brownian values at m = 1..n
  double sup_stat = 0.0;
};

/// max_m |S_m - B_m| / ln(max(m, 2)), m counted from 1. Throws
/// std::invalid_argument on a length mismatch.
double kmt_sup_stat(std::span<const double> S, std::span<const double> B);

/// Walk-to-Brownian coupler G(S, V) for a fixed jump law. Copies share the
/// lattice tables of the dyadic method; couple() is const and thread-safe.
class Coupler {
 public:
  /// Throws std::invalid_argument for the dyadic method with a law that has
  /// no lattice carrier.
  Coupler(JumpLaw nu, CouplerMethod method, std::size_t table_cap = LatticeLaw::kDefaultCap);

  CouplerMethod method() const { return method_; }
  const JumpLaw& law() const { return nu_; }
  const LatticeLaw* lattice() const { return lattice_.get(); }

  /// All auxiliary randomness (atom randomizers, padding marks, bridge
  /// uniforms, independent increments) is read from `stream`.
  WalkCoupling couple(std::span<const double> marks, RandomStream stream) const;

 private:
  void independent(WalkCoupling& w, RandomStream& stream) const;
  void comonotone(WalkCoupling& w, RandomStream& stream) const;
  void dyadic(WalkCoupling& w, RandomStream& stream) const;

  JumpLaw nu_;
  CouplerMethod method_;
  std::shared_ptr<const LatticeLaw> lattice_;
};

WalkCoupling couple_walk(std::span<const double> marks, RandomStream stream, CouplerMethod method,
                         const JumpLaw& nu);

}  // namespace mfnc
