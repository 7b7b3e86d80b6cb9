#include "mfnc/kmt.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mfnc/normal.hpp"

namespace mfnc {

double kmt_sup_stat(std::span<const double> S, std::span<const double> B) {
  if (S.size() != B.size()) throw std::invalid_argument("kmt_sup_stat: length mismatch");
  double best = 0.0;
  for (std::size_t m = 1; m <= S.size(); ++m) {
    const double d = std::abs(S[m - 1] - B[m - 1]) / std::log(std::max<double>(m, 2.0));
    best = std::max(best, d);
  }
  return best;
}

Coupler::Coupler(JumpLaw nu, CouplerMethod method, std::size_t table_cap)
    : nu_(std::move(nu)), method_(method) {
  if (method_ == CouplerMethod::dyadic) {
    if (!nu_.is_discrete())
      throw std::invalid_argument("dyadic coupler needs a lattice law, got " + to_string(nu_.kind));
    lattice_ = std::make_shared<const LatticeLaw>(nu_, table_cap);
  }
}

namespace {

// Phi^{-1} of the point lower + V * mass inside a cell [lower, lower + mass]
// of a discrete CDF whose remaining mass above the cell is `upper`.
double randomized_quantile(double lower, double mass, double upper, double v) {
  const double total = lower + mass + upper;
  double lo = (lower + v * mass) / total;
  double hi = (upper + (1.0 - v) * mass) / total;
  // Only reachable when tails underflow in the tables.
  lo = std::clamp(lo, DBL_MIN, 1.0);
  hi = std::clamp(hi, DBL_MIN, 1.0);
  return normal_quantile_tails(lo, hi);
}

}  // namespace

WalkCoupling Coupler::couple(std::span<const double> marks, RandomStream stream) const {
  WalkCoupling w;
  w.n = marks.size();
  w.U.assign(marks.begin(), marks.end());
  w.S.resize(w.n);
  double s = 0.0;
  for (std::size_t m = 0; m < w.n; ++m) w.S[m] = s += w.U[m];
  if (w.n == 0) return w;

  switch (method_) {
    case CouplerMethod::independent: independent(w, stream); break;
    case CouplerMethod::comonotone: comonotone(w, stream); break;
    case CouplerMethod::dyadic: dyadic(w, stream); break;
  }
  w.sup_stat = kmt_sup_stat(w.S, w.B);
  return w;
}

void Coupler::independent(WalkCoupling& w, RandomStream& stream) const {
  w.B.resize(w.n);
  double b = 0.0;
  for (std::size_t m = 0; m < w.n; ++m) w.B[m] = b += stream.normal();
}

void Coupler::comonotone(WalkCoupling& w, RandomStream& stream) const {
  if (nu_.kind == JumpKind::standard_gaussian) {
    w.B = w.S;  // Phi^{-1} o Phi is the identity
    return;
  }
  w.B.resize(w.n);
  double b = 0.0;
  for (std::size_t m = 0; m < w.n; ++m) {
    const auto [below, at] = nu_.atom_cdf(w.U[m]);
    b += randomized_quantile(below, at - below, 1.0 - at, stream.uniform());
    w.B[m] = b;
  }
}

void Coupler::dyadic(WalkCoupling& w, RandomStream& stream) const {
  const LatticeLaw& lat = *lattice_;
  const std::size_t L = std::bit_ceil(w.n);
  const auto M = static_cast<std::size_t>(std::countr_zero(L));

  // Integer walk on the lattice, padded with fresh marks to length L.
  std::vector<std::int64_t> P(L + 1, 0);
  for (std::size_t l = 0; l < L; ++l) {
    const double u = l < w.n ? w.U[l] : sample_jump(nu_, stream.uniform());
    P[l + 1] = P[l] + lat.index_of(u);
  }

  std::vector<double> B(L + 1, 0.0);
  // Top scale: S_L = L*offset + step*Y_L is increasing in Y_L.
  {
    const std::vector<double>& top = lat.power(M);
    const auto T = static_cast<std::size_t>(P[L]);
    double lower = 0.0, upper = 0.0;
    for (std::size_t j = 0; j < T; ++j) lower += top[j];
    for (std::size_t j = T + 1; j < top.size(); ++j) upper += top[j];
    B[L] = std::sqrt(static_cast<double>(L)) *
           randomized_quantile(lower, top[T], upper, stream.uniform());
  }

  const auto K = static_cast<std::int64_t>(lat.width());
  for (std::size_t level = M; level >= 1; --level) {
    const std::size_t len = std::size_t{1} << level;
    const std::size_t half = len / 2;
    const std::vector<double>& q = lat.power(level - 1);
    const std::int64_t cap = K * static_cast<std::int64_t>(half);
    const double spread = 0.5 * std::sqrt(static_cast<double>(len));
    for (std::size_t a = 0; a < L; a += len) {
      // First-half sum x given the block total T: weight q(y) q(T - y).
      const std::int64_t T = P[a + len] - P[a];
      const std::int64_t x = P[a + half] - P[a];
      const std::int64_t y0 = std::max<std::int64_t>(0, T - cap);
      const std::int64_t y1 = std::min(cap, T);
      double lower = 0.0, mass = 0.0, upper = 0.0;
      for (std::int64_t y = y0; y <= y1; ++y) {
        const double wgt = q[static_cast<std::size_t>(y)] * q[static_cast<std::size_t>(T - y)];
        if (y < x) lower += wgt;
        else if (y == x) mass = wgt;
        else upper += wgt;
      }
      const double z = randomized_quantile(lower, mass, upper, stream.uniform());
      B[a + half] = 0.5 * (B[a] + B[a + len]) + spread * z;
    }
  }

  w.B.assign(B.begin() + 1, B.begin() + 1 + static_cast<std::ptrdiff_t>(w.n));
}

WalkCoupling couple_walk(std::span<const double> marks, RandomStream stream, CouplerMethod method,
                         const JumpLaw& nu) {
  return Coupler(nu, method).couple(marks, stream);
}

}  // namespace mfnc
