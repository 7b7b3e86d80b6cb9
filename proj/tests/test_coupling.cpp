#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "mfnc/auxiliary_system.hpp"
#include "mfnc/coupling.hpp"
#include "mfnc/normal.hpp"
#include "mfnc/stats.hpp"
#include "mfnc/summary.hpp"

using namespace mfnc;
using Catch::Approx;

namespace {

ModelParams gaussian_comonotone(std::size_t n) {
  ModelParams p;
  p.n_neurons = n;
  p.jump_law = JumpLaw::standard_gaussian();
  p.coupler = CouplerMethod::comonotone;
  return p;
}

IntervalCoupling single(double w, double len) {
  IntervalCoupling c;
  c.t_end = len;
  c.w_increment = w;
  return c;
}

}  // namespace

TEST_CASE("empty interval draws a fresh increment", "[coupling]") {
  const Coupler c(JumpLaw::rademacher(), CouplerMethod::dyadic);
  std::vector<double> w;
  for (std::uint64_t r = 0; r < 5000; ++r) {
    IntervalLog log;
    log.k = 2;
    log.t_start = 0.5;
    log.t_end = 0.75;
    const IntervalCoupling ic = couple_interval(log, c, {4, r});
    CHECK(ic.n_frozen == 0);
    CHECK(ic.k_stat == 0.0);
    w.push_back(ic.w_increment / 0.5);
  }
  CHECK(ks_test(w, normal_cdf).p_value > 0.01);
}

TEST_CASE("gaussian comonotone intervals carry no walk error", "[coupling]") {
  const ModelParams p = gaussian_comonotone(128);
  for (std::uint64_t r = 0; r < 20; ++r)
    for (const IntervalCoupling& c : coupled_run(p, r).couplings) CHECK(c.k_stat == 0.0);
}

TEST_CASE("gaussian comonotone increment is the rescaled mark sum", "[coupling]") {
  ModelParams p = gaussian_comonotone(64);
  p.rate_fn = {RateKind::constant, 1.0, 1.0};
  const CoupledRun run = coupled_run(p, 4);
  for (std::size_t k = 0; k < run.couplings.size(); ++k) {
    const auto marks = run.finite.intervals[k].frozen_marks();
    const IntervalCoupling& c = run.couplings[k];
    if (marks.empty()) continue;
    double s = 0.0;
    for (double u : marks) s += u;
    const double len = c.t_end - c.t_start;
    CHECK(c.w_increment == Approx(std::sqrt(len / marks.size()) * s).epsilon(1e-14));
  }
}

TEST_CASE("the increment depends only on the interval log", "[coupling]") {
  ModelParams p;
  p.n_neurons = 64;
  const CoupledRun run = coupled_run(p, 8);
  const Coupler c = coupler_for(p);
  for (std::size_t k = 0; k < run.couplings.size(); ++k) {
    IntervalLog stripped = run.finite.intervals[k];
    stripped.snapshot.clear();
    const IntervalCoupling again = couple_interval(stripped, c, replicate_key(p, 8));
    CHECK(again.w_increment == run.couplings[k].w_increment);
    CHECK(again.k_stat == run.couplings[k].k_stat);
  }
}

TEST_CASE("mean frozen count at constant rate", "[coupling]") {
  ModelParams p;
  p.n_neurons = 64;
  p.delta = 0.1;
  p.rate_fn = {RateKind::constant, 1.5, 1.5};
  std::vector<double> n;
  for (std::uint64_t r = 0; n.size() < 10000; ++r)
    for (const IntervalLog& log : simulate(p, r).intervals)
      n.push_back(static_cast<double>(log.frozen_count()));
  const double mean = 64 * 1.5 * 0.1;
  CHECK(std::abs(sample_mean(n) - mean) <= 4.0 * std::sqrt(mean / n.size()));
}

TEST_CASE("zero increments give a pinned bridge", "[coupling]") {
  std::vector<IntervalCoupling> cs;
  for (std::size_t k = 0; k < 3; ++k) {
    IntervalCoupling c;
    c.k = k;
    c.t_start = 0.25 * k;
    c.t_end = 0.25 * (k + 1);
    cs.push_back(c);
  }
  const BrownianPath W = build_brownian(cs, 4, {1, 0});
  CHECK(W.grid_values == std::vector<double>{0.0, 0.0, 0.0, 0.0});
  REQUIRE(W.substep_values.size() == 13);
  for (std::size_t k = 0; k <= 3; ++k) CHECK(W.substep_values[4 * k] == 0.0);
  CHECK(W.substep_values[2] != 0.0);
  CHECK(W.substep_times.back() == 0.75);
}

TEST_CASE("grid values accumulate the increments", "[coupling]") {
  ModelParams p;
  p.n_neurons = 64;
  const CoupledRun run = coupled_run(p, 2);
  double w = 0.0;
  for (std::size_t k = 0; k < run.couplings.size(); ++k) {
    w += run.couplings[k].w_increment;
    CHECK(run.W.grid_values[k + 1] == w);
    CHECK(run.W.substep_values[(k + 1) * p.substeps_per_delta] == w);
  }
}

TEST_CASE("bridge midpoint law", "[coupling]") {
  const double w = 0.8, len = 0.5;
  std::vector<double> mid;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    const IntervalCoupling c = single(w, len);
    mid.push_back(build_brownian(std::span(&c, 1), 4, {3, r}).substep_values[2]);
  }
  const double var = len / 4.0;
  CHECK(std::abs(sample_mean(mid) - w / 2) <= 4.0 * std::sqrt(var / mid.size()));
  const double sd = sample_sd(mid);
  CHECK(std::abs(sd * sd - var) <= 4.0 * var * std::sqrt(2.0 / mid.size()));
}

TEST_CASE("refining the bridge keeps the coarse points", "[coupling]") {
  const IntervalCoupling c = single(0.3, 0.5);
  const auto w4 = build_brownian(std::span(&c, 1), 4, {5, 1});
  const auto w16 = build_brownian(std::span(&c, 1), 16, {5, 1});
  for (std::size_t j = 0; j <= 4; ++j) CHECK(w16.substep_values[4 * j] == w4.substep_values[j]);
  const auto w3 = build_brownian(std::span(&c, 1), 3, {5, 1});
  CHECK(w3.substep_values.back() == 0.3);
}

TEST_CASE("grid increments are N(0, delta)", "[coupling][slow]") {
  ModelParams p;
  p.n_neurons = 64;
  p.delta = 0.1;
  const auto incs = run_replicates(1000, [&](std::size_t r) {
    std::vector<double> z;
    for (const auto& c : coupled_run(p, r).couplings) z.push_back(c.w_increment / std::sqrt(0.1));
    return z;
  });
  std::vector<double> all;
  for (const auto& v : incs) all.insert(all.end(), v.begin(), v.end());
  REQUIRE(all.size() == 10000);
  CHECK(ks_test(all, normal_cdf).p_value > 0.01);
}

TEST_CASE("increments are uncorrelated with live acceptance counts", "[coupling][slow]") {
  ModelParams p;
  p.n_neurons = 64;
  p.delta = 0.1;
  std::vector<double> w, live;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const CoupledRun run = coupled_run(p, r);
    for (std::size_t k = 0; k < run.couplings.size(); ++k) {
      w.push_back(run.couplings[k].w_increment);
      live.push_back(static_cast<double>(run.finite.intervals[k].live_count()));
    }
  }
  CHECK(std::abs(sample_correlation(w, live)) <= 4.0 / std::sqrt(double(w.size())));
}

TEST_CASE("coupling summary of zeros", "[coupling]") {
  std::vector<IntervalCoupling> cs(5);
  const auto s = coupling_error_summary(cs, 64, 1.0);
  CHECK(s.intervals == 5);
  CHECK(s.mean_k_stat == 0.0);
  CHECK(s.mean_e_stat == 0.0);
  CHECK(s.k_term == 0.0);
}

TEST_CASE("walk error grows slowly in N at fixed N delta", "[coupling][slow]") {
  // delta = 16 / N keeps about 24 frozen marks per interval.
  std::map<std::size_t, double> mean_k;
  for (std::size_t n = 64; n <= 1024; n *= 2) {
    ModelParams p;
    p.n_neurons = n;
    p.delta = 16.0 / static_cast<double>(n);
    std::vector<double> k;
    for (const auto& m : run_point(p, 50)) k.push_back(m.mean_k_stat);
    mean_k[n] = sample_mean(k);
  }
  for (std::size_t n = 128; n <= 1024; n *= 2) {
    INFO("N " << n << ": " << mean_k[n / 2] << " -> " << mean_k[n]);
    CHECK(mean_k[n] / mean_k[n / 2] < 1.6);
  }
}

TEST_CASE("rate mismatch stays bounded in N", "[coupling][slow]") {
  // e_stat itself scales like delta^{-1/2}; its sqrt(delta) multiple is the
  // N-uniform quantity.
  std::map<std::size_t, double> scaled;
  for (std::size_t n = 64; n <= 4096; n *= 4) {
    ModelParams p;
    p.n_neurons = n;
    const double d = coupling_delta(p);
    std::vector<double> e;
    for (const auto& m : run_point(p, 40)) e.push_back(m.mean_e_stat * std::sqrt(d));
    scaled[n] = sample_mean(e);
  }
  for (const auto& [n, v] : scaled) {
    INFO("N " << n << " E|e| sqrt(delta) " << v);
    CHECK(v <= 1.25 * scaled[64]);
  }
}
