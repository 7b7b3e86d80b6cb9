#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "mfnc/finite_system.hpp"
#include "mfnc/stats.hpp"
#include "mfnc/summary.hpp"

using namespace mfnc;
using Catch::Approx;

namespace {

ModelParams constant_rate(double c, std::size_t n) {
  ModelParams p;
  p.n_neurons = n;
  p.rate_fn = {RateKind::constant, c, c};
  return p;
}

}  // namespace

TEST_CASE("without events the system decays", "[finite]") {
  ModelParams p;
  p.n_neurons = 2;
  p.rate_fn = {RateKind::constant, 0.01, 0.01};
  int quiet = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const FiniteRun run = simulate(p, r);
    if (!run.path.events().empty()) continue;
    ++quiet;
    const auto x0 = initial_values(p, r);
    for (double t : {0.0, 0.25, 0.7, 1.0})
      for (std::size_t i = 0; i < 2; ++i)
        CHECK(run.path.value_at(i, t) == Approx(x0[i] * std::exp(-p.alpha * t)).epsilon(1e-14));
  }
  CHECK(quiet > 90);
}

TEST_CASE("an accepted event kicks the other neuron by u / sqrt(N)", "[finite]") {
  ModelParams p;
  p.n_neurons = 2;
  p.alpha = 0.0;
  bool seen = false;
  for (std::uint64_t r = 0; r < 200 && !seen; ++r) {
    const FiniteRun run = simulate(p, r);
    if (run.path.events().empty()) continue;
    const AcceptedEvent& e = run.path.events().front();
    if (e.spiker != 0 || e.u != 1.0) continue;
    seen = true;
    CHECK(run.path.value_at(1, e.time, true) - run.path.value_at(1, e.time, false) ==
          Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(run.path.value_at(0, e.time, true) == 0.0);
  }
  CHECK(seen);
}

TEST_CASE("every event resets the spiker and kicks the rest", "[finite]") {
  ModelParams p;
  p.n_neurons = 16;
  const FiniteRun run = simulate(p, 3);
  REQUIRE(run.path.events().size() > 5);
  const double scale = 1.0 / std::sqrt(16.0);
  for (const AcceptedEvent& e : run.path.events()) {
    const auto before = run.path.state_at(e.time, false);
    const auto after = run.path.state_at(e.time, true);
    for (std::size_t i = 0; i < 16; ++i) {
      if (i == e.spiker) CHECK(after[i] == 0.0);
      else CHECK(after[i] - before[i] == Approx(e.u * scale).margin(1e-12));
    }
  }
}

TEST_CASE("state_at follows the flow between events", "[finite]") {
  ModelParams p;
  p.n_neurons = 8;
  const FiniteRun run = simulate(p, 5);
  const auto& ev = run.path.events();
  REQUIRE(ev.size() >= 2);
  CHECK(run.path.state_at(0.0) == initial_values(p, 5));
  const double t0 = ev[0].time, t1 = ev[1].time;
  const double mid = 0.5 * (t0 + t1);
  const auto s0 = run.path.state_at(t0, true);
  const auto sm = run.path.state_at(mid);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(sm[i] == Approx(flow(s0[i], mid - t0, p.alpha)).epsilon(1e-13));
  CHECK_THROWS_AS(run.path.state_at(1.5), std::out_of_range);
  CHECK_THROWS_AS(run.path.state_at(-0.1), std::out_of_range);
}

TEST_CASE("accepted event count at constant rate", "[finite]") {
  const ModelParams p = constant_rate(1.5, 100);
  constexpr int R = 400;
  std::vector<double> counts;
  for (std::uint64_t r = 0; r < R; ++r)
    counts.push_back(static_cast<double>(simulate(p, r).path.events().size()));
  CHECK(std::abs(sample_mean(counts) - 150.0) <= 4.0 * std::sqrt(150.0 / R));
}

TEST_CASE("interval logs are consistent", "[finite]") {
  ModelParams p;
  p.n_neurons = 32;
  const FiniteRun run = simulate(p, 1);
  std::size_t live = 0;
  for (const IntervalLog& log : run.intervals) {
    std::size_t frozen = 0;
    for (const auto& c : log.candidates) frozen += c.accepted_frozen;
    CHECK(log.frozen_count() == frozen);
    CHECK(log.frozen_marks().size() == frozen);
    CHECK(log.snapshot == run.path.state_at(log.t_start, true));
    live += log.live_count();
  }
  CHECK(live == run.path.events().size());
}

TEST_CASE("permuting neurons permutes the path", "[finite]") {
  ModelParams p;
  p.n_neurons = 12;
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::rotate(perm.begin(), perm.begin() + 5, perm.end());
  std::swap(perm[0], perm[7]);
  const FiniteRun a = simulate(p, 9);
  const FiniteRun b = simulate(p, 9, perm);
  REQUIRE(a.path.events().size() == b.path.events().size());
  for (std::size_t e = 0; e < a.path.events().size(); ++e) {
    CHECK(a.path.events()[e].time == b.path.events()[e].time);
    CHECK(a.path.events()[e].spiker == perm[b.path.events()[e].spiker]);
  }
  for (double t : {0.0, 0.3, 0.61, 1.0})
    for (std::size_t i = 0; i < 12; ++i) CHECK(b.path.value_at(i, t) == a.path.value_at(perm[i], t));
}

TEST_CASE("second moment stays bounded in N", "[finite][slow]") {
  std::map<std::size_t, double> peak;
  for (std::size_t n : {16u, 64u, 256u, 1024u}) {
    ModelParams p;
    p.n_neurons = n;
    const auto per_rep = run_replicates(1000, [&](std::size_t r) {
      const FiniteRun run = simulate(p, r);
      std::vector<double> sq;
      for (int j = 0; j <= 50; ++j) {
        const double x = run.path.value_at(0, j / 50.0);
        sq.push_back(x * x);
      }
      return sq;
    });
    double best = 0.0;
    for (int j = 0; j <= 50; ++j) {
      double s = 0.0;
      for (const auto& v : per_rep) s += v[j];
      best = std::max(best, s / 1000.0);
    }
    peak[n] = best;
  }
  for (const auto& [n, v] : peak) {
    INFO("N " << n << " sup_t E X^2 " << v);
    CHECK(v < 1.25 * peak[16]);
  }
}

TEST_CASE("increments scale like sqrt(delta)", "[finite][slow]") {
  ModelParams p;
  p.n_neurons = 256;
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  const IncrementBoundResult r = increment_bound_check(p, deltas, 200);
  INFO("slope " << r.slope);
  CHECK(r.slope >= 0.4);
  CHECK(r.slope <= 0.6);
  for (std::size_t i = 1; i < r.means.size(); ++i) CHECK(r.means[i] < r.means[i - 1]);
}

TEST_CASE("increment estimate does not trend in N", "[finite][slow]") {
  const std::vector<double> deltas{0.1, 0.05};
  ModelParams p;
  p.n_neurons = 256;
  const auto a = increment_bound_check(p, deltas, 200);
  p.n_neurons = 512;
  const auto b = increment_bound_check(p, deltas, 200);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    INFO("delta " << deltas[i] << ": " << a.means[i] << " vs " << b.means[i]);
    CHECK(b.means[i] == Approx(a.means[i]).epsilon(0.1));
  }
}

TEST_CASE("without drift only rare kicks move a neuron", "[finite]") {
  ModelParams p;
  p.n_neurons = 256;
  p.alpha = 0.0;
  p.rate_fn = {RateKind::constant, 0.01, 0.01};
  const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  // Only rare kicks of size 1/16 move a neuron: E|increment| ~ sqrt(N) c delta.
  const auto r = increment_bound_check(p, deltas, 50);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    INFO("delta " << deltas[i] << " mean " << r.means[i]);
    CHECK(r.means[i] == Approx(16.0 * 0.01 * deltas[i]).epsilon(0.3));
  }
}

TEST_CASE("frozen counts are Poisson at constant rate", "[finite]") {
  ModelParams p = constant_rate(1.5, 64);
  p.delta = 0.1;
  std::vector<std::size_t> counts;
  for (std::uint64_t r = 0; counts.size() < 10000; ++r)
    for (const IntervalLog& log : simulate(p, r).intervals) counts.push_back(log.frozen_count());
  const double mean = 64 * 1.5 * 0.1;
  const TestResult t = chi_square_poisson(counts, mean);
  INFO("chi2 " << t.statistic << " df " << t.df);
  CHECK(t.p_value > 0.01);
}
