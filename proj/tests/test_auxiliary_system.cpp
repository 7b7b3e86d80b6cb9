#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfnc/auxiliary_system.hpp"
#include "mfnc/stats.hpp"
#include "mfnc/summary.hpp"

using namespace mfnc;
using Catch::Approx;

namespace {

bool same_run(const CoupledRun& a, const CoupledRun& b) {
  if (a.aux.values() != b.aux.values()) return false;
  if (a.W.substep_values != b.W.substep_values) return false;
  if (a.finite.path.events().size() != b.finite.path.events().size()) return false;
  for (std::size_t e = 0; e < a.finite.path.events().size(); ++e)
    if (a.finite.path.events()[e].time != b.finite.path.events()[e].time ||
        a.finite.path.events()[e].u != b.finite.path.events()[e].u)
      return false;
  for (std::size_t k = 0; k < a.couplings.size(); ++k)
    if (a.couplings[k].w_increment != b.couplings[k].w_increment ||
        a.couplings[k].k_stat != b.couplings[k].k_stat)
      return false;
  return true;
}

double l1_sup_gap(const ModelParams& base, std::size_t m_coarse, std::size_t reps) {
  ModelParams coarse = base, fine = base;
  coarse.substeps_per_delta = m_coarse;
  fine.substeps_per_delta = 2 * m_coarse;
  const auto gaps = run_replicates(reps, [&](std::size_t r) {
    const CoupledRun a = coupled_run(coarse, r), b = coupled_run(fine, r);
    double g = 0.0;
    for (std::size_t j = 0; j < a.aux.times().size(); ++j)
      g = std::max(g, std::abs(a.aux.values()[0][j] - b.aux.values()[0][2 * j]));
    return g;
  });
  return sample_mean(gaps);
}

}  // namespace

TEST_CASE("flat noise and no resets give pure decay", "[aux]") {
  BrownianPath W;
  W.substeps = 4;
  for (int j = 0; j <= 8; ++j) {
    W.substep_times.push_back(j / 8.0);
    W.substep_values.push_back(0.0);
  }
  ModelParams p;
  p.n_neurons = 3;
  const std::vector<double> init{0.7, -0.4, 1.2};
  const AuxPath a = simulate_aux(p, W, {}, init);
  for (std::size_t i = 0; i < 3; ++i)
    for (double t : {0.0, 0.1, 0.5, 0.93, 1.0})
      CHECK(a.value_at(i, t) == Approx(init[i] * std::exp(-t)).epsilon(1e-14));
  CHECK(a.events().empty());
}

TEST_CASE("constant rate matches the exponential-integrator recursion", "[aux]") {
  ModelParams p;
  p.n_neurons = 16;
  p.rate_fn = {RateKind::constant, 1.5, 1.5};
  p.substeps_per_delta = 8;
  for (std::uint64_t r = 0; r < 5; ++r) {
    const CoupledRun run = coupled_run(p, r);
    const auto& t = run.W.substep_times;
    const auto& w = run.W.substep_values;
    const auto cand = all_candidates(run.finite);
    const double sigma = std::sqrt(1.5);
    auto w_lin = [&](std::size_t j, double s) {
      return w[j] + (s - t[j]) / (t[j + 1] - t[j]) * (w[j + 1] - w[j]);
    };
    for (std::size_t i = 0; i < p.n_neurons; ++i) {
      double x = run.aux.values()[i][0];
      for (std::size_t j = 0; j + 1 < t.size(); ++j) {
        // Latest acceptance of neuron i in (t_j, t_{j+1}]: z <= 1.5 always.
        double last = -1.0;
        for (const auto& c : cand)
          if (c.neuron == i && c.time > t[j] && c.time <= t[j + 1]) last = c.time;
        x = last < 0.0 ? x * std::exp(-p.alpha * (t[j + 1] - t[j])) + sigma * (w[j + 1] - w[j])
                       : sigma * (w_lin(j, t[j + 1]) - w_lin(j, last));
        CHECK(run.aux.values()[i][j + 1] == Approx(x).margin(1e-10));
      }
    }
  }
}

TEST_CASE("aux resets to zero at its events", "[aux]") {
  ModelParams p;
  p.n_neurons = 32;
  const CoupledRun run = coupled_run(p, 6);
  REQUIRE_FALSE(run.aux.events().empty());
  for (const ResetEvent& e : run.aux.events()) CHECK(run.aux.value_at(e.neuron, e.time, true) == 0.0);
}

TEST_CASE("both systems consume the same candidates", "[aux]") {
  ModelParams p;
  p.n_neurons = 64;
  const CoupledRun run = coupled_run(p, 11);
  const auto cand = all_candidates(run.finite);
  REQUIRE(run.aux.consumed().size() == cand.size());
  for (std::size_t c = 0; c < cand.size(); ++c) {
    CHECK(run.aux.consumed()[c].first == cand[c].time);
    CHECK(run.aux.consumed()[c].second == cand[c].z);
  }
  for (std::size_t i = 0; i < p.n_neurons; ++i)
    CHECK(run.aux.values()[i][0] == run.finite.path.value_at(i, 0.0));
}

TEST_CASE("coupled runs are deterministic", "[aux]") {
  ModelParams p;
  p.n_neurons = 128;
  CHECK(same_run(coupled_run(p, 3), coupled_run(p, 3)));
  CHECK_FALSE(same_run(coupled_run(p, 3), coupled_run(p, 4)));
}

TEST_CASE("zero horizon gives zero distance", "[aux]") {
  ModelParams p;
  p.n_neurons = 2;
  p.horizon = 0.0;
  const CoupledRun run = coupled_run(p, 0);
  const DistanceMap a(1.0);
  CHECK(sup_distance(run, a).value == 0.0);
  CHECK(remainder_probe(run, a) == 0.0);
}

TEST_CASE("freezing the coefficient per interval", "[aux]") {
  ModelParams p;
  p.n_neurons = 32;
  p.aux_freeze = AuxFreeze::interval;
  const CoupledRun run = coupled_run(p, 2);
  const auto& s = run.aux.sigmas();
  for (std::size_t j = 0; j < s.size(); ++j)
    if (j % p.substeps_per_delta) CHECK(s[j] == s[j - 1]);
}

TEST_CASE("OU variance without resets", "[aux][slow]") {
  ModelParams p;
  p.n_neurons = 64;
  p.rate_fn = {RateKind::constant, 1.0, 1.0};
  p.jump_law = JumpLaw::standard_gaussian();
  p.coupler = CouplerMethod::comonotone;
  p.init_law = {InitKind::point, 0.0};
  p.delta = 0.125;
  p.substeps_per_delta = 8;
  std::vector<double> x;
  for (std::uint64_t r = 0; r < 3000; ++r) {
    const CoupledRun run = coupled_run(p, r);
    bool reset = false;
    for (const ResetEvent& e : run.aux.events()) reset |= e.neuron == 0;
    if (!reset) x.push_back(run.aux.values()[0].back());
  }
  REQUIRE(x.size() > 800);
  const double var = (1.0 - std::exp(-2.0)) / 2.0;
  const double sd = sample_sd(x);
  INFO("samples " << x.size() << " variance " << sd * sd << " target " << var);
  CHECK(std::abs(sd * sd - var) <= 4.0 * var * std::sqrt(2.0 / x.size()));
}

TEST_CASE("halving the substep shrinks the gap by about sqrt(2)", "[aux][slow]") {
  ModelParams p;
  p.n_neurons = 256;
  const double g48 = l1_sup_gap(p, 4, 200);
  const double g816 = l1_sup_gap(p, 8, 200);
  INFO("m 4->8 " << g48 << ", m 8->16 " << g816);
  // Calibration run: 1.29.
  CHECK(g48 / g816 >= 1.15);
  CHECK(g48 / g816 <= 1.7);
}

TEST_CASE("gaussian comonotone coupling beats independent", "[aux][slow]") {
  ModelParams p;
  p.n_neurons = 256;
  p.jump_law = JumpLaw::standard_gaussian();
  p.coupler = CouplerMethod::comonotone;
  const auto co = run_point(p, 200);
  p.coupler = CouplerMethod::independent;
  const auto in = run_point(p, 200);
  std::vector<double> d;
  for (std::size_t r = 0; r < 200; ++r) d.push_back(in[r].sup_distance - co[r].sup_distance);
  const double z = sample_mean(d) / (sample_sd(d) / std::sqrt(200.0));
  INFO("paired z " << z);
  CHECK(z >= 4.0);
}
