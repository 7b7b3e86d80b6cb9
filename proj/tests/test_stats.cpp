#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mfnc/normal.hpp"
#include "mfnc/stats.hpp"
#include "mfnc/summary.hpp"

using namespace mfnc;
using Catch::Approx;

namespace {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("sup distance of value paths", "[stats]") {
  const DistanceMap a(1.0);
  const std::vector<double> x{0.1, -2.0, 3.0}, zero(3, 0.0);
  CHECK(sup_distance_values(x, x, a) == 0.0);
  CHECK(sup_distance_values(x, zero, a) == sup_distance_values(zero, x, a));
  double prev = 0.0;
  for (double c : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const std::vector<double> y(3, c);
    const double d = sup_distance_values(zero, y, a);
    CHECK(d == Approx(std::abs(a(0.0) - a(c))));
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("sup distance of a run is symmetric in its evaluation", "[stats]") {
  ModelParams p;
  p.n_neurons = 64;
  const CoupledRun run = coupled_run(p, 1);
  const DistanceMap a(1.0);
  const SupDistance d = sup_distance(run, a);
  CHECK(d.value > 0.0);
  CHECK(d.points >= run.W.substep_times.size());
  CHECK(d.flow_modulus > 0.0);
  const auto t = evaluation_times(run);
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK(t.front() == 0.0);
  CHECK(t.back() == p.horizon);
}

TEST_CASE("fit_rate on exact laws", "[stats]") {
  const std::vector<double> n{64, 128, 256, 512, 1024};
  std::vector<double> half, flat, env;
  for (double x : n) {
    half.push_back(3.0 / std::sqrt(x));
    flat.push_back(0.4);
    env.push_back(rate_envelope(x));
  }
  CHECK(fit_rate(n, half).slope == Approx(-0.5));
  CHECK(fit_rate(n, flat).slope == Approx(0.0).margin(1e-12));
  const RateFit f = fit_rate(n, env);
  CHECK(f.valid);
  CHECK(f.c_hat == Approx(1.0));
  CHECK(f.c_hat_first == Approx(1.0));
  CHECK(f.adjusted_slope == Approx(-0.1));
  for (double r : f.residuals) CHECK(r == Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(fit_rate(std::vector<double>{64, 128}, std::vector<double>{1, 1}),
                  std::invalid_argument);
}

TEST_CASE("minimal rate study flags a degenerate fit", "[stats]") {
  ModelParams p;
  const std::vector<std::size_t> n{16};
  const RateStudyResult r = mc_rate_study(p, n, 2);
  REQUIRE(r.records.size() == 1);
  CHECK_FALSE(r.fit.valid);
  CHECK_FALSE(r.fit.note.empty());
  const MeanCI& e = r.records[0].error;
  CHECK(e.ci_low <= e.mean);
  CHECK(e.mean <= e.ci_high);
  CHECK_THROWS_AS(mc_rate_study(p, n, 1), std::invalid_argument);
}

TEST_CASE("remainder is non-negative and vanishes at zero horizon", "[stats]") {
  ModelParams p;
  p.n_neurons = 64;
  const DistanceMap a(1.0);
  for (std::uint64_t r = 0; r < 5; ++r) CHECK(remainder_probe(coupled_run(p, r), a) >= 0.0);
  p.horizon = 0.0;
  CHECK(remainder_probe(coupled_run(p, 0), a) == 0.0);
}

TEST_CASE("remainder shrinks without walk error", "[stats][slow]") {
  ModelParams p;
  p.n_neurons = 1024;
  p.jump_law = JumpLaw::standard_gaussian();
  p.coupler = CouplerMethod::comonotone;
  const auto co = run_point(p, 200);
  p.coupler = CouplerMethod::independent;
  const auto in = run_point(p, 200);
  std::vector<double> d;
  for (std::size_t r = 0; r < 200; ++r) d.push_back(in[r].remainder - co[r].remainder);
  const double z = sample_mean(d) / (sample_sd(d) / std::sqrt(200.0));
  INFO("paired z " << z);
  CHECK(z >= 4.0);
}

TEST_CASE("remainder does not grow with N", "[stats][slow]") {
  std::vector<double> means;
  for (std::size_t n : {64u, 256u, 1024u}) {
    ModelParams p;
    p.n_neurons = n;
    std::vector<double> v;
    for (const auto& m : run_point(p, 200)) v.push_back(m.remainder);
    means.push_back(sample_mean(v));
  }
  INFO(means[0] << " " << means[1] << " " << means[2]);
  CHECK(means[1] <= means[0]);
  CHECK(means[2] <= means[0]);
}

TEST_CASE("pure discretization remainder scales in delta", "[stats][unattained]") {
  // Gaussian marks, comonotone coupler, constant f and interval-frozen
  // coefficient leave only discretization in the remainder.
  ModelParams p;
  p.n_neurons = 1024;
  p.jump_law = JumpLaw::standard_gaussian();
  p.coupler = CouplerMethod::comonotone;
  p.rate_fn = {RateKind::constant, 1.0, 1.0};
  p.aux_freeze = AuxFreeze::interval;
  std::vector<double> ld, lr;
  for (double d : {0.5, 0.25, 0.125, 0.0625}) {
    p.delta = d;
    std::vector<double> v;
    for (const auto& m : run_point(p, 100)) v.push_back(m.remainder);
    ld.push_back(std::log(d));
    lr.push_back(std::log(sample_mean(v)));
  }
  const double slope = ols_slope(ld, lr);
  INFO("delta slope " << slope);
  CHECK(slope >= 0.2);
  CHECK(slope <= 0.35);

  p.delta = 0.25;
  double at[2];
  for (int i = 0; i < 2; ++i) {
    p.substeps_per_delta = i == 0 ? 4 : 64;
    std::vector<double> v;
    for (const auto& m : run_point(p, 100)) v.push_back(m.remainder);
    at[i] = sample_mean(v);
  }
  INFO("m = 4: " << at[0] << ", m = 64: " << at[1]);
  CHECK(at[1] < 0.5 * at[0]);
}

TEST_CASE("poisson_h", "[stats]") {
  CHECK(poisson_h(0.25) == Approx(0.0289294391427622).epsilon(1e-12));
  CHECK(poisson_h(0.0) == 0.0);
}

TEST_CASE("poisson deviation bound", "[stats]") {
  for (std::size_t n : {256u, 512u}) {
    for (double d : {0.1, 0.2}) {
      const auto r = poisson_deviation_check(2000, n, d, 1.0, 2.0, 7);
      CHECK(r.x == Approx(0.25));
      CHECK(r.mean_count == Approx(n * d).epsilon(0.05));
      // Mean count is twice the threshold.
      CHECK(r.empirical < 0.5);
      if (n * d >= 20.0) CHECK(r.empirical <= r.bound);
    }
  }
}

TEST_CASE("KS and chi-square sanity", "[stats]") {
  RandomStream s({1, 2, Purpose::bridge, 3, 4});
  std::vector<double> z(5000);
  for (double& x : z) x = s.normal();
  CHECK(ks_test(z, normal_cdf).p_value > 0.01);
  for (double& x : z) x += 0.2;
  CHECK(ks_test(z, normal_cdf).p_value < 1e-6);
  CHECK(kolmogorov_q(0.0) == 1.0);
  CHECK(kolmogorov_q(1.36) == Approx(0.0494).margin(2e-3));

  std::vector<std::size_t> pois(4000, 0);
  for (auto& c : pois) {
    double t = s.exponential(3.0);
    while (t < 1.0) {
      ++c;
      t += s.exponential(3.0);
    }
  }
  CHECK(chi_square_poisson(pois, 3.0).p_value > 0.01);
  CHECK(chi_square_poisson(pois, 3.5).p_value < 1e-6);
}

TEST_CASE("summary statistics", "[stats]") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK(sample_mean(x) == 2.5);
  CHECK(sample_sd(x) == Approx(std::sqrt(5.0 / 3.0)));
  CHECK(sample_quantile(x, 0.5) == 2.5);
  CHECK(sample_quantile(x, 1.0) == 4.0);
  CHECK(sample_quantile(x, 0.99) == Approx(3.97));
  CHECK(sample_correlation(x, x) == Approx(1.0));
  const auto m = mean_ci(x);
  CHECK(m.ci_low < m.mean);
  CHECK(m.ci_high == Approx(2.5 + 1.96 * std::sqrt(5.0 / 3.0) / 2.0));
}
