#include "mfnc/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mfnc/coupling.hpp"
#include "mfnc/summary.hpp"

namespace mfnc {

std::vector<double> evaluation_times(const CoupledRun& run) {
  const double horizon = run.finite.path.horizon();
  std::vector<double> t = run.W.substep_times;
  for (const AcceptedEvent& e : run.finite.path.events()) t.push_back(e.time);
  for (const ResetEvent& e : run.aux.events()) t.push_back(e.time);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::erase_if(t, [&](double s) { return s < 0.0 || s > horizon; });
  if (t.empty()) t.push_back(0.0);
  return t;
}

SupDistance sup_distance(const CoupledRun& run, const DistanceMap& a, std::size_t neuron) {
  SupDistance out;
  const std::vector<double> times = evaluation_times(run);
  const SystemPath& X = run.finite.path;
  double max_abs = 0.0;
  for (double t : times) {
    for (bool right : {false, true}) {
      const double x = X.value_at(neuron, t, right);
      const double y = run.aux.value_at(neuron, t, right);
      out.value = std::max(out.value, std::abs(a(x) - a(y)));
      max_abs = std::max({max_abs, std::abs(x), std::abs(y)});
    }
  }
  double h = 0.0;
  const auto& st = run.W.substep_times;
  for (std::size_t j = 1; j < st.size(); ++j) h = std::max(h, st[j] - st[j - 1]);
  out.flow_modulus = X.alpha() * max_abs * h;
  out.points = times.size();
  return out;
}

double sup_distance_values(std::span<const double> x, std::span<const double> y,
                           const DistanceMap& a) {
  if (x.size() != y.size()) throw std::invalid_argument("sup_distance: length mismatch");
  double best = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) best = std::max(best, std::abs(a(x[k]) - a(y[k])));
  return best;
}

double remainder_probe(const CoupledRun& run, const DistanceMap& a, std::size_t neuron) {
  const SystemPath& X = run.finite.path;
  const RateFunction& f = run.params.rate_fn;
  const double n = static_cast<double>(X.size());

  double small_jumps = 0.0;
  for (const AcceptedEvent& e : X.events()) {
    if (e.spiker == neuron) continue;
    small_jumps += a(X.value_at(neuron, e.time, true)) - a(X.value_at(neuron, e.time, false));
  }

  // Left-point sums on the substep grid, refined at the tagged neuron's own
  // resets so that no piece straddles a jump of a'(X^{N,i}).
  std::vector<double> grid = run.W.substep_times;
  for (const AcceptedEvent& e : X.events())
    if (e.spiker == neuron && e.time > grid.front() && e.time < grid.back()) grid.push_back(e.time);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double martingale = 0.0, drift = 0.0;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double x = X.value_at(neuron, grid[j], true);
    double fbar = 0.0;
    for (std::size_t k = 0; k < X.size(); ++k) fbar += f(X.value_at(k, grid[j], true));
    const double dw = run.W.linear_at(grid[j + 1]) - run.W.linear_at(grid[j]);
    martingale += a.eval(x, 1) * std::sqrt(fbar / n) * dw;
    drift += 0.5 * a.eval(x, 2) * fbar / n * (grid[j + 1] - grid[j]);
  }
  return std::abs(small_jumps - martingale - drift);
}

MeanCI mean_ci(std::span<const double> x) {
  MeanCI m;
  m.mean = sample_mean(x);
  m.sd = sample_sd(x);
  const double half = x.empty() ? 0.0 : 1.96 * m.sd / std::sqrt(static_cast<double>(x.size()));
  m.ci_low = m.mean - half;
  m.ci_high = m.mean + half;
  return m;
}

double rate_envelope(double n) { return std::pow(std::log(n), 0.2) * std::pow(n, -0.1); }

namespace {

struct Ols {
  double slope = 0.0, intercept = 0.0, se_slope = 0.0;
  std::vector<double> residuals;
};

Ols ols(std::span<const double> x, std::span<const double> y) {
  Ols r;
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit: abscissae are all equal");
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.residuals.push_back(y[i] - r.intercept - r.slope * x[i]);
    ssr += r.residuals.back() * r.residuals.back();
  }
  if (x.size() > 2) r.se_slope = std::sqrt(ssr / static_cast<double>(x.size() - 2) / sxx);
  return r;
}

}  // namespace

RateFit fit_rate(std::span<const double> n_values, std::span<const double> errors) {
  if (n_values.size() != errors.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (n_values.size() < 3) throw std::invalid_argument("fit_rate: needs at least 3 points");
  std::vector<double> lx, ly, ladj;
  RateFit fit;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(errors[i] > 0.0) || !(n_values[i] > 1.0))
      throw std::invalid_argument("fit_rate: errors must be positive and N > 1");
    lx.push_back(std::log(n_values[i]));
    ly.push_back(std::log(errors[i]));
    ladj.push_back(ly.back() - 0.2 * std::log(lx.back()));
    fit.c_hat = std::max(fit.c_hat, errors[i] / rate_envelope(n_values[i]));
  }
  fit.c_hat_first = errors[0] / rate_envelope(n_values[0]);
  const Ols raw = ols(lx, ly);
  const Ols adj = ols(lx, ladj);
  const boost::math::students_t t_dist(static_cast<double>(lx.size() - 2));
  const double tq = boost::math::quantile(boost::math::complement(t_dist, 0.025));
  fit.valid = true;
  fit.slope = raw.slope;
  fit.intercept = raw.intercept;
  fit.slope_ci_low = raw.slope - tq * raw.se_slope;
  fit.slope_ci_high = raw.slope + tq * raw.se_slope;
  fit.adjusted_slope = adj.slope;
  fit.residuals = adj.residuals;
  return fit;
}

ReplicateMetrics measure_replicate(const ModelParams& params, std::uint64_t replicate,
                                   const Coupler& coupler, const DistanceMap& a) {
  const CoupledRun run = coupled_run(params, replicate, coupler);
  const SupDistance d = sup_distance(run, a);
  const CouplingErrorSummary s =
      coupling_error_summary(run.couplings, params.n_neurons, a.max_first_derivative());
  ReplicateMetrics m;
  m.replicate = replicate;
  m.sup_distance = d.value;
  m.flow_modulus = d.flow_modulus;
  m.remainder = remainder_probe(run, a);
  m.mean_k_stat = s.mean_k_stat;
  m.mean_e_stat = s.mean_e_stat;
  m.finite_events = run.finite.path.events().size();
  m.aux_events = run.aux.events().size();
  return m;
}

std::vector<ReplicateMetrics> run_point(const ModelParams& params, std::size_t replicates,
                                        Execution ex, int jobs) {
  check_structure(params);
  const Coupler coupler = coupler_for(params);
  if (const LatticeLaw* lat = coupler.lattice()) {
    // Build the tables a typical interval needs before going parallel.
    const double expected = static_cast<double>(params.n_neurons) * params.rate_fn.f_max *
                            coupling_delta(params);
    const auto top = std::bit_ceil(static_cast<std::size_t>(2.0 * expected + 64.0));
    lat->power(static_cast<std::size_t>(std::countr_zero(top)));
  }
  const DistanceMap a(params.epsilon);
  return run_replicates(
      replicates, [&](std::size_t r) { return measure_replicate(params, r, coupler, a); }, ex,
      jobs);
}

RateStudyResult mc_rate_study(const ModelParams& base, std::span<const std::size_t> n_values,
                              std::size_t replicates, Execution ex, int jobs,
                              const std::function<void(const RateRecord&)>& on_record) {
  if (replicates < 2) throw std::invalid_argument("rate study: needs at least 2 replicates");
  RateStudyResult result;
  for (std::size_t n : n_values) {
    ModelParams p = base;
    p.n_neurons = n;
    const auto metrics = run_point(p, replicates, ex, jobs);
    RateRecord rec;
    rec.n = n;
    rec.delta = coupling_delta(p);
    rec.replicates = replicates;
    std::vector<double> k, e;
    for (const ReplicateMetrics& m : metrics) {
      rec.errors.push_back(m.sup_distance);
      rec.remainders.push_back(m.remainder);
      k.push_back(m.mean_k_stat);
      e.push_back(m.mean_e_stat);
      rec.max_flow_modulus = std::max(rec.max_flow_modulus, m.flow_modulus);
    }
    rec.error = mean_ci(rec.errors);
    rec.remainder = mean_ci(rec.remainders);
    rec.mean_k_stat = sample_mean(k);
    rec.mean_e_stat = sample_mean(e);
    result.records.push_back(std::move(rec));
    if (on_record) on_record(result.records.back());
  }

  std::vector<double> ns, errs;
  for (const RateRecord& r : result.records) {
    ns.push_back(static_cast<double>(r.n));
    errs.push_back(r.error.mean);
  }
  try {
    result.fit = fit_rate(ns, errs);
  } catch (const std::invalid_argument& e) {
    result.fit = RateFit{};
    result.fit.note = std::string("degenerate fit: ") + e.what();
    if (!ns.empty()) {
      result.fit.c_hat_first = errs[0] / rate_envelope(ns[0]);
      for (std::size_t i = 0; i < ns.size(); ++i)
        result.fit.c_hat = std::max(result.fit.c_hat, errs[i] / rate_envelope(ns[i]));
    }
  }
  return result;
}

double poisson_h(double x) { return (1.0 + x) * std::log1p(x) - x; }

PoissonDeviationResult poisson_deviation_check(std::size_t samples, std::size_t n_neurons,
                                               double delta, double f_min, double f_max,
                                               std::uint64_t seed) {
  if (!(f_min > 0.0 && f_max >= f_min && delta > 0.0))
    throw std::invalid_argument("poisson_deviation_check: need 0 < f_min <= f_max, delta > 0");
  PoissonDeviationResult r;
  r.n_neurons = n_neurons;
  r.delta = delta;
  r.samples = samples;
  const double nd = static_cast<double>(n_neurons) * delta;
  r.threshold = f_min * nd / 2.0;
  r.t = f_max * nd;
  r.x = r.threshold / r.t;
  r.bound = 2.0 * std::exp(-r.t * poisson_h(r.x));

  const JumpLaw nu = JumpLaw::rademacher();
  std::size_t hits = 0;
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    StreamKey key;
    key.base_seed = seed;
    key.replicate = s;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_neurons; ++i)
      for (const CandidateEvent& c : candidates_in(key, i, 0.0, delta, f_max, nu))
        count += c.z <= f_min ? 1 : 0;
    hits += static_cast<double>(count) <= r.threshold ? 1 : 0;
    total += static_cast<double>(count);
  }
  r.empirical = static_cast<double>(hits) / static_cast<double>(samples);
  r.mean_count = total / static_cast<double>(samples);
  return r;
}

IncrementBoundResult increment_bound_check(const ModelParams& params,
                                           std::span<const double> deltas,
                                           std::size_t replicates, Execution ex, int jobs) {
  if (deltas.size() < 2) throw std::invalid_argument("increment_bound_check: needs >= 2 deltas");
  ModelParams p = params;
  p.delta = *std::max_element(deltas.begin(), deltas.end());
  check_structure(p);
  const double horizon = p.horizon;

  struct Sums {
    std::vector<double> sum;
    std::vector<double> count;
  };
  const auto per_rep = run_replicates(
      replicates,
      [&](std::size_t r) {
        const FiniteRun run = simulate(p, r);
        Sums s{std::vector<double>(deltas.size()), std::vector<double>(deltas.size())};
        for (std::size_t d = 0; d < deltas.size(); ++d) {
          const double dt = deltas[d];
          for (std::size_t k = 0; (static_cast<double>(k) + 1.0) * dt <= horizon * (1 + 1e-12);
               ++k) {
            const double t0 = static_cast<double>(k) * dt;
            const double t1 = std::min(horizon, t0 + dt);
            s.sum[d] += std::abs(run.path.value_at(0, t0, true) - run.path.value_at(0, t1, false));
            s.count[d] += 1.0;
          }
        }
        return s;
      },
      ex, jobs);

  IncrementBoundResult out;
  out.deltas.assign(deltas.begin(), deltas.end());
  std::vector<double> lx, ly;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    double sum = 0.0, count = 0.0;
    for (const Sums& s : per_rep) {
      sum += s.sum[d];
      count += s.count[d];
    }
    out.means.push_back(count > 0.0 ? sum / count : 0.0);
    lx.push_back(std::log(deltas[d]));
    ly.push_back(std::log(std::max(out.means.back(), 1e-300)));
  }
  const Ols fit = ols(lx, ly);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  return out;
}

double distance_bundle_constant(const DistanceMap& a, const RateFunction& f,
                                std::span<const double> xs, std::span<const double> ys) {
  double c = 0.0;
  for (double x : xs) {
    const double ax = a(x), a1x = a.eval(x, 1), a2x = a.eval(x, 2), fx = f(x);
    for (double y : ys) {
      const double den = std::abs(ax - a(y));
      if (den == 0.0) continue;
      const double a1y = a.eval(y, 1);
      const double num = std::abs(a2x - a.eval(y, 2)) + std::abs(a1x - a1y) +
                         std::abs(x * a1x - y * a1y) + std::abs(fx - f(y));
      c = std::max(c, num / den);
    }
  }
  return c;
}

double fd_derivative_error(const DistanceMap& a, int order, std::span<const double> xs, double h) {
  if (order < 1 || order > 3) throw std::invalid_argument("fd_derivative_error: order in 1..3");
  double err = 0.0, scale = 0.0;
  for (double x : xs) {
    const double fd = (a.eval(x + h, order - 1) - a.eval(x - h, order - 1)) / (2.0 * h);
    const double exact = a.eval(x, order);
    err = std::max(err, std::abs(fd - exact));
    scale = std::max(scale, std::abs(exact));
  }
  return scale > 0.0 ? err / scale : err;
}

HierarchyResult coupler_hierarchy(const ModelParams& params, std::size_t replicates, Execution ex,
                                  int jobs) {
  HierarchyResult h;
  h.n_neurons = params.n_neurons;
  h.replicates = replicates;
  h.methods = {CouplerMethod::dyadic, CouplerMethod::comonotone, CouplerMethod::independent};
  std::vector<std::vector<double>> err;
  for (CouplerMethod m : h.methods) {
    ModelParams p = params;
    p.coupler = m;
    std::vector<double> e;
    for (const ReplicateMetrics& r : run_point(p, replicates, ex, jobs)) e.push_back(r.sup_distance);
    h.errors.push_back(mean_ci(e));
    err.push_back(std::move(e));
  }
  for (std::size_t i = 0; i + 1 < h.methods.size(); ++i) {
    std::vector<double> d(replicates);
    for (std::size_t r = 0; r < replicates; ++r) d[r] = err[i + 1][r] - err[i][r];
    PairedGap g;
    g.lower = h.methods[i];
    g.higher = h.methods[i + 1];
    g.mean_diff = sample_mean(d);
    g.se = sample_sd(d) / std::sqrt(static_cast<double>(replicates));
    g.z = g.se > 0.0 ? g.mean_diff / g.se : 0.0;
    g.verdict = g.z >= 4.0 ? "ordered" : (g.z <= -4.0 ? "reversed" : "indistinguishable");
    h.gaps.push_back(g);
  }
  return h;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form, fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      s += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  TestResult r;
  r.statistic = d;
  const double rn = std::sqrt(n);
  r.p_value = kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

TestResult chi_square_poisson(std::span<const std::size_t> counts, double mean) {
  if (counts.empty() || !(mean > 0.0)) throw std::invalid_argument("chi_square_poisson: bad input");
  const boost::math::poisson_distribution<double> pois(mean);
  const double n = static_cast<double>(counts.size());
  const std::size_t kmax = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(kmax + 1, 0.0);
  for (std::size_t c : counts) observed[c] += 1.0;

  // Cells [lo, hi); the last one is open-ended.
  std::vector<double> cell_obs, cell_exp;
  double obs = 0.0, exp = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    obs += observed[k];
    exp += n * boost::math::pdf(pois, static_cast<double>(k));
    const double tail = n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(k)));
    if (exp >= 5.0 && tail >= 5.0) {
      cell_obs.push_back(obs);
      cell_exp.push_back(exp);
      obs = exp = 0.0;
    }
  }
  exp += n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(kmax)));
  if (!cell_obs.empty() && exp < 5.0) {
    cell_obs.back() += obs;
    cell_exp.back() += exp;
  } else {
    cell_obs.push_back(obs);
    cell_exp.push_back(exp);
  }

  TestResult r;
  for (std::size_t i = 0; i < cell_obs.size(); ++i)
    r.statistic += (cell_obs[i] - cell_exp[i]) * (cell_obs[i] - cell_exp[i]) / cell_exp[i];
  r.df = static_cast<double>(cell_obs.size()) - 1.0;
  if (r.df < 1.0) {
    r.p_value = 1.0;
    return r;
  }
  const boost::math::chi_squared chi(r.df);
  r.p_value = boost::math::cdf(boost::math::complement(chi, r.statistic));
  return r;
}

}  // namespace mfnc
