#include "mfnc/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>

#include <boost/version.hpp>
#include <fftw3.h>
#include "json.hpp"

#include "mfnc/auxiliary_system.hpp"
#include "mfnc/coupling.hpp"
#include "mfnc/finite_system.hpp"
#include "mfnc/report.hpp"
#include "mfnc/stats.hpp"
#include "mfnc/summary.hpp"

namespace mfnc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string str(double v) { return fmt_double(v); }
std::string str(std::size_t v) { return std::to_string(v); }
std::string str(bool v) { return v ? "1" : "0"; }

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json validation_json(const ValidationReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"check", c.check}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"ok", rep.ok()}, {"checks", checks}};
}

// Runs before every experiment; the caller turns false into exit code 2.
bool assumptions_hold(const ModelParams& p, const fs::path& dir) {
  const ValidationReport rep = validate_assumptions(p);
  if (rep.ok()) return true;
  write_json(dir / "validation.json", validation_json(rep));
  for (const auto& c : rep.checks)
    if (!c.passed) std::cerr << "assumption failed: " << c.name << " (" << c.detail << ")\n";
  return false;
}

json ci_json(const MeanCI& c) {
  return {{"mean", c.mean}, {"std", c.sd}, {"ci_low", c.ci_low}, {"ci_high", c.ci_high}};
}

// Times of the substep grid without building W.
std::vector<double> substep_grid(const ModelParams& p) {
  const IntervalGrid g = make_grid(p);
  std::vector<double> t{0.0};
  for (std::size_t k = 0; k < g.count(); ++k)
    for (std::size_t j = 1; j <= p.substeps_per_delta; ++j)
      t.push_back(j == p.substeps_per_delta
                      ? g.edges[k + 1]
                      : g.edges[k] + (g.edges[k + 1] - g.edges[k]) * static_cast<double>(j) /
                                         static_cast<double>(p.substeps_per_delta));
  return t;
}

}  // namespace

std::string artifact_dir_name(const std::string& experiment, const Config& cfg) {
  return experiment + "-" + cfg.digest();
}

void write_manifest(const fs::path& dir, const std::string& experiment, const Config& cfg,
                    const RunContext& ctx, double wall_seconds) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json j;
  j["experiment"] = experiment;
  j["config_digest"] = cfg.digest();
  j["config"] = cfg.entries();
  j["seed"] = cfg.get_u64("seed");
  j["versions"] = {{"mfnc", kVersion},
                   {"compiler", __VERSION__},
                   {"boost", BOOST_LIB_VERSION},
                   {"fftw", std::string(fftw_version)},
                   {"openmp", _OPENMP}};
  j["execution"] = ctx.execution == Execution::serial ? "serial" : "openmp";
  j["jobs"] = resolve_jobs(ctx.jobs);
  j["wall_time_seconds"] = wall_seconds;
  j["finished_utc"] = stamp;
  write_json(dir / "manifest.json", j);
}

int run_validate(const Config& cfg, const RunContext& ctx) {
  const ValidationReport rep = validate_assumptions(cfg.model());
  write_json(ctx.dir / "validation.json", validation_json(rep));
  for (const auto& c : rep.checks)
    std::cout << (c.passed ? "pass  " : "FAIL  ") << c.name << ": " << c.detail << "\n";
  return rep.ok() ? 0 : 2;
}

int run_simulate_finite(const Config& cfg, const RunContext& ctx) {
  const ModelParams p = cfg.model();
  if (!assumptions_hold(p, ctx.dir)) return 2;
  const std::size_t R = cfg.get_size("replicates");
  const auto runs = run_replicates(R, [&](std::size_t r) { return simulate(p, r); },
                                   ctx.execution, ctx.jobs);
  const std::vector<double> grid = substep_grid(p);

  CsvWriter events(ctx.dir / "events.csv", {"replicate", "neuron", "time", "z", "u", "accepted_live",
                                            "accepted_frozen"});
  CsvWriter paths(ctx.dir / "paths.csv", {"replicate", "system", "neuron", "grid_time", "value"});
  json reps = json::array();
  for (std::size_t r = 0; r < R; ++r) {
    const FiniteRun& run = runs[r];
    std::size_t live = 0, frozen = 0, candidates = 0;
    for (const IntervalLog& log : run.intervals) {
      for (const IntervalCandidate& c : log.candidates) {
        events.row({str(r), str(c.candidate.neuron), str(c.candidate.time),
                    str(c.candidate.z), str(c.candidate.u), str(c.accepted_live),
                    str(c.accepted_frozen)});
        ++candidates;
      }
      live += log.live_count();
      frozen += log.frozen_count();
    }
    for (std::size_t i = 0; i < run.path.size(); ++i)
      for (double t : grid)
        paths.row({str(r), "finite", str(i), str(t), str(run.path.value_at(i, t))});
    reps.push_back({{"replicate", r},
                    {"candidates", candidates},
                    {"accepted_live", live},
                    {"accepted_frozen", frozen}});
  }
  write_json(ctx.dir / "summary.json", {{"experiment", "simulate-finite"},
                                        {"config_digest", cfg.digest()},
                                        {"n_neurons", p.n_neurons},
                                        {"delta", coupling_delta(p)},
                                        {"replicates", reps}});
  return 0;
}

int run_simulate_coupled(const Config& cfg, const RunContext& ctx) {
  const ModelParams p = cfg.model();
  if (!assumptions_hold(p, ctx.dir)) return 2;
  const std::size_t R = cfg.get_size("replicates");
  const Coupler coupler = coupler_for(p);
  const DistanceMap a(p.epsilon);
  const auto runs = run_replicates(R, [&](std::size_t r) { return coupled_run(p, r, coupler); },
                                   ctx.execution, ctx.jobs);

  CsvWriter intervals(ctx.dir / "intervals.csv",
                      {"replicate", "k", "n_frozen", "w_increment", "k_stat", "e_stat", "t_start",
                       "t_end", "partial", "rate_sum"});
  CsvWriter paths(ctx.dir / "paths.csv", {"replicate", "system", "neuron", "grid_time", "value"});
  CsvWriter brownian(ctx.dir / "brownian.csv", {"replicate", "time", "w"});
  json reps = json::array();
  for (std::size_t r = 0; r < R; ++r) {
    const CoupledRun& run = runs[r];
    for (const IntervalCoupling& c : run.couplings)
      intervals.row({str(r), str(c.k), str(c.n_frozen), str(c.w_increment), str(c.k_stat),
                     str(c.e_stat), str(c.t_start), str(c.t_end), str(c.partial),
                     str(c.rate_sum)});
    const auto& times = run.W.substep_times;
    for (std::size_t j = 0; j < times.size(); ++j)
      brownian.row({str(r), str(times[j]), str(run.W.substep_values[j])});
    for (std::size_t i = 0; i < p.n_neurons; ++i) {
      for (double t : times)
        paths.row({str(r), "finite", str(i), str(t), str(run.finite.path.value_at(i, t))});
      for (double t : times)
        paths.row({str(r), "aux", str(i), str(t), str(run.aux.value_at(i, t))});
    }
    const SupDistance d = sup_distance(run, a);
    const CouplingErrorSummary s =
        coupling_error_summary(run.couplings, p.n_neurons, a.max_first_derivative());
    reps.push_back({{"replicate", r},
                    {"sup_distance", d.value},
                    {"flow_modulus", d.flow_modulus},
                    {"evaluation_points", d.points},
                    {"remainder", remainder_probe(run, a)},
                    {"finite_events", run.finite.path.events().size()},
                    {"aux_events", run.aux.events().size()},
                    {"coupling",
                     {{"intervals", s.intervals},
                      {"mean_n_frozen", s.mean_n_frozen},
                      {"k_stat", {{"mean", s.mean_k_stat}, {"p50", s.p50_k_stat},
                                  {"p90", s.p90_k_stat}, {"p99", s.p99_k_stat}}},
                      {"e_stat", {{"mean", s.mean_e_stat}, {"p50", s.p50_e_stat},
                                  {"p90", s.p90_e_stat}, {"p99", s.p99_e_stat}}},
                      {"k_term", s.k_term},
                      {"e_term", s.e_term}}}});
  }
  write_json(ctx.dir / "summary.json", {{"experiment", "simulate-coupled"},
                                        {"config_digest", cfg.digest()},
                                        {"n_neurons", p.n_neurons},
                                        {"delta", coupling_delta(p)},
                                        {"coupler", to_string(coupler.method())},
                                        {"replicates", reps}});
  return 0;
}

int run_rate_study(const Config& cfg, const RunContext& ctx) {
  const ModelParams base = cfg.model();
  const std::vector<std::size_t> ns = cfg.get_sizes("study.n_values");
  const std::size_t R = cfg.get_size("study.replicates");
  for (std::size_t n : ns) {
    ModelParams p = base;
    p.n_neurons = n;
    if (!assumptions_hold(p, ctx.dir)) return 2;
  }

  // Per-N rows are flushed as each N completes.
  CsvWriter summary(ctx.dir / "rate_study.csv",
                    {"N", "delta", "R", "mean", "std", "ci_low", "ci_high", "envelope",
                     "remainder_mean", "remainder_ci_low", "remainder_ci_high", "mean_k_stat",
                     "mean_e_stat", "max_flow_modulus"});
  CsvWriter replicates(ctx.dir / "replicates.csv", {"N", "replicate", "sup_distance", "remainder"});
  const RateStudyResult res = mc_rate_study(
      base, ns, R, ctx.execution, ctx.jobs, [&](const RateRecord& r) {
        summary.row({str(r.n), str(r.delta), str(r.replicates), str(r.error.mean),
                     str(r.error.sd), str(r.error.ci_low), str(r.error.ci_high),
                     str(rate_envelope(static_cast<double>(r.n))), str(r.remainder.mean),
                     str(r.remainder.ci_low), str(r.remainder.ci_high), str(r.mean_k_stat),
                     str(r.mean_e_stat), str(r.max_flow_modulus)});
        for (std::size_t i = 0; i < r.errors.size(); ++i)
          replicates.row({str(r.n), str(i), str(r.errors[i]), str(r.remainders[i])});
        summary.flush();
        replicates.flush();
      });

  json records = json::array();
  for (const RateRecord& r : res.records) {
    json rec = ci_json(r.error);
    rec["N"] = r.n;
    rec["delta"] = r.delta;
    rec["R"] = r.replicates;
    rec["envelope"] = rate_envelope(static_cast<double>(r.n));
    rec["remainder"] = ci_json(r.remainder);
    rec["mean_k_stat"] = r.mean_k_stat;
    rec["mean_e_stat"] = r.mean_e_stat;
    rec["max_flow_modulus"] = r.max_flow_modulus;
    records.push_back(rec);
  }
  const RateFit& f = res.fit;
  json fit = {{"valid", f.valid}, {"note", f.note}};
  if (f.valid) {
    fit["slope"] = f.slope;
    fit["slope_ci"] = {f.slope_ci_low, f.slope_ci_high};
    fit["intercept"] = f.intercept;
    fit["adjusted_slope"] = f.adjusted_slope;
    fit["c_hat"] = f.c_hat;
    fit["c_hat_first"] = f.c_hat_first;
    fit["residuals"] = f.residuals;
  } else {
    fit["slope"] = nullptr;
    fit["slope_ci"] = nullptr;
    fit["c_hat"] = nullptr;
  }
  write_json(ctx.dir / "rate_study.json", {{"experiment", "rate-study"},
                                           {"config_digest", cfg.digest()},
                                           {"records", records},
                                           {"fit", fit}});

  if (ctx.plot && !res.records.empty()) {
    PlotSeries err{"mean sup-distance (95% CI)", {}, {}, {}, {}, false};
    PlotSeries env{"C(64) x (ln N)^(1/5) N^(-1/10)", {}, {}, {}, {}, true};
    const double c = res.records.front().error.mean /
                     rate_envelope(static_cast<double>(res.records.front().n));
    for (const RateRecord& r : res.records) {
      const double n = static_cast<double>(r.n);
      err.x.push_back(n);
      err.y.push_back(r.error.mean);
      err.y_low.push_back(r.error.ci_low);
      err.y_high.push_back(r.error.ci_high);
      env.x.push_back(n);
      env.y.push_back(c * rate_envelope(n));
    }
    write_text(ctx.dir / "rate_study.svg",
               svg_loglog("Coupling error vs N", "N", "E sup |a(X) - a(aux)|", {err, env}));
  }
  return 0;
}

WalkCoupling bench_walk(const Coupler& coupler, std::size_t n, std::uint64_t seed,
                        std::uint64_t replicate) {
  StreamKey key{seed, replicate, Purpose::marks, 0, n};
  RandomStream marks_stream(key);
  std::vector<double> marks(n);
  for (double& u : marks) u = sample_jump(coupler.law(), marks_stream.uniform());
  return coupler.couple(marks, RandomStream(key.with(Purpose::coupler_v)));
}

int run_coupler_bench(const Config& cfg, const RunContext& ctx) {
  const ModelParams p = cfg.model();
  if (!assumptions_hold(p, ctx.dir)) return 2;
  const std::vector<std::size_t> ns = cfg.get_sizes("bench.n_values");
  const std::size_t R = cfg.get_size("bench.replicates");
  std::vector<CouplerMethod> methods;
  if (p.jump_law.is_discrete()) methods.push_back(CouplerMethod::dyadic);
  methods.push_back(CouplerMethod::comonotone);
  methods.push_back(CouplerMethod::independent);

  CsvWriter csv(ctx.dir / "sup_stats.csv", {"method", "n", "replicate", "sup_stat"});
  json walk = json::array();
  std::map<std::size_t, std::vector<Histogram>> hists;
  for (CouplerMethod m : methods) {
    const Coupler coupler(p.jump_law, m);
    json per_n = json::array();
    std::vector<double> q99;
    for (std::size_t n : ns) {
      if (const LatticeLaw* lat = coupler.lattice())
        lat->power(static_cast<std::size_t>(std::countr_zero(std::bit_ceil(std::max<std::size_t>(n, 1)))));
      const auto stats = run_replicates(
          R, [&](std::size_t r) { return bench_walk(coupler, n, p.base_seed, r).sup_stat; },
          ctx.execution, ctx.jobs);
      for (std::size_t r = 0; r < R; ++r) csv.row({to_string(m), str(n), str(r), str(stats[r])});
      q99.push_back(sample_quantile(stats, 0.99));
      per_n.push_back({{"n", n},
                       {"mean", sample_mean(stats)},
                       {"std", sample_sd(stats)},
                       {"p50", sample_quantile(stats, 0.5)},
                       {"p99", q99.back()}});
      hists[n].push_back({to_string(m), stats});
    }
    json entry = {{"method", to_string(m)}, {"records", per_n}};
    entry["p99_ratio_last_first"] = q99.size() >= 2 ? json(q99.back() / q99.front()) : json(nullptr);
    walk.push_back(entry);
  }

  json out = {{"experiment", "coupler-bench"}, {"config_digest", cfg.digest()}, {"walks", walk}};
  if (p.jump_law.is_discrete()) {
    ModelParams hp = p;
    hp.n_neurons = cfg.get_size("bench.hierarchy_n");
    const HierarchyResult h = coupler_hierarchy(hp, R, ctx.execution, ctx.jobs);
    json errs = json::array(), gaps = json::array();
    for (std::size_t i = 0; i < h.methods.size(); ++i) {
      json e = ci_json(h.errors[i]);
      e["method"] = to_string(h.methods[i]);
      errs.push_back(e);
    }
    for (const PairedGap& g : h.gaps)
      gaps.push_back({{"lower", to_string(g.lower)},
                      {"higher", to_string(g.higher)},
                      {"mean_diff", g.mean_diff},
                      {"se", g.se},
                      {"z", g.z},
                      {"verdict", g.verdict}});
    out["hierarchy"] = {{"N", h.n_neurons}, {"R", h.replicates}, {"errors", errs}, {"gaps", gaps}};
  } else {
    out["hierarchy"] = nullptr;
  }
  write_json(ctx.dir / "coupler_bench.json", out);

  if (ctx.plot)
    for (const auto& [n, hs] : hists)
      write_text(ctx.dir / ("sup_stat_n" + std::to_string(n) + ".svg"),
                 svg_histograms("sup_m |S_m - B_m| / ln(m v 2), n = " + std::to_string(n),
                                "sup_stat", hs));
  return 0;
}

int run_remainder_probe(const Config& cfg, const RunContext& ctx) {
  const ModelParams base = cfg.model();
  const std::vector<std::size_t> ns = cfg.get_sizes("remainder.n_values");
  const std::size_t R = cfg.get_size("remainder.replicates");
  CsvWriter per_rep(ctx.dir / "remainder.csv", {"N", "replicate", "remainder"});
  CsvWriter summary(ctx.dir / "remainder_summary.csv",
                    {"N", "delta", "R", "mean", "std", "ci_low", "ci_high"});
  json records = json::array();
  PlotSeries series{"mean |R| (95% CI)", {}, {}, {}, {}, false};
  for (std::size_t n : ns) {
    ModelParams p = base;
    p.n_neurons = n;
    if (!assumptions_hold(p, ctx.dir)) return 2;
    std::vector<double> v;
    for (const ReplicateMetrics& m : run_point(p, R, ctx.execution, ctx.jobs)) {
      per_rep.row({str(n), str(m.replicate), str(m.remainder)});
      v.push_back(m.remainder);
    }
    const MeanCI c = mean_ci(v);
    summary.row({str(n), str(coupling_delta(p)), str(R), str(c.mean), str(c.sd), str(c.ci_low),
                 str(c.ci_high)});
    summary.flush();
    json rec = ci_json(c);
    rec["N"] = n;
    rec["delta"] = coupling_delta(p);
    rec["R"] = R;
    records.push_back(rec);
    series.x.push_back(static_cast<double>(n));
    series.y.push_back(c.mean);
    series.y_low.push_back(c.ci_low);
    series.y_high.push_back(c.ci_high);
  }
  write_json(ctx.dir / "remainder_probe.json", {{"experiment", "remainder-probe"},
                                                {"config_digest", cfg.digest()},
                                                {"records", records}});
  if (ctx.plot)
    write_text(ctx.dir / "remainder_probe.svg",
               svg_loglog("Realized remainder vs N", "N", "E |R(0, t)|", {series}));
  return 0;
}

int run_appendix_checks(const Config& cfg, const RunContext& ctx) {
  const ModelParams base = cfg.model();
  if (!assumptions_hold(base, ctx.dir)) return 2;

  ModelParams ip = base;
  ip.n_neurons = cfg.get_size("checks.increment_n");
  const std::vector<double> deltas = cfg.get_doubles("checks.increment_deltas");
  const IncrementBoundResult inc = increment_bound_check(
      ip, deltas, cfg.get_size("checks.increment_replicates"), ctx.execution, ctx.jobs);
  CsvWriter inc_csv(ctx.dir / "increment.csv", {"delta", "mean_abs_increment"});
  for (std::size_t i = 0; i < inc.deltas.size(); ++i)
    inc_csv.row({str(inc.deltas[i]), str(inc.means[i])});

  CsvWriter pois_csv(ctx.dir / "poisson.csv", {"N", "delta", "samples", "threshold", "t", "x",
                                               "bound", "empirical", "mean_count", "n_delta"});
  json pois = json::array();
  const std::size_t samples = cfg.get_size("checks.poisson_samples");
  for (std::size_t n : cfg.get_sizes("checks.poisson_n")) {
    for (double d : cfg.get_doubles("checks.poisson_deltas")) {
      const PoissonDeviationResult r = poisson_deviation_check(
          samples, n, d, base.rate_fn.f_min, base.rate_fn.f_max, base.base_seed);
      const double nd = static_cast<double>(n) * d;
      pois_csv.row({str(n), str(d), str(samples), str(r.threshold), str(r.t), str(r.x),
                    str(r.bound), str(r.empirical), str(r.mean_count), str(nd)});
      pois.push_back({{"N", n},
                      {"delta", d},
                      {"n_delta", nd},
                      {"threshold", r.threshold},
                      {"t", r.t},
                      {"x", r.x},
                      {"h", poisson_h(r.x)},
                      {"bound", r.bound},
                      {"empirical", r.empirical},
                      {"mean_count", r.mean_count},
                      {"in_scope", nd >= 20.0},
                      {"below_bound", r.empirical <= r.bound}});
    }
  }

  // Points within 1e-3 of +-1 are skipped: a'''' jumps there, which spoils
  // the O(h^2) central difference for the third derivative.
  const DistanceMap a(base.epsilon);
  std::vector<double> fd_grid;
  for (int i = 0; i <= 800; ++i) {
    const double x = -4.0 + 0.01 * i;
    if (std::abs(std::abs(x) - 1.0) > 1e-3) fd_grid.push_back(x);
  }
  std::vector<double> bundle_grid;
  for (int i = 0; i < 100; ++i) bundle_grid.push_back(-5.0 + 10.0 * i / 99.0);
  json dist = {{"epsilon", base.epsilon},
               {"a_minus_one", a.at_minus_one()},
               {"a_minus_one_closed_form", std::pow(2.0, -base.epsilon) / base.epsilon},
               {"fd_relative_error",
                {fd_derivative_error(a, 1, fd_grid, 1e-4), fd_derivative_error(a, 2, fd_grid, 1e-4),
                 fd_derivative_error(a, 3, fd_grid, 1e-4)}},
               {"bundle_pairs", bundle_grid.size() * bundle_grid.size()},
               {"bundle_constant",
                distance_bundle_constant(a, base.rate_fn, bundle_grid, bundle_grid)}};

  write_json(ctx.dir / "appendix_checks.json",
             {{"experiment", "appendix-checks"},
              {"config_digest", cfg.digest()},
              {"increment", {{"N", ip.n_neurons},
                             {"deltas", inc.deltas},
                             {"means", inc.means},
                             {"slope", inc.slope},
                             {"intercept", inc.intercept}}},
              {"poisson", pois},
              {"distance_map", dist}});
  return 0;
}

ExperimentFn find_experiment(const std::string& name) {
  static const std::map<std::string, ExperimentFn> table = {
      {"validate", run_validate},
      {"simulate-finite", run_simulate_finite},
      {"simulate-coupled", run_simulate_coupled},
      {"rate-study", run_rate_study},
      {"coupler-bench", run_coupler_bench},
      {"remainder-probe", run_remainder_probe},
      {"appendix-checks", run_appendix_checks},
  };
  const auto it = table.find(name);
  return it == table.end() ? nullptr : it->second;
}

}  // namespace mfnc
