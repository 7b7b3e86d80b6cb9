#include "mfnc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "mfnc/normal.hpp"

namespace mfnc {

// ---------------------------------------------------------------------------
// RateFunction
// ---------------------------------------------------------------------------

double RateFunction::operator()(double x) const {
  const double span = f_max - f_min;
  switch (kind) {
    case RateKind::constant:
      return f_min;
    case RateKind::cauchy_bump:
      return f_min + span / (1.0 + x * x);
    case RateKind::logistic:
      // split on sign so exp never overflows
      if (x >= 0.0) return f_min + span / (1.0 + std::exp(-x));
      return f_min + span * std::exp(x) / (1.0 + std::exp(x));
  }
  return f_min;
}

double RateFunction::derivative(double x) const {
  const double span = f_max - f_min;
  switch (kind) {
    case RateKind::constant:
      return 0.0;
    case RateKind::cauchy_bump: {
      const double d = 1.0 + x * x;
      return -2.0 * span * x / (d * d);
    }
    case RateKind::logistic: {
      const double e = std::exp(-std::abs(x));
      return span * e / ((1.0 + e) * (1.0 + e));
    }
  }
  return 0.0;
}

double eval_rate(const RateFunction& f, double x) { return f(x); }

// ---------------------------------------------------------------------------
// JumpLaw / InitLaw
// ---------------------------------------------------------------------------

JumpLaw JumpLaw::rademacher() { return JumpLaw{JumpKind::rademacher, {}, {}}; }

JumpLaw JumpLaw::standard_gaussian() { return JumpLaw{JumpKind::standard_gaussian, {}, {}}; }

JumpLaw JumpLaw::lattice(std::vector<double> support, std::vector<double> probs) {
  if (support.size() != probs.size() || support.empty())
    throw std::invalid_argument("lattice law: support and probs must be non-empty and aligned");
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  JumpLaw law{JumpKind::lattice, {}, {}};
  for (std::size_t i : order) {
    if (!law.support.empty() && law.support.back() == support[i])
      throw std::invalid_argument("lattice law: duplicate atom");
    law.support.push_back(support[i]);
    law.probs.push_back(probs[i]);
  }
  return law;
}

std::vector<std::pair<double, double>> JumpLaw::atoms() const {
  switch (kind) {
    case JumpKind::rademacher:
      return {{-1.0, 0.5}, {1.0, 0.5}};
    case JumpKind::lattice: {
      std::vector<std::pair<double, double>> out;
      for (std::size_t i = 0; i < support.size(); ++i) out.emplace_back(support[i], probs[i]);
      return out;
    }
    case JumpKind::standard_gaussian:
      break;
  }
  throw std::logic_error("continuous jump law has no atoms");
}

double JumpLaw::mean() const {
  if (kind == JumpKind::standard_gaussian) return 0.0;
  double m = 0.0;
  for (auto [x, p] : atoms()) m += x * p;
  return m;
}

double JumpLaw::variance() const {
  if (kind == JumpKind::standard_gaussian) return 1.0;
  const double m = mean();
  double v = 0.0;
  for (auto [x, p] : atoms()) v += (x - m) * (x - m) * p;
  return v;
}

std::pair<double, double> JumpLaw::atom_cdf(double x) const {
  double below = 0.0;
  for (auto [atom, p] : atoms()) {
    if (atom == x) return {below, below + p};
    below += p;
  }
  throw std::invalid_argument("atom_cdf: value is not an atom of the law");
}

double sample_jump(const JumpLaw& law, double u01) {
  switch (law.kind) {
    case JumpKind::rademacher:
      return u01 < 0.5 ? -1.0 : 1.0;
    case JumpKind::standard_gaussian:
      return normal_quantile(u01);
    case JumpKind::lattice: {
      double cdf = 0.0;
      for (std::size_t i = 0; i + 1 < law.support.size(); ++i) {
        cdf += law.probs[i];
        if (u01 < cdf) return law.support[i];
      }
      return law.support.back();
    }
  }
  return 0.0;
}

double InitLaw::sample(double u01) const {
  switch (kind) {
    case InitKind::uniform:
      return scale * (2.0 * u01 - 1.0);
    case InitKind::gaussian:
      return scale * normal_quantile(u01);
    case InitKind::point:
      return scale;
  }
  return 0.0;
}

double InitLaw::second_moment() const {
  switch (kind) {
    case InitKind::uniform:
      return scale * scale / 3.0;
    case InitKind::gaussian:
    case InitKind::point:
      return scale * scale;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// psi / DistanceMap
// ---------------------------------------------------------------------------

double psi(double y, int order) {
  if (std::abs(y) >= 1.0) {
    switch (order) {
      case 0: return std::abs(y);
      case 1: return y > 0.0 ? 1.0 : -1.0;
      default: return 0.0;
    }
  }
  const double y2 = y * y;
  switch (order) {
    case 0: return 0.375 + 0.75 * y2 - 0.125 * y2 * y2;
    case 1: return 1.5 * y - 0.5 * y * y2;
    case 2: return 1.5 - 1.5 * y2;
    case 3: return -3.0 * y;
  }
  throw std::invalid_argument("psi: order must be 0..3");
}

namespace {
using Quadrature = boost::math::quadrature::gauss<double, 20>;
constexpr double kCoreWidth = 2.0 / static_cast<double>(DistanceMap::kBreakpoints);
}  // namespace

DistanceMap::DistanceMap(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("distance map: epsilon must be positive");
  a_minus1_ = std::pow(2.0, -epsilon_) / epsilon_;
  cumulative_.resize(kBreakpoints + 1);
  cumulative_[0] = 0.0;
  auto g = [this](double y) { return integrand(y); };
  for (std::size_t j = 0; j < kBreakpoints; ++j) {
    const double lo = -1.0 + kCoreWidth * static_cast<double>(j);
    cumulative_[j + 1] = cumulative_[j] + Quadrature::integrate(g, lo, lo + kCoreWidth);
  }
  a_1_ = a_minus1_ + cumulative_.back();
}

double DistanceMap::integrand(double y) const { return std::pow(1.0 + psi(y), -(1.0 + epsilon_)); }

double DistanceMap::eval(double x, int order) const {
  const double e = epsilon_;
  if (order == 0) {
    if (x <= -1.0) return std::pow(1.0 - x, -e) / e;
    if (x >= 1.0) return a_1_ + (std::pow(2.0, -e) - std::pow(1.0 + x, -e)) / e;
    const double pos = (x + 1.0) / kCoreWidth;
    const auto j = std::min(static_cast<std::size_t>(pos), kBreakpoints - 1);
    const double lo = -1.0 + kCoreWidth * static_cast<double>(j);
    if (x == lo) return a_minus1_ + cumulative_[j];
    return a_minus1_ + cumulative_[j] +
           Quadrature::integrate([this](double y) { return integrand(y); }, lo, x);
  }
  const double p = 1.0 + psi(x, 0);
  const double d1 = psi(x, 1);
  switch (order) {
    case 1:
      return std::pow(p, -(1.0 + e));
    case 2:
      return -(1.0 + e) * std::pow(p, -(2.0 + e)) * d1;
    case 3:
      return (1.0 + e) * (2.0 + e) * std::pow(p, -(3.0 + e)) * d1 * d1 -
             (1.0 + e) * std::pow(p, -(2.0 + e)) * psi(x, 2);
  }
  throw std::invalid_argument("eval_distance: order must be 0..3");
}

double DistanceMap::sup_value() const { return a_1_ + std::pow(2.0, -epsilon_) / epsilon_; }

double DistanceMap::max_first_derivative() const { return eval(0.0, 1); }

double eval_distance(const DistanceMap& a, double x, int order) { return a.eval(x, order); }

// ---------------------------------------------------------------------------
// ModelParams
// ---------------------------------------------------------------------------

double balanced_delta(std::size_t n_neurons) {
  const double n = static_cast<double>(n_neurons);
  return std::pow(std::log(n), 0.8) * std::pow(n, -0.4);
}

double coupling_delta(const ModelParams& params) {
  if (params.delta) return *params.delta;
  const double target = balanced_delta(params.n_neurons);
  if (!(params.horizon > 0.0)) return target;
  const double intervals = std::ceil(params.horizon / target - 1e-12);
  return params.horizon / intervals;
}

IntervalGrid make_grid(const ModelParams& params) {
  IntervalGrid grid;
  grid.delta = coupling_delta(params);
  const double h = params.horizon;
  const double tol = 1e-9 * std::max(1.0, h);
  grid.edges.push_back(0.0);
  if (!(h > 0.0)) return grid;
  grid.full = static_cast<std::size_t>(std::floor(h / grid.delta + 1e-9));
  for (std::size_t k = 1; k <= grid.full; ++k)
    grid.edges.push_back(std::min(static_cast<double>(k) * grid.delta, h));
  if (h - grid.edges.back() > tol) {
    grid.has_partial = true;
    grid.edges.push_back(h);
  } else {
    grid.edges.back() = h;
  }
  return grid;
}

void check_structure(const ModelParams& p) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (p.n_neurons < 2) fail("n_neurons must be >= 2");
  if (!(p.horizon >= 0.0) || !std::isfinite(p.horizon)) fail("horizon must be finite and >= 0");
  if (p.substeps_per_delta < 1) fail("substeps_per_delta must be >= 1");
  if (!(p.alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(p.epsilon > 0.0)) fail("epsilon must be positive");
  const double d = coupling_delta(p);
  if (!(d > 0.0 && d < 1.0)) fail("delta must lie in (0, 1)");
  if (!(p.rate_fn.f_max >= p.rate_fn.f_min)) fail("f.max must be >= f.min");
  if (!(p.rate_fn.f_max > 0.0)) fail("f.max must be positive");
  if (p.jump_law.kind == JumpKind::lattice) {
    for (double q : p.jump_law.probs)
      if (!(q >= 0.0)) fail("nu.probs must be non-negative");
  }
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}
}  // namespace

ValidationReport validate_assumptions(const ModelParams& params) {
  ValidationReport report;
  auto add = [&](std::string name, std::string check, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), std::move(check), ok, std::move(detail)});
  };

  try {
    check_structure(params);
    add("structure", "N >= 2, horizon >= 0, 0 < delta < 1, f.max >= f.min", true,
        "delta=" + fmt(coupling_delta(params)));
  } catch (const std::invalid_argument& e) {
    add("structure", "N >= 2, horizon >= 0, 0 < delta < 1, f.max >= f.min", false, e.what());
  }

  const JumpLaw& nu = params.jump_law;
  bool probs_ok = true;
  if (nu.kind == JumpKind::lattice) {
    const double mass = std::accumulate(nu.probs.begin(), nu.probs.end(), 0.0);
    probs_ok = std::abs(mass - 1.0) <= 1e-9 &&
               std::all_of(nu.probs.begin(), nu.probs.end(), [](double q) { return q >= 0.0; });
    add("nu-normalized", "lattice probabilities are non-negative and sum to 1", probs_ok,
        "total mass=" + fmt(mass));
  }
  const double m = nu.mean();
  add("A1-nu-centered", "int x dnu(x) = 0 (summation over atoms)", std::abs(m) <= 1e-9,
      "mean=" + fmt(m));
  const double v = nu.variance();
  add("A1-nu-unit-variance", "int x^2 dnu(x) = 1", std::abs(v - 1.0) <= 1e-9 && std::abs(m) <= 1e-9,
      "variance=" + fmt(v));
  const double m2 = params.init_law.second_moment();
  add("A1-nu0-second-moment", "int x^2 dnu_0(x) < inf", std::isfinite(m2),
      "second moment=" + fmt(m2));

  const RateFunction& f = params.rate_fn;
  add("A2-inf-f-positive", "inf f > 0 (f.min > 0)", f.f_min > 0.0, "f.min=" + fmt(f.f_min));

  double lo = f(0.0), hi = f(0.0);
  double c_core = 0.0, c_tail = 0.0;
  constexpr int kGrid = 10000;
  for (int i = 0; i <= kGrid; ++i) {
    const double x = -100.0 + 200.0 * i / kGrid;
    lo = std::min(lo, f(x));
    hi = std::max(hi, f(x));
    const double scaled = std::abs(f.derivative(x)) * std::pow(1.0 + std::abs(x), 1.0 + params.epsilon);
    c_core = std::max(c_core, scaled);
  }
  for (int i = 0; i <= 1000; ++i) {
    const double x = 1e3 + 9e3 * i / 1000.0;
    for (double s : {x, -x})
      c_tail = std::max(c_tail, std::abs(f.derivative(s)) *
                                    std::pow(1.0 + std::abs(s), 1.0 + params.epsilon));
  }
  add("A2-bounded", "f.min <= f(x) <= f.max on a 10^4-point grid over [-100, 100]",
      lo >= f.f_min - 1e-12 && hi <= f.f_max + 1e-12 && std::isfinite(hi),
      "range=[" + fmt(lo) + ", " + fmt(hi) + "]");
  add("A2-derivative-decay", "|f'(x)| (1+|x|)^{1+eps} stays bounded (tail max <= core max)",
      std::isfinite(c_core) && c_tail <= std::max(c_core, 1e-300) * (1.0 + 1e-9),
      "core max=" + fmt(c_core) + ", tail max=" + fmt(c_tail));

  // Finite support or Gaussian: exponential moments exist for every a_0.
  add("A3-exponential-moments", "int exp(a x) dnu(x) < inf for |a| <= a_0", true,
      nu.kind == JumpKind::standard_gaussian ? "gaussian: all exponential moments finite"
                                             : "finite support: all exponential moments finite");
  return report;
}

// ---------------------------------------------------------------------------

std::string to_string(RateKind kind) {
  switch (kind) {
    case RateKind::constant: return "constant";
    case RateKind::cauchy_bump: return "cauchy-bump";
    case RateKind::logistic: return "logistic";
  }
  return "?";
}

std::string to_string(JumpKind kind) {
  switch (kind) {
    case JumpKind::rademacher: return "rademacher";
    case JumpKind::standard_gaussian: return "standard-gaussian";
    case JumpKind::lattice: return "lattice";
  }
  return "?";
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::uniform: return "uniform";
    case InitKind::gaussian: return "gaussian";
    case InitKind::point: return "point";
  }
  return "?";
}

std::string to_string(CouplerMethod method) {
  switch (method) {
    case CouplerMethod::independent: return "independent";
    case CouplerMethod::comonotone: return "comonotone";
    case CouplerMethod::dyadic: return "dyadic";
  }
  return "?";
}

std::string to_string(AuxFreeze freeze) {
  return freeze == AuxFreeze::substep ? "substep" : "interval";
}

}  // namespace mfnc
