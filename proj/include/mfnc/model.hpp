#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfnc {

// ---------------------------------------------------------------------------
// Spiking rate f
// ---------------------------------------------------------------------------

enum class RateKind { constant, cauchy_bump, logistic };

/// Bounded, positive spiking intensity.
///
///   constant     f(x) = f_min                       (f_max is the thinning bound)
///   cauchy_bump  f(x) = f_min + (f_max - f_min) / (1 + x^2)
///   logistic     f(x) = f_min + (f_max - f_min) / (1 + exp(-x))
///
/// f_max doubles as the dominating rate of the candidate Poisson streams, so
/// every kind satisfies f_min <= f <= f_max.
struct RateFunction {
  RateKind kind = RateKind::cauchy_bump;
  double f_min = 1.0;
  double f_max = 2.0;

  double operator()(double x) const;
  double derivative(double x) const;
};

double eval_rate(const RateFunction& f, double x);

// ---------------------------------------------------------------------------
// Jump law nu and initial law nu_0
// ---------------------------------------------------------------------------

enum class JumpKind { rademacher, standard_gaussian, lattice };

struct JumpLaw {
  JumpKind kind = JumpKind::rademacher;
  // Lattice kind only: atoms sorted ascending, probabilities aligned.
  std::vector<double> support;
  std::vector<double> probs;

  static JumpLaw rademacher();
  static JumpLaw standard_gaussian();
  // Sorts atoms; does not check centering (validate_assumptions does).
  static JumpLaw lattice(std::vector<double> support, std::vector<double> probs);

  bool is_discrete() const { return kind != JumpKind::standard_gaussian; }
  // Atoms and weights of a discrete law (rademacher is expanded).
  std::vector<std::pair<double, double>> atoms() const;
  double mean() const;
  double variance() const;
  // CDF jump [F(x-), F(x)] at an atom x of a discrete law. Throws if x is not an atom.
  std::pair<double, double> atom_cdf(double x) const;
};

/// Inverse-CDF draw. Atoms are left-closed: u strictly below a CDF step maps to
/// the lower atom, u on the step maps to the upper one.
double sample_jump(const JumpLaw& law, double u01);

enum class InitKind { uniform, gaussian, point };

/// nu_0: uniform on [-scale, scale], N(0, scale^2), or the point mass at scale.
struct InitLaw {
  InitKind kind = InitKind::uniform;
  double scale = 1.0;

  double sample(double u01) const;
  double second_moment() const;
};

// ---------------------------------------------------------------------------
// Distance map a(x) = int_{-inf}^x (1 + psi(y))^{-(1+eps)} dy
// ---------------------------------------------------------------------------

/// psi and its first three derivatives. psi(y) = |y| for |y| >= 1 and the even
/// quartic 3/8 + 3/4 y^2 - 1/8 y^4 inside, which matches |y| to second order
/// at +-1.
double psi(double y, int order = 0);

/// Bounded, strictly increasing C^3 map under which the reset term becomes
/// Lipschitz. Tails use the closed forms
///   a(x) = (1 - x)^{-eps} / eps                          for x <= -1,
///   a(x) = a(1) + (2^{-eps} - (1 + x)^{-eps}) / eps      for x >= 1,
/// and the core [-1, 1] uses cached Gauss-Legendre partial integrals on a
/// uniform grid of breakpoints plus one short quadrature to the argument.
class DistanceMap {
 public:
  static constexpr std::size_t kBreakpoints = 1024;

  explicit DistanceMap(double epsilon = 1.0);

  double operator()(double x) const { return eval(x, 0); }
  /// order 0..3: a, a', a'', a'''.
  double eval(double x, int order) const;

  double epsilon() const { return epsilon_; }
  double at_minus_one() const { return a_minus1_; }
  double at_one() const { return a_1_; }
  double sup_value() const;        // a(+inf)
  double max_first_derivative() const;  // a'(0), the global maximum of a'

 private:
  double integrand(double y) const;

  double epsilon_;
  double a_minus1_;
  double a_1_;
  // cumulative_[j] = int_{-1}^{b_j} integrand, b_j = -1 + 2 j / kBreakpoints.
  std::vector<double> cumulative_;
};

double eval_distance(const DistanceMap& a, double x, int order);

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class CouplerMethod { independent, comonotone, dyadic };

/// Where the auxiliary system freezes its diffusion coefficient.
enum class AuxFreeze { substep, interval };

struct ModelParams {
  double alpha = 1.0;
  std::size_t n_neurons = 64;
  RateFunction rate_fn{};
  JumpLaw jump_law = JumpLaw::rademacher();
  InitLaw init_law{};
  double epsilon = 1.0;
  double horizon = 1.0;
  std::optional<double> delta;  // unset: horizon-tiling default, see coupling_delta
  std::size_t substeps_per_delta = 4;
  std::uint64_t base_seed = 20240601;
  CouplerMethod coupler = CouplerMethod::dyadic;
  AuxFreeze aux_freeze = AuxFreeze::substep;
};

/// (ln N)^{4/5} N^{-2/5}, which balances discretization against coupling error.
double balanced_delta(std::size_t n_neurons);

/// Grid step actually used: the override if present, otherwise the largest
/// step <= balanced_delta(N) that tiles [0, horizon] exactly.
double coupling_delta(const ModelParams& params);

/// Coupling intervals covering [0, horizon]: `full` intervals of length delta,
/// optionally followed by one shorter partial interval that is simulated but
/// not coupled. edges has full + 1 (+1 if partial) entries, the last being
/// the horizon.
struct IntervalGrid {
  double delta = 0.0;
  std::size_t full = 0;
  bool has_partial = false;
  std::vector<double> edges;

  std::size_t count() const { return edges.empty() ? 0 : edges.size() - 1; }
};

IntervalGrid make_grid(const ModelParams& params);

/// Throws std::invalid_argument on structural problems (delta >= 1, N < 2, ...).
void check_structure(const ModelParams& params);

struct AssumptionCheck {
  std::string name;
  std::string check;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool ok() const;
};

ValidationReport validate_assumptions(const ModelParams& params);

/// Inter-event drift: x * exp(-alpha * dt).
inline double flow(double x, double dt, double alpha) { return x * std::exp(-alpha * dt); }

std::string to_string(RateKind kind);
std::string to_string(JumpKind kind);
std::string to_string(InitKind kind);
std::string to_string(CouplerMethod method);
std::string to_string(AuxFreeze freeze);

}  // namespace mfnc
