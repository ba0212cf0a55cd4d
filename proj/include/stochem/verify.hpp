#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochem/gmm.hpp"
#include "stochem/solvers.hpp"

namespace stochem {

enum class CheckStatus { Pass, Fail, Inconclusive, NotApplicable };
std::string_view status_name(CheckStatus status);

/// How `measured` is compared with `threshold`.
enum class Polarity { AtMost, AtLeast, GreaterThan };
std::string_view polarity_name(Polarity polarity);

struct CheckReport {
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  double measured = 0.0;
  double threshold = 0.0;
  Polarity polarity = Polarity::AtMost;
  /// Free-form explanation (failing iteration, offending coordinate, ...).
  std::string detail;
  /// Ordered key/value context such as model, seed, sizes.
  std::vector<std::pair<std::string, std::string>> context;

  bool passed() const { return status == CheckStatus::Pass; }
  bool failed() const { return status == CheckStatus::Fail; }
};

/// Pass or Fail by comparing measured with threshold under the polarity.
CheckStatus judge(double measured, double threshold, Polarity polarity);

/// One JSON object, no trailing newline.
std::string to_json_line(const CheckReport& report);
void write_reports(const std::filesystem::path& path,
                   const std::vector<CheckReport>& reports);

/// Raised by finite_diff_grad when f is not finite at a probe point.
class NonFiniteEvaluation : public std::runtime_error {
 public:
  NonFiniteEvaluation(std::size_t coordinate, double value);
  std::size_t coordinate() const { return coordinate_; }

 private:
  std::size_t coordinate_;
};

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences. h <= 0 selects 1e-5 * max(1, ||x||). order is 2
/// (two-point stencil) or 4 (five-point stencil).
std::vector<double> finite_diff_grad(const ScalarFn& f,
                                     std::span<const double> x, double h = 0.0,
                                     int order = 2);

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Damped Newton with a finite-difference Hessian. `feasible` rejects trial
/// points; steps are halved until feasible and decreasing. Meant for small,
/// smooth, convex problems used as independent oracles.
MinimizeResult minimize_newton(const ScalarFn& f, std::vector<double> x0,
                               const std::function<bool(std::span<const double>)>& feasible,
                               double grad_tol = 1e-11,
                               std::size_t max_iterations = 200);

/// Surrogate override used by check_unbiasedness (defaults to
/// surrogate_for_indices). Must not mutate anything but `state`.
using SurrogateFn = std::function<SuffStats(const LatentModel&, VariantState&,
                                            std::size_t i, std::size_t j)>;

/// Enumerates every index draw of the next iteration from `state` and compares
/// the average surrogate with full_estep(state.theta). iEM and batch are
/// reported not-applicable.
CheckReport check_unbiasedness(const LatentModel& model,
                               const VariantState& state,
                               const SurrogateFn& surrogate = {},
                               double tolerance = 1e-12);

/// Runs `iterations` randomized iterations and compares the iEM s_hat or the
/// FIEM running average with the mean of the per-sample memory table.
CheckReport check_memory_identity(const LatentModel& model, VariantKind kind,
                                  const StepSchedule& schedule,
                                  std::size_t iterations, std::uint64_t seed,
                                  double tolerance = 1e-12);

/// ||grad penalized_objective|| over the reduced coordinates of theta.
double penalized_gradient_norm(const LatentModel& model, const Parameter& theta);

/// Gradient norm check at a bEM fixed point; inconclusive when the
/// fixed-point residual at theta exceeds residual_gate.
CheckReport check_stationarity(const LatentModel& model, const Parameter& theta,
                               double tolerance = 1e-6,
                               double residual_gate = 1e-10);

struct ScaledGradient {
  /// <grad V(s), s - sbar(mstep(s))>
  double inner = 0.0;
  /// ||s - sbar(mstep(s))||^2
  double drift_norm2 = 0.0;
  /// inner / drift_norm2
  double ratio = 0.0;
};
ScaledGradient scaled_gradient(const LatentModel& model, const SuffStats& s);

/// Positivity of <grad V(s), s - sbar(mstep(s))>; the empirical ratio is
/// recorded in the context. Inconclusive at (near) fixed points.
CheckReport check_scaled_gradient(const LatentModel& model, const SuffStats& s,
                                  double fixed_point_gate = 1e-6);

/// Batch EM from theta_init; fails at the first objective increase above
/// slack or at a model domain error.
CheckReport check_monotone_bem(const LatentModel& model,
                               const Parameter& theta_init,
                               std::size_t iterations, double slack = 1e-10);

struct MStepOptimality {
  double parameter_distance = 0.0;
  double gradient_norm = 0.0;
  bool minimizer_converged = false;
};
/// Compares the closed-form GMM M-step with a numeric minimizer of the
/// surrogate objective L(s, .) in the reduced chart.
MStepOptimality gmm_m_step_optimality(const SuffStats& s, const GmmConfig& cfg);
CheckReport check_gmm_m_step(const SuffStats& s, const GmmConfig& cfg,
                             double distance_tol = 1e-6,
                             double gradient_tol = 1e-8);

/// A random admissible statistic: convex combination of full E-steps at two
/// random interior parameters.
SuffStats random_admissible_stats(const LatentModel& model, Rng& rng);

/// Batch EM until the fixed-point residual is <= tol or max_iterations.
struct BatchFit {
  Parameter theta;
  SuffStats s_hat;
  double residual = 0.0;
  std::size_t iterations = 0;
};
BatchFit fit_batch(const LatentModel& model, const Parameter& theta_init,
                   double tol, std::size_t max_iterations);

struct NamedCheck {
  std::string name;
  std::function<CheckReport()> run;
};

/// Runs every check; exceptions become Fail reports. Never short-circuits.
std::vector<CheckReport> run_suite(const std::vector<NamedCheck>& checks);
/// 0 when no report failed, 1 otherwise.
int suite_exit_code(const std::vector<CheckReport>& reports);

/// The full small-size suite on GMM and pLSA.
std::vector<NamedCheck> default_suite(std::uint64_t seed);

}  // namespace stochem
