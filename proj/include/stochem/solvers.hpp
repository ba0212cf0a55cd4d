#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stochem/model.hpp"

namespace stochem {

enum class VariantKind { Batch, IEM, SEM, SEMVR, FIEM };

/// Short names used on the command line and in CSV files:
/// bem, iem, sem, semvr, fiem.
std::string_view variant_name(VariantKind kind);
VariantKind parse_variant(std::string_view name);

struct Variant {
  VariantKind kind = VariantKind::Batch;
  /// SEMVR epoch length m; 0 means m = n.
  std::size_t epoch_length = 0;

  std::size_t resolved_epoch_length(std::size_t n) const {
    return epoch_length == 0 ? n : epoch_length;
  }
};

/// gamma_k for the update of iteration k (k = 0, 1, ...).
class StepSchedule {
 public:
  enum class Kind { Constant, Harmonic };

  /// gamma_k = gamma, gamma in [0, 1].
  static StepSchedule constant(double gamma);
  /// gamma_k = a / (k + b), with a, b > 0 and a <= b.
  static StepSchedule harmonic(double a, double b);

  double step(std::size_t k) const {
    return kind_ == Kind::Constant ? a_ : a_ / (static_cast<double>(k) + b_);
  }
  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  StepSchedule(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_;
  double b_;
};

/// Row-major n x width table of per-sample statistic values.
class MemoryTable {
 public:
  MemoryTable(std::size_t rows, std::size_t width)
      : rows_(rows), width_(width), data_(rows * width, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }
  std::span<double> row(std::size_t i) {
    return std::span<double>(data_).subspan(i * width_, width_);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * width_, width_);
  }

 private:
  std::size_t rows_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Epoch anchor of sEM-VR: the full E-step at the parameter in force when the
/// epoch started.
struct Anchor {
  SuffStats mean;
  Parameter theta;
  std::size_t epoch_start = 0;
};

/// Everything a stochastic EM variant carries between iterations.
struct VariantState {
  Variant variant;
  std::size_t k = 0;
  Parameter theta;
  SuffStats s_hat;
  /// iEM and FIEM: last stored statistics of every sample.
  std::optional<MemoryTable> memory;
  /// FIEM: running average S-bar. iEM: the previous surrogate S^(k).
  std::optional<SuffStats> running_avg;
  /// sEM-VR only.
  std::optional<Anchor> anchor;
  /// Number of per-sample E-step evaluations spent so far.
  std::size_t evaluations = 0;
  Rng rng;
};

/// Runs the initial full pass at theta0: s_hat = sbar(theta0), and the
/// variant's memories (per-sample table, running average, anchor).
VariantState initialize_state(const LatentModel& model, const Variant& variant,
                              const Parameter& theta0, Rng rng);

/// s_hat + gamma (surrogate - s_hat); returns `surrogate` itself when
/// gamma == 1.
SuffStats se_step(const SuffStats& s_hat, const SuffStats& surrogate,
                  double gamma);

/// S^(k+1) = S^(k) + (fresh - memory[i]) / n, then memory[i] := fresh.
SuffStats surrogate_iem(VariantState& state, std::size_t i,
                        const SampleStats& fresh);
/// S^(k+1) = fresh.
SuffStats surrogate_sem(const SampleStats& fresh, const LayoutPtr& layout);
/// S^(k+1) = anchor.mean + (fresh - sbar_i(anchor.theta)). Charges the
/// anchor-side evaluation. Throws ContractError if the anchor is stale.
SuffStats surrogate_semvr(const LatentModel& model, VariantState& state,
                          std::size_t i, const SampleStats& fresh);
/// Full E-step at the current iterate; becomes the anchor for the epoch
/// starting at state.k.
void refresh_anchor(const LatentModel& model, VariantState& state);
/// S^(k+1) = Sbar + (fresh_i - memory[i]); then
/// Sbar += (fresh_j - memory[j]) / n and memory[j] := fresh_j.
SuffStats surrogate_fiem(VariantState& state, std::size_t i, std::size_t j,
                         const SampleStats& fresh_i,
                         const SampleStats& fresh_j);

/// Surrogate for explicit indices (j ignored unless FIEM). Performs every
/// side effect of a real iteration on `state` except the sE/M-steps, and
/// refreshes the sEM-VR anchor when k starts an epoch.
SuffStats surrogate_for_indices(const LatentModel& model, VariantState& state,
                                std::size_t i, std::size_t j);

/// One full iteration: draw indices, surrogate, sE-step, M-step, k += 1.
void advance(const LatentModel& model, VariantState& state,
             const StepSchedule& schedule);

/// Mean of the per-sample memory table, scattered with the model's supports.
SuffStats memory_mean(const LatentModel& model, const MemoryTable& memory);

/// Per-sample evaluations the next iteration of `state` will spend.
std::size_t next_iteration_cost(const VariantState& state, std::size_t n);

/// K in {0..k_max-1} with P(K = k) proportional to gamma_k.
std::size_t draw_termination(const StepSchedule& schedule, std::size_t k_max,
                             Rng& rng);

struct TraceRecord {
  std::size_t k = 0;
  /// evaluations / n
  double epoch = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double data_term = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double precision = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
};

struct RunConfig {
  Variant variant;
  StepSchedule schedule = StepSchedule::constant(1.0);
  /// K_max.
  std::size_t max_iterations = 1;
  /// Stop before an iteration that would push evaluations past
  /// max_epochs * n.
  double max_epochs = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  /// Record every this many iterations (0 = every n). k = 0 and the last
  /// iterate are always recorded.
  std::size_t record_every = 0;
  bool record_objective = true;
  bool record_residual = true;
  /// Optional extra metric, e.g. precision against a reference.
  std::function<double(const Parameter&)> precision;
  /// Called after every iteration; returning false stops the run.
  std::function<bool(const VariantState&)> observer;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  /// Randomized termination index K drawn from the schedule.
  std::size_t termination_index = 0;
  /// theta-hat^(K); empty if the run stopped before reaching K.
  std::optional<Parameter> theta_at_termination;
  Parameter final_theta;
  std::vector<double> final_s_hat;
  bool stopped_by_observer = false;
};

/// Algorithm driver. Deterministic given (model, config, theta_init).
/// Model domain errors surface as SolverAbort carrying the iteration index.
RunTrace run(const LatentModel& model, const RunConfig& config,
             const Parameter& theta_init);

}  // namespace stochem
