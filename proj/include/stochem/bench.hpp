#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochem/gmm.hpp"
#include "stochem/plsa.hpp"
#include "stochem/solvers.hpp"

namespace stochem {

inline constexpr std::string_view kCodeVersion = "stochem-0.1.0";

inline constexpr std::string_view kGmmFixedN = "gmm-fixed-n";
inline constexpr std::string_view kGmmScaling = "gmm-scaling";
inline constexpr std::string_view kPlsaElbo = "plsa-elbo";
inline constexpr std::string_view kVerify = "verify";

/// Declarative description of one experiment. Together with kCodeVersion it
/// determines every output byte.
struct ExperimentConfig {
  std::string experiment;
  std::vector<std::uint64_t> seeds;
  std::vector<VariantKind> variants;
  /// Sample count (gmm-fixed-n) or token count (synthetic pLSA corpus).
  std::size_t n = 0;
  std::vector<std::size_t> n_grid;
  /// Budget in epochs, initialization pass included.
  double epochs = 0.0;
  std::filesystem::path out_dir = "results";

  GmmConfig gmm;
  double true_mean = 0.5;
  double sem_a = 3.0;
  double sem_b = 10.0;
  /// sEM-VR and FIEM step at n = 10^4; scaled as n^(-2/3) elsewhere.
  double vr_step_at_1e4 = 0.003;
  double reference_tol = 1e-12;
  std::size_t reference_max_iterations = 10000;

  double target_precision = 1e-3;
  /// Scaling runs stop after cap_factor * n iterations.
  double cap_factor = 1000.0;
  /// Scaling start: reference weight + spread * z, reference means + spread * z.
  double init_weight_spread = 0.1;
  double init_mean_spread = 0.3;

  PlsaConfig plsa;
  SyntheticCorpusSpec corpus;
  /// Overrides the synthetic corpus when non-empty.
  std::filesystem::path corpus_path;

  /// Throws ValidationError.
  void validate() const;
  /// Sorted key=value lines; the input of config_hash.
  std::string canonical() const;
  std::uint64_t config_hash() const;
};

/// Defaults for `experiment` (one of the four names above).
ExperimentConfig default_config(std::string_view experiment);

/// Applies "key = value" lines ('#' starts a comment) on top of `base`.
/// Unknown keys and malformed values raise ParseError with the line number.
ExperimentConfig apply_config_text(ExperimentConfig base, std::string_view text);
ExperimentConfig load_config(std::string_view experiment,
                             const std::filesystem::path& path);

struct ResultRow {
  std::string variant;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double epoch = 0.0;
  std::string metric;
  double value = 0.0;
};

struct SlopeRow {
  std::string variant;
  double slope = 0.0;
  std::size_t points = 0;
  std::size_t censored = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SlopeRow> slopes;
  /// One line per aborted run or excluded censored run.
  std::vector<std::string> warnings;
};

// Metric names written to the CSVs.
inline constexpr std::string_view kMetricPrecision = "precision";
inline constexpr std::string_view kMetricObjective = "objective";
inline constexpr std::string_view kMetricElboWithPrior = "elbo_with_prior";
inline constexpr std::string_view kMetricElboDataOnly = "elbo_data_only";
inline constexpr std::string_view kMetricAbort = "abort_iteration";
inline constexpr std::string_view kMetricIterations = "iterations_to_target";
inline constexpr std::string_view kMetricCensored = "censored_at";
inline constexpr std::string_view kMetricInitPrecision = "initial_precision";

/// gamma for sEM-VR and FIEM on a GMM with n samples.
double gmm_vr_step(const ExperimentConfig& cfg, std::size_t n);
/// Preset schedule of `kind` for the experiment in cfg.
StepSchedule preset_schedule(const ExperimentConfig& cfg, VariantKind kind,
                             std::size_t n);

/// Seed of the stream named `key` within the cell of `seed`.
std::uint64_t cell_seed(std::uint64_t seed, std::string_view key);

/// Batch EM until the fixed-point residual of s_hat is <= tol.
Parameter gmm_reference(const GmmModel& model, const Parameter& theta_init,
                        double tol, std::size_t max_iterations);

ExperimentResult run_gmm_fixed_n(const ExperimentConfig& cfg);
ExperimentResult run_gmm_scaling(const ExperimentConfig& cfg);
ExperimentResult run_plsa_elbo(const ExperimentConfig& cfg);

/// Least squares slope of y on x; nullopt with fewer than two distinct x.
std::optional<double> least_squares_slope(const std::vector<double>& x,
                                          const std::vector<double>& y);

/// Provenance comment, header, then one line per row.
std::string render_csv(const ExperimentConfig& cfg,
                       const std::vector<ResultRow>& rows);
std::string render_slopes_csv(const ExperimentConfig& cfg,
                              const std::vector<SlopeRow>& slopes);

/// Output file names inside cfg.out_dir.
std::filesystem::path results_path(const ExperimentConfig& cfg);
std::filesystem::path slopes_path(const ExperimentConfig& cfg);

/// Run, write outputs, print warnings to stderr. Exit status per the CLI
/// contract: 0 success, 1 check failure.
int cmd_gmm_fixed_n(const ExperimentConfig& cfg);
int cmd_gmm_scaling(const ExperimentConfig& cfg);
int cmd_plsa_elbo(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg);

}  // namespace stochem
