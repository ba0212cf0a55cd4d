#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stochem/model.hpp"

namespace stochem {

/// Unit-variance Gaussian mixture with M components. The penalty is a
/// symmetric Dirichlet(epsilon) log-prior on the weights plus a ridge
/// (delta/2)|mu|^2 on the means; both constants must be positive for the
/// M-step to land strictly inside the simplex. Zero is accepted so that the
/// unpenalized limit can be evaluated, in which case the M-step raises a
/// DomainError whenever it would leave the interior.
struct GmmConfig {
  std::size_t components = 2;
  double epsilon = 1e-3;
  double delta = 1e-3;
  /// Std-dev of the normal jitter added to the quantile-based initial means.
  double init_jitter = 0.1;

  void validate() const;
};

// Statistics layout: weight_mass = s^(1) in R^{M-1}, weighted_obs = s^(2) in
// R^{M-1}, obs_mean = s^(3) in R.
inline constexpr const char* kGmmWeightMass = "weight_mass";
inline constexpr const char* kGmmWeightedObs = "weighted_obs";
inline constexpr const char* kGmmObsMean = "obs_mean";

// Parameter blocks: "omega" (reduced simplex of dimension M), "mu" (R^M).
inline constexpr const char* kGmmOmega = "omega";
inline constexpr const char* kGmmMu = "mu";

LayoutPtr gmm_layout(std::size_t components);

Parameter make_gmm_params(std::span<const double> reduced_weights,
                          std::span<const double> means);
/// All M mixture weights (complement included).
std::span<const double> gmm_weights(const Parameter& theta);
std::span<const double> gmm_means(const Parameter& theta);

/// Posterior component probabilities of observation y. Max-subtracted in log
/// space, so any finite y is safe.
std::vector<double> responsibilities(double y, const Parameter& theta);
void responsibilities(double y, std::span<const double> weights,
                      std::span<const double> means, std::span<double> out);

/// Closed-form minimizer of L(s, .). Throws DomainError when a denominator is
/// nonpositive or the resulting weights are not strictly positive.
Parameter gmm_m_step(const SuffStats& s, const GmmConfig& cfg);
double gmm_penalty(const Parameter& theta, const GmmConfig& cfg);
/// -log sum_m omega_m N(y; mu_m, 1).
double gmm_sample_loss(double y, const Parameter& theta);
/// L(s, theta) = penalty + psi(theta) - <s, phi(theta)>, written as the
/// expected complete-data negated log-likelihood (constants dropped).
double gmm_surrogate_objective(const SuffStats& s, const Parameter& theta,
                               const GmmConfig& cfg);

/// min over component permutations pi of sum_m (mu_m - mu_ref_{pi(m)})^2.
double precision_metric(const Parameter& theta, const Parameter& reference);

/// n i.i.d. draws from the mixture. `truth` may sit on the simplex boundary.
std::vector<double> generate_gmm_data(std::size_t n, const Parameter& truth,
                                      std::uint64_t seed);

class GmmModel final : public LatentModel {
 public:
  GmmModel(std::vector<double> data, GmmConfig cfg);

  std::size_t num_samples() const override { return data_.size(); }
  const LayoutPtr& stat_layout() const override { return layout_; }
  std::size_t support_size() const override { return layout_->size(); }
  void sample_support(std::size_t i,
                      std::span<std::size_t> out) const override;
  void sample_stat_values(std::size_t i, const Parameter& theta,
                          std::span<double> out) const override;
  Parameter m_step(const SuffStats& s) const override;
  double penalty(const Parameter& theta) const override;
  double sample_loss(std::size_t i, const Parameter& theta) const override;
  /// Uniform weights; means at the (m+1/2)/M data quantiles plus jitter.
  Parameter initial_parameter(Rng& rng) const override;
  void validate(const Parameter& theta) const override;

  const std::vector<double>& data() const { return data_; }
  const GmmConfig& config() const { return cfg_; }

 private:
  std::vector<double> data_;
  GmmConfig cfg_;
  LayoutPtr layout_;
};

struct GmmDatasetMeta {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<double> weights;
  std::vector<double> means;
};

/// One observation per line; metadata goes to `<path>.meta.json`.
void write_gmm_dataset(const std::filesystem::path& path,
                       std::span<const double> data,
                       const GmmDatasetMeta& meta);
std::vector<double> read_gmm_dataset(const std::filesystem::path& path);

}  // namespace stochem
