#pragma once

#include <cstddef>
#include <span>

#include "stochem/parameter.hpp"
#include "stochem/rng.hpp"
#include "stochem/stats.hpp"

namespace stochem {

/// Curved-exponential-family latent-variable model over n observations.
///
/// Per-sample conditional expectations are sparse: sample i touches a fixed
/// set of `support_size()` flat statistic indices. The objective is the
/// penalty plus the average per-sample negated log-likelihood, and `m_step`
/// minimizes penalty + psi - <s, phi> over the parameter set, where `s` is a
/// sample *average* of statistics.
class LatentModel {
 public:
  virtual ~LatentModel() = default;

  virtual std::size_t num_samples() const = 0;
  virtual const LayoutPtr& stat_layout() const = 0;

  virtual std::size_t support_size() const = 0;
  /// Writes the flat indices touched by sample i (length support_size()).
  virtual void sample_support(std::size_t i,
                              std::span<std::size_t> out) const = 0;
  /// Writes the conditional expectation of sample i's statistics on its
  /// support. No validation: callers guarantee i < n and interior theta.
  virtual void sample_stat_values(std::size_t i, const Parameter& theta,
                                  std::span<double> out) const = 0;

  virtual Parameter m_step(const SuffStats& s) const = 0;
  virtual double penalty(const Parameter& theta) const = 0;
  /// -log g(y_i; theta).
  virtual double sample_loss(std::size_t i, const Parameter& theta) const = 0;
  /// Model-supplied starting point, interior by construction.
  virtual Parameter initial_parameter(Rng& rng) const = 0;

  /// Checks block structure and interiority; throws DomainError/ContractError.
  virtual void validate(const Parameter& theta) const;

  /// Validated per-sample statistics (sparse).
  SampleStats per_sample_stats(std::size_t i, const Parameter& theta) const;
  /// Validated per-sample statistics scattered into a dense vector.
  SuffStats per_sample_stats_dense(std::size_t i, const Parameter& theta) const;

 protected:
  void require_index(std::size_t i) const;
};

/// (1/n) sum_i per_sample_stats(i, theta), left fold over i = 0..n-1.
SuffStats full_estep(const LatentModel& model, const Parameter& theta);

/// Full E-step that also hands each sample's values to `sink(i, values)`.
template <typename Sink>
SuffStats full_estep_with(const LatentModel& model, const Parameter& theta,
                          Sink&& sink);

/// (1/n) sum_i -log g(y_i; theta), left fold.
double data_term(const LatentModel& model, const Parameter& theta);
/// penalty(theta) + data_term(theta).
double penalized_objective(const LatentModel& model, const Parameter& theta);
/// V(s) = penalized_objective(m_step(s)).
double v_of_s(const LatentModel& model, const SuffStats& s);
/// || s - sbar(m_step(s)) ||_2.
double fixed_point_residual(const LatentModel& model, const SuffStats& s);

template <typename Sink>
SuffStats full_estep_with(const LatentModel& model, const Parameter& theta,
                          Sink&& sink) {
  model.validate(theta);
  const std::size_t n = model.num_samples();
  const std::size_t width = model.support_size();
  std::vector<std::size_t> support(width);
  std::vector<double> values(width);
  SuffStats acc(model.stat_layout());
  for (std::size_t i = 0; i < n; ++i) {
    model.sample_support(i, support);
    model.sample_stat_values(i, theta, values);
    scatter_add(acc, support, values);
    sink(i, std::span<const double>(values));
  }
  acc.scale(1.0 / static_cast<double>(n));
  return acc;
}

}  // namespace stochem
