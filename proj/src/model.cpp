#include "stochem/model.hpp"

#include <vector>

#include "stochem/errors.hpp"

namespace stochem {

void LatentModel::validate(const Parameter& theta) const {
  theta.require_interior();
}

void LatentModel::require_index(std::size_t i) const {
  if (i >= num_samples()) {
    throw ContractError("sample index " + std::to_string(i) +
                        " out of range [0, " + std::to_string(num_samples()) +
                        ")");
  }
}

SampleStats LatentModel::per_sample_stats(std::size_t i,
                                          const Parameter& theta) const {
  require_index(i);
  validate(theta);
  SampleStats out;
  out.support.resize(support_size());
  out.values.resize(support_size());
  sample_support(i, out.support);
  sample_stat_values(i, theta, out.values);
  return out;
}

SuffStats LatentModel::per_sample_stats_dense(std::size_t i,
                                              const Parameter& theta) const {
  return densify(per_sample_stats(i, theta), stat_layout());
}

SuffStats full_estep(const LatentModel& model, const Parameter& theta) {
  return full_estep_with(model, theta,
                         [](std::size_t, std::span<const double>) {});
}

double data_term(const LatentModel& model, const Parameter& theta) {
  model.validate(theta);
  double acc = 0.0;
  const std::size_t n = model.num_samples();
  for (std::size_t i = 0; i < n; ++i) acc += model.sample_loss(i, theta);
  return acc / static_cast<double>(n);
}

double penalized_objective(const LatentModel& model, const Parameter& theta) {
  const double data = data_term(model, theta);
  return model.penalty(theta) + data;
}

double v_of_s(const LatentModel& model, const SuffStats& s) {
  return penalized_objective(model, model.m_step(s));
}

double fixed_point_residual(const LatentModel& model, const SuffStats& s) {
  const SuffStats mapped = full_estep(model, model.m_step(s));
  const SuffStats diff = SuffStats::combine(1.0, s, -1.0, mapped);
  return norm2(diff.values());
}

}  // namespace stochem
