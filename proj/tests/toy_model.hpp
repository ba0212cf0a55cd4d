#pragma once

#include <vector>

#include "stochem/errors.hpp"
#include "stochem/model.hpp"

// Fully observed Gaussian mean: s_i = y_i, theta = s. Optionally raises a
// DomainError once the statistic exceeds `limit`.
class ToyMeanModel final : public stochem::LatentModel {
 public:
  explicit ToyMeanModel(std::vector<double> y, double limit = 1e300)
      : y_(std::move(y)),
        limit_(limit),
        layout_(std::make_shared<const stochem::StatLayout>(
            std::vector<std::pair<std::string, std::size_t>>{{"y", 1}})) {}

  std::size_t num_samples() const override { return y_.size(); }
  const stochem::LayoutPtr& stat_layout() const override { return layout_; }
  std::size_t support_size() const override { return 1; }
  void sample_support(std::size_t, std::span<std::size_t> out) const override { out[0] = 0; }
  void sample_stat_values(std::size_t i, const stochem::Parameter&,
                          std::span<double> out) const override {
    out[0] = y_[i];
  }
  stochem::Parameter m_step(const stochem::SuffStats& s) const override {
    if (s[0] > limit_) throw stochem::DomainError("toy statistic above limit");
    return stochem::Parameter({stochem::Parameter::real_vector("m", {s[0]})});
  }
  double penalty(const stochem::Parameter&) const override { return 0.0; }
  double sample_loss(std::size_t i, const stochem::Parameter& theta) const override {
    const double d = y_[i] - theta.block(0).values[0];
    return 0.5 * d * d;
  }
  stochem::Parameter initial_parameter(stochem::Rng&) const override {
    return stochem::Parameter({stochem::Parameter::real_vector("m", {0.0})});
  }

 private:
  std::vector<double> y_;
  double limit_;
  stochem::LayoutPtr layout_;
};
