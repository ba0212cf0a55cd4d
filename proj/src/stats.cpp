#include "stochem/stats.hpp"

#include <algorithm>
#include <cmath>

#include "stochem/errors.hpp"

namespace stochem {

StatLayout::StatLayout(
    const std::vector<std::pair<std::string, std::size_t>>& blocks) {
  for (const auto& [name, length] : blocks) {
    if (has_block(name)) {
      throw ContractError("duplicate statistics block '" + name + "'");
    }
    blocks_.push_back(StatBlock{name, size_, length});
    size_ += length;
  }
}

const StatBlock& StatLayout::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw ContractError("unknown statistics block '" + std::string(name) + "'");
}

bool StatLayout::has_block(std::string_view name) const {
  return std::any_of(blocks_.begin(), blocks_.end(),
                     [&](const StatBlock& b) { return b.name == name; });
}

SuffStats::SuffStats(LayoutPtr layout)
    : layout_(std::move(layout)), values_(layout_->size(), 0.0) {}

SuffStats::SuffStats(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_->size()) {
    throw ContractError("statistics vector of length " +
                        std::to_string(values_.size()) +
                        " does not match layout of length " +
                        std::to_string(layout_->size()));
  }
}

std::span<double> SuffStats::block(std::string_view name) {
  const auto& b = layout_->block(name);
  return std::span<double>(values_).subspan(b.offset, b.length);
}

std::span<const double> SuffStats::block(std::string_view name) const {
  const auto& b = layout_->block(name);
  return std::span<const double>(values_).subspan(b.offset, b.length);
}

bool SuffStats::same_layout(const SuffStats& other) const {
  return layout_ == other.layout_ || *layout_ == *other.layout_;
}

void require_same_layout(const SuffStats& a, const SuffStats& b,
                         std::string_view context) {
  if (!a.same_layout(b)) {
    throw ContractError(std::string(context) +
                        ": statistics layouts do not match");
  }
}

SuffStats SuffStats::combine(double a, const SuffStats& x, double b,
                             const SuffStats& y) {
  require_same_layout(x, y, "combine");
  SuffStats out(x.layout_);
  for (std::size_t j = 0; j < out.values_.size(); ++j) {
    out.values_[j] = a * x.values_[j] + b * y.values_[j];
  }
  return out;
}

SuffStats& SuffStats::axpy(double a, const SuffStats& x) {
  require_same_layout(*this, x, "axpy");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += a * x.values_[j];
  return *this;
}

SuffStats& SuffStats::scale(double a) {
  for (auto& v : values_) v *= a;
  return *this;
}

bool SuffStats::operator==(const SuffStats& other) const {
  return same_layout(other) && values_ == other.values_;
}

void scatter_add(SuffStats& target, std::span<const std::size_t> support,
                 std::span<const double> values, double scale) {
  auto dst = target.values();
  for (std::size_t j = 0; j < support.size(); ++j) {
    dst[support[j]] += scale * values[j];
  }
}

SuffStats densify(const SampleStats& sample, const LayoutPtr& layout) {
  SuffStats out(layout);
  scatter_add(out, sample.support, sample.values);
  return out;
}

double max_abs_diff(const SuffStats& a, const SuffStats& b) {
  require_same_layout(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    m = std::max(m, std::abs(a[j] - b[j]));
  }
  return m;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * y[j];
  return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace stochem
