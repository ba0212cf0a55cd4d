#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stochem {

struct StatBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const StatBlock&) const = default;
};

/// Named, contiguous partition of a sufficient-statistics vector. Each model
/// declares its layout once; solvers never look inside it.
class StatLayout {
 public:
  explicit StatLayout(
      const std::vector<std::pair<std::string, std::size_t>>& blocks);

  std::size_t size() const { return size_; }
  const std::vector<StatBlock>& blocks() const { return blocks_; }
  const StatBlock& block(std::string_view name) const;
  bool has_block(std::string_view name) const;

  bool operator==(const StatLayout&) const = default;

 private:
  std::vector<StatBlock> blocks_;
  std::size_t size_ = 0;
};

using LayoutPtr = std::shared_ptr<const StatLayout>;

/// Flat real vector of complete-data sufficient statistics tagged with its
/// layout. Holds s-hat, surrogates, per-sample expectations and their means.
class SuffStats {
 public:
  /// Zero vector with the given layout.
  explicit SuffStats(LayoutPtr layout);
  SuffStats(LayoutPtr layout, std::vector<double> values);

  const LayoutPtr& layout() const { return layout_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t j) { return values_[j]; }
  double operator[](std::size_t j) const { return values_[j]; }

  std::span<double> block(std::string_view name);
  std::span<const double> block(std::string_view name) const;

  bool same_layout(const SuffStats& other) const;

  /// a*x + b*y componentwise. Throws ContractError on layout mismatch.
  static SuffStats combine(double a, const SuffStats& x, double b,
                           const SuffStats& y);

  /// this += a * x.
  SuffStats& axpy(double a, const SuffStats& x);
  SuffStats& scale(double a);

  bool operator==(const SuffStats& other) const;

 private:
  LayoutPtr layout_;
  std::vector<double> values_;
};

/// Sparse per-sample statistics: values at fixed flat indices of the layout.
/// The support depends only on the sample index, never on the parameter.
struct SampleStats {
  std::vector<std::size_t> support;
  std::vector<double> values;
};

/// target[support[j]] += scale * values[j]
void scatter_add(SuffStats& target, std::span<const std::size_t> support,
                 std::span<const double> values, double scale = 1.0);

/// Dense vector with `sample` scattered into zeros.
SuffStats densify(const SampleStats& sample, const LayoutPtr& layout);

double max_abs_diff(const SuffStats& a, const SuffStats& b);
double norm2(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

void require_same_layout(const SuffStats& a, const SuffStats& b,
                         std::string_view context);

}  // namespace stochem
