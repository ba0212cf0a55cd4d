#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stochem {

enum class BlockKind { ReducedSimplex, RealVector };

/// One block of a model parameter.
///
/// A ReducedSimplex block of dimension M has M-1 free coordinates w_1..w_{M-1}
/// with w_m >= 0 and sum w_m <= 1. `values` stores all M probabilities; the
/// last entry is the implied complement 1 - sum w_m. Producers that can compute
/// the complement directly (closed-form M-steps) store it without going
/// through the subtraction.
struct ParamBlock {
  std::string name;
  BlockKind kind = BlockKind::RealVector;
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  /// Number of free coordinates in the reduced chart.
  std::size_t free_size() const;
  std::span<const double> free_coordinates() const {
    return std::span<const double>(values).first(free_size());
  }
};

class Parameter {
 public:
  Parameter() = default;
  explicit Parameter(std::vector<ParamBlock> blocks);

  /// Simplex block from its M-1 reduced coordinates.
  static ParamBlock simplex_from_reduced(std::string name,
                                         std::span<const double> reduced);
  /// Simplex block from all M probabilities (complement included).
  static ParamBlock simplex_from_full(std::string name,
                                      std::vector<double> probabilities);
  static ParamBlock real_vector(std::string name, std::vector<double> values);

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::size_t block_count() const { return blocks_.size(); }
  const ParamBlock& block(std::size_t b) const { return blocks_[b]; }
  const ParamBlock& block(std::string_view name) const;

  /// True iff every simplex coordinate, complement included, is strictly
  /// positive and every value is finite.
  bool interior() const;
  /// Throws DomainError naming the block and the violated constraint.
  void require_interior() const;
  /// Throws DomainError if any simplex block leaves the closed simplex.
  void require_feasible() const;

  /// Free coordinates of all blocks concatenated (simplex blocks contribute
  /// M-1 entries, real blocks all entries).
  std::vector<double> reduced_coordinates() const;
  std::size_t reduced_size() const;
  /// Same block structure with the free coordinates replaced by `x`;
  /// simplex complements are recomputed as 1 - sum.
  Parameter with_reduced_coordinates(std::span<const double> x) const;

  bool operator==(const Parameter&) const;

 private:
  std::vector<ParamBlock> blocks_;
};

bool operator==(const ParamBlock& a, const ParamBlock& b);

}  // namespace stochem
