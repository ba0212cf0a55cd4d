#include "stochem/parameter.hpp"

#include <cmath>
#include <sstream>

#include "stochem/errors.hpp"

namespace stochem {

namespace {

std::string describe(const ParamBlock& b, std::size_t m, double v,
                     bool strict) {
  std::ostringstream os;
  os.precision(17);
  const std::size_t last = b.values.size() - 1;
  if (m == last && b.values.size() > 1) {
    double sum = 0.0;
    for (std::size_t j = 0; j < last; ++j) sum += b.values[j];
    os << "simplex block '" << b.name << "': reduced coordinates sum to "
       << sum << (strict ? " (must be < 1)" : " (must be <= 1)");
  } else {
    os << "simplex block '" << b.name << "': coordinate " << m << " = " << v
       << (strict ? " (must be > 0)" : " (must be >= 0)");
  }
  return os.str();
}

void check(const std::vector<ParamBlock>& blocks, bool strict) {
  for (const auto& b : blocks) {
    for (std::size_t m = 0; m < b.values.size(); ++m) {
      const double v = b.values[m];
      if (!std::isfinite(v)) {
        throw DomainError("block '" + b.name + "': coordinate " +
                          std::to_string(m) + " is not finite");
      }
      if (b.kind != BlockKind::ReducedSimplex) continue;
      if (strict ? !(v > 0.0) : !(v >= 0.0)) {
        throw DomainError(describe(b, m, v, strict));
      }
    }
  }
}

}  // namespace

std::size_t ParamBlock::free_size() const {
  if (kind == BlockKind::RealVector) return values.size();
  return values.empty() ? 0 : values.size() - 1;
}

bool operator==(const ParamBlock& a, const ParamBlock& b) {
  return a.name == b.name && a.kind == b.kind && a.values == b.values;
}

Parameter::Parameter(std::vector<ParamBlock> blocks)
    : blocks_(std::move(blocks)) {}

ParamBlock Parameter::simplex_from_reduced(std::string name,
                                           std::span<const double> reduced) {
  ParamBlock b{std::move(name), BlockKind::ReducedSimplex,
               std::vector<double>(reduced.begin(), reduced.end())};
  double sum = 0.0;
  for (double v : reduced) sum += v;
  b.values.push_back(1.0 - sum);
  return b;
}

ParamBlock Parameter::simplex_from_full(std::string name,
                                        std::vector<double> probabilities) {
  if (probabilities.empty()) {
    throw ContractError("simplex block '" + name + "' must have dimension >= 1");
  }
  return ParamBlock{std::move(name), BlockKind::ReducedSimplex,
                    std::move(probabilities)};
}

ParamBlock Parameter::real_vector(std::string name,
                                  std::vector<double> values) {
  return ParamBlock{std::move(name), BlockKind::RealVector, std::move(values)};
}

const ParamBlock& Parameter::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw ContractError("unknown parameter block '" + std::string(name) + "'");
}

bool Parameter::interior() const {
  for (const auto& b : blocks_) {
    for (double v : b.values) {
      if (!std::isfinite(v)) return false;
      if (b.kind == BlockKind::ReducedSimplex && !(v > 0.0)) return false;
    }
  }
  return true;
}

void Parameter::require_interior() const { check(blocks_, true); }

void Parameter::require_feasible() const { check(blocks_, false); }

std::size_t Parameter::reduced_size() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.free_size();
  return n;
}

std::vector<double> Parameter::reduced_coordinates() const {
  std::vector<double> x;
  x.reserve(reduced_size());
  for (const auto& b : blocks_) {
    auto f = b.free_coordinates();
    x.insert(x.end(), f.begin(), f.end());
  }
  return x;
}

Parameter Parameter::with_reduced_coordinates(
    std::span<const double> x) const {
  if (x.size() != reduced_size()) {
    throw ContractError("reduced coordinate vector has length " +
                        std::to_string(x.size()) + ", expected " +
                        std::to_string(reduced_size()));
  }
  std::vector<ParamBlock> out;
  out.reserve(blocks_.size());
  std::size_t pos = 0;
  for (const auto& b : blocks_) {
    const auto free = x.subspan(pos, b.free_size());
    pos += b.free_size();
    if (b.kind == BlockKind::ReducedSimplex) {
      out.push_back(simplex_from_reduced(b.name, free));
    } else {
      out.push_back(real_vector(b.name, {free.begin(), free.end()}));
    }
  }
  return Parameter(std::move(out));
}

bool Parameter::operator==(const Parameter& other) const {
  return blocks_ == other.blocks_;
}

}  // namespace stochem
