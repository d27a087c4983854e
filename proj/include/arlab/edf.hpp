#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "arlab/innovations.hpp"

namespace arlab {

/// Empirical distribution function F_n(x) = #{points <= x} / n over a sorted
/// copy of the sample. Immutable after construction.
class EdfView {
 public:
  /// Throws InvalidInput on an empty sample.
  explicit EdfView(std::vector<double> sample);
  explicit EdfView(std::span<const double> sample) : EdfView(std::vector<double>(sample.begin(), sample.end())) {}

  double eval(double x) const;
  /// (F_n(x) + 1 - F_n(-x)) / 2
  double symmetrized(double x) const;
  /// Number of points <= x.
  std::size_t count_le(double x) const;

  std::size_t size() const { return sorted_.size(); }
  std::span<const double> sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// sup_x |F_n(x) - G(x)|, evaluated on both sides of every jump.
double ks_distance(const EdfView& view, const std::function<double(double)>& cdf);
double ks_distance(const EdfView& view, const InnovationDist& dist);

}  // namespace arlab
