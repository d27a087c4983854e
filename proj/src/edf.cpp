#include "arlab/edf.hpp"

#include <algorithm>
#include <cmath>

#include "arlab/errors.hpp"

namespace arlab {

EdfView::EdfView(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw InvalidInput("empirical distribution of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

std::size_t EdfView::count_le(double x) const {
  return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
}

double EdfView::eval(double x) const {
  return static_cast<double>(count_le(x)) / static_cast<double>(sorted_.size());
}

double EdfView::symmetrized(double x) const { return 0.5 * (eval(x) + 1.0 - eval(-x)); }

double ks_distance(const EdfView& view, const std::function<double(double)>& cdf) {
  const auto pts = view.sorted();
  const double n = static_cast<double>(pts.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    // Step over ties so the jump at a repeated value is taken in full.
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    const double g = cdf(pts[i]);
    d = std::max({d, std::abs(static_cast<double>(j) / n - g), std::abs(g - static_cast<double>(i) / n)});
    i = j;
  }
  return d;
}

double ks_distance(const EdfView& view, const InnovationDist& dist) {
  return ks_distance(view, [&dist](double x) { return dist.cdf(x); });
}

}  // namespace arlab
