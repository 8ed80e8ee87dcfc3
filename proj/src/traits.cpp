#include "heartcast/traits.hpp"

#include <algorithm>
#include <cmath>

#include "heartcast/error.hpp"

namespace heartcast {

TraitVector::TraitVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValidationError("trait value " + std::to_string(v) + " at index " +
                                std::to_string(i) + " is outside [0,1]",
                            "[" + std::to_string(i) + "]");
    }
  }
}

TraitVector TraitVector::clamped(std::vector<double> values) {
  for (double& v : values) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  TraitVector out;
  out.values_ = std::move(values);
  return out;
}

double CompatibilityWindow::lower(std::size_t i) const {
  return std::max(0.0, centers[i] - halfwidths[i]);
}

double CompatibilityWindow::upper(std::size_t i) const {
  return std::min(1.0, centers[i] + halfwidths[i]);
}

bool CompatibilityWindow::contains(std::span<const double> traits) const {
  if (traits.size() != dimension()) {
    throw ValidationError("trait dimension " + std::to_string(traits.size()) +
                          " does not match window dimension " +
                          std::to_string(dimension()));
  }
  for (std::size_t i = 0; i < traits.size(); ++i) {
    if (traits[i] < lower(i) || traits[i] > upper(i)) return false;
  }
  return true;
}

void CompatibilityWindow::validate(const std::string& path) const {
  const std::size_t d = dimension();
  if (d == 0) throw ValidationError("window has no dimensions", path + ".centers");
  if (halfwidths.size() != d) {
    throw ValidationError("halfwidths length differs from centers", path + ".halfwidths");
  }
  if (importances.size() != d) {
    throw ValidationError("importances length differs from centers", path + ".importances");
  }
  double importance_sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(halfwidths[i]) || halfwidths[i] < 0.0) {
      throw ValidationError("halfwidth must be a nonnegative number",
                            path + ".halfwidths[" + std::to_string(i) + "]");
    }
    if (!std::isfinite(importances[i]) || importances[i] < 0.0) {
      throw ValidationError("importance must be a nonnegative number",
                            path + ".importances[" + std::to_string(i) + "]");
    }
    importance_sum += importances[i];
  }
  if (!(importance_sum > 0.0)) {
    throw ValidationError("importances must not all be zero", path + ".importances");
  }
  if (!std::isfinite(drift_per_year)) {
    throw ValidationError("drift must be finite", path + ".drift_per_year");
  }
}

CompatibilityWindow centered_window(const TraitVector& traits,
                                    std::vector<double> halfwidths) {
  CompatibilityWindow w;
  w.centers = traits;
  w.halfwidths = std::move(halfwidths);
  w.importances.assign(traits.dimension(), 1.0);
  return w;
}

}  // namespace heartcast
