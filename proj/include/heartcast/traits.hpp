#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace heartcast {

/// A point in D-dimensional personality space. Every coordinate is in [0,1].
class TraitVector {
 public:
  TraitVector() = default;
  /// Throws ValidationError if any value is non-finite or outside [0,1].
  explicit TraitVector(std::vector<double> values);

  /// Clamps each value into [0,1]. NaN maps to 0.
  static TraitVector clamped(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const TraitVector&, const TraitVector&) = default;

 private:
  std::vector<double> values_;
};

/// Per-trait acceptance interval around desired partner traits.
struct CompatibilityWindow {
  TraitVector centers;
  std::vector<double> halfwidths;
  std::vector<double> importances;
  /// Relative change of halfwidths per year; negative narrows.
  double drift_per_year = 0.0;

  std::size_t dimension() const noexcept { return centers.dimension(); }

  /// Interval ends, clamped to [0,1].
  double lower(std::size_t i) const;
  double upper(std::size_t i) const;

  bool contains(std::span<const double> traits) const;

  /// Throws ValidationError naming `path` on shape or range violations.
  void validate(const std::string& path = "window") const;
};

/// Window with every center at `traits`, equal importances and no drift.
CompatibilityWindow centered_window(const TraitVector& traits,
                                    std::vector<double> halfwidths);

}  // namespace heartcast
