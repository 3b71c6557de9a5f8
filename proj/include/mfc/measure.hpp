#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mfc/cascade.hpp"
#include "mfc/field_gen.hpp"

namespace mfc {

/// Deterministic pairwise (tree) summation.
double pairwise_sum(std::span<const double> values);

/// Half-open dyadic boxes of side 2^-j tiling [0,1)^n, enumerated row-major.
struct DyadicPartition {
  int j = 0;
  int n = 1;

  std::size_t boxes() const { return std::size_t{1} << (n * j); }
  double box_volume() const;
};

struct MeasureVector {
  DyadicPartition partition;
  std::vector<double> masses;
  double total = 0.0;
};

/// Midpoint-rule integral of the density over [0, t]; boundary cells count
/// with the product of their per-axis overlap fractions.
double cumulative(const DensityGrid& density, std::span<const double> t);
double cumulative(const GridSpec& grid, std::span<const double> values, std::span<const double> t);

/// Box masses at dyadic level j. Requires 2^-j >= grid.delta.
MeasureVector dyadic_measures(const DensityGrid& density, int j);
MeasureVector dyadic_measures(const GridSpec& grid, std::span<const double> values, int j);

/// Sum of masses^q, with 0^0 := 0.
double partition_sum_q(const MeasureVector& mv, double q);

/// CSV rows "j,l,mass" preceded by a header line.
void write_measure_csv(std::ostream& os, std::span<const MeasureVector> levels);

}  // namespace mfc
