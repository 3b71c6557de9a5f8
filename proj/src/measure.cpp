#include "mfc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "mfc/errors.hpp"

namespace mfc {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double DyadicPartition::box_volume() const { return std::ldexp(1.0, -n * j); }

double cumulative(const GridSpec& grid, std::span<const double> values,
                  std::span<const double> t) {
  grid.validate();
  if (values.size() != grid.size()) throw ArgumentError("cumulative: density size mismatch");
  if (t.size() != static_cast<std::size_t>(grid.n)) {
    throw ArgumentError("cumulative: point has wrong dimension");
  }
  const auto N = grid.N;
  std::vector<std::vector<double>> fractions(static_cast<std::size_t>(grid.n));
  for (int d = 0; d < grid.n; ++d) {
    const double td = t[static_cast<std::size_t>(d)];
    if (!(td >= 0.0 && td <= 1.0)) throw ArgumentError("cumulative: t outside [0,1]^n");
    auto& f = fractions[static_cast<std::size_t>(d)];
    const double cells = td * static_cast<double>(N);
    const auto full = std::min(static_cast<std::size_t>(std::ceil(cells)), N);
    f.resize(full);
    for (std::size_t k = 0; k < full; ++k) {
      f[k] = std::clamp(cells - static_cast<double>(k), 0.0, 1.0);
    }
    if (full == 0) return 0.0;
  }

  std::vector<double> terms;
  std::size_t count = 1;
  for (const auto& f : fractions) count *= f.size();
  terms.reserve(count);
  std::vector<std::size_t> idx(static_cast<std::size_t>(grid.n), 0);
  for (std::size_t c = 0; c < count; ++c) {
    std::size_t flat = 0;
    double w = 1.0;
    for (int d = 0; d < grid.n; ++d) {
      flat = flat * N + idx[static_cast<std::size_t>(d)];
      w *= fractions[static_cast<std::size_t>(d)][idx[static_cast<std::size_t>(d)]];
    }
    terms.push_back(w * values[flat]);
    for (int d = grid.n - 1; d >= 0; --d) {
      auto& i = idx[static_cast<std::size_t>(d)];
      if (++i < fractions[static_cast<std::size_t>(d)].size()) break;
      i = 0;
    }
  }
  return pairwise_sum(terms) * std::pow(grid.delta(), grid.n);
}

double cumulative(const DensityGrid& density, std::span<const double> t) {
  return cumulative(density.grid, density.values, t);
}

MeasureVector dyadic_measures(const GridSpec& grid, std::span<const double> values, int j) {
  grid.validate();
  if (values.size() != grid.size()) throw ArgumentError("dyadic_measures: density size mismatch");
  if (j < 0 || (std::size_t{1} << j) > grid.N) {
    throw ResolutionError("dyadic level j = " + std::to_string(j) +
                          " is finer than the grid (N = " + std::to_string(grid.N) + ")");
  }
  MeasureVector mv;
  mv.partition = {j, grid.n};
  const std::size_t per_axis = std::size_t{1} << j;
  const std::size_t side = grid.N / per_axis;
  const std::size_t boxes = mv.partition.boxes();
  const double cell_volume = std::pow(grid.delta(), grid.n);
  mv.masses.resize(boxes);

  std::size_t cells_per_box = 1;
  for (int d = 0; d < grid.n; ++d) cells_per_box *= side;
  std::vector<double> scratch(cells_per_box);
  std::vector<std::size_t> box_idx(static_cast<std::size_t>(grid.n));
  std::vector<std::size_t> cell_idx(static_cast<std::size_t>(grid.n));

  for (std::size_t l = 0; l < boxes; ++l) {
    std::size_t rest = l;
    for (int d = grid.n - 1; d >= 0; --d) {
      box_idx[static_cast<std::size_t>(d)] = rest % per_axis;
      rest /= per_axis;
    }
    if (grid.n == 1) {
      mv.masses[l] = pairwise_sum(values.subspan(l * side, side)) * cell_volume;
      continue;
    }
    std::fill(cell_idx.begin(), cell_idx.end(), 0);
    for (std::size_t c = 0; c < cells_per_box; ++c) {
      std::size_t flat = 0;
      for (int d = 0; d < grid.n; ++d) {
        const auto du = static_cast<std::size_t>(d);
        flat = flat * grid.N + box_idx[du] * side + cell_idx[du];
      }
      scratch[c] = values[flat];
      for (int d = grid.n - 1; d >= 0; --d) {
        auto& i = cell_idx[static_cast<std::size_t>(d)];
        if (++i < side) break;
        i = 0;
      }
    }
    mv.masses[l] = pairwise_sum(scratch) * cell_volume;
  }
  mv.total = pairwise_sum(mv.masses);
  return mv;
}

MeasureVector dyadic_measures(const DensityGrid& density, int j) {
  return dyadic_measures(density.grid, density.values, j);
}

double partition_sum_q(const MeasureVector& mv, double q) {
  if (!(q >= 0.0)) throw ArgumentError("partition_sum_q: q must be >= 0");
  std::vector<double> terms(mv.masses.size());
  for (std::size_t l = 0; l < terms.size(); ++l) {
    const double mu = mv.masses[l];
    terms[l] = mu > 0.0 ? (q == 1.0 ? mu : std::pow(mu, q)) : 0.0;
  }
  return pairwise_sum(terms);
}

void write_measure_csv(std::ostream& os, std::span<const MeasureVector> levels) {
  os << "j,l,mass\n";
  char buf[64];
  for (const auto& mv : levels) {
    for (std::size_t l = 0; l < mv.masses.size(); ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", mv.masses[l]);
      os << mv.partition.j << ',' << l << ',' << buf << '\n';
    }
  }
}

}  // namespace mfc
