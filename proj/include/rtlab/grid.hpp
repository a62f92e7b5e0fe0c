#pragma once

#include <array>
#include <cstddef>

namespace rtlab {

/// Dense N x N tensor; only the leading dim x dim block is meaningful.
using Tensor2 = std::array<std::array<double, 2>, 2>;

/// Uniform grid on the unit torus T^N, N in {1, 2}. Points are x_i = i / n_x in
/// each direction; flat index is row-major with the last dimension fastest.
class TorusGrid {
 public:
  TorusGrid(std::size_t n_x, int dim);

  std::size_t n_x() const { return n_x_; }
  int dim() const { return dim_; }
  std::size_t points() const { return points_; }
  double spacing() const { return 1.0 / static_cast<double>(n_x_); }
  /// Delta x^N, the quadrature weight of one grid cell.
  double cell_volume() const { return cell_volume_; }

  /// Integer coordinates of flat index `i`.
  std::array<std::size_t, 2> coords(std::size_t i) const;
  std::size_t index(std::array<std::size_t, 2> c) const;
  /// Physical coordinate x_d of point `i`.
  double coordinate(std::size_t i, int d) const;

  /// Flat index of the neighbour one cell forward along direction `d`.
  std::size_t forward_neighbour(std::size_t i, int d) const;

  bool operator==(const TorusGrid&) const = default;

 private:
  std::size_t n_x_;
  int dim_;
  std::size_t points_;
  double cell_volume_;
};

}  // namespace rtlab
