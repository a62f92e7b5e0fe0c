#include "rtlab/grid.hpp"

#include <bit>
#include <string>

#include "rtlab/error.hpp"

namespace rtlab {

TorusGrid::TorusGrid(std::size_t n_x, int dim) : n_x_(n_x), dim_(dim) {
  if (dim != 1 && dim != 2) {
    throw Error("torus dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (n_x < 2 || !std::has_single_bit(n_x)) {
    throw Error("n_x must be a power of two >= 2, got " + std::to_string(n_x));
  }
  points_ = dim == 1 ? n_x : n_x * n_x;
  const double h = 1.0 / static_cast<double>(n_x);
  cell_volume_ = dim == 1 ? h : h * h;
}

std::array<std::size_t, 2> TorusGrid::coords(std::size_t i) const {
  if (dim_ == 1) return {i, 0};
  return {i / n_x_, i % n_x_};
}

std::size_t TorusGrid::index(std::array<std::size_t, 2> c) const {
  if (dim_ == 1) return c[0] % n_x_;
  return (c[0] % n_x_) * n_x_ + (c[1] % n_x_);
}

double TorusGrid::coordinate(std::size_t i, int d) const {
  return static_cast<double>(coords(i)[static_cast<std::size_t>(d)]) * spacing();
}

std::size_t TorusGrid::forward_neighbour(std::size_t i, int d) const {
  auto c = coords(i);
  c[static_cast<std::size_t>(d)] += 1;
  return index(c);
}

}  // namespace rtlab
