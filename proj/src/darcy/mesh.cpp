#include "porous/darcy/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "porous/error.hpp"

namespace porous::darcy {

StructuredQuadMesh::StructuredQuadMesh(int nx, int ny, Rectangle domain) : nx_(nx), ny_(ny), domain_(domain) {
  if (nx < 2 || ny < 2) {
    throw InvalidArgument("StructuredQuadMesh: need at least 2 cells per axis, got " + std::to_string(nx) + "x" +
                          std::to_string(ny));
  }
  if (nx % 2 != 0 || ny % 2 != 0) {
    throw InvalidArgument("StructuredQuadMesh: patch structure requires even cell counts, got " + std::to_string(nx) +
                          "x" + std::to_string(ny));
  }
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw InvalidArgument("StructuredQuadMesh: domain has zero area");
  }
  hx_ = domain.width() / nx;
  hy_ = domain.height() / ny;
}

Point2 StructuredQuadMesh::vertex(int v) const {
  const int i = v % (nx_ + 1);
  const int j = v / (nx_ + 1);
  return {domain_.x0 + i * hx_, domain_.y0 + j * hy_};
}

bool StructuredQuadMesh::on_vertical_boundary(int v) const {
  const int i = v % (nx_ + 1);
  return i == 0 || i == nx_;
}

bool StructuredQuadMesh::on_horizontal_boundary(int v) const {
  const int j = v / (nx_ + 1);
  return j == 0 || j == ny_;
}

std::array<int, 4> StructuredQuadMesh::cell_vertices(int cell) const {
  const int i = cell % nx_;
  const int j = cell / nx_;
  return {vertex_index(i, j), vertex_index(i + 1, j), vertex_index(i, j + 1), vertex_index(i + 1, j + 1)};
}

Point2 StructuredQuadMesh::cell_origin(int cell) const {
  return {domain_.x0 + (cell % nx_) * hx_, domain_.y0 + (cell / nx_) * hy_};
}

Point2 StructuredQuadMesh::cell_center(int cell) const {
  const Point2 o = cell_origin(cell);
  return {o.x + 0.5 * hx_, o.y + 0.5 * hy_};
}

int StructuredQuadMesh::cell_patch(int cell) const {
  const int i = cell % nx_;
  const int j = cell / nx_;
  return i / 2 + (nx_ / 2) * (j / 2);
}

std::array<int, 4> StructuredQuadMesh::patch_cells(int patch) const {
  const int pi = patch % (nx_ / 2);
  const int pj = patch / (nx_ / 2);
  const int c = 2 * pi + nx_ * 2 * pj;
  return {c, c + 1, c + nx_, c + nx_ + 1};
}

double StructuredQuadMesh::patch_diameter(int /*patch*/) const {
  return std::hypot(2.0 * hx_, 2.0 * hy_);
}

int StructuredQuadMesh::locate_cell(double x, double y) const {
  const double tol = 1e-12 * std::max(domain_.width(), domain_.height());
  if (!domain_.contains(x, y, tol)) {
    throw InvalidArgument("locate_cell: point (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") lies outside the mesh");
  }
  const int i = std::clamp(static_cast<int>(std::floor((x - domain_.x0) / hx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((y - domain_.y0) / hy_)), 0, ny_ - 1);
  return i + nx_ * j;
}

}  // namespace porous::darcy
