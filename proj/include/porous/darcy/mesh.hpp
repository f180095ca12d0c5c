#pragma once

#include <array>

namespace porous::darcy {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(double x, double y, double tol = 0.0) const {
    return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
  }
};

/// Uniform nx x ny quadrilateral mesh with a 2x2 patch structure.
///
/// Vertices are numbered lexicographically (x fastest); cell c = i + nx j has
/// vertices (i, j), (i+1, j), (i, j+1), (i+1, j+1) in that order. Patch
/// P = I + (nx/2) J covers cells 2I..2I+1 by 2J..2J+1.
class StructuredQuadMesh {
 public:
  /// Throws InvalidArgument for odd or too small counts and degenerate domains.
  StructuredQuadMesh(int nx, int ny, Rectangle domain = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Rectangle& domain() const { return domain_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  int num_cells() const { return nx_ * ny_; }
  int num_vertices() const { return (nx_ + 1) * (ny_ + 1); }
  int num_patches() const { return num_cells() / 4; }

  int vertex_index(int i, int j) const { return i + (nx_ + 1) * j; }
  Point2 vertex(int v) const;
  bool on_vertical_boundary(int v) const;    // x = x0 or x = x1
  bool on_horizontal_boundary(int v) const;  // y = y0 or y = y1

  std::array<int, 4> cell_vertices(int cell) const;
  Point2 cell_origin(int cell) const;
  Point2 cell_center(int cell) const;
  int cell_patch(int cell) const;
  std::array<int, 4> patch_cells(int patch) const;
  /// Diagonal length of the patch.
  double patch_diameter(int patch) const;

  /// Cell containing (x, y); points on shared edges go to the upper/right cell
  /// except on the outer boundary. Throws if the point is outside the domain.
  int locate_cell(double x, double y) const;

 private:
  int nx_;
  int ny_;
  Rectangle domain_;
  double hx_;
  double hy_;
};

}  // namespace porous::darcy
