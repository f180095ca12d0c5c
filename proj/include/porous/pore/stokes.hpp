#pragma once

#include <array>
#include <vector>

#include "porous/pore/voxel.hpp"

namespace porous::pore {

struct StokesOptions {
  /// Dynamic viscosity, Pa s.
  double viscosity = 1e-3;
  /// Imposed mean pressure drop per unit length along +x, Pa/m.
  double gradient = 0.002;
  /// Bound on the relative momentum residual and the relative divergence.
  double tolerance = 1e-8;
  int max_iterations = 200000;
};

/// Steady Stokes solution on the MAC grid. velocity[a][c] lives on the low
/// face of cell c along axis a and is zero unless both adjacent cells are
/// fluid. Pressure lives at fluid cell centres (zero in solid cells) and has
/// zero mean over the fluid.
struct StokesField {
  std::array<int, 3> n{};
  Vec3 spacing{};
  std::array<std::vector<double>, 3> velocity;
  std::vector<double> pressure;
  double viscosity = 0.0;
  double gradient = 0.0;
  int iterations = 0;
  /// Preconditioned residual estimate after each block of iterations.
  std::vector<double> residual_history;
  double momentum_residual = 0.0;
  double divergence = 0.0;
};

/// Solves -mu lap u + grad p = G e_x, div u = 0 in the fluid, u = 0 on the
/// voxel walls, periodic in all directions. Walls sit on cell faces: a wall
/// parallel to a velocity component is imposed with a mirrored ghost value.
/// The symmetric saddle system is solved by block-diagonally preconditioned
/// MINRES. Throws InvalidArgument when the fluid does not percolate along x
/// and NumericalError (with residual history) when the tolerance is not met.
StokesField solve_stokes(const VoxelGrid& grid, const StokesOptions& options = {});

/// max over fluid cells of |div u| h_min / max |u|.
double relative_divergence(const StokesField& field, const VoxelGrid& grid);

/// Volume average of u_x over the whole box.
double superficial_velocity(const StokesField& field);

/// Average of the cell-centred u_x over the fluid cells.
double intrinsic_velocity(const StokesField& field, const VoxelGrid& grid);

/// Cell-centred u_x (mean of the two x-faces) at every cell.
std::vector<double> cell_velocity_x(const StokesField& field);

/// k = mu <u> / G in m^2. Throws InvalidArgument if G = 0.
double permeability(const StokesField& field);

/// K = D^2 eps^3 / (alpha (1 - eps)^2); alpha = 150 Blake-Kozeny, 180 Carman-Kozeny.
double blake_kozeny(double diameter, double porosity, double alpha = 150.0);

/// Fully developed flow in a square duct of side s under gradient G:
/// series value at (y, z) measured from the duct centre, and the mean velocity.
double duct_velocity(double side, double viscosity, double gradient, double y, double z, int terms = 200);
double duct_mean_velocity(double side, double viscosity, double gradient, int terms = 200);

}  // namespace porous::pore
