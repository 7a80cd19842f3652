#pragma once

#include "qdt/model.hpp"
#include "qdt/sparse.hpp"

namespace qdt {

enum class Face1D { dirichlet_both, dirichlet_bottom_robin_top };

// 1D kinetic operator -1/2 d^2/dz^2 on n nodes with spacing h. Nodes on
// Dirichlet faces (index 0, and index n-1 for dirichlet_both) carry zero
// rows; their neighbours use the one-sided stencil with the boundary value
// eliminated. With a Robin top, the ghost psi_n = (1 + i kappa h) psi_{n-1}
// is eliminated into the roof row, whose diagonal becomes
// 1/(2h^2) - i kappa/(2h).
SparseOperator assemble_laplacian_1d(int n, double h, Face1D face, double kappa);

// Full discrete Hamiltonian: Kronecker-sum kinetic part, harmonic transverse
// potential, -iW(z) diagonal for CAP, ABC roof rows in the z factor, and the
// roof-plane cross-spin blocks for the spinor ABC. Dimension is N in scalar
// mode and 2N (up block first) in spinor mode.
SparseOperator assemble_hamiltonian(const GridSpec& grid, const PhysicsConfig& physics,
                                    const DetectorModel& detector);

} // namespace qdt
