#pragma once

// Single-level reference solvers on the whole domain with strong Dirichlet
// conditions on every boundary node of the mesh.

#include "mhm/field.hpp"

#include <memory>

namespace mhm {

enum class SingleLevelMethod { galerkin, gals };

struct SingleLevelSolution {
    SingleLevelMethod method = SingleLevelMethod::galerkin;
    double alpha = 0.0;
    FieldPatch field;
};

/// Continuous P_k displacement form 2G eps:eps + (1/eps) div div.
SingleLevelSolution solve_galerkin_dirichlet(std::shared_ptr<const LocalMesh> mesh, int degree,
                                             const Material& material, const LoadData& data);

/// Equal-order P_k/P_k displacement-pressure GaLS; the pressure carries no boundary condition.
SingleLevelSolution solve_gals_dirichlet(std::shared_ptr<const LocalMesh> mesh, int degree, const Material& material,
                                         double alpha, const LoadData& data);

/// Nodes lying on boundary edges of the mesh.
std::vector<int> boundary_nodes(const LocalMesh& mesh, const DofMap& dofs);

}  // namespace mhm
