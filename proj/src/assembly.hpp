#pragma once

// Volume assembly shared by the local MHM solvers and the single-level solvers.
// Unknown layout: ux on [0, N), uy on [N, 2N), pressure on [2N, 3N) for GaLS.

#include "mhm/field.hpp"

#include <Eigen/Sparse>

namespace mhm::detail {

enum class Formulation { gals, galerkin };

struct VolumeSystem {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs;
};

inline int volume_unknowns(Formulation form, int num_nodes) {
    return (form == Formulation::gals ? 3 : 2) * num_nodes;
}

/// GaLS:     2G eps(u):eps(v) - p div v - q div u - eps p q
///           - alpha h^2 div(2G eps(u) - pI) . div(2G eps(v) - qI)
///           load: f.v + alpha h^2 f . div(2G eps(v) - qI)
/// Galerkin: 2G eps(u):eps(v) + (1/eps) div u div v, load f.v
void assemble_volume(const LocalMesh& mesh, const DofMap& dofs, const PatchMaterial& material, Formulation form,
                     double alpha, const LoadData* load, VolumeSystem& out);

/// Rigid mode m (0: x-translation, 1: y-translation, 2: rotation) about a centre.
inline Point rigid_mode(int m, const Point& x, const Point& centre) {
    switch (m) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        default: return {-(x.y() - centre.y()), x.x() - centre.x()};
    }
}

}  // namespace mhm::detail
