#pragma once

// Strain and strain-divergence of vector Lagrange basis functions phi_a e_c.

#include "mhm/fem.hpp"

namespace mhm {

/// Symmetric 2x2 tensor stored as (xx, yy, xy).
using Voigt = Eigen::Vector3d;

inline double contract(const Voigt& a, const Voigt& b) {
    return a(0) * b(0) + a(1) * b(1) + 2.0 * a(2) * b(2);
}

inline Voigt strain_of_basis(const PhysicalShape& ps, int a, int c) {
    const double gx = ps.grads(a, 0), gy = ps.grads(a, 1);
    return c == 0 ? Voigt(gx, 0.0, 0.5 * gy) : Voigt(0.0, gy, 0.5 * gx);
}

/// div eps(phi_a e_c) = (Laplacian(phi) e_c + grad(d_c phi)) / 2.
inline Eigen::Vector2d div_strain_of_basis(const PhysicalShape& ps, int a, int c) {
    const double lap = ps.laplacians(a);
    const double hxx = ps.hessians(a, 0), hxy = ps.hessians(a, 1), hyy = ps.hessians(a, 2);
    if (c == 0) return {0.5 * (lap + hxx), 0.5 * hxy};
    return {0.5 * hxy, 0.5 * (lap + hyy)};
}

inline double div_of_basis(const PhysicalShape& ps, int a, int c) { return ps.grads(a, c); }

}  // namespace mhm
