#pragma once

// Discrete displacement/pressure fields living on one triangulated patch.

#include "mhm/fem.hpp"
#include "mhm/material.hpp"
#include "mhm/mesh.hpp"

#include <iosfwd>
#include <memory>

namespace mhm {

/// Material sampled at the centroid of each fine triangle.
struct PatchMaterial {
    std::vector<double> shear;
    std::vector<double> poisson;
    std::vector<double> epsilon;

    static PatchMaterial sample(const Material& material, const LocalMesh& mesh);

    double min_shear() const;
    /// max_tau ||G||_{L^inf(tau)}; gradients vanish for piecewise-constant G.
    double shear_w1inf() const;
};

struct FieldValue {
    Point u;
    Mat2 grad;  ///< grad(i, j) = d u_i / d x_j
    double p = 0.0;
    Point grad_p;

    double divergence() const { return grad.trace(); }
    Mat2 strain() const { return 0.5 * (grad + grad.transpose()); }
    Mat2 stress(double shear) const { return 2.0 * shear * strain() - p * Mat2::Identity(); }
};

/// Continuous P_k displacement (and optionally pressure) on a patch.
/// When the patch has no pressure unknowns the pressure is -div(u)/epsilon.
struct FieldPatch {
    int element = -1;
    std::shared_ptr<const LocalMesh> mesh;
    std::shared_ptr<const DofMap> dofs;
    PatchMaterial material;
    Eigen::VectorXd ux, uy, p;

    bool has_pressure() const { return p.size() > 0; }
    int degree() const { return dofs->degree(); }

    FieldValue evaluate(int triangle, const PhysicalShape& shape) const;
    /// Evaluation at a point of the given fine triangle (physical coordinates).
    FieldValue evaluate_at(int triangle, const Point& x) const;
};

/// Area-weighted centroid of the patch.
Point patch_centroid(const LocalMesh& mesh);

/// Nodal interpolant of a vector function on a dof map.
void interpolate(const DofMap& dofs, const VectorFunction& fn, Eigen::VectorXd& ux, Eigen::VectorXd& uy);

/// CSV rows "element,triangle,x,y,ux,uy,p,sxx,syy,sxy" at the vertices of every fine triangle.
void write_fields_csv(std::ostream& out, const std::vector<FieldPatch>& patches);

}  // namespace mhm
