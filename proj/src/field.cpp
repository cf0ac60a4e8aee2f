#include "mhm/field.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace mhm {

PatchMaterial PatchMaterial::sample(const Material& material, const LocalMesh& mesh) {
    PatchMaterial out;
    const int nt = mesh.num_triangles();
    out.shear.resize(nt);
    out.poisson.resize(nt);
    out.epsilon.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const auto pts = mesh.triangle_points(t);
        const Point c = (pts[0] + pts[1] + pts[2]) / 3.0;
        const double g = material.shear(c), nu = material.poisson(c);
        if (!(g > 0.0)) throw Error("material: shear modulus must be positive");
        if (!(nu > 0.0 && nu < 0.5)) throw Error("material: Poisson ratio must lie in (0, 1/2)");
        out.shear[t] = g;
        out.poisson[t] = nu;
        out.epsilon[t] = compressibility(g, nu);
    }
    return out;
}

double PatchMaterial::min_shear() const { return *std::min_element(shear.begin(), shear.end()); }

double PatchMaterial::shear_w1inf() const { return *std::max_element(shear.begin(), shear.end()); }

FieldValue FieldPatch::evaluate(int triangle, const PhysicalShape& shape) const {
    const auto cell = dofs->cell(triangle);
    FieldValue v;
    v.u.setZero();
    v.grad.setZero();
    v.grad_p.setZero();
    Point grad_div = Point::Zero();
    double p_sum = 0.0;
    for (std::size_t a = 0; a < cell.size(); ++a) {
        const int n = cell[a];
        const double phi = shape.values(a);
        v.u += phi * Point(ux(n), uy(n));
        v.grad.row(0) += ux(n) * shape.grads.row(a);
        v.grad.row(1) += uy(n) * shape.grads.row(a);
        grad_div += ux(n) * Point(shape.hessians(a, 0), shape.hessians(a, 1)) +
                    uy(n) * Point(shape.hessians(a, 1), shape.hessians(a, 2));
        if (has_pressure()) {
            p_sum += p(n) * phi;
            v.grad_p += p(n) * shape.grads.row(a).transpose();
        }
    }
    if (has_pressure()) {
        v.p = p_sum;
    } else {
        v.p = -v.divergence() / material.epsilon[triangle];
        v.grad_p = -grad_div / material.epsilon[triangle];
    }
    return v;
}

FieldValue FieldPatch::evaluate_at(int triangle, const Point& x) const {
    const auto pts = mesh->triangle_points(triangle);
    const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
    Point ref = map.to_reference(x);
    // snap round-off at vertices and edges
    ref = ref.cwiseMax(0.0);
    if (ref.sum() > 1.0) ref /= ref.sum();
    const PhysicalShape ps = to_physical(lagrange_element(degree()).eval(ref), map);
    return evaluate(triangle, ps);
}

Point patch_centroid(const LocalMesh& mesh) {
    Point c = Point::Zero();
    double area = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto pts = mesh.triangle_points(t);
        const double a = mesh.triangle_area(t);
        c += a * (pts[0] + pts[1] + pts[2]) / 3.0;
        area += a;
    }
    return c / area;
}

void interpolate(const DofMap& dofs, const VectorFunction& fn, Eigen::VectorXd& ux, Eigen::VectorXd& uy) {
    ux.resize(dofs.num_nodes());
    uy.resize(dofs.num_nodes());
    for (int n = 0; n < dofs.num_nodes(); ++n) {
        const Point v = fn(dofs.coord(n));
        ux(n) = v.x();
        uy(n) = v.y();
    }
}

void write_fields_csv(std::ostream& out, const std::vector<FieldPatch>& patches) {
    out << "element,triangle,x,y,ux,uy,p,sxx,syy,sxy\n";
    char buf[512];
    for (const auto& patch : patches) {
        for (int t = 0; t < patch.mesh->num_triangles(); ++t) {
            const auto pts = patch.mesh->triangle_points(t);
            for (const Point& x : pts) {
                const FieldValue v = patch.evaluate_at(t, x);
                const Mat2 s = v.stress(patch.material.shear[t]);
                std::snprintf(buf, sizeof buf, "%d,%d,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e\n",
                              patch.element, t, x.x(), x.y(), v.u.x(), v.u.y(), v.p, s(0, 0), s(1, 1), s(0, 1));
                out << buf;
            }
        }
    }
}

}  // namespace mhm
