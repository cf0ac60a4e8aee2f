#include "assembly.hpp"

#include "mhm/kinematics.hpp"

namespace mhm::detail {

void assemble_volume(const LocalMesh& mesh, const DofMap& dofs, const PatchMaterial& material, Formulation form,
                     double alpha, const LoadData* load, VolumeSystem& out) {
    const int k = dofs.degree();
    const int n = dofs.num_nodes();
    const int nloc = dofs.nodes_per_cell();
    const bool gals = form == Formulation::gals;
    const int nu = 2 * nloc;
    const int nb = gals ? 3 * nloc : nu;
    const TabulatedElement tab(lagrange_element(k), quad_rule(QuadratureDomain::triangle, 2 * k + 2));

    out.rhs = Eigen::VectorXd::Zero(volume_unknowns(form, n));
    out.triplets.reserve(out.triplets.size() + static_cast<std::size_t>(mesh.num_triangles()) * nb * nb);

    Eigen::MatrixXd ke(nb, nb), strain(3, nu), residual(2, nb);
    Eigen::VectorXd fe(nb), div(nu);
    std::vector<int> global(nb);

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto pts = mesh.triangle_points(t);
        const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
        const double g = material.shear[t], eps = material.epsilon[t];
        const double ht = mesh.triangle_diameter(t);
        const double ls = alpha * ht * ht;
        const auto cell = dofs.cell(t);
        for (int a = 0; a < nloc; ++a) {
            global[a] = cell[a];
            global[nloc + a] = n + cell[a];
            if (gals) global[nu + a] = 2 * n + cell[a];
        }
        ke.setZero();
        fe.setZero();
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const PhysicalShape ps = to_physical(tab.at_points[q], map);
            const double w = tab.rule.weights[q] * std::abs(map.det);
            for (int c = 0; c < 2; ++c)
                for (int a = 0; a < nloc; ++a) {
                    const int col = c * nloc + a;
                    strain.col(col) = strain_of_basis(ps, a, c);
                    div(col) = div_of_basis(ps, a, c);
                    if (gals) residual.col(col) = 2.0 * g * div_strain_of_basis(ps, a, c);
                }
            strain.row(2) *= std::sqrt(2.0);
            ke.topLeftCorner(nu, nu).noalias() += (2.0 * g * w) * strain.transpose() * strain;
            if (gals) {
                for (int a = 0; a < nloc; ++a) residual.col(nu + a) = -ps.grads.row(a).transpose();
                ke.block(0, nu, nu, nloc).noalias() -= w * div * ps.values.transpose();
                ke.block(nu, 0, nloc, nu).noalias() -= w * ps.values * div.transpose();
                ke.bottomRightCorner(nloc, nloc).noalias() -= (w * eps) * ps.values * ps.values.transpose();
                ke.noalias() -= (ls * w) * residual.transpose() * residual;
            } else {
                ke.noalias() += (w / eps) * div * div.transpose();
            }
            if (load && load->body_force) {
                const Point f = load->force_at(map.to_physical(tab.rule.points[q]));
                for (int a = 0; a < nloc; ++a) {
                    fe(a) += w * f.x() * ps.values(a);
                    fe(nloc + a) += w * f.y() * ps.values(a);
                }
                if (gals) fe.noalias() += (ls * w) * residual.transpose() * f;
            }
        }
        for (int i = 0; i < nb; ++i) {
            out.rhs(global[i]) += fe(i);
            for (int j = 0; j < nb; ++j)
                if (ke(i, j) != 0.0) out.triplets.emplace_back(global[i], global[j], ke(i, j));
        }
    }
}

}  // namespace mhm::detail
