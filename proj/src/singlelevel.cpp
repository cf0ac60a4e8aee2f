#include "mhm/singlelevel.hpp"

#include "assembly.hpp"

#include <Eigen/SparseLU>

namespace mhm {

std::vector<int> boundary_nodes(const LocalMesh& mesh, const DofMap& dofs) {
    const LagrangeElement& element = lagrange_element(dofs.degree());
    std::vector<char> mark(dofs.num_nodes(), 0);
    for (const auto& be : mesh.boundary) {
        const auto cell = dofs.cell(be.triangle);
        for (int a : element.edge_nodes(be.local_edge)) mark[cell[a]] = 1;
    }
    std::vector<int> out;
    for (int i = 0; i < dofs.num_nodes(); ++i)
        if (mark[i]) out.push_back(i);
    return out;
}

namespace {

SingleLevelSolution solve_dirichlet(std::shared_ptr<const LocalMesh> mesh, int degree, const Material& material,
                                    detail::Formulation form, double alpha, const LoadData& data) {
    auto dofs = std::make_shared<const DofMap>(mesh->vertices, mesh->triangles, degree);
    const PatchMaterial mat = PatchMaterial::sample(material, *mesh);
    detail::VolumeSystem vol;
    detail::assemble_volume(*mesh, *dofs, mat, form, alpha, &data, vol);

    const int n = dofs->num_nodes();
    const int size = detail::volume_unknowns(form, n);
    Eigen::VectorXd fixed_value = Eigen::VectorXd::Zero(size);
    std::vector<char> fixed(size, 0);
    for (int i : boundary_nodes(*mesh, *dofs)) {
        const Point ud = data.dirichlet_at(dofs->coord(i));
        fixed[i] = fixed[n + i] = 1;
        fixed_value(i) = ud.x();
        fixed_value(n + i) = ud.y();
    }
    std::vector<int> free_index(size, -1);
    int nfree = 0;
    for (int i = 0; i < size; ++i)
        if (!fixed[i]) free_index[i] = nfree++;

    Eigen::VectorXd rhs(nfree);
    for (int i = 0; i < size; ++i)
        if (!fixed[i]) rhs(free_index[i]) = vol.rhs(i);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(vol.triplets.size());
    for (const auto& t : vol.triplets) {
        if (fixed[t.row()]) continue;
        if (fixed[t.col()])
            rhs(free_index[t.row()]) -= t.value() * fixed_value(t.col());
        else
            trip.emplace_back(free_index[t.row()], free_index[t.col()], t.value());
    }
    Eigen::SparseMatrix<double> k(nfree, nfree);
    k.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(k);
    lu.factorize(k);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("single-level solve: factorization failed (" + lu.lastErrorMessage() + ")");
    const Eigen::VectorXd xf = lu.solve(rhs);

    Eigen::VectorXd x = fixed_value;
    for (int i = 0; i < size; ++i)
        if (!fixed[i]) x(i) = xf(free_index[i]);

    SingleLevelSolution out;
    out.method = form == detail::Formulation::gals ? SingleLevelMethod::gals : SingleLevelMethod::galerkin;
    out.alpha = alpha;
    out.field.mesh = std::move(mesh);
    out.field.dofs = std::move(dofs);
    out.field.material = mat;
    out.field.ux = x.segment(0, n);
    out.field.uy = x.segment(n, n);
    if (form == detail::Formulation::gals) out.field.p = x.segment(2 * n, n);
    return out;
}

}  // namespace

SingleLevelSolution solve_galerkin_dirichlet(std::shared_ptr<const LocalMesh> mesh, int degree,
                                             const Material& material, const LoadData& data) {
    return solve_dirichlet(std::move(mesh), degree, material, detail::Formulation::galerkin, 0.0, data);
}

SingleLevelSolution solve_gals_dirichlet(std::shared_ptr<const LocalMesh> mesh, int degree, const Material& material,
                                         double alpha, const LoadData& data) {
    if (!(alpha > 0.0)) throw Error("solve_gals_dirichlet: alpha must be positive");
    return solve_dirichlet(std::move(mesh), degree, material, detail::Formulation::gals, alpha, data);
}

}  // namespace mhm
