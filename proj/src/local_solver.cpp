#include "mhm/local_solver.hpp"

#include "assembly.hpp"

#include <cmath>
#include <map>

namespace mhm {

using detail::Formulation;
using detail::rigid_mode;

std::string to_string(LocalMethod method) { return method == LocalMethod::gals ? "gals" : "galerkin"; }

double alpha_upper_bound(const PatchMaterial& material, double c_inverse) {
    const double g0 = material.min_shear();
    if (!(g0 > 0.0)) throw Error("compute_alpha: non-positive shear modulus");
    const double norm = material.shear_w1inf();
    return g0 * c_inverse / (2.0 * norm * norm);
}

double compute_alpha(const PatchMaterial& material, double c_inverse, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw Error("compute_alpha: theta must lie in (0, 1)");
    if (!(c_inverse > 0.0)) throw Error("compute_alpha: inverse constant must be positive");
    return theta * alpha_upper_bound(material, c_inverse);
}

RigidProjection project_rm(const LocalMesh& mesh, const DofMap& dofs, const Eigen::VectorXd& ux,
                           const Eigen::VectorXd& uy) {
    const int k = dofs.degree();
    const TabulatedElement tab(lagrange_element(k), quad_rule(QuadratureDomain::triangle, 2 * k + 2));
    RigidProjection out;
    out.centre = patch_centroid(mesh);
    out.gram.setZero();
    Eigen::Vector3d moments = Eigen::Vector3d::Zero();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto pts = mesh.triangle_points(t);
        const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
        const auto cell = dofs.cell(t);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const double w = tab.rule.weights[q] * std::abs(map.det);
            const Point x = map.to_physical(tab.rule.points[q]);
            Point u = Point::Zero();
            for (std::size_t a = 0; a < cell.size(); ++a)
                u += tab.at_points[q].values(a) * Point(ux(cell[a]), uy(cell[a]));
            for (int m = 0; m < 3; ++m) {
                const Point vm = rigid_mode(m, x, out.centre);
                moments(m) += w * u.dot(vm);
                for (int n = 0; n < 3; ++n) out.gram(m, n) += w * vm.dot(rigid_mode(n, x, out.centre));
            }
        }
    }
    Eigen::LLT<Eigen::Matrix3d> llt(out.gram);
    if (llt.info() != Eigen::Success) throw Error("project_rm: singular Gram matrix");
    out.coefficients = llt.solve(moments);
    out.residual_x = ux;
    out.residual_y = uy;
    for (int i = 0; i < dofs.num_nodes(); ++i) {
        Point r = Point::Zero();
        for (int m = 0; m < 3; ++m) r += out.coefficients(m) * rigid_mode(m, dofs.coord(i), out.centre);
        out.residual_x(i) -= r.x();
        out.residual_y(i) -= r.y();
    }
    return out;
}

std::vector<TraceDof> element_trace_dofs(const SkeletonMesh& skeleton, int element) {
    const GlobalPartition& partition = skeleton.partition();
    std::vector<TraceDof> out;
    const int l = skeleton.trace_degree();
    for (int side = 0; side < 3; ++side) {
        const int f = partition.element_face(element, side);
        if (!skeleton.carries_dofs(f)) continue;
        const double sign = partition.face_sign(element, side);
        for (int s = 0; s < static_cast<int>(skeleton.segments(f).size()); ++s) {
            const int offset = skeleton.dof_offset(f, s);
            for (int c = 0; c < 2; ++c)
                for (int m = 0; m <= l; ++m)
                    out.push_back({offset + skeleton.local_dof(c, m), sign, f, s, c, m});
        }
    }
    return out;
}

double trace_basis(int mode, double s, double length) {
    return std::sqrt((2.0 * mode + 1.0) / length) * std::legendre(static_cast<unsigned>(mode), 2.0 * s - 1.0);
}

LocalContext make_local_context(const GlobalPartition& partition, const SkeletonMesh& skeleton,
                                std::shared_ptr<const LocalMesh> mesh, int degree, const Material& material,
                                const LoadData* load) {
    LocalContext ctx;
    ctx.partition = &partition;
    ctx.skeleton = &skeleton;
    ctx.dofs = std::make_shared<const DofMap>(mesh->vertices, mesh->triangles, degree);
    ctx.material = PatchMaterial::sample(material, *mesh);
    ctx.mesh = std::move(mesh);
    ctx.load = load;
    return ctx;
}

namespace {

Point edge_reference_point(int local_edge, double t) {
    switch (local_edge) {
        case 0: return {t, 0.0};
        case 1: return {1.0 - t, t};
        default: return {0.0, 1.0 - t};
    }
}

/// Rigid-mode border, boundary pairings, Neumann load and load moments.
void assemble_boundary_and_border(const LocalContext& ctx, Formulation form,
                                  std::vector<Eigen::Triplet<double>>& triplets, LocalSystem& sys) {
    const LocalMesh& mesh = *ctx.mesh;
    const DofMap& dofs = *ctx.dofs;
    const int k = dofs.degree();
    const int n = dofs.num_nodes();
    const int border = detail::volume_unknowns(form, n);
    const int size = border + 3;
    const LagrangeElement& element = lagrange_element(k);

    // rigid-mode constraint rows and volume load moments
    const TabulatedElement tab(element, quad_rule(QuadratureDomain::triangle, 2 * k + 2));
    Eigen::Matrix<double, 3, Eigen::Dynamic> constraint = Eigen::MatrixXd::Zero(3, 2 * n);
    sys.load_moments.setZero();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto pts = mesh.triangle_points(t);
        const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
        const auto cell = dofs.cell(t);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const double w = tab.rule.weights[q] * std::abs(map.det);
            const Point x = map.to_physical(tab.rule.points[q]);
            const Point f = ctx.load ? ctx.load->force_at(x) : Point::Zero();
            for (int m = 0; m < 3; ++m) {
                const Point vm = rigid_mode(m, x, sys.centre);
                sys.load_moments(m) += w * f.dot(vm);
                for (std::size_t a = 0; a < cell.size(); ++a) {
                    const double phi = w * tab.at_points[q].values(a);
                    constraint(m, cell[a]) += phi * vm.x();
                    constraint(m, n + cell[a]) += phi * vm.y();
                }
            }
        }
    }
    for (int m = 0; m < 3; ++m)
        for (int i = 0; i < 2 * n; ++i)
            if (constraint(m, i) != 0.0) {
                triplets.emplace_back(border + m, i, constraint(m, i));
                triplets.emplace_back(i, border + m, constraint(m, i));
            }

    // boundary pairings with the trace basis and the Neumann load
    std::map<std::pair<int, int>, int> first_dof;
    for (int j = 0; j < static_cast<int>(sys.trace.size()); ++j)
        first_dof.emplace(std::pair{sys.trace[j].face, sys.trace[j].segment}, j);
    const int l = ctx.skeleton ? ctx.skeleton->trace_degree() : 0;
    const QuadratureRule edge_rule = quad_rule(QuadratureDomain::segment, std::max(k + l + 1, 2 * k + 2));
    std::vector<Eigen::Triplet<double>> trace_triplets;
    for (const auto& be : mesh.boundary) {
        if (be.face < 0 || !ctx.skeleton) continue;
        const Face& face = ctx.partition->faces()[be.face];
        const bool neumann = face.tag == FaceTag::neumann;
        auto it = first_dof.find({be.face, be.segment});
        if (!neumann && it == first_dof.end()) throw Error("local assembly: boundary edge without trace dofs");
        const auto& tri = mesh.triangles[be.triangle];
        const Point p0 = mesh.vertices[tri[be.local_edge]];
        const Point p1 = mesh.vertices[tri[(be.local_edge + 1) % 3]];
        const double edge_len = (p1 - p0).norm();
        const Point fa = ctx.partition->vertices()[face.vertices[0]];
        const Point fd = ctx.partition->vertices()[face.vertices[1]] - fa;
        const Segment& seg = ctx.skeleton->segments(be.face)[be.segment];
        const double seg_len = ctx.skeleton->segment_length(be.face, be.segment);
        const auto cell = dofs.cell(be.triangle);
        for (std::size_t q = 0; q < edge_rule.size(); ++q) {
            const double t = edge_rule.points[q].x();
            const double w = edge_rule.weights[q] * edge_len;
            const Point x = p0 + t * (p1 - p0);
            const ShapeEval se = element.eval(edge_reference_point(be.local_edge, t));
            if (neumann) {
                const Point g = ctx.load ? ctx.load->traction_at(x) : Point::Zero();
                for (std::size_t a = 0; a < cell.size(); ++a) {
                    sys.load_rhs(cell[a]) += w * g.x() * se.values(a);
                    sys.load_rhs(n + cell[a]) += w * g.y() * se.values(a);
                }
                for (int m = 0; m < 3; ++m) sys.load_moments(m) += w * g.dot(rigid_mode(m, x, sys.centre));
                continue;
            }
            const double tau = (x - fa).dot(fd) / fd.squaredNorm();
            const double s = std::clamp((tau - seg.t0) / (seg.t1 - seg.t0), 0.0, 1.0);
            const int j0 = it->second;
            for (int c = 0; c < 2; ++c)
                for (int m = 0; m <= l; ++m) {
                    const int j = j0 + ctx.skeleton->local_dof(c, m);
                    const double psi = w * trace_basis(m, s, seg_len);
                    for (std::size_t a = 0; a < cell.size(); ++a)
                        trace_triplets.emplace_back(c * n + cell[a], j, psi * se.values(a));
                }
        }
    }
    sys.trace_rhs.resize(size, static_cast<Eigen::Index>(sys.trace.size()));
    sys.trace_rhs.setFromTriplets(trace_triplets.begin(), trace_triplets.end());
}

LocalSystem assemble_local(const LocalContext& ctx, Formulation form, double alpha) {
    LocalSystem sys;
    sys.method = form == Formulation::gals ? LocalMethod::gals : LocalMethod::galerkin;
    sys.num_nodes = ctx.dofs->num_nodes();
    sys.alpha = alpha;
    sys.centre = patch_centroid(*ctx.mesh);
    if (ctx.skeleton) sys.trace = element_trace_dofs(*ctx.skeleton, ctx.mesh->element);

    detail::VolumeSystem vol;
    detail::assemble_volume(*ctx.mesh, *ctx.dofs, ctx.material, form, alpha, ctx.load, vol);
    const int size = static_cast<int>(vol.rhs.size()) + 3;
    sys.load_rhs = Eigen::VectorXd::Zero(size);
    sys.load_rhs.head(vol.rhs.size()) = vol.rhs;
    assemble_boundary_and_border(ctx, form, vol.triplets, sys);
    sys.matrix.resize(size, size);
    sys.matrix.setFromTriplets(vol.triplets.begin(), vol.triplets.end());
    return sys;
}

}  // namespace

LocalSystem assemble_local_gals(const LocalContext& ctx, double alpha, double c_inverse) {
    const double upper = alpha_upper_bound(ctx.material, c_inverse);
    if (!(alpha > 0.0 && alpha < upper))
        throw Error("assemble_local_gals: alpha = " + std::to_string(alpha) + " outside the admissible interval (0, " +
                    std::to_string(upper) + ")");
    return assemble_local(ctx, Formulation::gals, alpha);
}

LocalSystem assemble_local_galerkin(const LocalContext& ctx) { return assemble_local(ctx, Formulation::galerkin, 0.0); }

namespace {

/// LU solve followed by one step of iterative refinement.
template <class Rhs>
Eigen::MatrixXd refined_solve(const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                              const Eigen::SparseMatrix<double>& matrix, const Rhs& rhs) {
    Eigen::MatrixXd x = lu.solve(rhs);
    const Eigen::MatrixXd residual = rhs - matrix * x;
    x += lu.solve(residual);
    return x;
}

}  // namespace

LocalBasisCache solve_local_basis(const LocalContext& ctx, LocalSystem system) {
    auto lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    system.matrix.makeCompressed();
    lu->analyzePattern(system.matrix);
    lu->factorize(system.matrix);
    if (lu->info() != Eigen::Success)
        throw SingularSystemError("local solve on element " + std::to_string(ctx.mesh->element) +
                                  ": factorization failed (" + lu->lastErrorMessage() +
                                  "); check the refinement conditions");

    LocalBasisCache cache;
    cache.element = ctx.mesh->element;
    cache.method = system.method;
    cache.alpha = system.alpha;
    cache.centre = system.centre;
    cache.mesh = ctx.mesh;
    cache.dofs = ctx.dofs;
    cache.material = ctx.material;
    cache.trace = std::move(system.trace);
    cache.load_moments = system.load_moments;

    const int n = system.num_nodes;
    const Eigen::MatrixXd rhs(system.trace_rhs);
    const Eigen::MatrixXd solutions = refined_solve(*lu, system.matrix, rhs);
    cache.pairing = system.trace_rhs.transpose() * solutions;
    const double scale = cache.pairing.cwiseAbs().maxCoeff();
    const double asym = (cache.pairing - cache.pairing.transpose()).cwiseAbs().maxCoeff();
    if (cache.pairing.size() > 0 && asym > 1e-8 * scale)
        throw Error("local solve on element " + std::to_string(cache.element) + ": pairing block not symmetric");
    cache.pairing = 0.5 * (cache.pairing + cache.pairing.transpose()).eval();

    Eigen::MatrixXd rigid = Eigen::MatrixXd::Zero(system.size(), 3);
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < 3; ++m) {
            const Point v = rigid_mode(m, ctx.dofs->coord(i), cache.centre);
            rigid(i, m) = v.x();
            rigid(n + i, m) = v.y();
        }
    cache.rm_pairing = system.trace_rhs.transpose() * rigid;
    const int border = system.multiplier_offset();
    for (int m = 0; m < 3; ++m)
        for (int l = 0; l < 3; ++l) cache.rigid_gram(m, l) = rigid.col(m).dot(Eigen::VectorXd(system.matrix.col(border + l)));

    cache.load_solution = refined_solve(*lu, system.matrix, Eigen::MatrixXd(system.load_rhs)).col(0);
    cache.load_pairing = system.trace_rhs.transpose() * cache.load_solution;
    if (!cache.load_solution.allFinite())
        throw SingularSystemError("local solve on element " + std::to_string(cache.element) + ": non-finite solution");
    cache.factor = std::move(lu);
    cache.trace_rhs = std::move(system.trace_rhs);
    cache.matrix = std::move(system.matrix);
    return cache;
}

LocalBasisCache solve_local_galerkin_basis(const LocalContext& ctx) {
    return solve_local_basis(ctx, assemble_local_galerkin(ctx));
}

Eigen::VectorXd LocalBasisCache::solve(const Eigen::VectorXd& trace_coefficients, bool with_load) const {
    Eigen::VectorXd rhs = trace_rhs * trace_coefficients;
    Eigen::VectorXd x = refined_solve(*factor, matrix, Eigen::MatrixXd(rhs)).col(0);
    if (with_load) x += load_solution;
    return x;
}

Eigen::VectorXd LocalBasisCache::basis_solution(int j) const {
    return refined_solve(*factor, matrix, Eigen::MatrixXd(trace_rhs.col(j))).col(0);
}

FieldPatch LocalBasisCache::field_of(const Eigen::VectorXd& x) const {
    const int n = num_nodes();
    FieldPatch patch;
    patch.element = element;
    patch.mesh = mesh;
    patch.dofs = dofs;
    patch.material = material;
    patch.ux = x.segment(0, n);
    patch.uy = x.segment(n, n);
    if (method == LocalMethod::gals) patch.p = x.segment(2 * n, n);
    return patch;
}

FieldPatch LocalBasisCache::reconstruct(const Eigen::VectorXd& trace_coefficients, const Eigen::Vector3d& rigid) const {
    FieldPatch patch = field_of(solve(trace_coefficients, true));
    for (int i = 0; i < num_nodes(); ++i) {
        Point v = Point::Zero();
        for (int m = 0; m < 3; ++m) v += rigid(m) * rigid_mode(m, dofs->coord(i), centre);
        patch.ux(i) += v.x();
        patch.uy(i) += v.y();
    }
    return patch;
}

}  // namespace mhm
