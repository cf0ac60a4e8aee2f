#include "mhm/local_solver.hpp"
#include "mhm/verify.hpp"

#include "support.hpp"

#include <doctest.h>

#include <Eigen/SVD>

using namespace mhm;

namespace {

struct Element {
    GlobalPartition partition = build_structured_triangulation(2);
    SkeletonMesh skeleton;
    LocalContext ctx;
    LoadData load;

    Element(int degree, int depth, const Material& material, int element = 1, int level = 0)
        : skeleton(refine_skeleton(partition, level, 1)) {
        auto mesh = std::make_shared<const LocalMesh>(build_matching_local_mesh(partition, element, skeleton, depth));
        ctx = make_local_context(partition, skeleton, mesh, degree, material, &load);
    }
};

PatchMaterial uniform_material(double shear, double nu, int triangles) {
    PatchMaterial m;
    m.shear.assign(triangles, shear);
    m.poisson.assign(triangles, nu);
    m.epsilon.assign(triangles, compressibility(shear, nu));
    return m;
}

double admissible_alpha(const LocalContext& ctx, double theta) {
    const double ci = estimate_inverse_constant(ctx.dofs->degree(), *ctx.mesh).value;
    return compute_alpha(ctx.material, ci, theta);
}

LocalBasisCache gals_cache(const Element& el, double theta = 0.5) {
    const double ci = estimate_inverse_constant(el.ctx.dofs->degree(), *el.ctx.mesh).value;
    return solve_local_basis(el.ctx, assemble_local_gals(el.ctx, compute_alpha(el.ctx.material, ci, theta), ci));
}

/// Outward unit normal of side `side` of a counterclockwise triangle.
Point outward_normal(const std::array<Point, 3>& pts, int side) {
    const Point d = pts[(side + 1) % 3] - pts[side];
    return Point(d.y(), -d.x()).normalized();
}

/// Trace coefficients of mu = sigma n^K for a constant stress on the boundary of the element.
Eigen::VectorXd constant_traction_coefficients(const Element& el, const LocalBasisCache& cache, const Mat2& stress) {
    const int e = el.ctx.mesh->element;
    const auto pts = el.partition.element_points(e);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(cache.num_trace());
    for (int j = 0; j < cache.num_trace(); ++j) {
        const TraceDof& t = cache.trace[j];
        int side = -1;
        for (int s = 0; s < 3; ++s)
            if (el.partition.element_face(e, s) == t.face) side = s;
        REQUIRE(side >= 0);
        const Point traction = stress * outward_normal(pts, side);
        if (t.mode == 0) c(j) = traction(t.component) * std::sqrt(el.skeleton.segment_length(t.face, t.segment));
    }
    return c;
}

/// Trace coefficients of mu = sigma(x) n^K, projected per segment with Gauss quadrature.
Eigen::VectorXd traction_coefficients(const Element& el, const LocalBasisCache& cache,
                                      const std::function<Mat2(const Point&)>& stress) {
    const int e = el.ctx.mesh->element;
    const auto pts = el.partition.element_points(e);
    std::vector<double> x, w;
    oracle::gauss(6, x, w);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(cache.num_trace());
    for (int j = 0; j < cache.num_trace(); ++j) {
        const TraceDof& t = cache.trace[j];
        int side = -1;
        for (int s = 0; s < 3; ++s)
            if (el.partition.element_face(e, s) == t.face) side = s;
        REQUIRE(side >= 0);
        const Point normal = outward_normal(pts, side);
        const auto ends = el.skeleton.segment_points(t.face, t.segment);
        const double length = (ends[1] - ends[0]).norm();
        for (std::size_t q = 0; q < x.size(); ++q) {
            const double s = 0.5 * (x[q] + 1.0);
            const Point y = ends[0] + s * (ends[1] - ends[0]);
            c(j) += 0.5 * w[q] * length * (stress(y) * normal)(t.component) * trace_basis(t.mode, s, length);
        }
    }
    return c;
}

double h1_distance(const FieldPatch& a, const FieldPatch& b) {
    const TabulatedElement tab(lagrange_element(a.degree()), quad_rule(QuadratureDomain::triangle, 2 * a.degree()));
    double sum = 0.0;
    for (int t = 0; t < a.mesh->num_triangles(); ++t) {
        const auto pts = a.mesh->triangle_points(t);
        const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const PhysicalShape ps = to_physical(tab.at_points[q], map);
            sum += tab.rule.weights[q] * std::abs(map.det) * (a.evaluate(t, ps).grad - b.evaluate(t, ps).grad).squaredNorm();
        }
    }
    return std::sqrt(sum);
}

}  // namespace

TEST_SUITE("local_solver") {

TEST_CASE("alpha: reference value, bound and scaling") {
    const PatchMaterial unit = uniform_material(1.0, 0.3, 4);
    CHECK(compute_alpha(unit, 1.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(compute_alpha(unit, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    const double upper = alpha_upper_bound(unit, 1.0);
    CHECK(compute_alpha(unit, 1.0, 0.999999) < upper);
    CHECK(compute_alpha(unit, 1.0, 0.999999) > 0.99 * upper);
    CHECK_THROWS_AS(compute_alpha(unit, 1.0, 1.0), Error);
    CHECK_THROWS_AS(compute_alpha(unit, 1.0, 0.0), Error);
    const PatchMaterial twice = uniform_material(2.0, 0.3, 4);
    CHECK(compute_alpha(twice, 0.8) == doctest::Approx(0.5 * compute_alpha(unit, 0.8)).epsilon(1e-15));
    PatchMaterial bad = unit;
    bad.shear[2] = 0.0;
    CHECK_THROWS_AS(compute_alpha(bad, 1.0), Error);
}

TEST_CASE("rigid projection of x^2 on the reference triangle matches the normal equations") {
    auto mesh = build_refined_triangle({Point(0, 0), Point(1, 0), Point(0, 1)}, 0);
    const DofMap dofs(mesh.vertices, mesh.triangles, 2);
    Eigen::VectorXd ux, uy;
    interpolate(dofs, [](const Point& x) { return Point(x.x() * x.x(), 0.0); }, ux, uy);
    const RigidProjection rp = project_rm(mesh, dofs, ux, uy);

    // modes (1,0), (0,1), (-(y-c), x-c) about c = (1/3, 1/3), exact monomial integrals
    const double c = 1.0 / 3.0;
    auto I = oracle::monomial_integral;
    const double iy = I(0, 1), ix = I(1, 0), i1 = I(0, 0);
    Eigen::Matrix3d gram;
    gram << i1, 0.0, -(iy - c * i1), 0.0, i1, ix - c * i1, -(iy - c * i1), ix - c * i1,
        (I(0, 2) - 2 * c * iy + c * c * i1) + (I(2, 0) - 2 * c * ix + c * c * i1);
    const Eigen::Vector3d rhs(I(2, 0), 0.0, -(I(2, 1) - c * I(2, 0)));
    const Eigen::Vector3d expected = gram.fullPivLu().solve(rhs);
    CHECK((rp.centre - Point(c, c)).norm() < 1e-15);
    CHECK((rp.coefficients - expected).norm() < 1e-12);
    CHECK((rp.gram - gram).norm() < 1e-13);
}

TEST_CASE("rigid projection: rigid input, idempotence, orthogonality, norm bounds") {
    auto mesh = build_refined_triangle({Point(0.1, 0.2), Point(1.3, 0.1), Point(0.5, 0.9)}, 1);
    const DofMap dofs(mesh.vertices, mesh.triangles, 2);
    Eigen::VectorXd ux, uy;
    interpolate(dofs, [](const Point& x) { return Point(0.7 - 0.4 * x.y(), -1.1 + 0.4 * x.x()); }, ux, uy);
    const RigidProjection rigid = project_rm(mesh, dofs, ux, uy);
    CHECK(rigid.residual_x.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(rigid.residual_y.cwiseAbs().maxCoeff() < 1e-13);

    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd fx = Eigen::VectorXd::Random(dofs.num_nodes());
        const Eigen::VectorXd fy = Eigen::VectorXd::Random(dofs.num_nodes());
        const RigidProjection p = project_rm(mesh, dofs, fx, fy);
        const RigidProjection again = project_rm(mesh, dofs, p.residual_x, p.residual_y);
        CHECK(again.coefficients.norm() < 1e-12 * (1.0 + p.coefficients.norm()));
        // L2 norms with a mass matrix built here
        const TabulatedElement tab(lagrange_element(2), quad_rule(QuadratureDomain::triangle, 6));
        double field = 0.0, residual = 0.0;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const auto pts = mesh.triangle_points(t);
            const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
            const auto cell = dofs.cell(t);
            for (std::size_t q = 0; q < tab.rule.size(); ++q) {
                const double w = tab.rule.weights[q] * std::abs(map.det);
                const Eigen::VectorXd& v = tab.at_points[q].values;
                double a = 0, b = 0, ra = 0, rb = 0;
                for (int i = 0; i < dofs.nodes_per_cell(); ++i) {
                    a += v(i) * fx(cell[i]);
                    b += v(i) * fy(cell[i]);
                    ra += v(i) * p.residual_x(cell[i]);
                    rb += v(i) * p.residual_y(cell[i]);
                }
                field += w * (a * a + b * b);
                residual += w * (ra * ra + rb * rb);
            }
        }
        CHECK(residual <= field * (1.0 + 1e-12));
    }
}

TEST_CASE("trace basis is orthonormal on a segment") {
    std::vector<double> x, w;
    oracle::gauss(8, x, w);
    const double length = 0.37;
    for (int m = 0; m <= 3; ++m)
        for (int n = 0; n <= 3; ++n) {
            double sum = 0.0;
            for (std::size_t q = 0; q < x.size(); ++q) {
                const double s = 0.5 * (x[q] + 1.0);
                sum += 0.5 * w[q] * length * trace_basis(m, s, length) * trace_basis(n, s, length);
            }
            CHECK(std::abs(sum - (m == n ? 1.0 : 0.0)) < 1e-13);
        }
}

TEST_CASE("trace dofs of an element carry the face orientation sign") {
    const GlobalPartition p = build_structured_triangulation(2);
    const SkeletonMesh s = refine_skeleton(p, 1, 1);
    for (int e = 0; e < p.num_elements(); ++e) {
        const auto dofs = element_trace_dofs(s, e);
        CHECK(dofs.size() == 3 * 2 * 4);
        for (const auto& d : dofs) {
            const Face& f = p.faces()[d.face];
            CHECK(d.sign == (f.elements[0] == e ? 1.0 : -1.0));
            CHECK(d.global == s.dof_offset(d.face, d.segment) + s.local_dof(d.component, d.mode));
        }
    }
}

TEST_CASE("GaLS matrix is symmetric and refuses inadmissible alpha") {
    for (int k = 1; k <= 3; ++k) {
        const Element el(k, 1, Material::constant(1.3, 0.45));
        const double ci = estimate_inverse_constant(k, *el.ctx.mesh).value;
        const LocalSystem sys = assemble_local_gals(el.ctx, compute_alpha(el.ctx.material, ci, 0.5), ci);
        const Eigen::SparseMatrix<double> asym = sys.matrix - Eigen::SparseMatrix<double>(sys.matrix.transpose());
        CHECK(asym.norm() <= 1e-12 * sys.matrix.norm());
        CHECK(sys.size() == 3 * el.ctx.dofs->num_nodes() + 3);
        CHECK_THROWS_AS(assemble_local_gals(el.ctx, alpha_upper_bound(el.ctx.material, ci), ci), Error);
        CHECK_THROWS_AS(assemble_local_gals(el.ctx, 0.0, ci), Error);
    }
}

TEST_CASE("P1 least-squares term couples only pressures through grad p . grad q") {
    const Element el(1, 2, Material::constant(1.0, 0.3));
    const double a1 = 0.1, a2 = 0.3;
    const LocalSystem s1 = assemble_local_gals(el.ctx, a1, 1.0);
    const LocalSystem s2 = assemble_local_gals(el.ctx, a2, 1.0);
    const Eigen::MatrixXd diff = Eigen::MatrixXd(s1.matrix) - Eigen::MatrixXd(s2.matrix);

    const LocalMesh& mesh = *el.ctx.mesh;
    const int n = el.ctx.dofs->num_nodes();
    Eigen::MatrixXd ls = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto pts = mesh.triangle_points(t);
        const double area = 0.5 * cross(pts[1] - pts[0], pts[2] - pts[0]);
        double h = 0.0;
        for (int i = 0; i < 3; ++i) h = std::max(h, (pts[i] - pts[(i + 1) % 3]).norm());
        std::array<Point, 3> grad;
        for (int i = 0; i < 3; ++i) {
            const Point opp = pts[(i + 2) % 3] - pts[(i + 1) % 3];
            grad[i] = Point(-opp.y(), opp.x()) / (2.0 * area);  // gradient of the barycentric coordinate
        }
        const auto cell = el.ctx.dofs->cell(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) ls(cell[i], cell[j]) += h * h * area * grad[i].dot(grad[j]);
    }
    const Eigen::MatrixXd expected_pp = (a2 - a1) * ls;
    CHECK((diff.block(2 * n, 2 * n, n, n) - expected_pp).norm() < 1e-12 * expected_pp.norm());
    const double rest = diff.norm() - diff.block(2 * n, 2 * n, n, n).norm();
    CHECK(std::abs(rest) < 1e-12 * expected_pp.norm());
}

TEST_CASE("zero load gives zero right-hand side and zero particular solution") {
    const Element el(2, 1, Material::constant(1.0, 0.4));
    const double ci = estimate_inverse_constant(2, *el.ctx.mesh).value;
    const LocalSystem sys = assemble_local_gals(el.ctx, compute_alpha(el.ctx.material, ci), ci);
    CHECK(sys.load_rhs.norm() == 0.0);
    CHECK(sys.load_moments.norm() == 0.0);
    const LocalBasisCache cache = solve_local_basis(el.ctx, sys);
    CHECK(cache.load_solution.norm() == 0.0);
    CHECK(cache.load_pairing.norm() == 0.0);
    const LocalBasisCache ga = solve_local_galerkin_basis(el.ctx);
    CHECK(ga.load_solution.norm() == 0.0);
}

TEST_CASE("constant traction of a linear field is reproduced exactly") {
    const double shear = 1.4, nu = 0.35;
    Mat2 grad;
    grad << 0.3, -0.7, 0.2, -0.1;
    const Mat2 strain = 0.5 * (grad + grad.transpose());
    const double p = -grad.trace() / compressibility(shear, nu);
    const Mat2 stress = 2.0 * shear * strain - p * Mat2::Identity();
    for (auto [k, depth] : {std::pair{1, 2}, std::pair{2, 1}, std::pair{3, 1}}) {
        CAPTURE(k);
        const Element el(k, depth, Material::constant(shear, nu), 2);
        const LocalBasisCache cache = gals_cache(el);
        const Eigen::VectorXd x = cache.solve(constant_traction_coefficients(el, cache, stress), false);
        Eigen::VectorXd wx, wy;
        interpolate(*el.ctx.dofs, [&](const Point& y) { return Point(grad * y); }, wx, wy);
        const RigidProjection rp = project_rm(*el.ctx.mesh, *el.ctx.dofs, wx, wy);
        const int n = cache.num_nodes();
        const double scale = std::max(wx.cwiseAbs().maxCoeff(), wy.cwiseAbs().maxCoeff());
        CHECK((x.segment(0, n) - rp.residual_x).cwiseAbs().maxCoeff() < 1e-11 * scale);
        CHECK((x.segment(n, n) - rp.residual_y).cwiseAbs().maxCoeff() < 1e-11 * scale);
        CHECK((x.segment(2 * n, n).array() - p).abs().maxCoeff() < 1e-11 * std::abs(p));

        const LocalBasisCache ga = solve_local_galerkin_basis(el.ctx);
        const Eigen::VectorXd y = ga.solve(constant_traction_coefficients(el, ga, stress), false);
        CHECK((y.segment(0, n) - rp.residual_x).cwiseAbs().maxCoeff() < 1e-11 * scale);
        CHECK((y.segment(n, n) - rp.residual_y).cwiseAbs().maxCoeff() < 1e-11 * scale);
    }
}

TEST_CASE("quadratic field with constant body force is reproduced exactly by P2 local solvers") {
    const double shear = 0.8, nu = 0.3, eps = compressibility(shear, nu);
    // u = (x^2 + 0.5 x y, -0.3 y^2 + 0.2 x^2), sigma = 2G eps(u) - p I with p = -div u / eps
    auto displacement = [](const Point& y) {
        return Point(y.x() * y.x() + 0.5 * y.x() * y.y(), -0.3 * y.y() * y.y() + 0.2 * y.x() * y.x());
    };
    auto gradient = [](const Point& y) {
        Mat2 g;
        g << 2.0 * y.x() + 0.5 * y.y(), 0.5 * y.x(), 0.4 * y.x(), -0.6 * y.y();
        return g;
    };
    auto pressure = [&](const Point& y) { return -gradient(y).trace() / eps; };
    auto stress = [&](const Point& y) -> Mat2 {
        const Mat2 g = gradient(y);
        return shear * (g + g.transpose()) - pressure(y) * Mat2::Identity();
    };
    // 2G div eps(u) = G (4, -0.3), grad p = -(2, -0.1) / eps
    const Point force = -(shear * Point(4.0, -0.3) + Point(2.0, -0.1) / eps);
    Element el(2, 1, Material::constant(shear, nu), 1);
    el.load.body_force = [force](const Point&) { return force; };
    const double ci = estimate_inverse_constant(2, *el.ctx.mesh).value;
    const LocalBasisCache gals = solve_local_basis(el.ctx, assemble_local_gals(el.ctx, compute_alpha(el.ctx.material, ci), ci));
    const LocalBasisCache ga = solve_local_galerkin_basis(el.ctx);
    Eigen::VectorXd wx, wy;
    interpolate(*el.ctx.dofs, displacement, wx, wy);
    const RigidProjection rp = project_rm(*el.ctx.mesh, *el.ctx.dofs, wx, wy);
    const int n = el.ctx.dofs->num_nodes();
    for (const LocalBasisCache* cache : {&gals, &ga}) {
        CAPTURE(cache == &gals);
        const Eigen::VectorXd x = cache->solve(traction_coefficients(el, *cache, stress), true);
        CHECK((x.segment(0, n) - rp.residual_x).cwiseAbs().maxCoeff() < 1e-11);
        CHECK((x.segment(n, n) - rp.residual_y).cwiseAbs().maxCoeff() < 1e-11);
        CHECK(x.tail(3).norm() < 1e-11);
        if (cache == &gals) {
            double err = 0.0;
            for (int i = 0; i < n; ++i) err = std::max(err, std::abs(x(2 * n + i) - pressure(el.ctx.dofs->coords()[i])));
            CHECK(err < 1e-11);
        }
    }
}

TEST_CASE("pairing blocks are symmetric and basis solutions are rigid-orthogonal") {
    const Element el(2, 2, Material::constant(1.0, 0.49), 0, 1);
    for (const LocalBasisCache& cache : {gals_cache(el), solve_local_galerkin_basis(el.ctx)}) {
        const int nt = cache.num_trace();
        Eigen::MatrixXd raw(nt, nt);
        for (int j = 0; j < nt; ++j) raw.col(j) = cache.trace_rhs.transpose() * cache.basis_solution(j);
        CHECK((raw - raw.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * raw.cwiseAbs().maxCoeff());
        CHECK((raw - cache.pairing).cwiseAbs().maxCoeff() <= 1e-12 * raw.cwiseAbs().maxCoeff());
        for (int j = 0; j < nt; ++j) {
            const FieldPatch f = cache.field_of(cache.basis_solution(j));
            const RigidProjection rp = project_rm(*f.mesh, *f.dofs, f.ux, f.uy);
            const double size = std::max(f.ux.cwiseAbs().maxCoeff(), f.uy.cwiseAbs().maxCoeff());
            CHECK(rp.coefficients.cwiseAbs().maxCoeff() <= 1e-10 * size);
        }
        const Eigen::Matrix3d gram = project_rm(*el.ctx.mesh, *el.ctx.dofs, Eigen::VectorXd::Zero(cache.num_nodes()),
                                                Eigen::VectorXd::Zero(cache.num_nodes()))
                                         .gram;
        CHECK((cache.rigid_gram - gram).norm() < 1e-13);
    }
}

TEST_CASE("local compressibility holds for every basis solution") {
    const Element el(2, 1, Material::constant(1.0, 0.4999));
    const LocalBasisCache cache = gals_cache(el);
    for (int j = 0; j < cache.num_trace(); ++j) {
        const auto r = compressibility_residual({cache.field_of(cache.basis_solution(j))});
        REQUIRE(r.size() == 1);
        CHECK(std::abs(r[0].residual) <= 1e-10 * std::max(r[0].scale, 1e-300));
    }
}

TEST_CASE("GaLS and Galerkin P2 load solutions agree to O(h) for a compressible material") {
    std::vector<double> dist;
    for (int depth = 1; depth <= 4; ++depth) {
        Element el(2, depth, Material::constant(1.0, 0.2), 1);
        el.load.body_force = [](const Point& x) { return Point(std::sin(3.0 * x.x()), std::cos(2.0 * x.y())); };
        const LocalBasisCache gals = gals_cache(el);
        const LocalBasisCache ga = solve_local_galerkin_basis(el.ctx);
        FieldPatch a = gals.field_of(gals.load_solution);
        a.p.resize(0);
        dist.push_back(h1_distance(a, ga.field_of(ga.load_solution)));
    }
    CAPTURE(dist[0]);
    CAPTURE(dist[3]);
    for (std::size_t i = 1; i < dist.size(); ++i) CHECK(dist[i] < dist[i - 1]);
    CHECK(std::log2(dist[2] / dist[3]) > 0.8);
}

TEST_CASE("local saddle matrix is nonsingular for admissible alpha") {
    const Element el(2, 1, Material::constant(1.0, 0.45));
    const double ci = estimate_inverse_constant(2, *el.ctx.mesh).value;
    for (double theta : {0.1, 0.5, 0.9}) {
        const LocalSystem sys = assemble_local_gals(el.ctx, compute_alpha(el.ctx.material, ci, theta), ci);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(sys.matrix));
        const auto& sv = svd.singularValues();
        CHECK(sv(sv.size() - 1) > 1e-12 * sv(0));
    }
}

TEST_CASE("least-squares bound: sum h^2 |div 2G eps(u)|^2 <= C_I^-1 |2G|^2 |eps(u)|^2") {
    const double shear = 1.7;
    const Element el(2, 1, Material::constant(shear, 0.3));
    const LocalMesh& mesh = *el.ctx.mesh;
    const DofMap& dofs = *el.ctx.dofs;
    const double ci = estimate_inverse_constant(2, mesh).value;
    const TabulatedElement tab(lagrange_element(2), quad_rule(QuadratureDomain::triangle, 6));
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd ux = Eigen::VectorXd::Random(dofs.num_nodes());
        const Eigen::VectorXd uy = Eigen::VectorXd::Random(dofs.num_nodes());
        double lhs = 0.0, energy = 0.0;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const auto pts = mesh.triangle_points(t);
            const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
            const double h = mesh.triangle_diameter(t);
            const auto cell = dofs.cell(t);
            for (std::size_t q = 0; q < tab.rule.size(); ++q) {
                const PhysicalShape ps = to_physical(tab.at_points[q], map);
                const double w = tab.rule.weights[q] * std::abs(map.det);
                Mat2 g = Mat2::Zero();
                Eigen::Vector3d hx = Eigen::Vector3d::Zero(), hy = Eigen::Vector3d::Zero();
                for (int i = 0; i < dofs.nodes_per_cell(); ++i) {
                    g.row(0) += ux(cell[i]) * ps.grads.row(i);
                    g.row(1) += uy(cell[i]) * ps.grads.row(i);
                    hx += ux(cell[i]) * ps.hessians.row(i).transpose();
                    hy += uy(cell[i]) * ps.hessians.row(i).transpose();
                }
                const Mat2 eps = 0.5 * (g + g.transpose());
                // div eps = (u_xx + (u_yy + v_xy)/2, v_yy + (v_xx + u_xy)/2)
                const Point div(hx(0) + 0.5 * (hx(2) + hy(1)), hy(2) + 0.5 * (hy(0) + hx(1)));
                lhs += w * h * h * (2.0 * shear * div).squaredNorm();
                energy += w * eps.squaredNorm();
            }
        }
        CHECK(lhs <= (1.0 + 1e-10) * (2.0 * shear) * (2.0 * shear) * energy / ci);
    }
}

TEST_CASE("local solver condition number is robust as nu approaches 1/2") {
    auto condition = [](double nu) {
        const Element el(1, 2, Material::constant(1.0, nu));
        const double alpha = admissible_alpha(el.ctx, 0.5);
        const LocalSystem sys = assemble_local_gals(el.ctx, alpha, estimate_inverse_constant(1, *el.ctx.mesh).value);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(sys.matrix));
        const auto& sv = svd.singularValues();
        return sv(0) / sv(sv.size() - 1);
    };
    const double c03 = condition(0.3), c05 = condition(0.49999);
    CAPTURE(c03);
    CAPTURE(c05);
    CHECK(c05 <= 100.0 * c03);
    CHECK(c03 <= 100.0 * c05);
}

}  // TEST_SUITE
