#include "mhm/verify.hpp"

#include <cmath>
#include <numbers>

namespace mhm {

LoadData ExactSolution::load() const {
    LoadData data;
    auto fn = eval;
    data.body_force = [fn](const Point& x) { return fn(x).force; };
    data.dirichlet = [fn](const Point& x) { return fn(x).u; };
    return data;
}

ExactState exact_brenner(double nu, const Point& x, double weight) {
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    constexpr double shear = 1.0;
    const double lame = 2.0 * shear * nu / (1.0 - 2.0 * nu);
    const double c = weight;
    const double sx = sin(pi * x.x()), sy = sin(pi * x.y()), cx = cos(pi * x.x()), cy = cos(pi * x.y());
    const double s2x = sin(2 * pi * x.x()), s2y = sin(2 * pi * x.y());
    const double c2x = cos(2 * pi * x.x()), c2y = cos(2 * pi * x.y());
    const double sxy = sin(pi * (x.x() + x.y())), cxy = cos(pi * (x.x() + x.y()));

    ExactState s;
    s.u = Point((c2x - 1.0) * s2y + c * sx * sy, (1.0 - c2y) * s2x + c * sx * sy);
    s.grad << -2 * pi * s2x * s2y + c * pi * cx * sy, 2 * pi * (c2x - 1.0) * c2y + c * pi * sx * cy,
        2 * pi * (1.0 - c2y) * c2x + c * pi * cx * sy, 2 * pi * s2x * s2y + c * pi * sx * cy;
    // div u = c pi sin(pi (x + y)), p = -lame div u
    s.p = -lame * c * pi * sxy;
    s.grad_p = Point::Constant(-lame * c * pi * pi * cxy);
    s.stress = shear * (s.grad + s.grad.transpose()) - s.p * Mat2::Identity();
    // f = -G lap u - (G + lame) grad div u
    const double grad_div = (shear + lame) * c * pi * pi * cxy;
    s.force = Point(shear * (4 * pi * pi * s2y * (2 * c2x - 1.0) + 2 * pi * pi * c * sx * sy) - grad_div,
                    shear * (4 * pi * pi * s2x * (1.0 - 2 * c2y) + 2 * pi * pi * c * sx * sy) - grad_div);
    return s;
}

ExactSolution brenner_problem(double nu, double weight) {
    ExactSolution ex;
    ex.name = "brenner";
    ex.shear = 1.0;
    ex.poisson = nu;
    ex.eval = [nu, weight](const Point& x) { return exact_brenner(nu, x, weight); };
    return ex;
}

ExactSolution linear_problem(double shear, double nu, const Mat2& gradient, const Point& offset) {
    ExactSolution ex;
    ex.name = "linear";
    ex.shear = shear;
    ex.poisson = nu;
    const double eps = compressibility(shear, nu);
    ex.eval = [=](const Point& x) {
        ExactState s;
        s.u = gradient * x + offset;
        s.grad = gradient;
        s.p = -gradient.trace() / eps;
        s.grad_p.setZero();
        s.stress = shear * (gradient + gradient.transpose()) - s.p * Mat2::Identity();
        s.force.setZero();
        return s;
    };
    return ex;
}

ErrorRecord compute_errors(const std::vector<FieldPatch>& patches, const ExactSolution& exact, int extra_exactness) {
    double e0 = 0, e1 = 0, es = 0, ep = 0, eeps = 0, eh = 0;
    for (const auto& patch : patches) {
        const int k = patch.degree();
        const TabulatedElement tab(lagrange_element(k),
                                   quad_rule(QuadratureDomain::triangle, 2 * k + 4 + extra_exactness));
        const LocalMesh& mesh = *patch.mesh;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const auto pts = mesh.triangle_points(t);
            const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
            const double g = patch.material.shear[t], eps = patch.material.epsilon[t];
            const double ht = mesh.triangle_diameter(t);
            for (std::size_t q = 0; q < tab.rule.size(); ++q) {
                const double w = tab.rule.weights[q] * std::abs(map.det);
                const PhysicalShape ps = to_physical(tab.at_points[q], map);
                const FieldValue v = patch.evaluate(t, ps);
                const ExactState s = exact.eval(map.to_physical(tab.rule.points[q]));
                const double dp = s.p - v.p;
                e0 += w * (s.u - v.u).squaredNorm();
                e1 += w * (s.grad - v.grad).squaredNorm();
                es += w * (s.stress - v.stress(g)).squaredNorm();
                ep += w * dp * dp;
                eeps += w * (1.0 + eps) * dp * dp;
                eh += w * ht * ht * (s.grad_p - v.grad_p).squaredNorm();
            }
        }
    }
    ErrorRecord r;
    r.displacement_l2 = std::sqrt(e0);
    r.displacement_h1 = std::sqrt(e1);
    r.stress_l2 = std::sqrt(es);
    r.pressure_l2 = std::sqrt(ep);
    r.pressure_eps = std::sqrt(eeps);
    r.pressure_h = std::sqrt(eh);
    return r;
}

ErrorRecord exact_norms(const std::vector<FieldPatch>& patches, const ExactSolution& exact) {
    std::vector<FieldPatch> zero = patches;
    for (auto& z : zero) {
        z.ux.setZero();
        z.uy.setZero();
        z.p.setZero();
    }
    return compute_errors(zero, exact);
}

double traction_error(const SkeletonMesh& skeleton, const Eigen::VectorXd& traction, const ExactSolution& exact) {
    const GlobalPartition& partition = skeleton.partition();
    const int l = skeleton.trace_degree();
    const QuadratureRule rule = quad_rule(QuadratureDomain::segment, 2 * l + 8);
    double sum = 0.0;
    for (int f = 0; f < partition.num_faces(); ++f) {
        if (!skeleton.carries_dofs(f)) continue;
        const Point n = partition.faces()[f].normal;
        for (int s = 0; s < static_cast<int>(skeleton.segments(f).size()); ++s) {
            const auto pts = skeleton.segment_points(f, s);
            const double len = (pts[1] - pts[0]).norm();
            const int off = skeleton.dof_offset(f, s);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double t = rule.points[q].x();
                const Point x = pts[0] + t * (pts[1] - pts[0]);
                Point lam = Point::Zero();
                for (int c = 0; c < 2; ++c)
                    for (int m = 0; m <= l; ++m)
                        lam(c) += traction(off + skeleton.local_dof(c, m)) * trace_basis(m, t, len);
                sum += rule.weights[q] * len * (lam - exact.eval(x).stress * n).squaredNorm();
            }
        }
    }
    return std::sqrt(sum);
}

std::vector<double> convergence_orders(const std::vector<double>& errors) {
    if (errors.size() < 2) throw Error("convergence_orders: need at least two levels");
    for (double e : errors)
        if (!(e > 0.0)) throw Error("convergence_orders: errors must be positive");
    std::vector<double> out;
    for (std::size_t i = 1; i < errors.size(); ++i) out.push_back(std::log2(errors[i - 1] / errors[i]));
    return out;
}

std::vector<CompressibilityResidual> compressibility_residual(const std::vector<FieldPatch>& patches) {
    std::vector<CompressibilityResidual> out;
    out.reserve(patches.size());
    for (const auto& patch : patches) {
        const int k = patch.degree();
        const TabulatedElement tab(lagrange_element(k), quad_rule(QuadratureDomain::triangle, 2 * k + 2));
        CompressibilityResidual r;
        const LocalMesh& mesh = *patch.mesh;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const auto pts = mesh.triangle_points(t);
            const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
            for (std::size_t q = 0; q < tab.rule.size(); ++q) {
                const double w = tab.rule.weights[q] * std::abs(map.det);
                const FieldValue v = patch.evaluate(t, to_physical(tab.at_points[q], map));
                const double div = v.divergence(), ep = patch.material.epsilon[t] * v.p;
                r.residual += w * (div + ep);
                r.scale += w * (std::abs(div) + std::abs(ep));
            }
        }
        out.push_back(r);
    }
    return out;
}

Eigen::VectorXd normal_traction_mode(const SkeletonMesh& skeleton) {
    const GlobalPartition& partition = skeleton.partition();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(skeleton.num_dofs());
    for (int f = 0; f < partition.num_faces(); ++f) {
        if (!skeleton.carries_dofs(f)) continue;
        const Point n = partition.faces()[f].normal;
        for (int s = 0; s < static_cast<int>(skeleton.segments(f).size()); ++s) {
            // <n_F, psi_0 e_c> with psi_0 = 1/sqrt(L)
            const double root = std::sqrt(skeleton.segment_length(f, s));
            for (int c = 0; c < 2; ++c) v(skeleton.dof_offset(f, s) + skeleton.local_dof(c, 0)) = n(c) * root;
        }
    }
    return v;
}

namespace {

/// Orthonormal basis of the orthogonal complement of range(cols) in R^n.
Eigen::MatrixXd complement(const Eigen::MatrixXd& cols, int& rank) {
    const Eigen::Index n = cols.rows();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cols);
    qr.setThreshold(1e-10);
    rank = static_cast<int>(qr.rank());
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    return q.rightCols(n - rank);
}

double smallest_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("spectral_diagnostics: eigenproblem failed");
    return es.eigenvalues().minCoeff();
}

}  // namespace

SpectralDiagnostics spectral_diagnostics(const SaddleSystem& system, const std::vector<Eigen::Matrix3d>& rigid_gram,
                                         const SkeletonMesh* skeleton) {
    SpectralDiagnostics d;
    const int nt = system.num_trace(), nr = system.num_rigid();
    if (nt == 0) {
        d.lambda_min = std::numeric_limits<double>::infinity();
        return d;
    }
    if (nt > max_dense_probe)
        throw Error("spectral_diagnostics: " + std::to_string(nt) + " trace dofs exceed the dense probe limit");
    const Eigen::MatrixXd a(system.trace_block);
    const Eigen::MatrixXd b(system.rigid_block);
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
        d.norm_a = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    int rank = 0;
    const Eigen::MatrixXd kernel = complement(b, rank);
    d.kernel_dimension = static_cast<int>(kernel.cols());
    const Eigen::MatrixXd reduced = kernel.transpose() * a * kernel;
    d.lambda_min = smallest_eigenvalue(reduced);
    d.pass = d.lambda_min > 1e-12 * d.norm_a;

    if (skeleton && kernel.cols() > 1) {
        const Eigen::VectorXd h = kernel.transpose() * normal_traction_mode(*skeleton);
        if (h.norm() > 0.0) {
            int r1 = 0;
            const Eigen::MatrixXd rest = complement(h, r1);
            d.lambda_min_without_hydrostatic = smallest_eigenvalue(rest.transpose() * reduced * rest);
        }
    }

    if (nr > 0) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(nr, nr);
        if (!rigid_gram.empty()) {
            if (static_cast<int>(rigid_gram.size()) * 3 != nr) throw Error("spectral_diagnostics: Gram size mismatch");
            for (std::size_t e = 0; e < rigid_gram.size(); ++e) gram.block<3, 3>(3 * e, 3 * e) = rigid_gram[e];
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b.transpose() * b, gram,
                                                                      Eigen::EigenvaluesOnly);
        if (ges.info() != Eigen::Success) throw Error("spectral_diagnostics: inf-sup eigenproblem failed");
        d.inf_sup = std::sqrt(std::max(0.0, ges.eigenvalues().minCoeff()));
    }
    return d;
}

}  // namespace mhm
