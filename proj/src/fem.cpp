#include "mhm/fem.hpp"

#include "mhm/kinematics.hpp"
#include "mhm/mesh.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <numbers>

namespace mhm {

void gauss_legendre(int npoints, std::vector<double>& nodes, std::vector<double>& weights) {
    if (npoints < 1) throw Error("gauss_legendre: need at least one point");
    const int n = npoints;
    nodes.assign(n, 0.5);
    weights.assign(n, 1.0);
    if (n == 1) return;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // [-1,1] -> [0,1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = weights[n - 1 - i] = 0.5 * w;
    }
}

QuadratureRule quad_rule(QuadratureDomain domain, int exactness) {
    if (exactness < 0) throw Error("quad_rule: negative exactness");
    if (exactness > max_quadrature_exactness)
        throw Error("quad_rule: exactness " + std::to_string(exactness) + " above implemented table");
    QuadratureRule rule;
    rule.domain = domain;
    rule.exactness = exactness;
    std::vector<double> x, w;
    if (domain == QuadratureDomain::segment) {
        gauss_legendre(std::max(1, (exactness + 2) / 2), x, w);
        for (std::size_t i = 0; i < x.size(); ++i) {
            rule.points.emplace_back(x[i], 0.0);
            rule.weights.push_back(w[i]);
        }
        return rule;
    }
    // Collapsed tensor rule: xi = u, eta = v (1 - u), jacobian (1 - u).
    const int n = std::max(1, (exactness + 3) / 2);
    gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            rule.points.emplace_back(x[i], x[j] * (1.0 - x[i]));
            rule.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
        }
    }
    return rule;
}

LagrangeElement::LagrangeElement(int degree) : degree_(degree) {
    if (degree < 1) throw Error("LagrangeElement: degree must be >= 1");
    const int k = degree;
    const double dk = k;
    nodes_ = {Point(0, 0), Point(1, 0), Point(0, 1)};
    for (int m = 1; m < k; ++m) nodes_.emplace_back(m / dk, 0.0);
    for (int m = 1; m < k; ++m) nodes_.emplace_back((k - m) / dk, m / dk);
    for (int m = 1; m < k; ++m) nodes_.emplace_back(0.0, (k - m) / dk);
    for (int j = 1; j < k; ++j)
        for (int i = 1; i + j < k; ++i) nodes_.emplace_back(i / dk, j / dk);

    for (const Point& x : nodes_)
        indices_.push_back({static_cast<int>(std::lround(k * (1.0 - x.x() - x.y()))),
                            static_cast<int>(std::lround(k * x.x())), static_cast<int>(std::lround(k * x.y()))});
}

namespace {

/// R_m(t) = prod_{s<m} (k t - s) / (s + 1) with its first two derivatives.
std::array<double, 3> barycentric_factor(int m, int k, double t) {
    double r = 1.0, d1 = 0.0, d2 = 0.0;
    for (int s = 0; s < m; ++s) {
        const double f = (k * t - s) / (s + 1), df = static_cast<double>(k) / (s + 1);
        d2 = d2 * f + 2.0 * d1 * df;
        d1 = d1 * f + r * df;
        r *= f;
    }
    return {r, d1, d2};
}

}  // namespace

ShapeEval LagrangeElement::eval(const Point& ref) const {
    constexpr double tol = 1e-12;
    if (ref.x() < -tol || ref.y() < -tol || ref.x() + ref.y() > 1.0 + tol)
        throw Error("LagrangeElement::eval: point outside the reference triangle");
    const int n = num_nodes();
    const double l0 = 1.0 - ref.x() - ref.y(), l1 = ref.x(), l2 = ref.y();
    ShapeEval out;
    out.values.resize(n);
    out.gradients.resize(n, 2);
    out.hessians.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        const auto [a, da, dda] = barycentric_factor(indices_[i][0], degree_, l0);
        const auto [b, db, ddb] = barycentric_factor(indices_[i][1], degree_, l1);
        const auto [c, dc, ddc] = barycentric_factor(indices_[i][2], degree_, l2);
        // d l0 = -(dx + dy), d l1 = dx, d l2 = dy
        out.values(i) = a * b * c;
        out.gradients(i, 0) = -da * b * c + a * db * c;
        out.gradients(i, 1) = -da * b * c + a * b * dc;
        out.hessians(i, 0) = dda * b * c - 2.0 * da * db * c + a * ddb * c;
        out.hessians(i, 1) = dda * b * c - da * b * dc - da * db * c + a * db * dc;
        out.hessians(i, 2) = dda * b * c - 2.0 * da * b * dc + a * b * ddc;
    }
    return out;
}

std::vector<int> LagrangeElement::edge_nodes(int edge) const {
    const int k = degree_;
    std::vector<int> out;
    out.push_back(edge);
    for (int m = 1; m < k; ++m) out.push_back(3 + edge * (k - 1) + (m - 1));
    out.push_back((edge + 1) % 3);
    return out;
}

AffineMap AffineMap::from_vertices(const Point& a, const Point& b, const Point& c) {
    AffineMap m;
    m.origin = a;
    m.jacobian.col(0) = b - a;
    m.jacobian.col(1) = c - a;
    m.det = m.jacobian.determinant();
    if (std::abs(m.det) <= 0.0) throw Error("AffineMap: degenerate triangle");
    m.inverse = m.jacobian.inverse();
    return m;
}

const LagrangeElement& lagrange_element(int degree) {
    static const std::array<LagrangeElement, max_lagrange_degree> table = [] {
        return std::array<LagrangeElement, max_lagrange_degree>{
            LagrangeElement(1), LagrangeElement(2), LagrangeElement(3),
            LagrangeElement(4), LagrangeElement(5), LagrangeElement(6)};
    }();
    if (degree < 1 || degree > max_lagrange_degree)
        throw Error("lagrange_element: degree " + std::to_string(degree) + " not supported");
    return table[degree - 1];
}

PhysicalShape to_physical(const ShapeEval& ref, const AffineMap& map) {
    PhysicalShape out;
    out.values = ref.values;
    out.grads = ref.gradients * map.inverse;
    const Eigen::Index n = ref.values.size();
    out.hessians.resize(n, 3);
    out.laplacians.resize(n);
    const Mat2& ji = map.inverse;
    for (Eigen::Index i = 0; i < n; ++i) {
        Mat2 hr;
        hr << ref.hessians(i, 0), ref.hessians(i, 1), ref.hessians(i, 1), ref.hessians(i, 2);
        const Mat2 hp = ji.transpose() * hr * ji;
        out.hessians(i, 0) = hp(0, 0);
        out.hessians(i, 1) = hp(0, 1);
        out.hessians(i, 2) = hp(1, 1);
        out.laplacians(i) = hp(0, 0) + hp(1, 1);
    }
    return out;
}

TabulatedElement::TabulatedElement(const LagrangeElement& el, QuadratureRule r)
    : element(&el), rule(std::move(r)) {
    at_points.reserve(rule.size());
    for (const auto& p : rule.points) at_points.push_back(el.eval(p));
}

DofMap::DofMap(std::span<const Point> vertices, std::span<const std::array<int, 3>> triangles, int degree)
    : degree_(degree) {
    const LagrangeElement& element = lagrange_element(degree);
    const int k = degree;
    nodes_per_cell_ = element.num_nodes();
    coords_.assign(vertices.begin(), vertices.end());

    std::map<std::pair<int, int>, int> edge_first;
    cell_nodes_.assign(triangles.size() * nodes_per_cell_, -1);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        const AffineMap map = AffineMap::from_vertices(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
        int* local = cell_nodes_.data() + t * nodes_per_cell_;
        for (int i = 0; i < 3; ++i) local[i] = tri[i];
        for (int e = 0; e < 3; ++e) {
            const int ga = tri[e], gb = tri[(e + 1) % 3];
            const auto key = std::minmax(ga, gb);
            auto it = edge_first.find({key.first, key.second});
            int first;
            if (it == edge_first.end()) {
                first = static_cast<int>(coords_.size());
                edge_first.emplace(std::pair{key.first, key.second}, first);
                // edge nodes stored from the lower vertex id to the higher
                const Point pa = vertices[key.first], pb = vertices[key.second];
                for (int m = 1; m < k; ++m) coords_.push_back(pa + (pb - pa) * (double(m) / k));
            } else {
                first = it->second;
            }
            for (int m = 1; m < k; ++m) {
                const int idx = ga < gb ? m - 1 : k - 1 - m;
                local[3 + e * (k - 1) + (m - 1)] = first + idx;
            }
        }
        for (int i = 3 + 3 * (k - 1); i < nodes_per_cell_; ++i) {
            local[i] = static_cast<int>(coords_.size());
            coords_.push_back(map.to_physical(element.nodes()[i]));
        }
    }
}

InverseConstant estimate_inverse_constant(int degree, const LocalMesh& sample) {
    if (sample.triangles.empty()) throw Error("estimate_inverse_constant: empty sample mesh");
    const LagrangeElement& element = lagrange_element(degree);
    const DofMap dofs(sample.vertices, sample.triangles, degree);
    const TabulatedElement tab(element, quad_rule(QuadratureDomain::triangle, 2 * degree + 2));
    const int n = dofs.num_nodes();
    const int ndof = 2 * n;
    const double hk = sample.diameter();

    Eigen::MatrixXd strain_form = Eigen::MatrixXd::Zero(ndof, ndof);
    Eigen::MatrixXd weighted_form = Eigen::MatrixXd::Zero(ndof, ndof);
    const int nloc = dofs.nodes_per_cell();
    for (int t = 0; t < sample.num_triangles(); ++t) {
        const auto pts = sample.triangle_points(t);
        const AffineMap map = AffineMap::from_vertices(pts[0], pts[1], pts[2]);
        const double ht = sample.triangle_diameter(t);
        const auto cell = dofs.cell(t);
        for (std::size_t q = 0; q < tab.rule.size(); ++q) {
            const PhysicalShape ps = to_physical(tab.at_points[q], map);
            const double w = tab.rule.weights[q] * std::abs(map.det);
            for (int a = 0; a < nloc; ++a)
                for (int c = 0; c < 2; ++c) {
                    const Voigt ea = strain_of_basis(ps, a, c);
                    const Eigen::Vector2d da = div_strain_of_basis(ps, a, c);
                    const int i = c * n + cell[a];
                    for (int b = 0; b < nloc; ++b)
                        for (int d = 0; d < 2; ++d) {
                            const Voigt eb = strain_of_basis(ps, b, d);
                            const Eigen::Vector2d db = div_strain_of_basis(ps, b, d);
                            const int j = d * n + cell[b];
                            const double ee = w * contract(ea, eb);
                            strain_form(i, j) += ee;
                            weighted_form(i, j) += ht * ht * (ee / (hk * hk) + w * da.dot(db));
                        }
                }
        }
    }

    // Orthogonal complement of the rigid motions (exactly interpolated since k >= 1).
    Eigen::MatrixXd rigid(ndof, 3);
    for (int i = 0; i < n; ++i) {
        const Point& x = dofs.coord(i);
        rigid(i, 0) = 1.0;
        rigid(n + i, 0) = 0.0;
        rigid(i, 1) = 0.0;
        rigid(n + i, 1) = 1.0;
        rigid(i, 2) = -x.y();
        rigid(n + i, 2) = x.x();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(rigid);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ndof, ndof);
    const Eigen::MatrixXd basis = q.rightCols(ndof - 3);
    const Eigen::MatrixXd e_red = basis.transpose() * strain_form * basis;
    const Eigen::MatrixXd r_red = basis.transpose() * weighted_form * basis;

    Eigen::LLT<Eigen::MatrixXd> llt(e_red);
    if (llt.info() != Eigen::Success) throw SingularSystemError("estimate_inverse_constant: singular strain form");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(r_red, e_red);
    if (ges.info() != Eigen::Success) throw SingularSystemError("estimate_inverse_constant: eigen solve failed");
    const double largest = ges.eigenvalues().maxCoeff();
    if (!(largest > 0.0)) throw SingularSystemError("estimate_inverse_constant: degenerate weighted form");

    InverseConstant out;
    out.degree = degree;
    out.value = 1.0 / largest;
    out.adjusted = inverse_constant_safety * out.value;
    return out;
}

}  // namespace mhm
