#pragma once

// Reference-element machinery: quadrature, Lagrange P_k shape functions with
// derivatives up to second order, affine maps, continuous dof numbering and
// the inverse-inequality constant used to bound the stabilization parameter.

#include "mhm/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace mhm {

struct LocalMesh;

enum class QuadratureDomain { triangle, segment };

/// Points are reference coordinates: (xi, eta) on the unit right triangle,
/// or t in [0, 1] stored in x() for segments.
struct QuadratureRule {
    QuadratureDomain domain = QuadratureDomain::triangle;
    std::vector<Point> points;
    std::vector<double> weights;
    int exactness = 0;

    std::size_t size() const { return weights.size(); }
};

inline constexpr int max_quadrature_exactness = 40;

/// Gauss-Legendre on segments, collapsed (Duffy) Gauss on triangles.
/// Throws mhm::Error above max_quadrature_exactness.
QuadratureRule quad_rule(QuadratureDomain domain, int exactness);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int npoints, std::vector<double>& nodes, std::vector<double>& weights);

/// Shape functions and reference derivatives at one point.
struct ShapeEval {
    Eigen::VectorXd values;
    Eigen::Matrix<double, Eigen::Dynamic, 2> gradients;
    /// Row i holds (d2/dxi2, d2/dxideta, d2/deta2) of shape function i.
    Eigen::Matrix<double, Eigen::Dynamic, 3> hessians;
};

/// Lagrange P_k element on the reference triangle (0,0), (1,0), (0,1).
///
/// Node ordering: the three vertices, then the k-1 interior nodes of each
/// edge (0->1, 1->2, 2->0) in the direction of the edge, then the interior
/// lattice nodes.
class LagrangeElement {
public:
    explicit LagrangeElement(int degree);

    int degree() const { return degree_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Point>& nodes() const { return nodes_; }

    /// Throws mhm::Error when the point lies outside the closed reference triangle.
    ShapeEval eval(const Point& ref) const;

    /// Local node indices sitting on local edge e (0: v0-v1, 1: v1-v2, 2: v2-v0),
    /// ordered from the edge's first vertex to its second.
    std::vector<int> edge_nodes(int edge) const;

private:
    int degree_;
    std::vector<Point> nodes_;
    std::vector<std::array<int, 3>> indices_;  // barycentric multi-index k * (l0, l1, l2) of each node
};

inline constexpr int max_lagrange_degree = 6;

/// Shared, immutable element of the given degree (1..max_lagrange_degree).
const LagrangeElement& lagrange_element(int degree);

/// Affine map x = origin + J * ref from the reference triangle.
struct AffineMap {
    Point origin;
    Mat2 jacobian;
    Mat2 inverse;
    double det = 0.0;

    static AffineMap from_vertices(const Point& a, const Point& b, const Point& c);

    Point to_physical(const Point& ref) const { return origin + jacobian * ref; }
    Point to_reference(const Point& x) const { return inverse * (x - origin); }
    double area() const { return 0.5 * std::abs(det); }
};

/// Physical shape-function data at one quadrature point of one triangle.
struct PhysicalShape {
    Eigen::VectorXd values;
    Eigen::Matrix<double, Eigen::Dynamic, 2> grads;
    Eigen::VectorXd laplacians;
    /// Rows (d2/dx2, d2/dxdy, d2/dy2).
    Eigen::Matrix<double, Eigen::Dynamic, 3> hessians;
};

PhysicalShape to_physical(const ShapeEval& ref, const AffineMap& map);

/// Shape data tabulated once per rule for a given element.
struct TabulatedElement {
    const LagrangeElement* element = nullptr;
    QuadratureRule rule;
    std::vector<ShapeEval> at_points;

    TabulatedElement(const LagrangeElement& el, QuadratureRule r);
};

/// Continuous P_k numbering over a conforming triangulation.
class DofMap {
public:
    DofMap() = default;
    DofMap(std::span<const Point> vertices, std::span<const std::array<int, 3>> triangles, int degree);

    int degree() const { return degree_; }
    int num_nodes() const { return static_cast<int>(coords_.size()); }
    int nodes_per_cell() const { return nodes_per_cell_; }
    std::span<const int> cell(int t) const {
        return {cell_nodes_.data() + static_cast<std::size_t>(t) * nodes_per_cell_,
                static_cast<std::size_t>(nodes_per_cell_)};
    }
    const Point& coord(int node) const { return coords_[node]; }
    const std::vector<Point>& coords() const { return coords_; }

private:
    int degree_ = 0;
    int nodes_per_cell_ = 0;
    std::vector<int> cell_nodes_;
    std::vector<Point> coords_;
};

/// Inverse-inequality constant C_I for degree k on a sample mesh.
struct InverseConstant {
    int degree = 0;
    double value = 0.0;     ///< estimated constant
    double adjusted = 0.0;  ///< value times the safety factor, used for alpha_K
};

inline constexpr double inverse_constant_safety = 0.9;

/// Smallest generalized Rayleigh quotient of ||eps(v)||^2_K against
/// sum_tau h_tau^2 (h_K^-2 ||eps(v)||^2_tau + ||div eps(v)||^2_tau) over V_h(K),
/// modulo rigid motions.
InverseConstant estimate_inverse_constant(int degree, const LocalMesh& sample);

}  // namespace mhm
