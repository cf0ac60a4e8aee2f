#pragma once

// Coarse partition, skeleton refinement, matching local meshes and the
// sufficient refinement conditions for injectivity of the local operator.

#include "mhm/common.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace mhm {

enum class FaceTag { interior, dirichlet, neumann };

std::string to_string(FaceTag tag);
FaceTag face_tag_from_string(const std::string& s);

struct Face {
    std::array<int, 2> vertices{};      ///< v0 < v1; segments are parametrized from v0 to v1
    std::array<int, 2> elements{-1, -1};  ///< elements[0] < elements[1]; -1 when on the boundary
    Point normal;                       ///< outward from elements[0]
    FaceTag tag = FaceTag::interior;

    bool is_boundary() const { return elements[1] < 0; }
};

/// Coarse polygonal partition. Elements are counterclockwise triangles.
class GlobalPartition {
public:
    GlobalPartition(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements);

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& elements() const { return elements_; }
    const std::vector<Face>& faces() const { return faces_; }

    int num_elements() const { return static_cast<int>(elements_.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }

    /// Face on local side i of element e (side i joins local vertices i and i+1).
    int element_face(int e, int side) const { return element_faces_[e][side]; }
    /// n_F . n^K for the face on local side i of element e.
    double face_sign(int e, int side) const;

    double element_area(int e) const;
    double element_diameter(int e) const;
    Point element_centroid(int e) const;
    std::array<Point, 3> element_points(int e) const;

    /// Coarse size: max element diameter.
    double coarse_size() const;
    double domain_area() const;

    void set_boundary_tag(int face, FaceTag tag);
    /// Tags every boundary face whose midpoint satisfies the predicate.
    template <class Pred>
    void tag_boundary(FaceTag tag, Pred&& pred) {
        for (int f = 0; f < num_faces(); ++f) {
            const auto& fc = faces_[f];
            if (!fc.is_boundary()) continue;
            const Point mid = 0.5 * (vertices_[fc.vertices[0]] + vertices_[fc.vertices[1]]);
            if (pred(mid)) set_boundary_tag(f, tag);
        }
    }

    bool has_dirichlet() const;

    /// Throws mhm::Error if any structural invariant fails.
    void validate() const;

private:
    void build_faces();

    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<Face> faces_;
    std::vector<std::array<int, 3>> element_faces_;
};

/// n x n squares on [0,1]^2, each split along the (i,j)-(i+1,j+1) diagonal.
/// All boundary faces are Dirichlet.
GlobalPartition build_structured_triangulation(int n);

void write_partition(std::ostream& out, const GlobalPartition& partition);
GlobalPartition read_partition(std::istream& in);

struct Segment {
    double t0 = 0.0;
    double t1 = 1.0;
};

/// Refined face mesh carrying discontinuous vector P_l trace dofs.
class SkeletonMesh {
public:
    SkeletonMesh(const GlobalPartition& partition, std::vector<std::vector<Segment>> segments,
                 int trace_degree);

    int trace_degree() const { return degree_; }
    int dofs_per_segment() const { return 2 * (degree_ + 1); }

    const std::vector<Segment>& segments(int face) const { return segments_[face]; }
    bool carries_dofs(int face) const { return carries_dofs_[face]; }
    /// First global dof of segment s on face f; -1 for Neumann faces.
    int dof_offset(int face, int s) const;
    /// Index of trace dof (component c, Legendre mode m) inside a segment block.
    int local_dof(int component, int mode) const { return component * (degree_ + 1) + mode; }

    int num_dofs() const { return num_dofs_; }
    int num_segments() const;
    /// Segments carrying dofs, in dof order.
    int num_dof_segments() const { return num_dofs_ / dofs_per_segment(); }

    double segment_length(int face, int s) const;
    std::array<Point, 2> segment_points(int face, int s) const;
    /// Skeleton size H: max segment length.
    double skeleton_size() const;
    /// Uniform refinement level when all faces share one, else -1.
    int level() const { return level_; }

    const GlobalPartition& partition() const { return *partition_; }

private:
    const GlobalPartition* partition_;
    std::vector<std::vector<Segment>> segments_;
    std::vector<char> carries_dofs_;
    std::vector<int> offsets_;
    int degree_;
    int num_dofs_ = 0;
    int level_ = -1;
};

/// Splits every face into 2^r equal segments. Requires l >= 1.
SkeletonMesh refine_skeleton(const GlobalPartition& partition, int r, int trace_degree);

struct BoundaryEdge {
    int triangle = -1;
    int local_edge = -1;  ///< local edge of the fine triangle (0: v0-v1, 1: v1-v2, 2: v2-v0)
    int coarse_side = -1;  ///< side of K the edge lies on
    int face = -1;         ///< coarse face
    int segment = -1;      ///< skeleton segment containing the edge
    double t0 = 0.0, t1 = 0.0;  ///< parameters of the edge endpoints along the face
};

/// Conforming triangulation of one coarse element, matching the skeleton.
struct LocalMesh {
    int element = -1;
    int depth = 0;
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary;

    int num_triangles() const { return static_cast<int>(triangles.size()); }
    std::array<Point, 3> triangle_points(int t) const {
        const auto& tri = triangles[t];
        return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
    }
    double triangle_diameter(int t) const;
    double triangle_area(int t) const;
    /// Shape regularity h_tau / rho_tau.
    double shape_regularity(int t) const;
    /// Max triangle diameter.
    double fine_size() const;
    /// Diameter of the patch (h_K).
    double diameter() const;
};

/// Uniform red refinement of K to the given depth, refined further until every
/// skeleton segment on the boundary of K is a union of fine edges.
/// Throws mhm::Error when a segment endpoint is not a dyadic face point.
LocalMesh build_matching_local_mesh(const GlobalPartition& partition, int element,
                                    const SkeletonMesh& skeleton, int depth);

/// Red refinement of an arbitrary triangle with no skeleton attached.
LocalMesh build_refined_triangle(const std::array<Point, 3>& corners, int depth);

/// Uniform triangulation of [0,1]^2 matching build_structured_triangulation(n),
/// as a single patch (used by the single-level solvers).
LocalMesh build_structured_local_mesh(int n);

struct RefinementCheck {
    int element = -1;
    bool pass = false;
    int min_interior_nodes = 0;
    std::string reason;
};

struct RefinementReport {
    std::vector<RefinementCheck> elements;
    bool all_pass() const;
};

/// Sufficient conditions for a Fortin operator in 2D: per element, either
/// (k >= l+1 >= 2 and >= 1 node inside each segment) or
/// (k >= l >= s and >= 4-s nodes inside each segment, s in {1,2,3}).
/// "Nodes" are fine-mesh vertices strictly inside a segment.
RefinementReport check_refinement_conditions(int k, int l, const std::vector<LocalMesh>& locals,
                                             const SkeletonMesh& skeleton);

}  // namespace mhm
