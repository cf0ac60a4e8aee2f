#include "mhm/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace mhm {

std::string to_string(FaceTag tag) {
    switch (tag) {
        case FaceTag::interior: return "interior";
        case FaceTag::dirichlet: return "dirichlet";
        case FaceTag::neumann: return "neumann";
    }
    return "?";
}

FaceTag face_tag_from_string(const std::string& s) {
    if (s == "interior") return FaceTag::interior;
    if (s == "dirichlet" || s == "D") return FaceTag::dirichlet;
    if (s == "neumann" || s == "N") return FaceTag::neumann;
    throw Error("unknown face tag '" + s + "'");
}

GlobalPartition::GlobalPartition(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
    const int nv = static_cast<int>(vertices_.size());
    for (auto& el : elements_) {
        for (int v : el)
            if (v < 0 || v >= nv) throw Error("GlobalPartition: vertex index out of range");
        const double a = cross(vertices_[el[1]] - vertices_[el[0]], vertices_[el[2]] - vertices_[el[0]]);
        if (a == 0.0) throw Error("GlobalPartition: degenerate element");
        if (a < 0.0) std::swap(el[1], el[2]);
    }
    build_faces();
}

void GlobalPartition::build_faces() {
    std::map<std::pair<int, int>, int> lookup;
    element_faces_.assign(elements_.size(), {-1, -1, -1});
    for (int e = 0; e < num_elements(); ++e) {
        for (int s = 0; s < 3; ++s) {
            const int a = elements_[e][s], b = elements_[e][(s + 1) % 3];
            const auto key = std::minmax(a, b);
            auto it = lookup.find({key.first, key.second});
            if (it == lookup.end()) {
                Face f;
                f.vertices = {key.first, key.second};
                f.elements = {e, -1};
                const Point d = vertices_[b] - vertices_[a];
                f.normal = Point(d.y(), -d.x()).normalized();
                f.tag = FaceTag::dirichlet;
                lookup.emplace(std::pair{key.first, key.second}, num_faces());
                element_faces_[e][s] = num_faces();
                faces_.push_back(f);
            } else {
                Face& f = faces_[it->second];
                if (f.elements[1] >= 0) throw Error("GlobalPartition: face shared by more than two elements");
                f.elements[1] = e;
                f.tag = FaceTag::interior;
                element_faces_[e][s] = it->second;
            }
        }
    }
}

double GlobalPartition::face_sign(int e, int side) const {
    const Face& f = faces_[element_faces_[e][side]];
    return f.elements[0] == e ? 1.0 : -1.0;
}

std::array<Point, 3> GlobalPartition::element_points(int e) const {
    const auto& el = elements_[e];
    return {vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]};
}

double GlobalPartition::element_area(int e) const {
    const auto p = element_points(e);
    return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
}

double GlobalPartition::element_diameter(int e) const {
    const auto p = element_points(e);
    return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
}

Point GlobalPartition::element_centroid(int e) const {
    const auto p = element_points(e);
    return (p[0] + p[1] + p[2]) / 3.0;
}

double GlobalPartition::coarse_size() const {
    double h = 0.0;
    for (int e = 0; e < num_elements(); ++e) h = std::max(h, element_diameter(e));
    return h;
}

double GlobalPartition::domain_area() const {
    // Shoelace over the boundary faces, oriented by their outward normal.
    double area = 0.0;
    for (const auto& f : faces_) {
        if (!f.is_boundary()) continue;
        Point a = vertices_[f.vertices[0]], b = vertices_[f.vertices[1]];
        const Point d = b - a;
        if (Point(d.y(), -d.x()).dot(f.normal) < 0.0) std::swap(a, b);
        area += 0.5 * cross(a, b);
    }
    return area;
}

void GlobalPartition::set_boundary_tag(int face, FaceTag tag) {
    if (!faces_.at(face).is_boundary()) throw Error("set_boundary_tag: face is interior");
    if (tag == FaceTag::interior) throw Error("set_boundary_tag: boundary face cannot be tagged interior");
    faces_[face].tag = tag;
}

bool GlobalPartition::has_dirichlet() const {
    return std::any_of(faces_.begin(), faces_.end(), [](const Face& f) { return f.tag == FaceTag::dirichlet; });
}

void GlobalPartition::validate() const {
    double sum = 0.0;
    for (int e = 0; e < num_elements(); ++e) {
        const double a = element_area(e);
        if (!(a > 0.0)) throw Error("partition: element " + std::to_string(e) + " has non-positive area");
        sum += a;
    }
    for (const auto& f : faces_) {
        if (f.is_boundary() && f.tag == FaceTag::interior) throw Error("partition: boundary face tagged interior");
        if (!f.is_boundary() && f.tag != FaceTag::interior) throw Error("partition: interior face tagged boundary");
    }
    const double domain = domain_area();
    if (std::abs(sum - domain) > 1e-12 * std::abs(domain))
        throw Error("partition: element areas do not cover the domain");
    if (!has_dirichlet()) throw Error("partition: Dirichlet boundary is empty");
}

GlobalPartition build_structured_triangulation(int n) {
    if (n < 1) throw Error("build_structured_triangulation: n must be >= 1");
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) vertices.emplace_back(double(i) / n, double(j) / n);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> elements;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return GlobalPartition(std::move(vertices), std::move(elements));
}

// ---------------------------------------------------------------------------

SkeletonMesh::SkeletonMesh(const GlobalPartition& partition, std::vector<std::vector<Segment>> segments,
                           int trace_degree)
    : partition_(&partition), segments_(std::move(segments)), degree_(trace_degree) {
    if (trace_degree < 1) throw Error("SkeletonMesh: trace degree must be >= 1");
    if (static_cast<int>(segments_.size()) != partition.num_faces())
        throw Error("SkeletonMesh: one segment list per face required");
    carries_dofs_.resize(segments_.size());
    offsets_.assign(segments_.size(), -1);
    std::size_t common = segments_.empty() ? 0 : segments_[0].size();
    bool uniform = true;
    for (std::size_t f = 0; f < segments_.size(); ++f) {
        const auto& segs = segments_[f];
        if (segs.empty()) throw Error("SkeletonMesh: face without segments");
        double t = 0.0;
        for (const auto& s : segs) {
            if (std::abs(s.t0 - t) > geometry_tolerance || !(s.t1 > s.t0))
                throw Error("SkeletonMesh: segments do not partition face " + std::to_string(f));
            t = s.t1;
        }
        if (std::abs(t - 1.0) > geometry_tolerance)
            throw Error("SkeletonMesh: segments do not cover face " + std::to_string(f));
        carries_dofs_[f] = partition.faces()[f].tag != FaceTag::neumann;
        if (carries_dofs_[f]) {
            offsets_[f] = num_dofs_;
            num_dofs_ += static_cast<int>(segs.size()) * dofs_per_segment();
        }
        if (segs.size() != common) uniform = false;
        for (std::size_t s = 0; s < segs.size(); ++s)
            if (std::abs(segs[s].t0 - double(s) / segs.size()) > geometry_tolerance) uniform = false;
    }
    if (uniform && common > 0 && std::has_single_bit(common)) level_ = std::countr_zero(common);
}

int SkeletonMesh::dof_offset(int face, int s) const {
    if (!carries_dofs_[face]) return -1;
    return offsets_[face] + s * dofs_per_segment();
}

int SkeletonMesh::num_segments() const {
    int n = 0;
    for (const auto& s : segments_) n += static_cast<int>(s.size());
    return n;
}

std::array<Point, 2> SkeletonMesh::segment_points(int face, int s) const {
    const Face& f = partition_->faces()[face];
    const Point a = partition_->vertices()[f.vertices[0]];
    const Point b = partition_->vertices()[f.vertices[1]];
    const Segment& seg = segments_[face][s];
    return {a + seg.t0 * (b - a), a + seg.t1 * (b - a)};
}

double SkeletonMesh::segment_length(int face, int s) const {
    const auto p = segment_points(face, s);
    return (p[1] - p[0]).norm();
}

double SkeletonMesh::skeleton_size() const {
    double h = 0.0;
    for (int f = 0; f < static_cast<int>(segments_.size()); ++f)
        for (int s = 0; s < static_cast<int>(segments_[f].size()); ++s) h = std::max(h, segment_length(f, s));
    return h;
}

SkeletonMesh refine_skeleton(const GlobalPartition& partition, int r, int trace_degree) {
    if (r < 0) throw Error("refine_skeleton: negative level");
    if (trace_degree < 1) throw Error("refine_skeleton: trace degree must be >= 1");
    const int ns = 1 << r;
    std::vector<std::vector<Segment>> segments(partition.num_faces());
    for (auto& segs : segments) {
        segs.resize(ns);
        for (int s = 0; s < ns; ++s) segs[s] = {double(s) / ns, double(s + 1) / ns};
    }
    return SkeletonMesh(partition, std::move(segments), trace_degree);
}

// ---------------------------------------------------------------------------

double LocalMesh::triangle_diameter(int t) const {
    const auto p = triangle_points(t);
    return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
}

double LocalMesh::triangle_area(int t) const {
    const auto p = triangle_points(t);
    return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
}

double LocalMesh::shape_regularity(int t) const {
    const auto p = triangle_points(t);
    const double a = (p[1] - p[0]).norm(), b = (p[2] - p[1]).norm(), c = (p[0] - p[2]).norm();
    const double inradius = 2.0 * triangle_area(t) / (a + b + c);
    return triangle_diameter(t) / (2.0 * inradius);
}

double LocalMesh::fine_size() const {
    double h = 0.0;
    for (int t = 0; t < num_triangles(); ++t) h = std::max(h, triangle_diameter(t));
    return h;
}

double LocalMesh::diameter() const {
    std::vector<Point> pts;
    if (!boundary.empty()) {
        for (const auto& e : boundary) {
            const auto& tri = triangles[e.triangle];
            pts.push_back(vertices[tri[e.local_edge]]);
        }
    } else {
        pts = vertices;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

namespace {

struct Lattice {
    LocalMesh mesh;
    std::vector<std::array<int, 3>> side_edges;  // (side, triangle, local edge)
};

Lattice red_refine(const std::array<Point, 3>& c, int depth) {
    const int n = 1 << depth;
    Lattice out;
    out.mesh.depth = depth;
    std::vector<int> row_start(n + 2, 0);
    for (int j = 0; j <= n; ++j) row_start[j + 1] = row_start[j] + (n + 1 - j);
    auto id = [&](int i, int j) { return row_start[j] + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i + j <= n; ++i)
            out.mesh.vertices.push_back(c[0] + (double(i) / n) * (c[1] - c[0]) + (double(j) / n) * (c[2] - c[0]));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i + j < n; ++i) {
            const int up = out.mesh.num_triangles();
            out.mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
            if (j == 0) out.side_edges.push_back({0, up, 0});
            if (i + j == n - 1) out.side_edges.push_back({1, up, 1});
            if (i == 0) out.side_edges.push_back({2, up, 2});
            if (i + j <= n - 2) out.mesh.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return out;
}

int dyadic_depth(double t) {
    for (int d = 0; d <= 30; ++d) {
        const double scaled = t * double(1 << d);
        if (std::abs(scaled - std::round(scaled)) <= geometry_tolerance * double(1 << d)) return d;
    }
    return -1;
}

}  // namespace

LocalMesh build_refined_triangle(const std::array<Point, 3>& corners, int depth) {
    if (depth < 0) throw Error("build_refined_triangle: negative depth");
    Lattice lat = red_refine(corners, depth);
    for (const auto& se : lat.side_edges) {
        BoundaryEdge be;
        be.coarse_side = se[0];
        be.triangle = se[1];
        be.local_edge = se[2];
        lat.mesh.boundary.push_back(be);
    }
    return std::move(lat.mesh);
}

LocalMesh build_matching_local_mesh(const GlobalPartition& partition, int element, const SkeletonMesh& skeleton,
                                    int depth) {
    if (depth < 0) throw Error("build_matching_local_mesh: negative depth");
    int required = depth;
    for (int s = 0; s < 3; ++s) {
        const int f = partition.element_face(element, s);
        for (const auto& seg : skeleton.segments(f)) {
            for (double t : {seg.t0, seg.t1}) {
                const int d = dyadic_depth(t);
                if (d < 0)
                    throw Error("build_matching_local_mesh: skeleton segments on face " + std::to_string(f) +
                                " are not aligned with a dyadic subdivision");
                required = std::max(required, d);
            }
        }
    }
    Lattice lat = red_refine(partition.element_points(element), required);
    LocalMesh& mesh = lat.mesh;
    mesh.element = element;
    for (const auto& se : lat.side_edges) {
        const int side = se[0];
        const int f = partition.element_face(element, side);
        const Face& face = partition.faces()[f];
        const Point a = partition.vertices()[face.vertices[0]];
        const Point b = partition.vertices()[face.vertices[1]];
        const Point d = b - a;
        const double len2 = d.squaredNorm();
        const auto& tri = mesh.triangles[se[1]];
        const Point p0 = mesh.vertices[tri[se[2]]];
        const Point p1 = mesh.vertices[tri[(se[2] + 1) % 3]];
        double t0 = (p0 - a).dot(d) / len2, t1 = (p1 - a).dot(d) / len2;
        if (t0 > t1) std::swap(t0, t1);
        const auto& segs = skeleton.segments(f);
        int found = -1;
        for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
            if (t0 >= segs[s].t0 - geometry_tolerance && t1 <= segs[s].t1 + geometry_tolerance) {
                found = s;
                break;
            }
        }
        if (found < 0) throw Error("build_matching_local_mesh: fine edge not contained in a skeleton segment");
        BoundaryEdge be;
        be.triangle = se[1];
        be.local_edge = se[2];
        be.coarse_side = side;
        be.face = f;
        be.segment = found;
        be.t0 = t0;
        be.t1 = t1;
        mesh.boundary.push_back(be);
    }
    return std::move(lat.mesh);
}

LocalMesh build_structured_local_mesh(int n) {
    const GlobalPartition grid = build_structured_triangulation(n);
    LocalMesh mesh;
    mesh.vertices = grid.vertices();
    mesh.triangles = grid.elements();
    for (int e = 0; e < grid.num_elements(); ++e)
        for (int s = 0; s < 3; ++s) {
            const int f = grid.element_face(e, s);
            if (!grid.faces()[f].is_boundary()) continue;
            BoundaryEdge be;
            be.triangle = e;
            be.local_edge = s;
            mesh.boundary.push_back(be);
        }
    return mesh;
}

bool RefinementReport::all_pass() const {
    return std::all_of(elements.begin(), elements.end(), [](const RefinementCheck& c) { return c.pass; });
}

RefinementReport check_refinement_conditions(int k, int l, const std::vector<LocalMesh>& locals,
                                             const SkeletonMesh& skeleton) {
    if (k < 1 || l < 1) throw Error("check_refinement_conditions: degrees must be >= 1");
    RefinementReport report;
    for (const auto& mesh : locals) {
        std::map<std::pair<int, int>, int> edges_in_segment;
        for (const auto& be : mesh.boundary) {
            if (be.face < 0 || !skeleton.carries_dofs(be.face)) continue;
            ++edges_in_segment[{be.face, be.segment}];
        }
        RefinementCheck check;
        check.element = mesh.element;
        int min_nodes = std::numeric_limits<int>::max();
        for (const auto& [key, m] : edges_in_segment) min_nodes = std::min(min_nodes, m - 1);
        if (edges_in_segment.empty()) min_nodes = 0;
        check.min_interior_nodes = min_nodes;

        const bool case1 = k >= l + 1 && l + 1 >= 2 && min_nodes >= 1;
        bool case2 = false;
        for (int s = 1; s <= 3 && !case2; ++s) case2 = k >= l && l >= s && min_nodes >= 4 - s;
        check.pass = edges_in_segment.empty() || case1 || case2;
        if (check.pass) {
            check.reason = edges_in_segment.empty() ? "no trace dofs on element boundary"
                                                    : (case1 ? "case 1" : "case 2");
        } else {
            std::string why;
            if (k >= l + 1) why += "case 1 requires 1 interior node; ";
            else why += "case 1 requires k >= l+1; ";
            if (k >= l) why += "case 2 requires " + std::to_string(4 - std::min(l, 3)) + " interior nodes";
            else why += "case 2 requires k >= l";
            check.reason = why + " (found " + std::to_string(min_nodes) + ")";
        }
        report.elements.push_back(check);
    }
    return report;
}

}  // namespace mhm
