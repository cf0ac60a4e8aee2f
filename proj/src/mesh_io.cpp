// Plain-text partition format:
//
//   # mhm-mesh v1
//   vertices <N>
//   <x> <y>            (N lines)
//   elements <M>
//   <a> <b> <c>        (M lines, 0-based vertex ids)
//   faces <F>
//   <v0> <v1> <tag>    (F lines, tag in interior|dirichlet|neumann)
//
// Lines starting with '#' are comments. The face section is optional; listed
// boundary faces override the default Dirichlet tag.

#include "mhm/mesh.hpp"

#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mhm {

void write_partition(std::ostream& out, const GlobalPartition& partition) {
    out << "# mhm-mesh v1\n";
    out << std::setprecision(17);
    out << "vertices " << partition.vertices().size() << '\n';
    for (const auto& v : partition.vertices()) out << v.x() << ' ' << v.y() << '\n';
    out << "elements " << partition.num_elements() << '\n';
    for (const auto& e : partition.elements()) out << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
    out << "faces " << partition.num_faces() << '\n';
    for (const auto& f : partition.faces())
        out << f.vertices[0] << ' ' << f.vertices[1] << ' ' << to_string(f.tag) << '\n';
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::istringstream next(const char* what) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return std::istringstream(line);
        }
        throw Error(std::string("read_partition: unexpected end of input, expected ") + what);
    }

    bool eof() {
        std::string line;
        while (in_.peek() != EOF) {
            const auto p = in_.tellg();
            std::getline(in_, line);
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos != std::string::npos && line[pos] != '#') {
                in_.seekg(p);
                return false;
            }
            ++line_no_;
        }
        return true;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("read_partition: line " + std::to_string(line_no_) + ": " + msg);
    }

private:
    std::istream& in_;
    int line_no_ = 0;
};

std::size_t read_count(LineReader& r, const std::string& keyword) {
    auto ls = r.next(keyword.c_str());
    std::string word;
    long long n = -1;
    if (!(ls >> word >> n) || word != keyword || n < 0) r.fail("expected '" + keyword + " <count>'");
    return static_cast<std::size_t>(n);
}

}  // namespace

GlobalPartition read_partition(std::istream& in) {
    LineReader r(in);
    const std::size_t nv = read_count(r, "vertices");
    std::vector<Point> vertices(nv);
    for (auto& v : vertices) {
        auto ls = r.next("vertex");
        double x, y;
        if (!(ls >> x >> y)) r.fail("malformed vertex");
        v = Point(x, y);
    }
    const std::size_t ne = read_count(r, "elements");
    std::vector<std::array<int, 3>> elements(ne);
    for (auto& e : elements) {
        auto ls = r.next("element");
        if (!(ls >> e[0] >> e[1] >> e[2])) r.fail("malformed element");
    }
    GlobalPartition partition(std::move(vertices), std::move(elements));
    if (r.eof()) return partition;

    std::map<std::pair<int, int>, int> lookup;
    for (int f = 0; f < partition.num_faces(); ++f) {
        const auto& fv = partition.faces()[f].vertices;
        lookup[{fv[0], fv[1]}] = f;
    }
    const std::size_t nf = read_count(r, "faces");
    for (std::size_t i = 0; i < nf; ++i) {
        auto ls = r.next("face");
        int a, b;
        std::string tag;
        if (!(ls >> a >> b >> tag)) r.fail("malformed face");
        const auto key = std::minmax(a, b);
        auto it = lookup.find({key.first, key.second});
        if (it == lookup.end()) r.fail("face " + std::to_string(a) + "-" + std::to_string(b) + " not in mesh");
        const FaceTag t = face_tag_from_string(tag);
        const bool boundary = partition.faces()[it->second].is_boundary();
        if (boundary != (t != FaceTag::interior)) r.fail("face tag does not match adjacency");
        if (boundary) partition.set_boundary_tag(it->second, t);
    }
    return partition;
}

}  // namespace mhm
