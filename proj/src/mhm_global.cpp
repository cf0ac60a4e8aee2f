#include "mhm/mhm_global.hpp"

#include <Eigen/SparseLU>

#include <cstdio>
#include <ostream>

namespace mhm {

Eigen::SparseMatrix<double> SaddleSystem::assembled() const {
    const int nt = num_trace(), nr = num_rigid();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(trace_block.nonZeros() + 2 * rigid_block.nonZeros());
    for (int c = 0; c < trace_block.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(trace_block, c); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < rigid_block.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(rigid_block, c); it; ++it) {
            trip.emplace_back(it.row(), nt + it.col(), it.value());
            trip.emplace_back(nt + it.col(), it.row(), it.value());
        }
    Eigen::SparseMatrix<double> k(nt + nr, nt + nr);
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

SaddleSystem assemble_global_saddle(const std::vector<LocalBasisCache>& caches, const SkeletonMesh& skeleton,
                                    const LoadData& data) {
    const GlobalPartition& partition = skeleton.partition();
    if (static_cast<int>(caches.size()) != partition.num_elements())
        throw Error("assemble_global_saddle: one cache per element required");
    const int nt = skeleton.num_dofs();
    const int nr = 3 * partition.num_elements();

    SaddleSystem sys;
    sys.trace_rhs = Eigen::VectorXd::Zero(nt);
    sys.rigid_rhs = Eigen::VectorXd::Zero(nr);
    std::vector<Eigen::Triplet<double>> a_trip, b_trip;
    for (int e = 0; e < partition.num_elements(); ++e) {
        const LocalBasisCache& cache = caches[e];
        const std::vector<TraceDof> expected = element_trace_dofs(skeleton, e);
        if (cache.element != e || expected.size() != cache.trace.size())
            throw Error("assemble_global_saddle: cache of element " + std::to_string(e) + " does not match skeleton");
        for (std::size_t j = 0; j < expected.size(); ++j)
            if (expected[j].global != cache.trace[j].global || expected[j].sign != cache.trace[j].sign)
                throw Error("assemble_global_saddle: inconsistent dof map on element " + std::to_string(e));
        const int n = cache.num_trace();
        for (int i = 0; i < n; ++i) {
            const int gi = cache.trace[i].global;
            const double si = cache.trace[i].sign;
            for (int j = 0; j < n; ++j)
                a_trip.emplace_back(gi, cache.trace[j].global, si * cache.trace[j].sign * cache.pairing(i, j));
            for (int m = 0; m < 3; ++m) b_trip.emplace_back(gi, 3 * e + m, si * cache.rm_pairing(i, m));
            sys.trace_rhs(gi) -= si * cache.load_pairing(i);
        }
        sys.rigid_rhs.segment<3>(3 * e) = -cache.load_moments;
    }
    sys.trace_block.resize(nt, nt);
    sys.trace_block.setFromTriplets(a_trip.begin(), a_trip.end());
    sys.rigid_block.resize(nt, nr);
    sys.rigid_block.setFromTriplets(b_trip.begin(), b_trip.end());

    const Eigen::SparseMatrix<double> at = sys.trace_block.transpose();
    const Eigen::SparseMatrix<double> diff = sys.trace_block - at;
    double scale = 0.0, asym = 0.0;
    for (int c = 0; c < sys.trace_block.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.trace_block, c); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    for (int c = 0; c < diff.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it)
            asym = std::max(asym, std::abs(it.value()));
    if (asym > 1e-10 * scale) throw Error("assemble_global_saddle: trace block is not symmetric");

    if (data.dirichlet) {
        const int l = skeleton.trace_degree();
        const QuadratureRule rule = quad_rule(QuadratureDomain::segment, 2 * l + 16);
        for (int f = 0; f < partition.num_faces(); ++f) {
            if (partition.faces()[f].tag != FaceTag::dirichlet) continue;
            for (int s = 0; s < static_cast<int>(skeleton.segments(f).size()); ++s) {
                const auto pts = skeleton.segment_points(f, s);
                const double len = (pts[1] - pts[0]).norm();
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    const double t = rule.points[q].x();
                    const Point ud = data.dirichlet(pts[0] + t * (pts[1] - pts[0]));
                    for (int c = 0; c < 2; ++c)
                        for (int m = 0; m <= l; ++m)
                            sys.trace_rhs(skeleton.dof_offset(f, s) + skeleton.local_dof(c, m)) +=
                                rule.weights[q] * len * trace_basis(m, t, len) * ud(c);
                }
            }
        }
    }
    return sys;
}

GlobalSolution solve_global(const SaddleSystem& system) {
    const int nt = system.num_trace(), nr = system.num_rigid();
    const Eigen::SparseMatrix<double> k = system.assembled();
    Eigen::VectorXd rhs(nt + nr);
    rhs << system.trace_rhs, system.rigid_rhs;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(k);
    lu.factorize(k);
    const char* hint = "; the trace operator may not be injective, run check_refinement_conditions";
    if (lu.info() != Eigen::Success)
        throw SingularSystemError(std::string("global saddle system is singular (") + lu.lastErrorMessage() + ")" +
                                  hint);
    const Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) throw SingularSystemError(std::string("global solve produced non-finite values") + hint);

    GlobalSolution out;
    out.traction = x.head(nt);
    out.rigid = x.tail(nr);
    const Eigen::VectorXd a_l = system.trace_block * out.traction;
    const Eigen::VectorXd b_u = system.rigid_block * out.rigid;
    const Eigen::VectorXd bt_l = system.rigid_block.transpose() * out.traction;
    auto relative = [](const Eigen::VectorXd& r, double scale) { return scale > 0.0 ? r.norm() / scale : r.norm(); };
    out.trace_residual = relative(a_l + b_u - system.trace_rhs, a_l.norm() + b_u.norm() + system.trace_rhs.norm());
    out.rigid_residual = relative(bt_l - system.rigid_rhs,
                                  system.rigid_block.norm() * out.traction.norm() +
                                      system.rigid_rhs.norm());
    if (out.trace_residual > 1e-10 || out.rigid_residual > 1e-10)
        throw SingularSystemError("global solve residual too large (" + std::to_string(out.trace_residual) + ", " +
                                  std::to_string(out.rigid_residual) + ")" + hint);
    return out;
}

namespace {

Eigen::VectorXd local_coefficients(const LocalBasisCache& cache, const Eigen::VectorXd& traction) {
    Eigen::VectorXd c(cache.num_trace());
    for (int j = 0; j < cache.num_trace(); ++j) c(j) = cache.trace[j].sign * traction(cache.trace[j].global);
    return c;
}

}  // namespace

MHMSolution postprocess_solution(const Eigen::VectorXd& traction, const Eigen::VectorXd& rigid,
                                 const std::vector<LocalBasisCache>& caches) {
    MHMSolution out;
    out.traction = traction;
    out.rigid = rigid;
    out.patches.reserve(caches.size());
    for (std::size_t e = 0; e < caches.size(); ++e) {
        const Eigen::Vector3d rm = rigid.segment<3>(3 * static_cast<Eigen::Index>(e));
        out.patches.push_back(caches[e].reconstruct(local_coefficients(caches[e], traction), rm));
    }
    return out;
}

double equilibrium_residual(const MHMSolution& solution, const std::vector<LocalBasisCache>& caches) {
    double worst = 0.0;
    for (const auto& cache : caches) {
        const Eigen::VectorXd c = local_coefficients(cache, solution.traction);
        for (int m = 0; m < 3; ++m) {
            double sum = cache.load_moments(m), scale = std::abs(cache.load_moments(m));
            for (int j = 0; j < cache.num_trace(); ++j) {
                sum += c(j) * cache.rm_pairing(j, m);
                scale += std::abs(c(j) * cache.rm_pairing(j, m));
            }
            if (scale > 0.0) worst = std::max(worst, std::abs(sum) / scale);
        }
    }
    return worst;
}

double weak_continuity_residual(const MHMSolution& solution, const std::vector<LocalBasisCache>& caches,
                                const SaddleSystem& system) {
    const int nt = system.num_trace();
    Eigen::VectorXd jump = Eigen::VectorXd::Zero(nt), scale = Eigen::VectorXd::Zero(nt);
    // Dirichlet data recovered from the assembled right-hand side
    Eigen::VectorXd data = system.trace_rhs;
    for (std::size_t e = 0; e < caches.size(); ++e) {
        const LocalBasisCache& cache = caches[e];
        const FieldPatch& patch = solution.patches[e];
        const int n = cache.num_nodes();
        Eigen::VectorXd u = Eigen::VectorXd::Zero(cache.trace_rhs.rows());
        u.segment(0, n) = patch.ux;
        u.segment(n, n) = patch.uy;
        const Eigen::VectorXd pair = cache.trace_rhs.transpose() * u;
        for (int j = 0; j < cache.num_trace(); ++j) {
            const int g = cache.trace[j].global;
            const double s = cache.trace[j].sign;
            jump(g) += s * pair(j);
            scale(g) += std::abs(pair(j));
            data(g) += s * cache.load_pairing(j);
        }
    }
    double worst = 0.0;
    const double floor = scale.size() ? scale.maxCoeff() : 0.0;
    for (int i = 0; i < nt; ++i) {
        const double denom = std::max(scale(i) + std::abs(data(i)), 1e-3 * floor);
        if (denom > 0.0) worst = std::max(worst, std::abs(jump(i) - data(i)) / denom);
    }
    return worst;
}

void write_traction_csv(std::ostream& out, const SkeletonMesh& skeleton, const Eigen::VectorXd& traction) {
    out << "segment,component,mode,coefficient\n";
    const int per = skeleton.dofs_per_segment();
    const int l = skeleton.trace_degree();
    char buf[128];
    for (int i = 0; i < traction.size(); ++i) {
        const int local = i % per;
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17e\n", i / per, local / (l + 1), local % (l + 1), traction(i));
        out << buf;
    }
}

}  // namespace mhm
