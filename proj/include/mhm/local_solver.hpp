#pragma once

// Local Neumann problems on one coarse element: the GaLS and plain Galerkin
// multiscale bases, the rigid-body projection and the stabilization parameter.

#include "mhm/field.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>

namespace mhm {

enum class LocalMethod { gals, galerkin };

std::string to_string(LocalMethod method);

/// alpha_K = theta * G0 * c_inverse / (2 ||G||^2_{1,inf}).
/// Throws for theta outside (0,1) or non-positive G0.
double compute_alpha(const PatchMaterial& material, double c_inverse, double theta = 0.5);

/// Open upper end of the admissible interval for alpha_K.
double alpha_upper_bound(const PatchMaterial& material, double c_inverse);

/// L2(K) projection onto the rigid motions (1,0), (0,1), (-(y-yc), x-xc).
struct RigidProjection {
    Point centre;
    Eigen::Vector3d coefficients;
    Eigen::Matrix3d gram;
    Eigen::VectorXd residual_x, residual_y;
};

RigidProjection project_rm(const LocalMesh& mesh, const DofMap& dofs, const Eigen::VectorXd& ux,
                           const Eigen::VectorXd& uy);

/// One trace basis function psi_m e_c on a skeleton segment touching K.
struct TraceDof {
    int global = -1;
    double sign = 1.0;  ///< n_F . n^K
    int face = -1;
    int segment = -1;
    int component = 0;
    int mode = 0;
};

/// Trace dofs on the boundary of an element, ordered by side, segment, dof.
std::vector<TraceDof> element_trace_dofs(const SkeletonMesh& skeleton, int element);

/// Orthonormal Legendre mode m on a segment of length L, at local parameter s in [0,1].
double trace_basis(int mode, double s, double length);

/// Local saddle matrix over (u, p, rho) or (u, rho) and its right-hand sides.
struct LocalSystem {
    LocalMethod method = LocalMethod::gals;
    int num_nodes = 0;
    double alpha = 0.0;
    Point centre;
    Eigen::SparseMatrix<double> matrix;
    /// Column j: <psi_j, v>_{dK} against every test function (unsigned psi_j).
    Eigen::SparseMatrix<double> trace_rhs;
    Eigen::VectorXd load_rhs;
    /// int_K f.v_m + int_{dK cap Gamma_N} g.v_m.
    Eigen::Vector3d load_moments;
    std::vector<TraceDof> trace;

    int size() const { return static_cast<int>(matrix.rows()); }
    int pressure_offset() const { return 2 * num_nodes; }
    int multiplier_offset() const { return (method == LocalMethod::gals ? 3 : 2) * num_nodes; }
};

struct LocalContext {
    const GlobalPartition* partition = nullptr;
    const SkeletonMesh* skeleton = nullptr;
    std::shared_ptr<const LocalMesh> mesh;
    std::shared_ptr<const DofMap> dofs;
    PatchMaterial material;
    const LoadData* load = nullptr;
};

LocalContext make_local_context(const GlobalPartition& partition, const SkeletonMesh& skeleton,
                                std::shared_ptr<const LocalMesh> mesh, int degree, const Material& material,
                                const LoadData* load);

/// GaLS assembly. Refuses alpha outside (0, alpha_upper_bound(material, c_inverse)).
LocalSystem assemble_local_gals(const LocalContext& ctx, double alpha, double c_inverse);

/// Galerkin assembly with a_K = 2G eps:eps + (1/eps) div div.
LocalSystem assemble_local_galerkin(const LocalContext& ctx);

/// Condensed multiscale basis of one element. Basis solutions T(psi_j) are
/// reproduced from the stored factorization on demand.
class LocalBasisCache {
public:
    int element = -1;
    LocalMethod method = LocalMethod::gals;
    double alpha = 0.0;
    Point centre;
    std::shared_ptr<const LocalMesh> mesh;
    std::shared_ptr<const DofMap> dofs;
    PatchMaterial material;
    std::vector<TraceDof> trace;

    Eigen::MatrixXd pairing;       ///< <psi_i, T(psi_j)>, symmetric
    Eigen::MatrixXd rm_pairing;    ///< <psi_i, v_m>
    Eigen::VectorXd load_pairing;  ///< <psi_i, That(f)>
    Eigen::Vector3d load_moments;
    Eigen::Matrix3d rigid_gram;     ///< int_K v_m . v_n
    Eigen::VectorXd load_solution;  ///< That(f), That^p(f), rho

    int num_nodes() const { return dofs->num_nodes(); }
    int num_trace() const { return static_cast<int>(trace.size()); }

    /// Full local solution vector for sum_j c_j T(psi_j) (+ That(f) when with_load).
    Eigen::VectorXd solve(const Eigen::VectorXd& trace_coefficients, bool with_load) const;
    /// T(psi_j) alone.
    Eigen::VectorXd basis_solution(int j) const;

    /// Field u_RM + sum_j c_j T(psi_j) + That(f) with c_j the signed local coefficients.
    FieldPatch reconstruct(const Eigen::VectorXd& trace_coefficients, const Eigen::Vector3d& rigid) const;
    /// Field of a raw local solution vector (no rigid part added).
    FieldPatch field_of(const Eigen::VectorXd& local_solution) const;

    std::shared_ptr<const Eigen::SparseLU<Eigen::SparseMatrix<double>>> factor;
    Eigen::SparseMatrix<double> trace_rhs;
    Eigen::SparseMatrix<double> matrix;  ///< kept for iterative refinement
};

/// Factorizes once and solves for every trace basis function and the load.
/// Throws SingularSystemError when the factorization fails.
LocalBasisCache solve_local_basis(const LocalContext& ctx, LocalSystem system);

/// Galerkin (MHM-Ga) variant: assemble and solve.
LocalBasisCache solve_local_galerkin_basis(const LocalContext& ctx);

}  // namespace mhm
