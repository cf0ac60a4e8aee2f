#pragma once

// Global saddle system over (traction, rigid modes) and the post-processed
// multiscale solution.
//
// Sign convention: with s_I = n_F . n^K for trace dof I seen from K,
//   A_IJ = sum_K s_I s_J <psi_I, T(psi_J)>_{dK}
//   B_Im = s_I <psi_I, v_m>_{dK}
//   [A B; B^T 0] [lambda; u_RM] = [int_{Gamma_D} psi . u_D - sum_K s_I <psi_I, That(f)>; -load moments]
// With this sign A is positive semidefinite.

#include "mhm/local_solver.hpp"

#include <iosfwd>

namespace mhm {

struct SaddleSystem {
    Eigen::SparseMatrix<double> trace_block;  ///< A
    Eigen::SparseMatrix<double> rigid_block;  ///< B
    Eigen::VectorXd trace_rhs;
    Eigen::VectorXd rigid_rhs;

    int num_trace() const { return static_cast<int>(trace_block.rows()); }
    int num_rigid() const { return static_cast<int>(rigid_block.cols()); }
    Eigen::SparseMatrix<double> assembled() const;
};

/// Throws mhm::Error on caches inconsistent with the skeleton, or if A is not symmetric.
SaddleSystem assemble_global_saddle(const std::vector<LocalBasisCache>& caches, const SkeletonMesh& skeleton,
                                    const LoadData& data);

struct GlobalSolution {
    Eigen::VectorXd traction;
    Eigen::VectorXd rigid;
    double trace_residual = 0.0;  ///< relative residual of the first block row
    double rigid_residual = 0.0;  ///< relative residual of the second block row
};

/// Direct sparse LU of the full saddle matrix. Throws SingularSystemError when the
/// factorization fails or a block residual exceeds 1e-10 relative.
GlobalSolution solve_global(const SaddleSystem& system);

struct MHMSolution {
    Eigen::VectorXd traction;
    Eigen::VectorXd rigid;
    std::vector<FieldPatch> patches;
};

MHMSolution postprocess_solution(const Eigen::VectorXd& traction, const Eigen::VectorXd& rigid,
                                 const std::vector<LocalBasisCache>& caches);

/// max over (K, m) of |sum <lambda, v_m>_{dK} + load moments| relative to the term scale.
double equilibrium_residual(const MHMSolution& solution, const std::vector<LocalBasisCache>& caches);

/// max over trace dofs of |sum_K s <psi, u_Hh>_{dK} - int_{Gamma_D} psi . u_D| relative to the term scale.
double weak_continuity_residual(const MHMSolution& solution, const std::vector<LocalBasisCache>& caches,
                                const SaddleSystem& system);

/// CSV rows "segment,component,mode,coefficient".
void write_traction_csv(std::ostream& out, const SkeletonMesh& skeleton, const Eigen::VectorXd& traction);

}  // namespace mhm
