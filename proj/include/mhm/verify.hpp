#pragma once

// Manufactured solutions, error norms, convergence orders and numerical
// well-posedness diagnostics.

#include "mhm/mhm_global.hpp"

#include <limits>
#include <string>

namespace mhm {

struct ExactState {
    Point u;
    Mat2 grad;  ///< grad(i, j) = d u_i / d x_j
    double p = 0.0;
    Point grad_p;
    Mat2 stress;
    Point force;
};

struct ExactSolution {
    std::string name;
    double shear = 1.0;
    double poisson = 0.3;
    std::function<ExactState(const Point&)> eval;

    Material material() const { return Material::constant(shear, poisson); }
    /// Body force f, and Dirichlet data u on the whole boundary.
    LoadData load() const;
};

/// Weight of the sin(pi x) sin(pi y) term in the Brenner displacement.
inline double brenner_weight(double nu) { return 0.5 * (1.0 - 2.0 * nu); }

/// Brenner's manufactured problem on [0,1]^2 with G = 1; the pressure and the load
/// are derived from the displacement so that -div sigma = f and p = -div(u)/epsilon.
ExactState exact_brenner(double nu, const Point& x, double weight);
inline ExactState exact_brenner(double nu, const Point& x) { return exact_brenner(nu, x, brenner_weight(nu)); }
ExactSolution brenner_problem(double nu, double weight);
inline ExactSolution brenner_problem(double nu) { return brenner_problem(nu, brenner_weight(nu)); }

/// u = gradient * x + offset with constant material and zero load.
ExactSolution linear_problem(double shear, double nu, const Mat2& gradient, const Point& offset);

struct ErrorRecord {
    double displacement_l2 = 0.0;  ///< ||u - u_h||_0
    double displacement_h1 = 0.0;  ///< broken H1 seminorm
    double stress_l2 = 0.0;
    double pressure_l2 = 0.0;
    double traction_l2 = std::numeric_limits<double>::quiet_NaN();  ///< face-L2 proxy only, not an energy-consistent norm
    double pressure_eps = 0.0;  ///< (int (1 + eps) e_p^2)^(1/2)
    double pressure_h = 0.0;    ///< (sum h_tau^2 ||grad e_p||^2)^(1/2)
};

/// Elementwise quadrature of exactness 2k + 4 (plus `extra_exactness`).
ErrorRecord compute_errors(const std::vector<FieldPatch>& patches, const ExactSolution& exact,
                           int extra_exactness = 0);

/// Norms of the exact fields measured with the same quadrature as compute_errors.
ErrorRecord exact_norms(const std::vector<FieldPatch>& patches, const ExactSolution& exact);

/// sqrt(sum_F ||lambda_H - sigma(u) n_F||^2_F) over faces carrying trace dofs.
double traction_error(const SkeletonMesh& skeleton, const Eigen::VectorXd& traction, const ExactSolution& exact);

/// order_i = log2(e_{i-1} / e_i). Throws for fewer than two levels or non-positive values.
std::vector<double> convergence_orders(const std::vector<double>& errors);

struct CompressibilityResidual {
    double residual = 0.0;  ///< int_K (div u + eps p)
    double scale = 0.0;     ///< int_K |div u| + |eps p|
};

std::vector<CompressibilityResidual> compressibility_residual(const std::vector<FieldPatch>& patches);

struct SpectralDiagnostics {
    int kernel_dimension = 0;
    double lambda_min = 0.0;  ///< smallest eigenvalue of A on ker B^T
    double lambda_min_without_hydrostatic = std::numeric_limits<double>::quiet_NaN();
    double inf_sup = 0.0;  ///< smallest singular value of B against the rigid-mode Gram metric
    double norm_a = 0.0;
    bool pass = true;  ///< lambda_min > 1e-12 ||A||
};

inline constexpr int max_dense_probe = 3000;

/// Dense eigenprobe. `rigid_gram` holds one 3x3 Gram matrix per element (identity when
/// empty). With a skeleton, the global normal-traction mode is also projected out.
SpectralDiagnostics spectral_diagnostics(const SaddleSystem& system,
                                         const std::vector<Eigen::Matrix3d>& rigid_gram = {},
                                         const SkeletonMesh* skeleton = nullptr);

/// Coefficients of the field lambda|_F = n_F on every segment carrying dofs.
Eigen::VectorXd normal_traction_mode(const SkeletonMesh& skeleton);

}  // namespace mhm
