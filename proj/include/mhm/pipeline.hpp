#pragma once

// End-to-end drivers: partition -> skeleton -> local bases -> global solve ->
// post-processing, and the single-level reference solves.

#include "mhm/mhm_global.hpp"
#include "mhm/singlelevel.hpp"

#include <memory>

namespace mhm {

struct MhmConfig {
    LocalMethod method = LocalMethod::gals;
    int degree = 1;
    int trace_degree = 1;
    int skeleton_level = 0;
    int local_depth = 0;
    double theta = 0.5;
    int threads = 1;
    /// Run even when the sufficient refinement conditions fail.
    bool override_wellposedness = false;
};

struct MhmRun {
    std::shared_ptr<const GlobalPartition> partition;
    std::shared_ptr<const SkeletonMesh> skeleton;
    std::vector<std::shared_ptr<const LocalMesh>> locals;
    InverseConstant c_inverse;
    RefinementReport refinement;
    bool unsupported_regime = false;
    std::vector<LocalBasisCache> caches;
    SaddleSystem system;
    GlobalSolution global;
    MHMSolution solution;
    double equilibrium = 0.0;
    double continuity = 0.0;
    double local_seconds = 0.0;
    double global_seconds = 0.0;

    std::vector<Eigen::Matrix3d> rigid_grams() const;
};

/// Throws mhm::Error when the refinement conditions fail without override, and
/// SingularSystemError when a local or the global system is singular.
MhmRun solve_mhm(const GlobalPartition& partition, const Material& material, const LoadData& data,
                 const MhmConfig& config);

/// Builds skeleton, local meshes and caches only (no global solve).
MhmRun build_mhm_bases(const GlobalPartition& partition, const Material& material, const LoadData& data,
                       const MhmConfig& config);

/// alpha from theta and the inverse constant of degree k sampled on an unrefined triangle.
double single_level_alpha(const PatchMaterial& material, int degree, double theta);

/// Single-level solve on the n x n structured triangulation of [0,1]^2.
SingleLevelSolution solve_single_level(SingleLevelMethod method, int n, int degree, const Material& material,
                                       const LoadData& data, double theta = 0.5);

/// Reads MHM_THREADS, falling back to 1.
int default_thread_count();

}  // namespace mhm
