#include "mhm/pipeline.hpp"

#include "mhm/parallel.hpp"

#include <chrono>
#include <cstdlib>
#include <optional>

namespace mhm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

InverseConstant inverse_constant_for(const GlobalPartition& partition, int degree) {
    return estimate_inverse_constant(degree, build_refined_triangle(partition.element_points(0), 0));
}

}  // namespace

std::vector<Eigen::Matrix3d> MhmRun::rigid_grams() const {
    std::vector<Eigen::Matrix3d> out;
    for (const auto& c : caches) out.push_back(c.rigid_gram);
    return out;
}

MhmRun build_mhm_bases(const GlobalPartition& partition, const Material& material, const LoadData& data,
                       const MhmConfig& config) {
    partition.validate();
    MhmRun run;
    run.partition = std::make_shared<const GlobalPartition>(partition);
    run.skeleton = std::make_shared<const SkeletonMesh>(
        refine_skeleton(*run.partition, config.skeleton_level, config.trace_degree));
    const int ne = run.partition->num_elements();
    run.locals.resize(ne);
    for (int e = 0; e < ne; ++e)
        run.locals[e] = std::make_shared<const LocalMesh>(
            build_matching_local_mesh(*run.partition, e, *run.skeleton, config.local_depth));

    std::vector<LocalMesh> plain;
    plain.reserve(ne);
    for (const auto& m : run.locals) plain.push_back(*m);
    run.refinement = check_refinement_conditions(config.degree, config.trace_degree, plain, *run.skeleton);
    if (!run.refinement.all_pass()) {
        if (!config.override_wellposedness) {
            std::string reason;
            for (const auto& c : run.refinement.elements)
                if (!c.pass) {
                    reason = c.reason;
                    break;
                }
            throw Error("refinement conditions fail (" + reason + "); pass --override-wellposedness to run anyway");
        }
        run.unsupported_regime = true;
    }

    if (config.method == LocalMethod::gals) run.c_inverse = inverse_constant_for(*run.partition, config.degree);

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::optional<LocalBasisCache>> slots(ne);
    parallel_for(ne, config.threads, [&](int e) {
        LocalContext ctx = make_local_context(*run.partition, *run.skeleton, run.locals[e], config.degree, material,
                                              &data);
        if (config.method == LocalMethod::gals) {
            const double alpha = compute_alpha(ctx.material, run.c_inverse.adjusted, config.theta);
            slots[e] = solve_local_basis(ctx, assemble_local_gals(ctx, alpha, run.c_inverse.value));
        } else {
            slots[e] = solve_local_galerkin_basis(ctx);
        }
    });
    run.caches.reserve(ne);
    for (auto& s : slots) run.caches.push_back(std::move(*s));
    run.local_seconds = seconds_since(start);
    run.system = assemble_global_saddle(run.caches, *run.skeleton, data);
    return run;
}

MhmRun solve_mhm(const GlobalPartition& partition, const Material& material, const LoadData& data,
                 const MhmConfig& config) {
    MhmRun run = build_mhm_bases(partition, material, data, config);
    const auto start = std::chrono::steady_clock::now();
    run.global = solve_global(run.system);
    run.global_seconds = seconds_since(start);
    run.solution = postprocess_solution(run.global.traction, run.global.rigid, run.caches);
    run.equilibrium = equilibrium_residual(run.solution, run.caches);
    run.continuity = weak_continuity_residual(run.solution, run.caches, run.system);
    return run;
}

double single_level_alpha(const PatchMaterial& material, int degree, double theta) {
    const InverseConstant ci =
        estimate_inverse_constant(degree, build_refined_triangle({Point(0, 0), Point(1, 0), Point(1, 1)}, 0));
    return compute_alpha(material, ci.adjusted, theta);
}

SingleLevelSolution solve_single_level(SingleLevelMethod method, int n, int degree, const Material& material,
                                       const LoadData& data, double theta) {
    auto mesh = std::make_shared<const LocalMesh>(build_structured_local_mesh(n));
    if (method == SingleLevelMethod::galerkin) return solve_galerkin_dirichlet(mesh, degree, material, data);
    const double alpha = single_level_alpha(PatchMaterial::sample(material, *mesh), degree, theta);
    return solve_gals_dirichlet(mesh, degree, material, alpha, data);
}

int default_thread_count() {
    if (const char* env = std::getenv("MHM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<int>(v);
    }
    return 1;
}

}  // namespace mhm
