#pragma once

// Batch experiments: key=value configuration, orchestration of the MHM and
// single-level solvers, CSV tables, a JSON summary and a run log.
//
// Config keys (one `key = value` per line, `#` starts a comment, lists are
// comma separated):
//   kind                    h-convergence | skeleton-convergence | nu-sweep | patch-test | diagnostics
//   grid                    coarse grid n (n x n squares, 2n^2 triangles)
//   mesh                    optional partition file, replaces the structured grid for MHM runs
//   degree, trace_degree    k and l
//   levels                  refinement levels (skeleton level or coarse-grid halvings)
//   depth_offset            extra local refinement on top of h = 2^(k-3) H
//   nu                      Poisson ratios
//   methods                 mhm-gals, mhm-ga, std-galerkin, gals
//   theta                   stabilization safety factor in (0,1)
//   out                     output directory
//   threads                 worker threads for local solves
//   override_wellposedness  run when the refinement conditions fail (labelled "unsupported regime")
// Acceptance bands, checked only when set:
//   l2_orders, h1_orders, order_tolerance      expected orders per step and the allowed deviation
//   min_final_orders                           lower bounds (l2, h1, stress, pressure) on the last step
//   reference_errors, error_tolerance          row-major (l2, h1, stress, pressure) per level, relative band
//   max_relative_error                         patch-test bound
//   locking_free_max_ratio, locking_min_ratio  nu-sweep H1 ratio bands
//   min_stability_ratio                        diagnostics bound on lambda_min(nu_max) / lambda_min(nu_min)
//   max_compressibility                        bound on max_K |int_K div u + eps p| / field scale

#include "mhm/pipeline.hpp"
#include "mhm/verify.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mhm {

enum class ExperimentKind { h_convergence, skeleton_convergence, nu_sweep, patch_test, diagnostics };
enum class Method { mhm_gals, mhm_ga, std_galerkin, gals };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(Method method);
Method method_from_string(const std::string& s);
bool is_multiscale(Method method);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::skeleton_convergence;
    int grid = 4;
    std::string mesh_file;
    int degree = 1;
    int trace_degree = 1;
    std::vector<int> levels{0, 1, 2};
    int depth_offset = 0;
    std::vector<double> nus{0.4999};
    std::vector<Method> methods{Method::mhm_gals};
    double theta = 0.5;
    std::string output_dir = "mhm-out";
    int threads = 1;
    bool override_wellposedness = false;

    std::vector<double> l2_orders;
    std::vector<double> h1_orders;
    double order_tolerance = 0.15;
    std::vector<double> min_final_orders;
    std::vector<double> reference_errors;
    double error_tolerance = 0.3;
    std::optional<double> max_relative_error;
    std::optional<double> locking_free_max_ratio;
    std::optional<double> locking_min_ratio;
    std::optional<double> min_stability_ratio;
    std::optional<double> max_compressibility;

    /// Throws mhm::Error for unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    /// Throws mhm::Error when an invariant fails.
    void validate() const;
};

/// Parses `key = value` lines on top of the given defaults. Errors name the line.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Local refinement depth below the coarse element: max(0, 3 - k) + offset.
int local_depth_for(int degree, int depth_offset);

struct LevelResult {
    int level = 0;
    double size = 0.0;  ///< H for skeleton runs, fine h otherwise
    ErrorRecord errors;
    ErrorRecord relative;  ///< errors over the norms of the exact fields
    double compressibility = 0.0;  ///< max_K |r_K| / max_K scale_K
    double equilibrium = 0.0;
    double continuity = 0.0;
    double alpha = 0.0;
    bool unsupported_regime = false;
    std::optional<SpectralDiagnostics> spectrum;
    double seconds = 0.0;
    std::string failure;  ///< non-empty when the solve failed
    bool ok() const { return failure.empty(); }
};

struct MethodRun {
    Method method = Method::mhm_gals;
    double nu = 0.0;
    std::vector<LevelResult> levels;
};

struct BandCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<MethodRun> runs;
    std::vector<BandCheck> bands;
    std::vector<std::string> artifacts;
    bool passed() const;
};

/// Solves one configuration for one method, level and Poisson ratio.
LevelResult run_level(const ExperimentConfig& config, Method method, int level, double nu);

/// Runs every (method, nu, level), evaluates the configured bands and, when
/// `write_artifacts` is set, writes CSV tables, summary.json and run.log into
/// config.output_dir. Progress lines go to `log` when given.
ExperimentReport run_experiment(const ExperimentConfig& config, bool write_artifacts = true,
                                std::ostream* log = nullptr);

/// Full-precision scientific notation with '.' as decimal separator.
std::string format_number(double value);

/// "H,e0,ord,e1,ord,es,ord,ep,ord" rows, one per level.
void write_convergence_csv(std::ostream& out, const MethodRun& run, const std::string& size_label = "H");

/// Solves the first level / nu / method of the config and writes the sampled
/// fields and, for multiscale methods, the traction coefficients.
std::vector<std::string> export_fields(const ExperimentConfig& config);

}  // namespace mhm
