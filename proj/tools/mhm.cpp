// Command-line runner for the MHM experiments.
//
//   mhm convergence   --config k1.cfg --out results/k1
//   mhm nu-sweep      --set degree=1 --threads 4
//   mhm patch-test
//   mhm diagnose      --set levels=0,1
//   mhm export-fields --set methods=mhm-gals --out fields
//
// Settings are layered: subcommand defaults, then --config, then --set
// key=value, then the named flags. MHM_THREADS gives the default thread count.
// Exit status: 0 when every band passes, 1 when a band fails, 2 on usage errors.

#include "mhm/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

mhm::ExperimentConfig defaults_for(const std::string& command) {
    using mhm::ExperimentKind;
    using mhm::Method;
    mhm::ExperimentConfig c;
    c.threads = mhm::default_thread_count();
    if (command == "nu-sweep") {
        c.kind = ExperimentKind::nu_sweep;
        c.levels = {0};
        c.nus = {0.3, 0.4, 0.49, 0.499, 0.4999, 0.49999};
        c.methods = {Method::std_galerkin, Method::gals, Method::mhm_ga, Method::mhm_gals};
        c.locking_free_max_ratio = 3.0;
        c.locking_min_ratio = 5.0;
    } else if (command == "patch-test") {
        c.kind = ExperimentKind::patch_test;
        c.levels = {0};
        c.nus = {0.3};
        c.max_relative_error = 1e-9;
    } else if (command == "diagnose") {
        c.kind = ExperimentKind::diagnostics;
        c.levels = {0};
        c.nus = {0.3, 0.49999};
        c.min_stability_ratio = 0.01;
    } else if (command == "export-fields") {
        c.levels = {0};
    } else {
        c.max_compressibility = 1e-10;
    }
    return c;
}

struct Options {
    std::string config;
    std::vector<std::string> settings;
    int threads = 0;
    std::string out;
    double theta = 0.0;
    bool override_wellposedness = false;
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", o.settings, "extra key=value setting (repeatable)");
    app->add_option("--threads", o.threads, "worker threads for local solves")->check(CLI::PositiveNumber);
    app->add_option("--out", o.out, "output directory");
    app->add_option("--theta", o.theta, "stabilization safety factor in (0,1)");
    app->add_flag("--override-wellposedness", o.override_wellposedness,
                  "run even when the refinement conditions fail");
}

mhm::ExperimentConfig build_config(const std::string& command, const Options& o) {
    mhm::ExperimentConfig c = defaults_for(command);
    if (!o.config.empty()) c = mhm::load_config(o.config, c);
    for (const auto& s : o.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw mhm::Error("--set expects key=value, got '" + s + "'");
        c.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (o.threads > 0) c.threads = o.threads;
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.theta != 0.0) c.theta = o.theta;
    if (o.override_wellposedness) c.override_wellposedness = true;
    if (command == "convergence" && c.kind != mhm::ExperimentKind::skeleton_convergence &&
        c.kind != mhm::ExperimentKind::h_convergence)
        throw mhm::Error("convergence expects kind skeleton-convergence or h-convergence");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale hybrid-mixed elasticity experiments"};
    app.require_subcommand(1);
    Options options;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"convergence", "skeleton or coarse-mesh convergence study"},
        {"nu-sweep", "error versus Poisson ratio at a fixed mesh"},
        {"patch-test", "linear exact solution reproduced by every method"},
        {"diagnose", "eigenvalue probe of the global saddle system"},
        {"export-fields", "sampled displacement, pressure and stress of one solve"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), options);
    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const mhm::ExperimentConfig config = build_config(command, options);
        if (command == "export-fields") {
            for (const auto& path : mhm::export_fields(config)) std::cout << "wrote " << path << '\n';
            return 0;
        }
        const mhm::ExperimentReport report = mhm::run_experiment(config, true, &std::cout);
        for (const auto& path : report.artifacts) std::cout << "wrote " << path << '\n';
        return report.passed() ? 0 : 1;
    } catch (const mhm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
