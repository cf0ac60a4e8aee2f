#include "mhm/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mhm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw Error("config: " + key + " expects a number, got '" + s + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw Error("config: " + key + " expects an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw Error("config: " + key + " expects true or false, got '" + s + "'");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
    return out;
}

/// Levels accept "a..b" ranges as well as lists.
std::vector<int> parse_levels(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const auto& item : split_list(value)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_int(key, item));
            continue;
        }
        const int a = parse_int(key, trim(item.substr(0, dots)));
        const int b = parse_int(key, trim(item.substr(dots + 2)));
        if (b < a) throw Error("config: empty range '" + item + "' in " + key);
        for (int i = a; i <= b; ++i) out.push_back(i);
    }
    return out;
}

ExactSolution problem_for(const ExperimentConfig& config, double nu) {
    if (config.kind != ExperimentKind::patch_test) return brenner_problem(nu);
    Mat2 gradient;
    gradient << 0.3, -0.2, 0.5, 0.1;
    return linear_problem(1.0, nu, gradient, Point(0.1, -0.2));
}

struct CaseSolution {
    std::vector<FieldPatch> patches;
    std::optional<MhmRun> mhm;
    double alpha = 0.0;
    double size = 0.0;
};

CaseSolution solve_case(const ExperimentConfig& config, Method method, int level, const ExactSolution& exact,
                        bool bases_only) {
    const bool h_refine = config.kind == ExperimentKind::h_convergence;
    const int coarse = h_refine ? config.grid << level : config.grid;
    const int skeleton_level = h_refine ? 0 : level;
    const int depth = local_depth_for(config.degree, config.depth_offset) + skeleton_level;
    const Material material = exact.material();
    const LoadData data = exact.load();

    CaseSolution out;
    if (is_multiscale(method)) {
        const GlobalPartition partition =
            config.mesh_file.empty() ? build_structured_triangulation(coarse) : [&] {
                std::ifstream in(config.mesh_file);
                if (!in) throw Error("cannot open mesh file " + config.mesh_file);
                return read_partition(in);
            }();
        MhmConfig mc;
        mc.method = method == Method::mhm_gals ? LocalMethod::gals : LocalMethod::galerkin;
        mc.degree = config.degree;
        mc.trace_degree = config.trace_degree;
        mc.skeleton_level = skeleton_level;
        mc.local_depth = depth;
        mc.theta = config.theta;
        mc.threads = config.threads;
        mc.override_wellposedness = config.override_wellposedness;
        MhmRun run = bases_only ? build_mhm_bases(partition, material, data, mc)
                                : solve_mhm(partition, material, data, mc);
        out.alpha = run.caches.empty() ? 0.0 : run.caches.front().alpha;
        if (h_refine) {
            double h = 0.0;
            for (const auto& m : run.locals) h = std::max(h, m->fine_size());
            out.size = h;
        } else {
            out.size = run.skeleton->skeleton_size();
        }
        if (!bases_only) out.patches = run.solution.patches;
        out.mhm = std::move(run);
        return out;
    }
    if (!config.mesh_file.empty()) throw Error("single-level methods run on the structured grid only");
    const int fine = coarse << depth;
    SingleLevelSolution sl = solve_single_level(
        method == Method::gals ? SingleLevelMethod::gals : SingleLevelMethod::galerkin, fine, config.degree,
        material, data, config.theta);
    out.alpha = sl.alpha;
    out.size = sl.field.mesh->fine_size();
    out.patches.push_back(std::move(sl.field));
    return out;
}

double ratio_or_value(double error, double norm) { return norm > 0.0 ? error / norm : error; }

std::string nu_label(double nu) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", nu);
    return buf;
}

std::string run_label(const MethodRun& run) { return to_string(run.method) + " nu=" + nu_label(run.nu); }

std::array<double, 4> error_columns(const ErrorRecord& e) {
    return {e.displacement_l2, e.displacement_h1, e.stress_l2, e.pressure_l2};
}

const char* column_names[4] = {"L2", "H1", "stress", "pressure"};

std::vector<std::array<double, 4>> orders_of(const MethodRun& run) {
    std::vector<std::array<double, 4>> out;
    for (std::size_t i = 1; i < run.levels.size(); ++i) {
        const auto a = error_columns(run.levels[i - 1].errors);
        const auto b = error_columns(run.levels[i].errors);
        std::array<double, 4> o{};
        for (int c = 0; c < 4; ++c) o[c] = std::log2(a[c] / b[c]);
        out.push_back(o);
    }
    return out;
}

bool all_ok(const MethodRun& run) {
    return std::all_of(run.levels.begin(), run.levels.end(), [](const LevelResult& l) { return l.ok(); });
}

void check_convergence_bands(const ExperimentConfig& config, const MethodRun& run, std::vector<BandCheck>& bands) {
    if (!all_ok(run) || run.levels.size() < 2) return;
    const auto orders = orders_of(run);
    auto check_orders = [&](const std::vector<double>& expected, int column) {
        if (expected.empty()) return;
        BandCheck b{run_label(run) + " " + column_names[column] + " orders", true, ""};
        std::ostringstream d;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i >= orders.size()) {
                b.pass = false;
                d << "missing step " << i + 1 << "; ";
                continue;
            }
            const double o = orders[i][column];
            const bool ok = std::abs(o - expected[i]) <= config.order_tolerance;
            b.pass = b.pass && ok;
            d << "step " << i + 1 << ": " << o << " vs " << expected[i] << (ok ? "" : " (out of band)") << "; ";
        }
        b.detail = d.str();
        bands.push_back(b);
    };
    check_orders(config.l2_orders, 0);
    check_orders(config.h1_orders, 1);

    if (!config.min_final_orders.empty()) {
        BandCheck b{run_label(run) + " final-step orders", true, ""};
        std::ostringstream d;
        const auto& last = orders.back();
        for (std::size_t c = 0; c < std::min<std::size_t>(4, config.min_final_orders.size()); ++c) {
            const bool ok = last[c] >= config.min_final_orders[c];
            b.pass = b.pass && ok;
            d << column_names[c] << " " << last[c] << " >= " << config.min_final_orders[c] << (ok ? "" : " (fail)")
              << "; ";
        }
        b.detail = d.str();
        bands.push_back(b);
    }

    if (!config.reference_errors.empty()) {
        BandCheck b{run_label(run) + " errors vs reference", true, ""};
        std::ostringstream d;
        for (std::size_t i = 0; i < run.levels.size(); ++i) {
            const auto e = error_columns(run.levels[i].errors);
            for (int c = 0; c < 4; ++c) {
                const std::size_t idx = 4 * i + c;
                if (idx >= config.reference_errors.size()) break;
                const double ref = config.reference_errors[idx];
                const double rel = (e[c] - ref) / ref;
                if (std::abs(rel) > config.error_tolerance) {
                    b.pass = false;
                    d << "level " << run.levels[i].level << " " << column_names[c] << ": " << e[c] << " vs " << ref
                      << " (" << std::lround(100 * rel) << "%); ";
                }
            }
        }
        b.detail = b.pass ? "all within " + std::to_string(std::lround(100 * config.error_tolerance)) + "%"
                          : d.str();
        bands.push_back(b);
    }
}

void check_level_bands(const ExperimentConfig& config, const MethodRun& run, std::vector<BandCheck>& bands) {
    for (const auto& l : run.levels) {
        const std::string where = run_label(run) + " level " + std::to_string(l.level);
        if (!l.ok()) {
            bands.push_back({where + " solve", false, l.failure});
            continue;
        }
        if (config.kind == ExperimentKind::diagnostics) continue;
        if (config.max_relative_error) {
            const auto r = error_columns(l.relative);
            const double worst = *std::max_element(r.begin(), r.end());
            bands.push_back({where + " relative error", worst <= *config.max_relative_error,
                             "max " + format_number(worst)});
        }
        if (config.max_compressibility && run.method == Method::mhm_gals)
            bands.push_back({where + " local compressibility", l.compressibility <= *config.max_compressibility,
                             format_number(l.compressibility)});
        if (run.method == Method::mhm_gals) {
            bands.push_back({where + " equilibrium", l.equilibrium <= 1e-10, format_number(l.equilibrium)});
            bands.push_back({where + " weak continuity", l.continuity <= 1e-9, format_number(l.continuity)});
        }
    }
}

const MethodRun* find_run(const std::vector<MethodRun>& runs, Method m, double nu) {
    for (const auto& r : runs)
        if (r.method == m && r.nu == nu) return &r;
    return nullptr;
}

void check_sweep_bands(const ExperimentConfig& config, const std::vector<MethodRun>& runs,
                       std::vector<BandCheck>& bands) {
    const auto [lo, hi] = std::minmax_element(config.nus.begin(), config.nus.end());
    for (Method m : config.methods) {
        const MethodRun* a = find_run(runs, m, *lo);
        const MethodRun* b = find_run(runs, m, *hi);
        if (!a || !b) continue;
        for (std::size_t i = 0; i < std::min(a->levels.size(), b->levels.size()); ++i) {
            const auto& la = a->levels[i];
            const auto& lb = b->levels[i];
            if (!la.ok() || !lb.ok()) continue;
            const std::string tag = to_string(m) + " level " + std::to_string(la.level);
            if (config.kind == ExperimentKind::nu_sweep) {
                const double ratio = lb.errors.displacement_h1 / la.errors.displacement_h1;
                const std::string detail = "H1 ratio nu=" + nu_label(*hi) + "/nu=" + nu_label(*lo) + " = " +
                                           format_number(ratio);
                const bool locking_free = m == Method::mhm_gals || m == Method::gals;
                if (locking_free && config.locking_free_max_ratio)
                    bands.push_back({tag + " locking-free ratio", ratio <= *config.locking_free_max_ratio, detail});
                else if (m == Method::std_galerkin && config.locking_min_ratio)
                    bands.push_back({tag + " locking ratio", ratio >= *config.locking_min_ratio, detail});
            } else if (config.kind == ExperimentKind::diagnostics && la.spectrum && lb.spectrum) {
                bands.push_back({tag + " lambda_min > 0", la.spectrum->pass && lb.spectrum->pass,
                                 format_number(la.spectrum->lambda_min) + ", " +
                                     format_number(lb.spectrum->lambda_min)});
                if (config.min_stability_ratio) {
                    const double ratio = lb.spectrum->lambda_min / la.spectrum->lambda_min;
                    const double reduced = lb.spectrum->lambda_min_without_hydrostatic /
                                           la.spectrum->lambda_min_without_hydrostatic;
                    bands.push_back({tag + " lambda_min ratio", ratio >= *config.min_stability_ratio,
                                     format_number(ratio) + " (without the normal-traction mode: " +
                                         format_number(reduced) + ")"});
                }
            }
        }
    }
}

nlohmann::json errors_json(const ErrorRecord& e) {
    return {{"l2", e.displacement_l2},       {"h1", e.displacement_h1},     {"stress", e.stress_l2},
            {"pressure", e.pressure_l2},     {"pressure_eps", e.pressure_eps}, {"pressure_h", e.pressure_h}};
}

std::string artifact_stem(const ExperimentConfig& config, const MethodRun& run) {
    return to_string(run.method) + "_k" + std::to_string(config.degree) + "_nu" + nu_label(run.nu);
}

void write_sweep_csv(std::ostream& out, const std::vector<MethodRun>& runs, Method method) {
    out << "H,nu,e0,e1,es,ep\n";
    for (const auto& r : runs) {
        if (r.method != method) continue;
        for (const auto& l : r.levels) {
            if (!l.ok()) continue;
            const auto e = error_columns(l.errors);
            out << format_number(l.size) << ',' << format_number(r.nu);
            for (double v : e) out << ',' << format_number(v);
            out << '\n';
        }
    }
}

void write_diagnostics_csv(std::ostream& out, const std::vector<MethodRun>& runs) {
    out << "method,H,nu,kernel_dim,lambda_min,lambda_min_no_normal_mode,inf_sup\n";
    for (const auto& r : runs)
        for (const auto& l : r.levels) {
            if (!l.ok() || !l.spectrum) continue;
            const auto& s = *l.spectrum;
            out << to_string(r.method) << ',' << format_number(l.size) << ',' << format_number(r.nu) << ','
                << s.kernel_dimension << ',' << format_number(s.lambda_min) << ','
                << format_number(s.lambda_min_without_hydrostatic) << ',' << format_number(s.inf_sup) << '\n';
        }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::h_convergence: return "h-convergence";
        case ExperimentKind::skeleton_convergence: return "skeleton-convergence";
        case ExperimentKind::nu_sweep: return "nu-sweep";
        case ExperimentKind::patch_test: return "patch-test";
        case ExperimentKind::diagnostics: return "diagnostics";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::h_convergence, ExperimentKind::skeleton_convergence, ExperimentKind::nu_sweep,
                   ExperimentKind::patch_test, ExperimentKind::diagnostics})
        if (to_string(k) == s) return k;
    throw Error("unknown experiment kind '" + s + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::mhm_gals: return "mhm-gals";
        case Method::mhm_ga: return "mhm-ga";
        case Method::std_galerkin: return "std-galerkin";
        case Method::gals: return "gals";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    for (auto m : {Method::mhm_gals, Method::mhm_ga, Method::std_galerkin, Method::gals})
        if (to_string(m) == s) return m;
    throw Error("unknown method '" + s + "'");
}

bool is_multiscale(Method method) { return method == Method::mhm_gals || method == Method::mhm_ga; }

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "kind") kind = experiment_kind_from_string(value);
    else if (key == "grid") grid = parse_int(key, value);
    else if (key == "mesh") mesh_file = value;
    else if (key == "degree") degree = parse_int(key, value);
    else if (key == "trace_degree") trace_degree = parse_int(key, value);
    else if (key == "levels") levels = parse_levels(key, value);
    else if (key == "depth_offset") depth_offset = parse_int(key, value);
    else if (key == "nu") nus = parse_doubles(key, value);
    else if (key == "methods") {
        methods.clear();
        for (const auto& m : split_list(value)) methods.push_back(method_from_string(m));
    } else if (key == "theta") theta = parse_double(key, value);
    else if (key == "out") output_dir = value;
    else if (key == "threads") threads = parse_int(key, value);
    else if (key == "override_wellposedness") override_wellposedness = parse_bool(key, value);
    else if (key == "l2_orders") l2_orders = parse_doubles(key, value);
    else if (key == "h1_orders") h1_orders = parse_doubles(key, value);
    else if (key == "order_tolerance") order_tolerance = parse_double(key, value);
    else if (key == "min_final_orders") min_final_orders = parse_doubles(key, value);
    else if (key == "reference_errors") reference_errors = parse_doubles(key, value);
    else if (key == "error_tolerance") error_tolerance = parse_double(key, value);
    else if (key == "max_relative_error") max_relative_error = parse_double(key, value);
    else if (key == "locking_free_max_ratio") locking_free_max_ratio = parse_double(key, value);
    else if (key == "locking_min_ratio") locking_min_ratio = parse_double(key, value);
    else if (key == "min_stability_ratio") min_stability_ratio = parse_double(key, value);
    else if (key == "max_compressibility") max_compressibility = parse_double(key, value);
    else throw Error("config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
    if (grid < 1) throw Error("config: grid must be >= 1");
    if (degree < 1 || trace_degree < 1) throw Error("config: degrees must be >= 1");
    if (degree > max_lagrange_degree) throw Error("config: degree above " + std::to_string(max_lagrange_degree));
    if (levels.empty()) throw Error("config: levels must be nonempty");
    for (int l : levels)
        if (l < 0) throw Error("config: levels must be non-negative");
    if (nus.empty()) throw Error("config: nu must be nonempty");
    for (double nu : nus)
        if (!(nu > 0.0 && nu < 0.5)) throw Error("config: nu values must lie in (0, 1/2)");
    if (methods.empty()) throw Error("config: methods must be nonempty");
    if (!(theta > 0.0 && theta < 1.0)) throw Error("config: theta must lie in (0, 1)");
    if (threads < 1) throw Error("config: threads must be >= 1");
    if (local_depth_for(degree, depth_offset) < 0) throw Error("config: depth_offset makes the local depth negative");
    if (kind == ExperimentKind::h_convergence && !mesh_file.empty())
        throw Error("config: h-convergence needs the structured grid");
    if (kind == ExperimentKind::diagnostics)
        for (Method m : methods)
            if (!is_multiscale(m)) throw Error("config: diagnostics apply to multiscale methods only");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(number) + ": expected key = value");
        try {
            base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error("config line " + std::to_string(number) + ": " + e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    return parse_config(in, std::move(base));
}

int local_depth_for(int degree, int depth_offset) { return std::max(0, 3 - degree) + depth_offset; }

bool ExperimentReport::passed() const {
    return std::all_of(bands.begin(), bands.end(), [](const BandCheck& b) { return b.pass; });
}

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", value);
    return buf;
}

LevelResult run_level(const ExperimentConfig& config, Method method, int level, double nu) {
    LevelResult out;
    out.level = level;
    const auto start = std::chrono::steady_clock::now();
    try {
        const ExactSolution exact = problem_for(config, nu);
        const bool bases_only = config.kind == ExperimentKind::diagnostics;
        CaseSolution sol = solve_case(config, method, level, exact, bases_only);
        out.alpha = sol.alpha;
        out.size = sol.size;
        if (sol.mhm) out.unsupported_regime = sol.mhm->unsupported_regime;
        if (bases_only) {
            out.spectrum = spectral_diagnostics(sol.mhm->system, sol.mhm->rigid_grams(), sol.mhm->skeleton.get());
        } else {
            out.errors = compute_errors(sol.patches, exact);
            const ErrorRecord norms = exact_norms(sol.patches, exact);
            out.relative.displacement_l2 = ratio_or_value(out.errors.displacement_l2, norms.displacement_l2);
            out.relative.displacement_h1 = ratio_or_value(out.errors.displacement_h1, norms.displacement_h1);
            out.relative.stress_l2 = ratio_or_value(out.errors.stress_l2, norms.stress_l2);
            out.relative.pressure_l2 = ratio_or_value(out.errors.pressure_l2, norms.pressure_l2);
            double worst = 0.0, scale = 0.0;
            for (const auto& r : compressibility_residual(sol.patches)) {
                worst = std::max(worst, std::abs(r.residual));
                scale = std::max(scale, r.scale);
            }
            out.compressibility = scale > 0.0 ? worst / scale : worst;
            if (sol.mhm) {
                out.equilibrium = sol.mhm->equilibrium;
                out.continuity = sol.mhm->continuity;
            }
        }
    } catch (const std::exception& e) {
        out.failure = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_convergence_csv(std::ostream& out, const MethodRun& run, const std::string& size_label) {
    out << size_label << ",e0,ord,e1,ord,es,ord,ep,ord\n";
    const LevelResult* prev = nullptr;
    for (const auto& l : run.levels) {
        if (!l.ok()) {
            prev = nullptr;
            continue;
        }
        const auto e = error_columns(l.errors);
        out << format_number(l.size);
        for (int c = 0; c < 4; ++c) {
            out << ',' << format_number(e[c]) << ',';
            if (prev) out << format_number(std::log2(error_columns(prev->errors)[c] / e[c]));
        }
        out << '\n';
        prev = &l;
    }
}

ExperimentReport run_experiment(const ExperimentConfig& config, bool write_artifacts, std::ostream* log) {
    config.validate();
    ExperimentReport report;
    report.config = config;
    std::ostringstream run_log;
    auto note = [&](const std::string& line) {
        run_log << line << '\n';
        if (log) *log << line << std::endl;
    };
    note("experiment " + to_string(config.kind) + ": grid " + std::to_string(config.grid) + ", k=" +
         std::to_string(config.degree) + ", l=" + std::to_string(config.trace_degree) + ", theta " +
         format_number(config.theta) + ", threads " + std::to_string(config.threads));

    for (Method m : config.methods)
        for (double nu : config.nus) {
            MethodRun run;
            run.method = m;
            run.nu = nu;
            for (int level : config.levels) {
                LevelResult l = run_level(config, m, level, nu);
                std::ostringstream line;
                line << run_label(run) << " level " << level << ": ";
                if (!l.ok()) {
                    line << "FAILED: " << l.failure;
                } else if (l.spectrum) {
                    line << "H " << l.size << " lambda_min " << l.spectrum->lambda_min << " inf_sup "
                         << l.spectrum->inf_sup;
                } else {
                    const auto e = error_columns(l.errors);
                    line << "size " << l.size << " errors " << e[0] << ' ' << e[1] << ' ' << e[2] << ' ' << e[3];
                }
                if (l.unsupported_regime) line << " [unsupported regime]";
                line << " (" << l.seconds << " s)";
                note(line.str());
                run.levels.push_back(std::move(l));
            }
            report.runs.push_back(std::move(run));
        }

    for (const auto& run : report.runs) {
        check_level_bands(config, run, report.bands);
        if (config.kind == ExperimentKind::h_convergence || config.kind == ExperimentKind::skeleton_convergence ||
            config.kind == ExperimentKind::patch_test)
            check_convergence_bands(config, run, report.bands);
    }
    if (config.kind == ExperimentKind::nu_sweep || config.kind == ExperimentKind::diagnostics)
        check_sweep_bands(config, report.runs, report.bands);

    for (const auto& b : report.bands) note(std::string(b.pass ? "PASS " : "FAIL ") + b.name + ": " + b.detail);
    note(report.passed() ? "all bands passed" : "some bands failed");

    if (!write_artifacts) return report;
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    auto path = [&](const std::string& name) { return (fs::path(config.output_dir) / name).string(); };
    auto emit = [&](const std::string& name, auto&& writer) {
        const std::string p = path(name);
        std::ofstream out(p);
        if (!out) throw Error("cannot write " + p);
        writer(out);
        report.artifacts.push_back(p);
    };

    const std::string size_label = config.kind == ExperimentKind::h_convergence ? "h" : "H";
    if (config.kind == ExperimentKind::nu_sweep) {
        for (Method m : config.methods)
            emit(to_string(m) + "_k" + std::to_string(config.degree) + "_nu-sweep.csv",
                 [&](std::ostream& o) { write_sweep_csv(o, report.runs, m); });
    } else if (config.kind == ExperimentKind::diagnostics) {
        emit("diagnostics_k" + std::to_string(config.degree) + ".csv",
             [&](std::ostream& o) { write_diagnostics_csv(o, report.runs); });
    } else {
        for (const auto& run : report.runs)
            emit(artifact_stem(config, run) + ".csv",
                 [&](std::ostream& o) { write_convergence_csv(o, run, size_label); });
    }

    nlohmann::json summary;
    summary["kind"] = to_string(config.kind);
    summary["grid"] = config.grid;
    summary["degree"] = config.degree;
    summary["trace_degree"] = config.trace_degree;
    summary["theta"] = config.theta;
    summary["levels"] = config.levels;
    summary["nu"] = config.nus;
    summary["passed"] = report.passed();
    for (const auto& run : report.runs) {
        nlohmann::json r;
        r["method"] = to_string(run.method);
        r["nu"] = run.nu;
        for (const auto& l : run.levels) {
            nlohmann::json j;
            j["level"] = l.level;
            j["size"] = l.size;
            j["alpha"] = l.alpha;
            j["seconds"] = l.seconds;
            if (l.unsupported_regime) j["regime"] = "unsupported regime";
            if (!l.ok()) {
                j["failure"] = l.failure;
            } else if (l.spectrum) {
                j["lambda_min"] = l.spectrum->lambda_min;
                j["lambda_min_without_normal_mode"] = l.spectrum->lambda_min_without_hydrostatic;
                j["inf_sup"] = l.spectrum->inf_sup;
                j["kernel_dimension"] = l.spectrum->kernel_dimension;
            } else {
                j["errors"] = errors_json(l.errors);
                j["relative_errors"] = errors_json(l.relative);
                j["compressibility"] = l.compressibility;
                if (is_multiscale(run.method)) {
                    j["equilibrium"] = l.equilibrium;
                    j["continuity"] = l.continuity;
                }
            }
            r["levels"].push_back(j);
        }
        if (all_ok(run) && run.levels.size() > 1 && !run.levels.front().spectrum) {
            for (const auto& o : orders_of(run))
                r["orders"].push_back({{"l2", o[0]}, {"h1", o[1]}, {"stress", o[2]}, {"pressure", o[3]}});
        }
        summary["runs"].push_back(r);
    }
    for (const auto& b : report.bands) summary["bands"].push_back({{"name", b.name}, {"pass", b.pass}, {"detail", b.detail}});
    emit("summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    emit("run.log", [&](std::ostream& o) { o << run_log.str(); });
    return report;
}

std::vector<std::string> export_fields(const ExperimentConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    const ExactSolution exact = problem_for(config, config.nus.front());
    CaseSolution sol = solve_case(config, config.methods.front(), config.levels.front(), exact, false);
    std::vector<std::string> written;
    const std::string fields = (fs::path(config.output_dir) / "fields.csv").string();
    {
        std::ofstream out(fields);
        if (!out) throw Error("cannot write " + fields);
        write_fields_csv(out, sol.patches);
    }
    written.push_back(fields);
    if (sol.mhm) {
        const std::string traction = (fs::path(config.output_dir) / "traction.csv").string();
        std::ofstream out(traction);
        if (!out) throw Error("cannot write " + traction);
        write_traction_csv(out, *sol.mhm->skeleton, sol.mhm->global.traction);
        written.push_back(traction);
    }
    return written;
}

}  // namespace mhm
