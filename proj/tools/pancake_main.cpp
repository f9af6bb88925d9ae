// Batch front-end: single runs, R/speed sweeps, speed vetting and the exact
// oracle surface. Artifacts are deterministic: fixed iteration order, fixed
// checker seed (recorded in meta.json), %.12e formatting throughout.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "pancake/diagnostics.hpp"
#include "pancake/io.hpp"

namespace fs = std::filesystem;
using namespace pancake;

namespace {

constexpr std::uint64_t kCheckerSeed = 20260810ull;

struct RunSpec {
    std::string speed_id = "mean";
    int n = 2;
    std::string seed = "oval:8";
    FlowConfig flow;
    std::string monitors = "all";
    std::string out_dir;
    bool force = false;
};

std::string default_out_root() {
    if (const char* env = std::getenv("PANCAKE_OUT")) return env;
    return "out";
}

std::string sanitize(std::string s) {
    for (auto& c : s) {
        if (c == ':' || c == ',' || c == '/' || c == ' ') c = '_';
    }
    return s;
}

Trajectory execute_run(const RunSpec& spec, const SpeedFunction& speed) {
    if (spec.seed.rfind("oval:", 0) == 0) {
        const double R = std::stod(spec.seed.substr(5));
        return evolve_from_oval(R, speed, spec.flow);
    }
    if (spec.seed.rfind("circle:", 0) == 0) {
        const double r0 = std::stod(spec.seed.substr(7));
        return run(circle_profile(r0, spec.flow.N, spec.n), speed, spec.flow, spec.seed);
    }
    std::string path = spec.seed;
    if (path.rfind("file:", 0) == 0) path = path.substr(5);
    SupportProfile prof = read_profile_csv(path, spec.n);
    FlowConfig cfg = spec.flow;
    cfg.N = prof.N;
    return run(prof, speed, cfg, "file:" + path);
}

MonitorSuite filter_monitors(MonitorSuite suite, const std::string& wanted) {
    if (wanted == "all") return suite;
    std::vector<std::string> names;
    std::stringstream ss(wanted);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
    MonitorSuite out;
    for (auto& b : suite.bounds) {
        if (std::find(names.begin(), names.end(), b.name) != names.end()) {
            out.bounds.push_back(std::move(b));
        }
    }
    out.fits = std::move(suite.fits);
    out.all_pass = true;
    for (const auto& b : out.bounds) {
        if (b.applicable && !b.pass) out.all_pass = false;
    }
    return out;
}

void print_suite(const MonitorSuite& suite) {
    std::printf("%-26s %-6s %14s %12s\n", "monitor", "pass", "worst_margin", "slack");
    for (const auto& b : suite.bounds) {
        if (!b.applicable) {
            std::printf("%-26s %-6s %14s %12s  (%s)\n", b.name.c_str(), "n/a", "-", "-",
                        b.note.c_str());
            continue;
        }
        std::printf("%-26s %-6s %14.6e %12.4e\n", b.name.c_str(), b.pass ? "pass" : "FAIL",
                    b.worst_margin, b.slack_used);
    }
    for (const auto& f : suite.fits) {
        std::printf("fit %-30s ", f.model.c_str());
        if (f.coefficients.size() >= 2) {
            std::printf("coeffs = %.6g, %.6g  (target %s)\n", f.coefficients[0],
                        f.coefficients[1], f.target.c_str());
        } else {
            std::printf("unavailable: %s\n", f.note.c_str());
        }
    }
}

struct RunResult {
    bool ok = false;
    double T_ext = 0.0;
    double fitted_phidot1 = std::numeric_limits<double>::quiet_NaN();
    double fitted_C = std::numeric_limits<double>::quiet_NaN();
    double worst_margin = std::numeric_limits<double>::infinity();
    bool all_pass = false;
    std::string error;
};

RunResult run_and_emit(const RunSpec& spec, bool quiet = false) {
    RunResult result;
    try {
        const SpeedFunction speed = make_speed(spec.speed_id, spec.n);
        if (!spec.force) {
            const AdmissibilityReport rep = check_admissible(speed, {.seed = kCheckerSeed});
            if (!rep.all_pass) {
                std::string bad;
                for (const auto& c : rep.conditions) {
                    if (!c.pass) bad += (bad.empty() ? "" : ", ") + c.name;
                }
                result.error = "speed '" + spec.speed_id + "' rejected by the checker (" + bad +
                               "); use --force to run anyway";
                return result;
            }
        }

        const Trajectory traj = execute_run(spec, speed);
        MonitorSuite suite = filter_monitors(run_all_monitors(traj, speed), spec.monitors);

        const fs::path dir = spec.out_dir.empty()
                                 ? fs::path(default_out_root()) /
                                       (sanitize(spec.speed_id) + "_" + sanitize(spec.seed) +
                                        "_N" + std::to_string(spec.flow.N))
                                 : fs::path(spec.out_dir);
        fs::create_directories(dir);
        write_meta_json(dir / "meta.json", traj, kCheckerSeed);
        write_frames_csv(dir / "frames.csv", traj, speed);
        write_diagnostics_csv(dir / "diagnostics.csv", traj);
        write_bounds_json(dir / "bounds.json", suite);
        write_profiles_svg(dir / "profiles.svg", traj);
        write_margins_svg(dir / "margins.svg", suite);
        for (const auto& f : suite.fits) {
            if (f.model.rfind("A/(2 pi)", 0) == 0 && f.coefficients.size() == 2) {
                write_area_fit_svg(dir / "area_fit.svg", traj, f);
                result.fitted_phidot1 = f.coefficients[0];
                result.fitted_C = f.coefficients[1];
            }
        }
        for (const auto& b : suite.bounds) {
            if (b.applicable) result.worst_margin = std::min(result.worst_margin, b.worst_margin);
        }

        if (!quiet) {
            std::printf("T_ext = %.6f   (steps: %ld, records: %zu)\n", traj.T_ext,
                        traj.total_steps, traj.records.size());
            print_suite(suite);
            std::printf("artifacts: %s\n", dir.string().c_str());
        }
        result.ok = true;
        result.T_ext = traj.T_ext;
        result.all_pass = suite.all_pass;
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    return result;
}

void add_flow_options(CLI::App* cmd, RunSpec& spec, std::string& scheme, std::string& diff) {
    cmd->add_option("--N", spec.flow.N, "grid size (multiple of 4)");
    cmd->add_option("--cfl", spec.flow.cfl, "CFL number in (0, 0.5]");
    cmd->add_option("--scheme", scheme, "explicit-rk2 | semi-implicit");
    cmd->add_flag_callback(
        "--no-symmetry", [&spec] { spec.flow.symmetry_enforce = false; },
        "disable the reflection-symmetry projection");
    cmd->add_option("--stop-kappa", spec.flow.stop_kappa, "stop when max kappa exceeds this");
    cmd->add_option("--stop-area", spec.flow.stop_area, "stop when the area falls below this");
    cmd->add_option("--record-every", spec.flow.record_every, "diagnostics stride in steps");
    cmd->add_option("--diff", diff, "fd4 | spectral");
    cmd->add_option("--pole-band", spec.flow.pole_band, "pole blend band in grid spacings");
    cmd->add_option("--max-steps", spec.flow.max_steps, "step budget");
    cmd->add_flag("--allow-unpinched", spec.flow.allow_unpinched,
                  "run initial data violating kappa >= lambda (kappa/lambda monitors disabled)");
}

void finish_flow_options(RunSpec& spec, const std::string& scheme, const std::string& diff) {
    if (scheme == "semi-implicit") {
        spec.flow.scheme = Scheme::semi_implicit;
    } else if (scheme == "explicit-rk2") {
        spec.flow.scheme = Scheme::explicit_rk2;
    } else {
        throw CLI::ValidationError("--scheme must be explicit-rk2 or semi-implicit");
    }
    if (diff == "spectral") {
        spec.flow.diff_backend = DiffBackend::spectral;
    } else if (diff == "fd4") {
        spec.flow.diff_backend = DiffBackend::fd4;
    } else {
        throw CLI::ValidationError("--diff must be fd4 or spectral");
    }
    if (!(spec.flow.cfl > 0.0 && spec.flow.cfl <= 0.5)) {
        throw CLI::ValidationError("--cfl must lie in (0, 0.5]");
    }
    if (spec.flow.N < 8 || spec.flow.N % 4 != 0) {
        throw CLI::ValidationError("--N must be a multiple of 4");
    }
}

// Config file values act as defaults; explicit flags override them.
void apply_config_file(const std::string& path, RunSpec& spec, std::string& scheme,
                       std::string& diff) {
    const auto kv = read_config_file(path);
    auto get = [&kv](const std::string& key) -> const std::string* {
        if (auto it = kv.find(key); it != kv.end()) return &it->second;
        return nullptr;
    };
    if (auto* v = get("run.speed")) spec.speed_id = *v;
    if (auto* v = get("run.n")) spec.n = std::stoi(*v);
    if (auto* v = get("run.seed")) spec.seed = *v;
    if (auto* v = get("run.monitors")) spec.monitors = *v;
    if (auto* v = get("run.out")) spec.out_dir = *v;
    if (auto* v = get("flow.N")) spec.flow.N = std::stoi(*v);
    if (auto* v = get("flow.cfl")) spec.flow.cfl = std::stod(*v);
    if (auto* v = get("flow.scheme")) scheme = *v;
    if (auto* v = get("flow.symmetry_enforce")) spec.flow.symmetry_enforce = (*v == "true");
    if (auto* v = get("flow.stop_kappa")) spec.flow.stop_kappa = std::stod(*v);
    if (auto* v = get("flow.stop_area")) spec.flow.stop_area = std::stod(*v);
    if (auto* v = get("flow.record_every")) spec.flow.record_every = std::stoi(*v);
    if (auto* v = get("flow.diff")) diff = *v;
    if (auto* v = get("flow.pole_band")) spec.flow.pole_band = std::stod(*v);
}

int cmd_check_speed(const std::string& id, int n, int samples, std::uint64_t seed, bool as_json) {
    SpeedFunction speed;
    try {
        speed = make_speed(id, n);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    ProbeConfig probe;
    probe.samples = samples;
    probe.seed = seed;
    const AdmissibilityReport rep = check_admissible(speed, probe);
    if (as_json) {
        std::cout << admissibility_report_json(rep) << "\n";
    } else {
        std::printf("speed %s (n = %d), checker seed %llu\n", rep.speed.c_str(), rep.n,
                    static_cast<unsigned long long>(rep.seed));
        for (const auto& c : rep.conditions) {
            std::printf("  (%c) %-18s %-6s worst violation %.3e",
                        static_cast<char>('a' + (&c - rep.conditions.data())), c.name.c_str(),
                        c.pass ? "pass" : "FAIL", c.worst_violation);
            if (!c.pass && !c.witness.empty()) {
                std::printf("  witness (");
                for (size_t i = 0; i < c.witness.size(); ++i) {
                    std::printf("%s%.4g", i ? ", " : "", c.witness[i]);
                }
                std::printf(")");
            }
            if (!c.detail.empty()) std::printf("  [%s]", c.detail.c_str());
            std::printf("\n");
        }
        std::printf("verdict: %s\n", rep.all_pass ? "admissible (non-degenerate)" : "rejected");
    }
    return rep.all_pass ? 0 : 1;
}

int cmd_oracle(const std::string& what, double t, double r0, const std::string& speed_id, int n,
               double x) {
    if (what == "circle") {
        const SpeedFunction speed = make_speed(speed_id, n);
        const double phi1 = eval_reduced(speed, 1.0, 1.0);
        std::printf("circle under %s (n = %d): phi1 = %.12g\n", speed_id.c_str(), n, phi1);
        std::printf("  r(t)  = sqrt(r0^2 - 2 phi1 t),  r0 = %.12g\n", r0);
        std::printf("  T_ext = r0^2/(2 phi1) = %.12g\n", r0 * r0 / (2.0 * phi1));
        if (t > 0.0 && 2.0 * phi1 * t < r0 * r0) {
            const double r = std::sqrt(r0 * r0 - 2.0 * phi1 * t);
            std::printf("  at t = %.6g: r = %.12g, A = %.12g\n", t, r, std::numbers::pi * r * r);
        }
        return 0;
    }
    if (what == "oval") {
        if (!(t < 0.0)) {
            std::cerr << "the oval needs t < 0\n";
            return 2;
        }
        std::printf("Angenent oval at t = %.6g:\n", t);
        std::printf("  a^2    = %.12e\n", oval_a2(t));
        std::printf("  h(t)   = %.12g   (arccos e^t; <= pi/2 = %.12g)\n", oval_h(t),
                    std::numbers::pi / 2);
        std::printf("  ell(t) = %.12g   (in [-t, -t + log 2] = [%.12g, %.12g])\n", oval_ell(t),
                    -t, -t + std::log(2.0));
        std::printf("  A(t)   = %.12g   (= -2 pi t)\n", -2.0 * std::numbers::pi * t);
        std::printf("  kappa range [%.6e, %.6e]\n", std::sqrt(oval_a2(t)),
                    std::sqrt(1.0 + oval_a2(t)));
        double worst = 0.0;
        for (int j = 0; j < 512; ++j) {
            const auto p = oval_point(2.0 * std::numbers::pi * j / 512, t);
            worst = std::max(worst,
                             std::fabs(std::cos(p[0]) - std::exp(t) * std::cosh(p[1])));
        }
        std::printf("  max |cos x - e^t cosh y| over 512 nodes = %.3e\n", worst);
        return 0;
    }
    if (what == "grim") {
        std::printf("Grim reaper y = t + log sec x at t = %.6g:\n", t);
        for (double xi : {0.0, 0.5, 1.0, x}) {
            if (std::fabs(xi) < std::numbers::pi / 2) {
                std::printf("  y(%.4g) = %.12g\n", xi, t - std::log(std::cos(xi)));
            }
        }
        return 0;
    }
    std::cerr << "--what must be circle, oval or grim\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature-flow laboratory for O(n)-invariant convex profiles"};
    app.require_subcommand(1);

    // ---- run ----
    RunSpec spec;
    std::string scheme = "explicit-rk2", diff = "fd4", config_path;
    auto* cmd_run = app.add_subcommand("run", "integrate one seed to extinction and monitor it");
    cmd_run->add_option("--config", config_path, "config file (key = value with [run]/[flow])");
    cmd_run->add_option("--speed", spec.speed_id, "speed id: mean | pr:<r> | gauss-root | mix:...");
    cmd_run->add_option("--n", spec.n, "number of principal curvatures (>= 2)");
    cmd_run->add_option("--seed", spec.seed, "oval:<R> | circle:<r0> | file:<path>");
    cmd_run->add_option("--monitors", spec.monitors, "comma list of monitor names or 'all'");
    cmd_run->add_option("--out", spec.out_dir, "artifact directory");
    cmd_run->add_flag("--force", spec.force, "run even if the admissibility checker rejects");
    add_flow_options(cmd_run, spec, scheme, diff);

    // ---- sweep ----
    RunSpec tmpl;
    std::string sweep_scheme = "explicit-rk2", sweep_diff = "fd4";
    std::string r_list, speed_list, sweep_out;
    int jobs = 2;
    auto* cmd_sweep = app.add_subcommand("sweep", "run a family of seeds/speeds in parallel");
    cmd_sweep->add_option("--speed", tmpl.speed_id, "speed id for R sweeps");
    cmd_sweep->add_option("--n", tmpl.n, "number of principal curvatures");
    cmd_sweep->add_option("--R", r_list, "comma list of oval seeds, e.g. 2,4,8");
    cmd_sweep->add_option("--speeds", speed_list, "comma list of speed ids (fixed R)");
    cmd_sweep->add_option("--R0", tmpl.seed, "seed used with --speeds (default oval:8)");
    cmd_sweep->add_option("--jobs", jobs, "worker pool size");
    cmd_sweep->add_option("--out", sweep_out, "sweep output root");
    add_flow_options(cmd_sweep, tmpl, sweep_scheme, sweep_diff);

    // ---- check-speed ----
    std::string cs_id = "mean";
    int cs_n = 2, cs_samples = 200;
    std::uint64_t cs_seed = kCheckerSeed;
    bool cs_json = false;
    auto* cmd_cs = app.add_subcommand("check-speed", "vet a speed against conditions (a)-(e)");
    cmd_cs->add_option("speed", cs_id, "registry id")->required();
    cmd_cs->add_option("--n", cs_n, "number of principal curvatures");
    cmd_cs->add_option("--samples", cs_samples, "probe sample count");
    cmd_cs->add_option("--seed", cs_seed, "probe RNG seed");
    cmd_cs->add_flag("--json", cs_json, "emit the report as JSON");

    // ---- oracle ----
    std::string or_what = "oval", or_speed = "mean";
    double or_t = -4.0, or_r0 = 1.0, or_x = 0.3;
    int or_n = 2;
    auto* cmd_or = app.add_subcommand("oracle", "print exact circle/oval/Grim reference values");
    cmd_or->add_option("--what", or_what, "circle | oval | grim");
    cmd_or->add_option("--t", or_t, "time (negative for the oval)");
    cmd_or->add_option("--r0", or_r0, "circle initial radius");
    cmd_or->add_option("--speed", or_speed, "speed id (for the circle law)");
    cmd_or->add_option("--n", or_n, "number of principal curvatures");
    cmd_or->add_option("--x", or_x, "sample abscissa for the Grim profile");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_run->parsed()) {
            if (!config_path.empty()) {
                RunSpec from_file;
                std::string fscheme = scheme, fdiff = diff;
                apply_config_file(config_path, from_file, fscheme, fdiff);
                // flags that were provided explicitly win over the file
                if (cmd_run->count("--speed") == 0) spec.speed_id = from_file.speed_id;
                if (cmd_run->count("--n") == 0) spec.n = from_file.n;
                if (cmd_run->count("--seed") == 0) spec.seed = from_file.seed;
                if (cmd_run->count("--monitors") == 0) spec.monitors = from_file.monitors;
                if (cmd_run->count("--out") == 0 && !from_file.out_dir.empty())
                    spec.out_dir = from_file.out_dir;
                if (cmd_run->count("--N") == 0) spec.flow.N = from_file.flow.N;
                if (cmd_run->count("--cfl") == 0) spec.flow.cfl = from_file.flow.cfl;
                if (cmd_run->count("--scheme") == 0) scheme = fscheme;
                if (cmd_run->count("--stop-kappa") == 0)
                    spec.flow.stop_kappa = from_file.flow.stop_kappa;
                if (cmd_run->count("--stop-area") == 0)
                    spec.flow.stop_area = from_file.flow.stop_area;
                if (cmd_run->count("--record-every") == 0)
                    spec.flow.record_every = from_file.flow.record_every;
                if (cmd_run->count("--diff") == 0) diff = fdiff;
                if (cmd_run->count("--pole-band") == 0)
                    spec.flow.pole_band = from_file.flow.pole_band;
            }
            finish_flow_options(spec, scheme, diff);
            const RunResult res = run_and_emit(spec);
            if (!res.ok) {
                std::cerr << "error: " << res.error << "\n";
                return 2;
            }
            return res.all_pass ? 0 : 1;
        }

        if (cmd_sweep->parsed()) {
            finish_flow_options(tmpl, sweep_scheme, sweep_diff);
            std::vector<RunSpec> members;
            if (!r_list.empty()) {
                std::stringstream ss(r_list);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    RunSpec m = tmpl;
                    m.seed = "oval:" + item;
                    members.push_back(m);
                }
            } else if (!speed_list.empty()) {
                std::stringstream ss(speed_list);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    RunSpec m = tmpl;
                    m.speed_id = item;
                    if (m.seed.empty()) m.seed = "oval:8";
                    members.push_back(m);
                }
            }
            if (members.empty()) {
                std::cerr << "usage error: sweep needs --R or --speeds\n";
                return 2;
            }
            const fs::path root = sweep_out.empty() ? fs::path(default_out_root()) / "sweep"
                                                    : fs::path(sweep_out);
            fs::create_directories(root);
            for (auto& m : members) {
                m.out_dir =
                    (root / (sanitize(m.speed_id) + "_" + sanitize(m.seed))).string();
            }

            std::vector<RunResult> results(members.size());
            std::atomic<size_t> next{0};
            auto worker = [&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= members.size()) break;
                    results[i] = run_and_emit(members[i], /*quiet=*/true);
                }
            };
            std::vector<std::thread> pool;
            for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
            for (auto& th : pool) th.join();

            std::ofstream csv(root / "sweep.csv");
            csv << "speed,seed,N,T_ext,fitted_phidot1,fitted_C,worst_margin,all_pass,error\n";
            for (size_t i = 0; i < members.size(); ++i) {
                const auto& m = members[i];
                const auto& r = results[i];
                csv << m.speed_id << ',' << m.seed << ',' << m.flow.N << ','
                    << format_num(r.T_ext) << ',' << format_num(r.fitted_phidot1) << ','
                    << format_num(r.fitted_C) << ',' << format_num(r.worst_margin) << ','
                    << (r.all_pass ? "true" : "false") << ',' << r.error << '\n';
            }
            std::printf("%-10s %-12s %10s %16s %12s %s\n", "speed", "seed", "T_ext",
                        "fitted_phidot1", "fitted_C", "status");
            double prev_c = std::numeric_limits<double>::quiet_NaN();
            for (size_t i = 0; i < members.size(); ++i) {
                const auto& r = results[i];
                std::printf("%-10s %-12s %10.4f %16.4f %12.4f %s", members[i].speed_id.c_str(),
                            members[i].seed.c_str(), r.T_ext, r.fitted_phidot1, r.fitted_C,
                            r.ok ? (r.all_pass ? "ok" : "monitor-fail") : r.error.c_str());
                if (!std::isnan(prev_c) && !std::isnan(r.fitted_C)) {
                    std::printf("   dC = %+.4f", r.fitted_C - prev_c);
                }
                prev_c = r.fitted_C;
                std::printf("\n");
            }
            std::printf("sweep artifacts: %s\n", root.string().c_str());
            bool ok = true;
            for (const auto& r : results) ok = ok && r.ok;
            return ok ? 0 : 1;
        }

        if (cmd_cs->parsed()) return cmd_check_speed(cs_id, cs_n, cs_samples, cs_seed, cs_json);
        if (cmd_or->parsed()) return cmd_oracle(or_what, or_t, or_r0, or_speed, or_n, or_x);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
