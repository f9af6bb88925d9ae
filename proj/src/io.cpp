#include "pancake/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pancake {

using nlohmann::json;

std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void profile_rows(std::ostream& out, const SupportProfile& profile, const SpeedFunction& speed,
                  const CurvatureOptions& opts, const std::string& prefix) {
    const CurvatureData cd = curvatures_from_support(profile, speed, opts);
    const ProfileCurve curve = embed(profile, opts);
    for (int j = 0; j < profile.N; ++j) {
        out << prefix << format_num(curve.theta[j]) << ',' << format_num(profile.sigma[j]) << ','
            << format_num(curve.points[j][0]) << ',' << format_num(curve.points[j][1]) << ','
            << format_num(cd.kappa[j]) << ',' << format_num(cd.lambda[j]) << ','
            << format_num(cd.phi[j]) << '\n';
    }
}

}  // namespace

void write_profile_csv(const std::filesystem::path& path, const SupportProfile& profile,
                       const SpeedFunction& speed, const CurvatureOptions& opts) {
    auto out = open_out(path);
    out << "theta,sigma,x,y,kappa,lambda,phi\n";
    profile_rows(out, profile, speed, opts, "");
}

void write_frames_csv(const std::filesystem::path& path, const Trajectory& traj,
                      const SpeedFunction& speed, int max_frames) {
    auto out = open_out(path);
    out << "frame,t_sim,t,theta,sigma,x,y,kappa,lambda,phi\n";
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    const size_t total = traj.frames.size();
    const size_t stride = std::max<size_t>(1, (total + max_frames - 1) / max_frames);
    for (size_t k = 0; k < total; k += stride) {
        const size_t idx = std::min(k, total - 1);
        std::ostringstream prefix;
        prefix << idx << ',' << format_num(traj.frames[idx].t) << ','
               << format_num(traj.records[idx].t) << ',';
        profile_rows(out, traj.frames[idx], speed, opts, prefix.str());
    }
    if ((total - 1) % stride != 0) {  // always include the final frame
        std::ostringstream prefix;
        prefix << (total - 1) << ',' << format_num(traj.frames.back().t) << ','
               << format_num(traj.records.back().t) << ',';
        profile_rows(out, traj.frames.back(), speed, opts, prefix.str());
    }
}

void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t,h,ell,A,rin,rout,phi_min,phi_max,min_kappa_minus_lambda,max_ratio,"
           "lambda_integral,lambda2_over_kappa_integral,tip_grim_dist,area_rate_residual\n";
    for (const auto& r : traj.records) {
        out << format_num(r.t) << ',' << format_num(r.h) << ',' << format_num(r.ell) << ','
            << format_num(r.A) << ',' << format_num(r.rin) << ',' << format_num(r.rout) << ','
            << format_num(r.phi_min) << ',' << format_num(r.phi_max) << ','
            << format_num(r.min_kappa_minus_lambda) << ',' << format_num(r.max_ratio) << ','
            << format_num(r.lambda_integral) << ',' << format_num(r.lambda2_over_kappa_integral)
            << ',' << format_num(r.tip_grim_dist) << ',' << format_num(r.area_rate_residual)
            << '\n';
    }
}

void write_meta_json(const std::filesystem::path& path, const Trajectory& traj,
                     std::uint64_t checker_seed) {
    json j;
    j["speed_id"] = traj.speed_id;
    j["n"] = traj.n;
    j["T_ext"] = traj.T_ext;
    j["seed_id"] = traj.seed_id;
    j["total_steps"] = traj.total_steps;
    j["checker_seed"] = checker_seed;
    if (traj.oval_seeded()) j["oval_R"] = traj.oval_R;
    json cfg;
    cfg["N"] = traj.config.N;
    cfg["cfl"] = traj.config.cfl;
    cfg["scheme"] = traj.config.scheme == Scheme::explicit_rk2 ? "explicit-rk2" : "semi-implicit";
    cfg["symmetry_enforce"] = traj.config.symmetry_enforce;
    cfg["stop_kappa"] = traj.config.stop_kappa;
    cfg["stop_area"] = traj.config.stop_area;
    cfg["record_every"] = traj.config.record_every;
    cfg["diff_backend"] = traj.config.diff_backend == DiffBackend::fd4 ? "fd4" : "spectral";
    cfg["pole_band"] = traj.config.pole_band;
    cfg["allow_unpinched"] = traj.config.allow_unpinched;
    j["config"] = cfg;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

namespace {

json bound_to_json(const BoundReport& b) {
    json j;
    j["name"] = b.name;
    j["kind"] = "bound";
    j["frames_checked"] = b.frames_checked;
    j["worst_margin"] = b.worst_margin;
    j["witness_time"] = b.witness_time;
    j["pass"] = b.pass;
    j["slack_used"] = b.slack_used;
    j["applicable"] = b.applicable;
    if (!b.note.empty()) j["note"] = b.note;
    return j;
}

json fit_to_json(const AsymptoticFit& f) {
    json j;
    j["kind"] = "fit";
    j["model"] = f.model;
    j["window"] = {f.window[0], f.window[1]};
    j["coefficients"] = f.coefficients;
    j["stderrs"] = f.stderrs;
    j["target"] = f.target;
    j["residual_norm"] = f.residual_norm;
    if (!f.note.empty()) j["note"] = f.note;
    return j;
}

}  // namespace

void write_bounds_json(const std::filesystem::path& path, const MonitorSuite& suite) {
    json arr = json::array();
    for (const auto& b : suite.bounds) arr.push_back(bound_to_json(b));
    for (const auto& f : suite.fits) arr.push_back(fit_to_json(f));
    json j;
    j["all_pass"] = suite.all_pass;
    j["reports"] = arr;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

std::string admissibility_report_json(const AdmissibilityReport& report) {
    json j;
    j["speed"] = report.speed;
    j["n"] = report.n;
    j["seed"] = report.seed;
    j["all_pass"] = report.all_pass;
    json conds = json::array();
    for (const auto& c : report.conditions) {
        json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["worst_violation"] = c.worst_violation;
        cj["witness"] = c.witness;
        if (!c.detail.empty()) cj["detail"] = c.detail;
        conds.push_back(cj);
    }
    j["conditions"] = conds;
    return j.dump(2);
}

SupportProfile read_profile_csv(const std::filesystem::path& path, int n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty profile file");
    // locate theta,sigma columns in the header
    int theta_col = -1, sigma_col = -1, col = 0;
    {
        std::stringstream hs(line);
        std::string name;
        while (std::getline(hs, name, ',')) {
            if (name == "theta") theta_col = col;
            if (name == "sigma") sigma_col = col;
            ++col;
        }
    }
    if (sigma_col < 0) throw std::runtime_error("profile file needs a sigma column");
    SupportProfile prof;
    prof.n = n;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        int c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c == sigma_col) prof.sigma.push_back(std::stod(cell));
            ++c;
        }
    }
    prof.N = static_cast<int>(prof.sigma.size());
    if (prof.N < 8 || prof.N % 4 != 0) {
        throw std::runtime_error("profile grid size must be a multiple of 4");
    }
    (void)theta_col;
    return prof;
}

// ---- SVG ------------------------------------------------------------------

namespace {

struct SvgCanvas {
    double xmin, xmax, ymin, ymax;
    int w = 900, h = 600;
    std::ostringstream body;

    double px(double x) const { return (x - xmin) / (xmax - xmin) * (w - 80) + 40; }
    double py(double y) const { return h - 40 - (y - ymin) / (ymax - ymin) * (h - 80); }

    void polyline(const std::vector<Vec2>& pts, const std::string& color, bool close = false) {
        body << "<" << (close ? "polygon" : "polyline") << " fill=\"none\" stroke=\"" << color
             << "\" stroke-width=\"1\" points=\"";
        for (const auto& p : pts) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(p[0]), py(p[1]));
            body << buf;
        }
        body << "\"/>\n";
    }

    void text(double x, double y, const std::string& s) {
        body << "<text x=\"" << px(x) << "\" y=\"" << py(y)
             << "\" font-size=\"11\" font-family=\"monospace\">" << s << "</text>\n";
    }

    void write(const std::filesystem::path& path) {
        auto out = open_out(path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
            << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body.str() << "</svg>\n";
    }
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_profiles_svg(const std::filesystem::path& path, const Trajectory& traj,
                        int max_curves) {
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    const size_t total = traj.frames.size();
    const size_t stride = std::max<size_t>(1, total / std::max(1, max_curves));
    double ext = 0.0;
    std::vector<std::vector<Vec2>> curves;
    for (size_t k = 0; k < total; k += stride) {
        const ProfileCurve c = embed(traj.frames[k], opts);
        for (const auto& p : c.points) ext = std::max({ext, std::fabs(p[0]), std::fabs(p[1])});
        curves.push_back(c.points);
    }
    SvgCanvas svg{-ext * 1.05, ext * 1.05, -ext * 1.05, ext * 1.05};
    svg.h = svg.w;  // square canvas for shapes
    for (size_t i = 0; i < curves.size(); ++i) {
        svg.polyline(curves[i], kPalette[i % 8], true);
    }
    svg.text(-ext, ext, "profile frames, " + traj.speed_id);
    svg.write(path);
}

void write_margins_svg(const std::filesystem::path& path, const MonitorSuite& suite) {
    double tmin = 0.0, tmax = -1e300, mmin = 1e300, mmax = -1e300;
    bool any = false;
    for (const auto& b : suite.bounds) {
        for (const auto& p : b.margin_series) {
            any = true;
            tmin = std::min(tmin, p[0]);
            tmax = std::max(tmax, p[0]);
            const double m = std::clamp(p[1], -1.0, 2.0);
            mmin = std::min(mmin, m);
            mmax = std::max(mmax, m);
        }
    }
    if (!any) {
        tmin = -1;
        tmax = 0;
        mmin = -1;
        mmax = 1;
    }
    SvgCanvas svg{tmin, tmax + 1e-9, mmin - 0.1, mmax + 0.1};
    // zero line
    svg.polyline({{tmin, 0.0}, {tmax, 0.0}}, "#888888");
    int ci = 0;
    double label_y = mmax;
    for (const auto& b : suite.bounds) {
        if (b.margin_series.empty()) continue;
        std::vector<Vec2> pts;
        for (const auto& p : b.margin_series) pts.push_back({p[0], std::clamp(p[1], -1.0, 2.0)});
        const std::string color = kPalette[ci % 8];
        svg.polyline(pts, color);
        svg.text(tmin, label_y, b.name + (b.pass ? " [pass]" : " [FAIL]"));
        label_y -= (mmax - mmin) * 0.045;
        ++ci;
    }
    svg.write(path);
}

void write_area_fit_svg(const std::filesystem::path& path, const Trajectory& traj,
                        const AsymptoticFit& fit) {
    std::vector<Vec2> data;
    for (const auto& r : traj.records) {
        if (r.t < -1e-6) data.push_back({std::log(-r.t), r.A / (2.0 * std::numbers::pi) + r.t});
    }
    if (data.empty()) return;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : data) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
    }
    SvgCanvas svg{xmin, xmax + 1e-9, ymin - 0.1, ymax + 0.1};
    svg.polyline(data, "#1f77b4");
    if (fit.coefficients.size() == 2) {
        std::vector<Vec2> line = {{xmin, fit.coefficients[0] * xmin + fit.coefficients[1]},
                                  {xmax, fit.coefficients[0] * xmax + fit.coefficients[1]}};
        svg.polyline(line, "#d62728");
        svg.text(xmin, ymax, "A/(2pi)+t vs log(-t); fitted a = " +
                                 std::to_string(fit.coefficients[0]) +
                                 ", b = " + std::to_string(fit.coefficients[1]));
    }
    svg.write(path);
}

void write_profile_svg(const std::filesystem::path& path, const ProfileCurve& curve) {
    double ext = 0.0;
    for (const auto& p : curve.points) ext = std::max({ext, std::fabs(p[0]), std::fabs(p[1])});
    SvgCanvas svg{-ext * 1.05, ext * 1.05, -ext * 1.05, ext * 1.05};
    svg.h = svg.w;
    svg.polyline(curve.points, "#1f77b4", true);
    svg.write(path);
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    std::map<std::string, std::string> out;
    std::string line, section;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("malformed config line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        out[section.empty() ? key : section + "." + key] = val;
    }
    return out;
}

}  // namespace pancake
