#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "pancake/diagnostics.hpp"

namespace pancake {

/// All CSVs are UTF-8 with a header row and %.12e numeric formatting.
std::string format_num(double v);

void write_profile_csv(const std::filesystem::path& path, const SupportProfile& profile,
                       const SpeedFunction& speed, const CurvatureOptions& opts = {});
void write_frames_csv(const std::filesystem::path& path, const Trajectory& traj,
                      const SpeedFunction& speed, int max_frames = 64);
void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_meta_json(const std::filesystem::path& path, const Trajectory& traj,
                     std::uint64_t checker_seed);
void write_bounds_json(const std::filesystem::path& path, const MonitorSuite& suite);
std::string admissibility_report_json(const AdmissibilityReport& report);

/// Seed profile from a CSV with theta,sigma columns (theta must be the
/// uniform grid).
SupportProfile read_profile_csv(const std::filesystem::path& path, int n);

// ---- SVG emissions -------------------------------------------------------
void write_profiles_svg(const std::filesystem::path& path, const Trajectory& traj,
                        int max_curves = 24);
void write_margins_svg(const std::filesystem::path& path, const MonitorSuite& suite);
void write_area_fit_svg(const std::filesystem::path& path, const Trajectory& traj,
                        const AsymptoticFit& fit);
void write_profile_svg(const std::filesystem::path& path, const ProfileCurve& curve);

/// Flat "key = value" config file with [section] tables; keys are returned as
/// "section.key". '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

}  // namespace pancake
