#pragma once

#include "nsrl/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace nsrl::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

// Keys: n, box_length, dt, t_start, t_end, output_stride, init, seed, amplitude,
// wavenumber, max_mode, viscosity, cfl, dealias. Returns the manifest path.
fs::path simulate(const fs::path& config_path, const fs::path& out_dir);

// Synthetic self-similar profile sampled at T_sing - u for u geometrically graded in
// [u_min, u_max]. Keys: n, box_length, alpha, t_sing, k, amplitude, u_min, u_max, count.
fs::path synthesize(const fs::path& config_path, const fs::path& out_dir);

// Full diagnostics pipeline; sections are enabled by their config keys.
Json diagnose(const fs::path& manifest_path, const fs::path& config_path);

// Pressure-split summaries for the selected snapshots.
Json split_pressure(const fs::path& manifest_path, const fs::path& config_path);

struct ZoomOutcome {
    std::optional<fs::path> manifest;  // absent when only checks were requested
    Json rescale;                      // rescale report section
};

// Keys: R, T, target_n, target_box_length, mode, zero_outside, times, scaling_a,
// harmonic_a, harmonic_R, write.
ZoomOutcome zoom(const fs::path& manifest_path, const fs::path& config_path, const fs::path& out_dir);

// Appends `section` entries to `key` in the report at `path`, creating a skeleton
// report when the file does not exist.
void append_to_report(const fs::path& path, const std::string& key, const Json& entries,
                      const fs::path& manifest_path);

// Report skeleton shared by all writers.
Json report_header(const fs::path& manifest_path, const io::Config& config);

// Throws FormatError unless the report has the required structure and every number is finite.
void validate_report(const Json& report);

// "m_proxy M_proxy flagged"
std::string summary_line(const Json& report);

void write_report(const fs::path& path, const Json& report);

} // namespace nsrl::cli
