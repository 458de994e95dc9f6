#pragma once

#include "config.hpp"
#include "output.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace naqmd::app {

/// Single-trajectory spec for one grid point of a scan.
RunSpec angle_point(const AppConfig& config, double angle_deg);
RunSpec duration_point(const AppConfig& config, double duration_fs);
RunSpec distance_point(const AppConfig& config, double distance);

/// Rate-fit window [start, end] of a cw run.
std::pair<double, double> rate_window(const LaserPulse& pulse, const RateSpec& rate);

/// Values injected into an angle scan instead of running trajectories.
struct SyntheticAngles {
    double parallel = 0.3;
    double perpendicular = 0.1;
    double noise = 0.0;
    std::uint64_t seed = 1;
};

struct CommandOptions {
    std::filesystem::path output;
    unsigned workers = 1;
};

/// Each command writes its artifacts under options.output plus a manifest.yaml.
void command_run(const AppConfig& config, const CommandOptions& options);
void command_scan_angle(const AppConfig& config, const CommandOptions& options,
                        const std::optional<SyntheticAngles>& synthetic = std::nullopt);
void command_scan_distance(const AppConfig& config, const CommandOptions& options);
void command_scan_duration(const AppConfig& config, const CommandOptions& options);
void command_ensemble(const AppConfig& config, const CommandOptions& options);
/// Writes a table of the assembled basis (index, center, width, l, m, kind, anchor).
void command_dump_basis(const AppConfig& config, std::ostream& out);
/// Propagates with fixed nuclei and writes the instantaneous frame energies at every sample.
void command_dump_spectrum(const AppConfig& config, const CommandOptions& options, int states);

struct PlotRequest {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string x;
    std::vector<std::string> y;
    bool log_y = false;
    std::string title;
};
/// Render columns of a CSV written by this tool. With no columns given, the layout follows
/// the file: N(t) for trajectories, P(angle) with cos^2 fits, Gamma(R), or ensemble P(t).
void command_plot(const PlotRequest& request);

} // namespace naqmd::app
