#pragma once

#include <naqmd/simulation.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace naqmd::app {

enum class ScanAxis { None, Angle, Distance, Duration };

ScanAxis parse_scan_axis(const std::string& name);
std::string to_string(ScanAxis axis);

/// Grid of a scan. Angles in degrees, distances in bohr, durations (T) in fs.
struct ScanSpec {
    ScanAxis axis = ScanAxis::None;
    std::vector<double> values;
};

/// Window of the rate fit on cw runs.
struct RateSpec {
    /// Window start (a.u.); ramp end plus two optical cycles when not positive.
    double start = 0.0;
    /// Window length in optical cycles; the run ends with the window.
    double cycles = 10.0;
};

struct EnsembleSpec {
    std::size_t size = 100;
    int level = 6;
    std::uint64_t seed = 1;
    double r_dissociation = 9.5;
    double curve_r_min = 0.6;
    double curve_r_max = 8.0;
    double curve_spacing = 0.05;
};

/// Everything a subcommand needs, read from a YAML file.
struct AppConfig {
    RunSpec run;
    ScanSpec scan;
    RateSpec rate;
    EnsembleSpec ensemble;
    /// Duration scans also run without absorber and report the positive-energy population.
    bool compare_without_absorber = false;
    std::string output_directory = "naqmd-out";
    /// Raw configuration text, hashed into the manifest.
    std::string source;

    /// Throws ValidationError listing every offending field.
    void validate() const;
};

/// Parse YAML text. Unknown keys and malformed values are collected and reported together.
AppConfig parse_config(const std::string& text);
AppConfig load_config(const std::string& path);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

} // namespace naqmd::app
