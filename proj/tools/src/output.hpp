#pragma once

#include <naqmd/observables.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace naqmd::app {

/// Column table with a commented header, written as CSV.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
    /// Values of one column; throws ValidationError for an unknown name.
    std::vector<double> column(const std::string& name) const;
};

/// Fixed-precision text so reruns produce identical bytes.
std::string format_number(double v);

/// Write via a temporary file and rename, so a present file is always complete.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

std::string to_csv(const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);
/// Parse a file written by write_csv (comment lines start with '#').
Table read_csv(const std::filesystem::path& path);

/// Trajectory columns: t, N_j per orbital, N, E, R, Delta_abs, dN/dt, energy balance, field.
Table trajectory_table(const TrajectoryRecord& record);
/// Inverse of trajectory_table.
TrajectoryRecord trajectory_from_table(const Table& table);

/// Flat key: value summary block. Keys keep insertion order.
class Summary {
public:
    void set(const std::string& key, double value);
    void set(const std::string& key, const std::string& value);
    std::string text() const;
    static Summary parse(const std::string& text);
    bool has(const std::string& key) const;
    double number(const std::string& key) const;
    std::string string(const std::string& key) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// One curve of a line plot.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Draw markers only (data points) instead of a polyline.
    bool markers = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Series> series;
};

/// Standalone SVG line plot.
std::string render_svg(const PlotSpec& spec);

} // namespace naqmd::app
