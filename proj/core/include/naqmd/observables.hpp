#pragma once

#include "naqmd/types.hpp"

#include <span>
#include <vector>

namespace naqmd {

/// Time series of one trajectory. Columns have equal length; orbital_norms[j] is the series
/// of spin orbital j.
struct TrajectoryRecord {
    std::vector<double> time;
    std::vector<std::vector<double>> orbital_norms;
    std::vector<double> norm;
    std::vector<double> energy;
    std::vector<double> distance;
    std::vector<double> absorption;
    std::vector<double> norm_rate;
    std::vector<double> energy_rate;
    std::vector<double> field;

    std::size_t size() const { return time.size(); }
    bool empty() const { return time.empty(); }
    /// Throws ValidationError for ragged columns or non-increasing time.
    void validate() const;
};

/// Linear interpolation of a series at time t (clamped to the recorded range).
double value_at(const std::vector<double>& time, const std::vector<double>& values, double t);

/// P_ion = 1 - N(t_final).
double ionization_probability(const TrajectoryRecord& record, double t_final);

struct SingleDouble {
    double single = 0.0;
    double twofold = 0.0;
};

/// P_single = (1 - N1) N2 + N1 (1 - N2), P_double = (1 - N1)(1 - N2).
SingleDouble single_double(double n1, double n2);

struct FragmentationSeries {
    std::vector<double> fragmentation;
    std::vector<double> dissociation;
};

/// P_frag(t) = [R(t) >= R_D], P_diss(t) = N(t) P_frag(t).
FragmentationSeries fragmentation_dissociation(const TrajectoryRecord& record, double r_dissociation = 9.5);

struct Cos2Fit {
    double parallel = 0.0;
    double perpendicular = 0.0;
    /// Root-mean-square misfit.
    double residual = 0.0;
};

/// Least-squares fit of values(theta) to P_par cos^2(theta) + P_perp sin^2(theta); angles in radians.
Cos2Fit cos2_fit(std::span<const double> angles, std::span<const double> values);

struct RateFit {
    /// Decay rate in 1/a.u. of time.
    double rate_au = 0.0;
    /// Decay rate in 1/s.
    double rate_per_s = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of -ln N(t) over [t_begin, t_end].
RateFit rate_fit(const TrajectoryRecord& record, double t_begin, double t_end);
RateFit rate_fit(std::span<const double> time, std::span<const double> norm, double t_begin, double t_end);

/// Start of the default rate window: end of the ramp plus two optical cycles.
double default_rate_window_start(double ramp_end, double period);

struct MeanError {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sum by recursive halving, independent of thread scheduling.
double pairwise_sum(std::span<const double> values);

/// Arithmetic mean with jackknife standard error.
MeanError ensemble_average(std::span<const double> values);

/// Warn and return false if |dN/dt| at t_final exceeds the threshold.
bool check_plateau(const TrajectoryRecord& record, double t_final, double threshold = 1e-8);

/// Seconds per atomic unit of time.
inline constexpr double au_time_seconds = 2.4188843265857e-17;

} // namespace naqmd
