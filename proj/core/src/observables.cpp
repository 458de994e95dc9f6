#include "naqmd/observables.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace naqmd {

void TrajectoryRecord::validate() const
{
    const std::size_t n = time.size();
    auto check = [n](const std::vector<double>& v, const char* name) {
        if (!v.empty() && v.size() != n) {
            throw ValidationError(fmt::format("trajectory column '{}' has {} rows, expected {}", name, v.size(), n));
        }
    };
    check(norm, "norm");
    check(energy, "energy");
    check(distance, "distance");
    check(absorption, "absorption");
    check(norm_rate, "norm_rate");
    check(energy_rate, "energy_rate");
    check(field, "field");
    for (const auto& o : orbital_norms) {
        check(o, "orbital_norms");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(time[i] > time[i - 1])) {
            throw ValidationError("trajectory time must be strictly increasing");
        }
    }
}

double value_at(const std::vector<double>& time, const std::vector<double>& values, double t)
{
    if (time.empty() || time.size() != values.size()) {
        throw ValidationError("series is empty or ragged");
    }
    if (t <= time.front()) {
        return values.front();
    }
    if (t >= time.back()) {
        return values.back();
    }
    const auto it = std::upper_bound(time.begin(), time.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - time.begin());
    const double w = (t - time[i - 1]) / (time[i] - time[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

double ionization_probability(const TrajectoryRecord& record, double t_final)
{
    return 1.0 - value_at(record.time, record.norm, t_final);
}

SingleDouble single_double(double n1, double n2)
{
    return {(1.0 - n1) * n2 + n1 * (1.0 - n2), (1.0 - n1) * (1.0 - n2)};
}

FragmentationSeries fragmentation_dissociation(const TrajectoryRecord& record, double r_dissociation)
{
    if (record.distance.size() != record.size() || record.norm.size() != record.size()) {
        throw ValidationError("fragmentation needs distance and norm series");
    }
    FragmentationSeries out;
    out.fragmentation.resize(record.size());
    out.dissociation.resize(record.size());
    for (std::size_t i = 0; i < record.size(); ++i) {
        const double frag = record.distance[i] >= r_dissociation ? 1.0 : 0.0;
        out.fragmentation[i] = frag;
        out.dissociation[i] = record.norm[i] * frag;
    }
    return out;
}

Cos2Fit cos2_fit(std::span<const double> angles, std::span<const double> values)
{
    if (angles.size() != values.size() || angles.size() < 2) {
        throw ValidationError("cos^2 fit needs at least two (angle, value) pairs of equal count");
    }
    const Index n = static_cast<Index>(angles.size());
    Matrix A(n, 2);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        const double c = std::cos(angles[static_cast<std::size_t>(i)]);
        A(i, 0) = c * c;
        A(i, 1) = 1.0 - c * c;
        y(i) = values[static_cast<std::size_t>(i)];
    }
    const Vector p = A.colPivHouseholderQr().solve(y);
    Cos2Fit fit;
    fit.parallel = p(0);
    fit.perpendicular = p(1);
    fit.residual = std::sqrt((A * p - y).squaredNorm() / static_cast<double>(n));
    return fit;
}

RateFit rate_fit(std::span<const double> time, std::span<const double> norm, double t_begin, double t_end)
{
    if (time.size() != norm.size()) {
        throw ValidationError("rate fit needs time and norm series of equal length");
    }
    if (!(t_end > t_begin)) {
        throw ValidationError("rate fit window must have positive length");
    }
    double st = 0.0;
    double sy = 0.0;
    double stt = 0.0;
    double sty = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (time[i] < t_begin || time[i] > t_end) {
            continue;
        }
        if (!(norm[i] > 0.0)) {
            throw NumericalError("rate fit needs a positive norm inside the window");
        }
        const double y = -std::log(norm[i]);
        st += time[i];
        sy += y;
        stt += time[i] * time[i];
        sty += time[i] * y;
        ++n;
    }
    if (n < 2) {
        throw ValidationError("rate fit window contains fewer than two samples");
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    RateFit fit;
    fit.rate_au = (dn * sty - st * sy) / denom;
    fit.rate_per_s = fit.rate_au / au_time_seconds;
    fit.points = n;
    return fit;
}

RateFit rate_fit(const TrajectoryRecord& record, double t_begin, double t_end)
{
    return rate_fit(record.time, record.norm, t_begin, t_end);
}

double default_rate_window_start(double ramp_end, double period)
{
    return ramp_end + 2.0 * period;
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanError ensemble_average(std::span<const double> values)
{
    if (values.empty()) {
        throw ValidationError("ensemble average of an empty set");
    }
    const double n = static_cast<double>(values.size());
    MeanError out;
    out.mean = pairwise_sum(values) / n;
    if (values.size() < 2) {
        return out;
    }
    // Leave-one-out means are (sum - x_i) / (n - 1); the jackknife variance follows from them.
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double loo = (n * out.mean - values[i]) / (n - 1.0);
        sq[i] = (loo - out.mean) * (loo - out.mean);
    }
    out.standard_error = std::sqrt((n - 1.0) / n * pairwise_sum(sq));
    return out;
}

bool check_plateau(const TrajectoryRecord& record, double t_final, double threshold)
{
    if (record.norm_rate.empty()) {
        return true;
    }
    const double rate = value_at(record.time, record.norm_rate, t_final);
    if (std::abs(rate) > threshold) {
        spdlog::warn("norm has not reached a plateau at t = {:.1f}: |dN/dt| = {:.3e}", t_final, std::abs(rate));
        return false;
    }
    return true;
}

} // namespace naqmd
