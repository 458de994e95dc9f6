#include "naqmd/nuclear.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fmt/format.h>
#include <memory>
#include <numbers>
#include <random>

namespace naqmd {

namespace {

constexpr int kScanPoints = 2001;
constexpr int kTablePoints = 4001;

double root_between(const std::function<double(double)>& g, double lo, double hi)
{
    std::uintmax_t iterations = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto r = boost::math::tools::toms748_solve(g, lo, hi, tol, iterations);
    return 0.5 * (r.first + r.second);
}

} // namespace

PotentialCurve PotentialCurve::tabulated(double r_min, double spacing, std::vector<double> values)
{
    if (values.size() < 5) {
        throw ValidationError("a tabulated potential curve needs at least five points");
    }
    if (!(spacing > 0.0)) {
        throw ValidationError("potential grid spacing must be positive");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("potential curve contains a non-finite value");
        }
    }
    PotentialCurve c;
    c.r_min_ = r_min;
    c.r_max_ = r_min + spacing * static_cast<double>(values.size() - 1);
    // Fourth-order one-sided end slopes; the library's own estimate is only first-order accurate.
    const auto& f = values;
    const std::size_t n = f.size() - 1;
    const double left = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * spacing);
    const double right =
        (25.0 * f[n] - 48.0 * f[n - 1] + 36.0 * f[n - 2] - 16.0 * f[n - 3] + 3.0 * f[n - 4]) / (12.0 * spacing);
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        values.begin(), values.end(), r_min, spacing, left, right);
    c.v_ = [spline](double R) { return (*spline)(R); };
    return c;
}

PotentialCurve PotentialCurve::analytic(std::function<double(double)> v, double r_min, double r_max)
{
    if (!(r_max > r_min)) {
        throw ValidationError("potential interval must have r_max > r_min");
    }
    PotentialCurve c;
    c.v_ = std::move(v);
    c.r_min_ = r_min;
    c.r_max_ = r_max;
    return c;
}

double PotentialCurve::operator()(double R) const
{
    if (R < r_min_ - 1e-12 || R > r_max_ + 1e-12) {
        throw ValidationError(fmt::format("R = {:.6f} lies outside the potential curve [{:.4f}, {:.4f}]", R, r_min_,
                                          r_max_));
    }
    return v_(std::clamp(R, r_min_, r_max_));
}

PotentialCurve::Minimum PotentialCurve::minimum() const
{
    const double h = (r_max_ - r_min_) / (kScanPoints - 1);
    int best = 0;
    double vbest = v_(r_min_);
    for (int i = 1; i < kScanPoints; ++i) {
        const double v = v_(r_min_ + h * i);
        if (v < vbest) {
            vbest = v;
            best = i;
        }
    }
    if (best == 0 || best == kScanPoints - 1) {
        throw ValidationError("potential curve has no interior minimum");
    }
    const double lo = r_min_ + h * (best - 1);
    const double hi = r_min_ + h * (best + 1);
    const auto r = boost::math::tools::brent_find_minima(v_, lo, hi, 40);
    return {r.first, r.second};
}

TurningPoints turning_points(const PotentialCurve& curve, double energy)
{
    const auto m = curve.minimum();
    if (!(energy > m.energy)) {
        throw ValidationError(fmt::format("energy {:.8f} does not exceed the curve minimum {:.8f}", energy, m.energy));
    }
    auto g = [&](double R) { return curve(R) - energy; };
    if (g(curve.r_min()) <= 0.0) {
        throw ValidationError(fmt::format("inner turning point at E = {:.8f} lies below R = {:.4f}", energy,
                                          curve.r_min()));
    }
    if (g(curve.r_max()) <= 0.0) {
        throw ValidationError(fmt::format("outer turning point at E = {:.8f} lies beyond R = {:.4f}", energy,
                                          curve.r_max()));
    }
    return {root_between(g, curve.r_min(), m.distance), root_between(g, m.distance, curve.r_max())};
}

double classical_action(const PotentialCurve& curve, double energy, double reduced_mass)
{
    if (!(reduced_mass > 0.0)) {
        throw ValidationError("reduced mass must be positive");
    }
    const TurningPoints tp = turning_points(curve, energy);
    const double mid = 0.5 * (tp.inner + tp.outer);
    const double half = 0.5 * (tp.outer - tp.inner);
    // R = mid - half cos(theta) removes the square-root endpoint behaviour of p(R).
    auto integrand = [&](double theta) {
        const double R = mid - half * std::cos(theta);
        const double kinetic = std::max(0.0, energy - curve(R));
        return std::sqrt(2.0 * reduced_mass * kinetic) * half * std::sin(theta);
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numbers::pi, 15, 1e-13);
    return 2.0 * integral;
}

std::vector<double> bohr_sommerfeld_levels(const PotentialCurve& curve, int n_max, double reduced_mass)
{
    if (n_max < 0) {
        throw ValidationError("n_max must be non-negative");
    }
    const auto m = curve.minimum();
    // Highest energy for which both turning points stay on the curve.
    const double e_top = std::min(curve(curve.r_min()), curve(curve.r_max()));
    const double e_lo = m.energy + 1e-12 * std::max(1.0, std::abs(m.energy));
    const double e_hi = e_top - 1e-12 * std::max(1.0, std::abs(e_top));
    std::vector<double> levels;
    for (int n = 0; n <= n_max; ++n) {
        const double target = 2.0 * std::numbers::pi * (n + 0.5);
        auto g = [&](double E) { return classical_action(curve, E, reduced_mass) - target; };
        if (g(e_hi) < 0.0) {
            throw ValidationError(fmt::format("level n = {} does not fit below the curve's upper bound {:.6f}", n,
                                              e_top));
        }
        levels.push_back(root_between(g, e_lo, e_hi));
    }
    return levels;
}

std::vector<VibrationalSample> sample_vibrational_ensemble(const PotentialCurve& curve, double energy,
                                                           std::size_t count, std::uint64_t seed,
                                                           double reduced_mass)
{
    if (!(reduced_mass > 0.0)) {
        throw ValidationError("reduced mass must be positive");
    }
    const TurningPoints tp = turning_points(curve, energy);
    const double mid = 0.5 * (tp.inner + tp.outer);
    const double half = 0.5 * (tp.outer - tp.inner);
    auto distance = [&](double theta) { return mid - half * std::cos(theta); };

    // Density in theta: (dR/dtheta) / p(R) = half sin(theta) / p(R), finite at the turning points.
    std::vector<double> theta(kTablePoints);
    std::vector<double> density(kTablePoints);
    for (int i = 0; i < kTablePoints; ++i) {
        theta[i] = std::numbers::pi * i / (kTablePoints - 1);
        const double kinetic = energy - curve(distance(theta[i]));
        const double p = std::sqrt(2.0 * reduced_mass * std::max(kinetic, 0.0));
        const double s = half * std::sin(theta[i]);
        density[i] = p > 0.0 ? s / p : 0.0;
    }
    // Endpoint limits from the neighbours (0/0 at the turning points).
    density.front() = 2.0 * density[1] - density[2];
    density.back() = 2.0 * density[kTablePoints - 2] - density[kTablePoints - 3];
    std::vector<double> cdf(kTablePoints, 0.0);
    for (int i = 1; i < kTablePoints; ++i) {
        cdf[i] = cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * (theta[i] - theta[i - 1]);
    }
    for (double& c : cdf) {
        c /= cdf.back();
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<VibrationalSample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double u = uniform(rng);
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, kTablePoints - 1);
        const double w = (u - cdf[i - 1]) / (cdf[i] - cdf[i - 1]);
        const double th = theta[i - 1] + w * (theta[i] - theta[i - 1]);
        const double R = distance(th);
        const double kinetic = std::max(0.0, energy - curve(R));
        const double speed = std::sqrt(2.0 * kinetic / reduced_mass);
        const double sign = uniform(rng) < 0.5 ? -1.0 : 1.0;
        out.push_back({R, sign * speed});
    }
    return out;
}

} // namespace naqmd
