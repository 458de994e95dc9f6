#pragma once

#include "naqmd/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace naqmd {

/// Reduced mass of two protons.
inline constexpr double proton_pair_reduced_mass = 0.5 * units::proton_mass;

/// Potential-energy curve V(R) of a diatomic on a closed interval.
class PotentialCurve {
public:
    /// Cubic B-spline through values on a uniform grid r_min + i * spacing.
    static PotentialCurve tabulated(double r_min, double spacing, std::vector<double> values);
    /// Analytic curve on [r_min, r_max].
    static PotentialCurve analytic(std::function<double(double)> v, double r_min, double r_max);

    double operator()(double R) const;
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }

    struct Minimum {
        double distance = 0.0;
        double energy = 0.0;
    };
    /// Global minimum: best grid sample refined by Brent's method.
    Minimum minimum() const;

private:
    PotentialCurve() = default;

    std::function<double(double)> v_;
    double r_min_ = 0.0;
    double r_max_ = 0.0;
};

struct TurningPoints {
    double inner = 0.0;
    double outer = 0.0;
};

/// Classical turning points V(R) = E on both sides of the minimum. Throws ValidationError if E
/// lies below the minimum or the outer turning point leaves the curve's interval.
TurningPoints turning_points(const PotentialCurve& curve, double energy);

/// Closed-orbit action oint p dR = 2 int_a^b sqrt(2 mu (E - V)) dR.
double classical_action(const PotentialCurve& curve, double energy, double reduced_mass = proton_pair_reduced_mass);

/// Energies E_0..E_{n_max} solving oint p dR = 2 pi (n + 1/2) (atomic units, h = 2 pi).
std::vector<double> bohr_sommerfeld_levels(const PotentialCurve& curve, int n_max,
                                           double reduced_mass = proton_pair_reduced_mass);

/// Initial condition of one trajectory: internuclear distance and its rate of change.
struct VibrationalSample {
    double distance = 0.0;
    double velocity = 0.0;
};

/// Classical distance distribution at energy E: R with density proportional to 1/p(R) between
/// the turning points (inverse CDF on a dense table), |dR/dt| from energy conservation and a
/// random sign. Deterministic for a given seed.
std::vector<VibrationalSample> sample_vibrational_ensemble(const PotentialCurve& curve, double energy,
                                                           std::size_t count, std::uint64_t seed,
                                                           double reduced_mass = proton_pair_reduced_mass);

} // namespace naqmd
