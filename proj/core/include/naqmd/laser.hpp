#pragma once

#include "naqmd/types.hpp"

#include <string>

namespace naqmd {

enum class Envelope { Sin2, QuasiCW, CWCycles, None };
enum class RampShape { Sin2, Linear };

/// E(t) = E0 f(t) sin(omega t + phase) along `polarization`.
///
/// Sin2: f = sin^2(pi t / (2T)) on (0, 2T), zero elsewhere.
/// QuasiCW: ramp over `turn_on`, then 1.
/// CWCycles: ramp over `cycles` optical periods, then 1.
/// None: field identically zero.
struct LaserPulse {
    double amplitude = 0.0;
    double omega = 0.0;
    double phase = 0.0;
    Envelope envelope = Envelope::None;
    double duration = 0.0;
    double turn_on = 0.0;
    int cycles = 3;
    RampShape ramp = RampShape::Sin2;
    Vec3 polarization = Vec3::UnitZ();

    void validate() const;
    double shape(double t) const;
    double shape_derivative(double t) const;
    /// Scalar field along the polarization.
    double field(double t) const;
    double field_derivative(double t) const;
    Vec3 efield(double t) const { return field(t) * polarization; }
    /// Length of the ramp (turn-on) or, for sin2, the full pulse length 2T.
    double ramp_end() const;
    /// Default end of a run: 2T + 500 for sin2, ramp end + 500 otherwise.
    double default_final_time() const;
    double period() const;

    static double amplitude_from_intensity(double wcm2);
};

Envelope parse_envelope(const std::string& name);
std::string to_string(Envelope e);
RampShape parse_ramp(const std::string& name);
std::string to_string(RampShape r);

} // namespace naqmd
