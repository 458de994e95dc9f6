#include "naqmd/laser.hpp"

#include <cmath>
#include <fmt/format.h>

namespace naqmd {

namespace {

/// Ramp value and derivative for x = t / width in [0, 1].
void ramp_value(RampShape shape, double t, double width, double& f, double& df)
{
    if (t <= 0.0) {
        f = 0.0;
        df = 0.0;
        return;
    }
    if (t >= width) {
        f = 1.0;
        df = 0.0;
        return;
    }
    if (shape == RampShape::Linear) {
        f = t / width;
        df = 1.0 / width;
        return;
    }
    const double arg = M_PI * t / (2.0 * width);
    f = std::sin(arg) * std::sin(arg);
    df = 2.0 * std::sin(arg) * std::cos(arg) * M_PI / (2.0 * width);
}

} // namespace

void LaserPulse::validate() const
{
    if (envelope == Envelope::None) {
        return;
    }
    if (!(amplitude >= 0.0)) {
        throw ValidationError("pulse amplitude must be non-negative");
    }
    if (!(omega > 0.0)) {
        throw ValidationError("pulse omega must be positive");
    }
    if (envelope == Envelope::Sin2 && !(duration > 0.0)) {
        throw ValidationError("sin2 pulse needs a positive duration T");
    }
    if (envelope == Envelope::QuasiCW && !(turn_on > 0.0)) {
        throw ValidationError("quasi_cw pulse needs a positive turn_on");
    }
    if (envelope == Envelope::CWCycles && cycles < 1) {
        throw ValidationError("cw_cycles pulse needs at least one cycle");
    }
    if (std::abs(polarization.norm() - 1.0) > 1e-12) {
        throw ValidationError("polarization must be a unit vector");
    }
}

double LaserPulse::period() const
{
    return 2.0 * M_PI / omega;
}

double LaserPulse::ramp_end() const
{
    switch (envelope) {
    case Envelope::Sin2:
        return 2.0 * duration;
    case Envelope::QuasiCW:
        return turn_on;
    case Envelope::CWCycles:
        return cycles * period();
    case Envelope::None:
        return 0.0;
    }
    return 0.0;
}

double LaserPulse::default_final_time() const
{
    return ramp_end() + 500.0;
}

double LaserPulse::shape(double t) const
{
    double f = 0.0;
    double df = 0.0;
    switch (envelope) {
    case Envelope::Sin2:
        if (t <= 0.0 || t >= 2.0 * duration) {
            return 0.0;
        }
        return std::pow(std::sin(M_PI * t / (2.0 * duration)), 2);
    case Envelope::QuasiCW:
        ramp_value(ramp, t, turn_on, f, df);
        return f;
    case Envelope::CWCycles:
        ramp_value(ramp, t, cycles * period(), f, df);
        return f;
    case Envelope::None:
        return 0.0;
    }
    return 0.0;
}

double LaserPulse::shape_derivative(double t) const
{
    double f = 0.0;
    double df = 0.0;
    switch (envelope) {
    case Envelope::Sin2:
        if (t <= 0.0 || t >= 2.0 * duration) {
            return 0.0;
        }
        return std::sin(M_PI * t / duration) * M_PI / (2.0 * duration);
    case Envelope::QuasiCW:
        ramp_value(ramp, t, turn_on, f, df);
        return df;
    case Envelope::CWCycles:
        ramp_value(ramp, t, cycles * period(), f, df);
        return df;
    case Envelope::None:
        return 0.0;
    }
    return 0.0;
}

double LaserPulse::field(double t) const
{
    if (envelope == Envelope::None) {
        return 0.0;
    }
    return amplitude * shape(t) * std::sin(omega * t + phase);
}

double LaserPulse::field_derivative(double t) const
{
    if (envelope == Envelope::None) {
        return 0.0;
    }
    return amplitude * (shape_derivative(t) * std::sin(omega * t + phase) +
                        shape(t) * omega * std::cos(omega * t + phase));
}

double LaserPulse::amplitude_from_intensity(double wcm2)
{
    if (!(wcm2 >= 0.0)) {
        throw ValidationError("intensity must be non-negative");
    }
    return std::sqrt(wcm2 / units::intensity_au_wcm2);
}

Envelope parse_envelope(const std::string& name)
{
    if (name == "sin2") {
        return Envelope::Sin2;
    }
    if (name == "quasi_cw") {
        return Envelope::QuasiCW;
    }
    if (name == "cw_cycles") {
        return Envelope::CWCycles;
    }
    if (name == "none") {
        return Envelope::None;
    }
    throw ValidationError(fmt::format("unknown envelope '{}'", name));
}

std::string to_string(Envelope e)
{
    switch (e) {
    case Envelope::Sin2:
        return "sin2";
    case Envelope::QuasiCW:
        return "quasi_cw";
    case Envelope::CWCycles:
        return "cw_cycles";
    case Envelope::None:
        return "none";
    }
    return "none";
}

RampShape parse_ramp(const std::string& name)
{
    if (name == "sin2") {
        return RampShape::Sin2;
    }
    if (name == "linear") {
        return RampShape::Linear;
    }
    throw ValidationError(fmt::format("unknown ramp shape '{}'", name));
}

std::string to_string(RampShape r)
{
    return r == RampShape::Sin2 ? "sin2" : "linear";
}

} // namespace naqmd
