#include "naqmd/absorber.hpp"

#include <cmath>
#include <limits>

namespace naqmd {

void AbsorberSpec::validate() const
{
    if (!(tau_min > 0.0)) {
        throw ValidationError("absorber.tau_min must be positive");
    }
    if (!(e_ref > 0.0)) {
        throw ValidationError("absorber.e_ref must be positive");
    }
}

double lifetime(double eps, const AbsorberSpec& spec)
{
    if (eps <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    if (eps < spec.e_ref) {
        const double s = std::sin(eps * M_PI / (2.0 * spec.e_ref));
        return spec.tau_min / (s * s);
    }
    return spec.tau_min;
}

double strength_from_lifetime(double tau)
{
    return std::isinf(tau) ? 0.0 : 1.0 / (2.0 * tau);
}

double absorber_strength(double eps, const AbsorberSpec& spec)
{
    if (!spec.enabled || eps <= 0.0) {
        return 0.0;
    }
    if (eps < spec.e_ref) {
        const double s = std::sin(eps * M_PI / (2.0 * spec.e_ref));
        return s * s / (2.0 * spec.tau_min);
    }
    return 1.0 / (2.0 * spec.tau_min);
}

Vector absorber_strengths(const Vector& eps, const AbsorberSpec& spec)
{
    Vector f(eps.size());
    for (Index a = 0; a < eps.size(); ++a) {
        f(a) = absorber_strength(eps(a), spec);
    }
    return f;
}

CMatrix build_vabs(const AdiabaticFrame& frame, const AbsorberSpec& spec, const Matrix& S)
{
    const Vector f = absorber_strengths(frame.energies, spec);
    const CMatrix left = S * frame.U.transpose();
    CMatrix v = left * f.asDiagonal() * left.adjoint();
    return 0.5 * (v + v.adjoint());
}

double norm_decay_rate(const CMatrix& coeffs, const CMatrix& vabs)
{
    return -2.0 * (coeffs.adjoint() * vabs * coeffs).trace().real();
}

double energy_absorption_rate(const CMatrix& coeffs, const CMatrix& vabs, const CMatrix& H,
                              const Matrix& inverse_overlap)
{
    // a^dagger V S^-1 H a and a^dagger H S^-1 V a are complex conjugates of each other.
    const CMatrix va = inverse_overlap * (vabs * coeffs);
    return -2.0 * (va.adjoint() * (H * coeffs)).trace().real();
}

Vector absorption_spectrum(const CMatrix& coeffs, const AdiabaticFrame& frame, const Matrix& S,
                           const AbsorberSpec& spec)
{
    const Vector f = absorber_strengths(frame.energies, spec);
    const CMatrix c = frame.U.conjugate() * (S * coeffs);
    return f.cwiseProduct(c.cwiseAbs2().rowwise().sum());
}

} // namespace naqmd
