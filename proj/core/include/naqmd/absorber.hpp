#pragma once

#include "naqmd/adiabatic.hpp"
#include "naqmd/types.hpp"

namespace naqmd {

/// Lifetime profile of the projector absorber.
struct AbsorberSpec {
    double tau_min = 5.0;
    double e_ref = 0.3;
    bool enabled = true;

    /// Throws ValidationError unless tau_min > 0 and e_ref > 0.
    void validate() const;
};

/// tau(eps): infinite for eps <= 0, tau_min / sin^2(eps pi / (2 E_ref)) below E_ref, tau_min above.
double lifetime(double eps, const AbsorberSpec& spec);

/// f = 1 / (2 tau); zero for an infinite lifetime.
double strength_from_lifetime(double tau);

/// f(eps) for the given spec (zero when the absorber is disabled).
double absorber_strength(double eps, const AbsorberSpec& spec);
Vector absorber_strengths(const Vector& eps, const AbsorberSpec& spec);

/// V_abs = sum_a f(eps_a) (S U^T e_a)(e_a^T conj(U) S) in the local basis.
CMatrix build_vabs(const AdiabaticFrame& frame, const AbsorberSpec& spec, const Matrix& S);

/// dN/dt = -2 sum_j a_j^dagger V_abs a_j over the columns of `coeffs`.
double norm_decay_rate(const CMatrix& coeffs, const CMatrix& vabs);

/// Delta_abs = -sum_j a_j^dagger (V S^-1 H + H S^-1 V) a_j with S^-1 the retained-subspace inverse.
double energy_absorption_rate(const CMatrix& coeffs, const CMatrix& vabs, const CMatrix& H,
                              const Matrix& inverse_overlap);

/// Per-state absorption sum_j f_a |c_a^j|^2 with c = conj(U) S a.
Vector absorption_spectrum(const CMatrix& coeffs, const AdiabaticFrame& frame, const Matrix& S,
                           const AbsorberSpec& spec);

} // namespace naqmd
