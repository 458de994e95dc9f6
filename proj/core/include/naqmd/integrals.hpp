#pragma once

#include "naqmd/basis.hpp"
#include "naqmd/types.hpp"

#include <array>
#include <vector>

namespace naqmd {

/// One-electron matrices over a basis. Dipole components are <a|r_k|b> about the origin.
struct OneElectronMatrices {
    Matrix overlap;
    Matrix kinetic;
    Matrix nuclear;
    std::array<Matrix, 3> dipole;

    Matrix core() const { return kinetic + nuclear; }
    /// Dipole operator projected on a polarization direction.
    Matrix dipole_along(const Vec3& direction) const;
};

/// Value of a basis function at a point.
double evaluate(const BasisFunction& f, const Vec3& r);

/// Real solid harmonic coefficients over Cartesian monomials of order l, normalized for
/// the exponent alpha. Rows are m = -l..l; columns follow cartesian_powers(l).
Matrix spherical_transform(int l, double alpha);

/// Cartesian exponents (i, j, k) with i + j + k = l in canonical order.
std::vector<std::array<int, 3>> cartesian_powers(int l);

double overlap(const BasisFunction& a, const BasisFunction& b);
double kinetic(const BasisFunction& a, const BasisFunction& b);
/// <a| -Z / |r - C| |b>.
double nuclear_attraction(const BasisFunction& a, const BasisFunction& b, const Vec3& C, double Z);
Vec3 dipole(const BasisFunction& a, const BasisFunction& b);
/// <a | grad_{R_A} b> where b moves with nucleus A; zero unless b is anchored to A.
Vec3 grad_overlap(const BasisFunction& a, const BasisFunction& b, int nucleus);
/// Two-electron repulsion (ab|cd) in chemists' notation (Gaussians only).
double eri(const BasisFunction& a, const BasisFunction& b, const BasisFunction& c,
           const BasisFunction& d);

Matrix overlap_matrix(const BasisSet& basis);
OneElectronMatrices one_electron_matrices(const BasisSet& basis, const std::vector<Nucleus>& nuclei);

/// Field-free core Hamiltonian T + V.
Matrix core_hamiltonian(const BasisSet& basis, const std::vector<Nucleus>& nuclei);

/// Gradient-overlap matrices G_k(a, b) = <a | d b / d R_{A,k}>, k = x, y, z.
std::array<Matrix, 3> gradient_overlap_matrices(const BasisSet& basis, int nucleus);

/// Nucleus-nucleus Coulomb repulsion.
double nuclear_repulsion(const std::vector<Nucleus>& nuclei);

namespace detail {

/// Hermite-Gaussian Coulomb integrals R_{tuv}(p, PC) for t + u + v <= L. Layout: index
/// t * (L+1)^2 + u * (L+1) + v.
void hermite_coulomb(int L, double p, const Vec3& PC, double* out);

/// Mixed integrals involving hydrogenic functions: overlap, <1/|r - C|> with C the
/// hydrogenic centre, and dipole. Evaluated by product quadrature around the hydrogenic
/// centre.
struct HydrogenicPair {
    double overlap = 0.0;
    double inverse_r = 0.0;
    Vec3 dipole = Vec3::Zero();
};
HydrogenicPair hydrogenic_pair(const BasisFunction& hydrogenic, const BasisFunction& other);

double hydrogenic_energy(const BasisFunction& f);

} // namespace detail

} // namespace naqmd
