#pragma once

#include "naqmd/basis.hpp"
#include "naqmd/integrals.hpp"

#include <array>
#include <vector>

namespace naqmd::detail {

/// Largest Hermite order handled by the Coulomb recursion ((dd|dd) needs 8).
inline constexpr int kMaxHermite = 8;

/// One-dimensional McMurchie-Davidson expansion coefficients E^{ij}_t.
struct HermiteE1D {
    static constexpr int kI = 5;
    static constexpr int kJ = 5;
    static constexpr int kT = 10;
    double e[kI][kJ][kT];
};

void hermite_e_1d(int imax, int jmax, double a, double b, double A, double B, HermiteE1D& E);

struct CartesianPairBlocks {
    Matrix overlap, kinetic, nuclear;
    std::array<Matrix, 3> dipole;
};

CartesianPairBlocks cartesian_pair(const Shell& sa, const Shell& sb, const std::vector<Nucleus>& nuclei,
                                   bool with_nuclear);

/// <a | d b / d B_k> for Cartesian components, b centred at B.
std::array<Matrix, 3> cartesian_grad_pair(const Shell& sa, const Shell& sb);

double hydrogenic_value(const BasisFunction& f, const Vec3& d);

} // namespace naqmd::detail
