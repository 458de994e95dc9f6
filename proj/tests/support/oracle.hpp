#pragma once

#include <naqmd/basis.hpp>
#include <naqmd/types.hpp>

#include <functional>
#include <random>
#include <vector>

/// Independent numerical references used to pin analytic results in the tests.
namespace naqmd::oracle {

/// Gauss-Hermite nodes and weights for the weight exp(-x^2) (Golub-Welsch).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
    explicit GaussHermite(int n);
};

/// Integral over R^3 of F, exact when F = exp(-e |r - c|^2) * polynomial of degree < 2n.
double gaussian_integral(const std::function<double(const Vec3&)>& F, const Vec3& c, double e, int n = 8);

/// <a|b> by quadrature on basis-function values.
double overlap(const BasisFunction& a, const BasisFunction& b);
/// <a| -1/2 Laplacian |b> using the closed-form Laplacian of a solid-harmonic Gaussian.
double kinetic(const BasisFunction& a, const BasisFunction& b);
/// <a| r_k |b>.
double dipole(const BasisFunction& a, const BasisFunction& b, int k);
/// <a| -Z/|r - C| |b> through 1/r = (2/sqrt(pi)) int_0^inf exp(-t^2 r^2) dt.
double nuclear_attraction(const BasisFunction& a, const BasisFunction& b, const Vec3& C, double Z);
/// (ab|cd) through the same Gaussian representation of 1/r12 and nested quadrature.
double eri(const BasisFunction& a, const BasisFunction& b, const BasisFunction& c, const BasisFunction& d);

/// F_m(x) = int_0^1 t^(2m) exp(-x t^2) dt by adaptive quadrature.
double boys(int m, double x);

/// Number of points allowed by the index constraints of the hexagonal grid:
/// 0 <= i < N1, 0 <= j < N2 - 1 when N1 + i is even, else 0 <= j < N2.
int hex_grid_count(int n1, int n2);

/// Random normalized Gaussian primitive with l <= lmax near the origin.
BasisFunction random_gaussian(std::mt19937_64& rng, int lmax = 2, double width_min = 0.6, double width_max = 2.0,
                              double spread = 1.0);

/// Random Hermitian matrix with entries of unit scale.
CMatrix random_hermitian(std::mt19937_64& rng, Index n);
/// Random symmetric positive-definite overlap-like matrix with unit diagonal.
Matrix random_overlap(std::mt19937_64& rng, Index n, double coupling = 0.3);
CVector random_state(std::mt19937_64& rng, Index n);

} // namespace naqmd::oracle
