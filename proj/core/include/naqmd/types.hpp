#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace naqmd {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised for malformed input: bad recipes, inconsistent configs, unsupported combinations.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails: step-size underflow, non-finite values,
/// SCF non-convergence, singular overlap.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace units {
inline constexpr double au_time_per_fs = 41.341373;
inline constexpr double intensity_au_wcm2 = 3.509445e16;
inline constexpr double proton_mass = 1836.15267;
inline constexpr double hartree_ev = 27.211386;
/// Photon energy in hartree for a wavelength in nm.
inline constexpr double omega_from_nm(double nm) { return 45.563353 / nm; }
} // namespace units

} // namespace naqmd
