#include "properties.hpp"

#include "oracle.hpp"

#include <naqmd/adiabatic.hpp>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>

namespace naqmd::oracle {

namespace {

CMatrix random_unitary(std::mt19937_64& rng, Index n)
{
    CMatrix A(n, n);
    std::normal_distribution<double> g;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            A(i, j) = Complex(g(rng), g(rng));
        }
    }
    Eigen::HouseholderQR<CMatrix> qr(A);
    return qr.householderQ() * CMatrix::Identity(n, n);
}

} // namespace

AbsorberPropertyReport absorber_property_suite(int trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(2, 12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AbsorberPropertyReport report;
    for (int trial = 0; trial < trials; ++trial) {
        const Index n = size(rng);
        AbsorberSpec spec;
        spec.tau_min = 0.5 + 20.0 * u(rng);
        spec.e_ref = 0.05 + u(rng);
        const Matrix S = random_overlap(rng, n, 0.5 * u(rng));
        const Orthogonalizer ortho = Orthogonalizer::canonical(S);
        const Matrix Sinv = ortho.inverse_overlap();

        // Spectrum with deliberate degeneracies straddling zero, on the retained subspace.
        const Index k = ortho.kept();
        std::vector<double> levels;
        while (static_cast<Index>(levels.size()) < k) {
            const double e = -1.0 + 2.0 * u(rng);
            const int multiplicity =
                std::min<int>(1 + static_cast<int>(3.0 * u(rng)), static_cast<int>(k) - static_cast<int>(levels.size()));
            levels.insert(levels.end(), static_cast<std::size_t>(multiplicity), e);
        }
        const Vector eps = Vector::Map(levels.data(), k);
        const CMatrix Q = random_unitary(rng, k);
        const Matrix SX = S * ortho.X();
        CMatrix H = SX * Q * eps.asDiagonal() * Q.adjoint() * SX.transpose();
        H = 0.5 * (H + H.adjoint());

        const AdiabaticFrame frame = solve_field_following(H, S);
        const CMatrix V = build_vabs(frame, spec, S);

        // Random multi-orbital states.
        const Index columns = 1 + trial % 2;
        CMatrix a(n, columns);
        for (Index j = 0; j < columns; ++j) {
            a.col(j) = random_state(rng, n);
        }
        report.max_norm_rate = std::max(report.max_norm_rate, norm_decay_rate(a, V) / a.squaredNorm());
        report.max_absorption =
            std::max(report.max_absorption, energy_absorption_rate(a, V, H, Sinv) / a.squaredNorm());

        // Spectral form of the quadratic form.
        const Vector f = absorber_strengths(frame.energies, spec);
        double spectral = 0.0;
        for (Index j = 0; j < columns; ++j) {
            const CVector c = coeffs_to_adiabatic(a.col(j), frame, S);
            spectral += (f.array() * c.cwiseAbs2().array()).sum();
        }
        const double quadratic = (a.adjoint() * V * a).trace().real();
        report.max_spectral_mismatch =
            std::max(report.max_spectral_mismatch, std::abs(quadratic - spectral) / a.squaredNorm());

        // States built from non-positive frame energies only.
        CVector c_bound = CVector::Zero(frame.n_kept);
        for (Index k = 0; k < frame.n_kept; ++k) {
            if (frame.energies(k) <= 0.0) {
                c_bound(k) = Complex(u(rng) - 0.5, u(rng) - 0.5);
            }
        }
        const CMatrix bound = coeffs_from_adiabatic(c_bound, frame);
        const double scale = std::max(1.0, bound.squaredNorm());
        report.max_bound_rate = std::max(report.max_bound_rate, std::abs(norm_decay_rate(bound, V)) / scale);
        report.max_bound_rate =
            std::max(report.max_bound_rate, std::abs(energy_absorption_rate(bound, V, H, Sinv)) / scale);

        // Rotations inside (numerically) degenerate subspaces leave V_abs unchanged.
        AdiabaticFrame rotated = frame;
        Index start = 0;
        while (start < frame.n_kept) {
            Index end = start + 1;
            while (end < frame.n_kept && frame.energies(end) - frame.energies(start) < 1e-9) {
                ++end;
            }
            const Index m = end - start;
            const CMatrix R = random_unitary(rng, m);
            rotated.U.middleRows(start, m) = R * frame.U.middleRows(start, m);
            start = end;
        }
        const CMatrix V_rot = build_vabs(rotated, spec, S);
        report.max_rotation_change = std::max(report.max_rotation_change, (V_rot - V).cwiseAbs().maxCoeff());
        ++report.trials;
    }
    return report;
}

bool passes(const AbsorberPropertyReport& report)
{
    return report.max_norm_rate <= property_sign_tolerance && report.max_absorption <= property_sign_tolerance &&
           report.max_bound_rate <= property_bound_tolerance &&
           report.max_rotation_change <= property_rotation_tolerance && report.max_spectral_mismatch <= 1e-12;
}

} // namespace naqmd::oracle
