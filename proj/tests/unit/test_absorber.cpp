#include "oracle.hpp"
#include "properties.hpp"

#include <naqmd/absorber.hpp>
#include <naqmd/adiabatic.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace naqmd;

TEST(Lifetime, BoundStatesLiveForever)
{
    const AbsorberSpec spec;
    EXPECT_TRUE(std::isinf(lifetime(-0.5, spec)));
    EXPECT_TRUE(std::isinf(lifetime(0.0, spec)));
    EXPECT_EQ(absorber_strength(-0.5, spec), 0.0);
}

TEST(Lifetime, AtReferenceEnergy)
{
    const AbsorberSpec spec;
    EXPECT_DOUBLE_EQ(lifetime(spec.e_ref, spec), spec.tau_min);
    EXPECT_DOUBLE_EQ(lifetime(3.0, spec), spec.tau_min);
}

TEST(Lifetime, HalfReferenceEnergyDoublesLifetime)
{
    const AbsorberSpec spec;
    EXPECT_NEAR(lifetime(spec.e_ref / 2.0, spec), 2.0 * spec.tau_min, 1e-12);
}

TEST(Lifetime, DefaultsAreFiveAndPointThree)
{
    const AbsorberSpec spec;
    EXPECT_EQ(spec.tau_min, 5.0);
    EXPECT_EQ(spec.e_ref, 0.3);
}

TEST(Strength, FromLifetime)
{
    EXPECT_EQ(strength_from_lifetime(std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_DOUBLE_EQ(strength_from_lifetime(5.0), 0.1);
    EXPECT_DOUBLE_EQ(strength_from_lifetime(10.0), 0.05);
}

TEST(Strength, ConsistentWithLifetimeAndContinuousAtThreshold)
{
    const AbsorberSpec spec{3.0, 0.4, true};
    for (double e = -0.2; e < 1.0; e += 0.013) {
        EXPECT_NEAR(absorber_strength(e, spec), strength_from_lifetime(lifetime(e, spec)), 1e-15);
    }
    EXPECT_LT(absorber_strength(1e-6, spec), 1e-10);
    EXPECT_NEAR(absorber_strength(spec.e_ref * (1 - 1e-9), spec), absorber_strength(spec.e_ref, spec), 1e-12);
}

TEST(Strength, DisabledSpecGivesZero)
{
    AbsorberSpec spec;
    spec.enabled = false;
    EXPECT_EQ(absorber_strength(1.0, spec), 0.0);
}

TEST(Strength, ValidationRejectsNonPositiveParameters)
{
    EXPECT_THROW((AbsorberSpec{0.0, 0.3, true}.validate()), ValidationError);
    EXPECT_THROW((AbsorberSpec{5.0, -0.3, true}.validate()), ValidationError);
    EXPECT_NO_THROW(AbsorberSpec{}.validate());
}

TEST(BuildVabs, AllBoundFrameGivesZero)
{
    std::mt19937_64 rng(41);
    const Index n = 6;
    const Matrix S = oracle::random_overlap(rng, n);
    CMatrix H = oracle::random_hermitian(rng, n);
    const auto shifted = solve_field_following(H, S);
    const double top = shifted.energies.maxCoeff();
    H -= (top + 0.1) * S.cast<Complex>();
    const auto frame = solve_field_following(H, S);
    ASSERT_LT(frame.energies.maxCoeff(), 0.0);
    const CMatrix V = build_vabs(frame, AbsorberSpec{}, S);
    EXPECT_EQ(V.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildVabs, OrthonormalSingleContinuumState)
{
    const AbsorberSpec spec;
    Matrix H = Matrix::Zero(3, 3);
    H.diagonal() << -0.5, -0.1, spec.e_ref;
    const Matrix S = Matrix::Identity(3, 3);
    const auto frame = solve_field_following(H, S);
    const CMatrix V = build_vabs(frame, spec, S);
    CMatrix expected = CMatrix::Zero(3, 3);
    expected(2, 2) = 1.0 / (2.0 * spec.tau_min);
    EXPECT_LT((V - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildVabs, QuadraticFormIsSpectralSum)
{
    std::mt19937_64 rng(42);
    const Index n = 8;
    const AbsorberSpec spec{2.0, 0.5, true};
    const Matrix S = oracle::random_overlap(rng, n);
    const CMatrix H = oracle::random_hermitian(rng, n);
    const auto frame = solve_field_following(H, S);
    const CMatrix V = build_vabs(frame, spec, S);
    EXPECT_LT((V - V.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    const CVector a = oracle::random_state(rng, n);
    const CVector c = coeffs_to_adiabatic(a, frame, S);
    double spectral = 0.0;
    for (Index k = 0; k < n; ++k) {
        spectral += absorber_strength(frame.energies(k), spec) * std::norm(c(k));
    }
    EXPECT_NEAR((a.adjoint() * V * a)(0).real(), spectral, 1e-12 * std::max(1.0, spectral));
}

TEST(NormDecay, ZeroPotential)
{
    std::mt19937_64 rng(43);
    const CVector a = oracle::random_state(rng, 5);
    EXPECT_EQ(norm_decay_rate(a, CMatrix::Zero(5, 5)), 0.0);
    EXPECT_EQ(energy_absorption_rate(a, CMatrix::Zero(5, 5), oracle::random_hermitian(rng, 5), Matrix::Identity(5, 5)),
              0.0);
}

TEST(NormDecay, SingleAdiabaticState)
{
    std::mt19937_64 rng(44);
    const Index n = 6;
    const AbsorberSpec spec{4.0, 0.6, true};
    const Matrix S = oracle::random_overlap(rng, n);
    const CMatrix H = oracle::random_hermitian(rng, n);
    const auto frame = solve_field_following(H, S);
    const CMatrix V = build_vabs(frame, spec, S);
    const Matrix Sinv = Orthogonalizer::canonical(S).inverse_overlap();
    const Index top = n - 1;
    ASSERT_GT(frame.energies(top), 0.0);
    const Complex amp(0.6, -0.3);
    CVector c = CVector::Zero(n);
    c(top) = amp;
    const CVector a = coeffs_from_adiabatic(c, frame);
    const double f = absorber_strength(frame.energies(top), spec);
    EXPECT_NEAR(norm_decay_rate(a, V), -2.0 * f * std::norm(amp), 1e-12);
    EXPECT_NEAR(energy_absorption_rate(a, V, H, Sinv), -2.0 * f * frame.energies(top) * std::norm(amp), 1e-12);
}

TEST(AbsorptionSpectrum, PerStateWeights)
{
    std::mt19937_64 rng(45);
    const Index n = 5;
    const AbsorberSpec spec;
    const Matrix S = oracle::random_overlap(rng, n);
    const CMatrix H = oracle::random_hermitian(rng, n);
    const auto frame = solve_field_following(H, S);
    CMatrix a(n, 2);
    a.col(0) = oracle::random_state(rng, n);
    a.col(1) = oracle::random_state(rng, n);
    const Vector spectrum = absorption_spectrum(a, frame, S, spec);
    const CMatrix V = build_vabs(frame, spec, S);
    EXPECT_NEAR(-0.5 * norm_decay_rate(a, V), spectrum.sum(), 1e-12 * std::max(1.0, spectrum.sum()));
}

TEST(Properties, RandomizedSuite)
{
    const auto report = oracle::absorber_property_suite(1000, 2024);
    EXPECT_EQ(report.trials, 1000);
    EXPECT_LE(report.max_norm_rate, oracle::property_sign_tolerance);
    EXPECT_LE(report.max_absorption, oracle::property_sign_tolerance);
    EXPECT_LE(report.max_bound_rate, oracle::property_bound_tolerance);
    EXPECT_LE(report.max_rotation_change, oracle::property_rotation_tolerance);
    EXPECT_LE(report.max_spectral_mismatch, 1e-12);
}
