#include "oracle.hpp"

#include <naqmd/dynamics.hpp>
#include <naqmd/simulation.hpp>

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

using namespace naqmd;

namespace {

LaserPulse sin2_pulse(double omega, double amplitude, double T)
{
    LaserPulse p;
    p.envelope = Envelope::Sin2;
    p.omega = omega;
    p.amplitude = amplitude;
    p.duration = T;
    return p;
}

std::shared_ptr<ElectronicHamiltonian> model(const Matrix& core, const Matrix& coupling)
{
    const Index n = core.rows();
    return std::make_shared<ElectronicHamiltonian>(
        ElectronicHamiltonian::from_matrices(Matrix::Identity(n, n), core, coupling));
}

RunSpec hydrogen_run(double omega, double intensity, double T)
{
    RunSpec spec;
    spec.system.kind = SystemKind::H;
    spec.pulse = sin2_pulse(omega, LaserPulse::amplitude_from_intensity(intensity), T);
    return spec;
}

/// Largest |E(t) - E(0) - int_0^t rhs| along a uniformly sampled record (trapezoid rule).
double energy_balance_mismatch(const TrajectoryRecord& r)
{
    double integral = 0.0;
    double worst = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) {
        integral += 0.5 * (r.energy_rate[i] + r.energy_rate[i - 1]) * (r.time[i] - r.time[i - 1]);
        worst = std::max(worst, std::abs(r.energy[i] - r.energy[0] - integral));
    }
    return worst;
}

} // namespace

TEST(LaserPulse, Sin2Envelope)
{
    const LaserPulse p = sin2_pulse(0.3, 0.05, 40.0);
    EXPECT_DOUBLE_EQ(p.shape(40.0), 1.0);
    EXPECT_EQ(p.shape(0.0), 0.0);
    EXPECT_NEAR(p.shape(80.0), 0.0, 1e-15);
    EXPECT_EQ(p.shape(-1.0), 0.0);
    EXPECT_EQ(p.shape(81.0), 0.0);
    EXPECT_NEAR(p.default_final_time(), 80.0 + 500.0, 1e-12);
    EXPECT_NEAR(p.field(13.0), 0.05 * p.shape(13.0) * std::sin(0.3 * 13.0), 1e-15);
}

TEST(LaserPulse, ThreeCycleTurnOnAt266nm)
{
    LaserPulse p;
    p.envelope = Envelope::CWCycles;
    p.cycles = 3;
    p.omega = units::omega_from_nm(266.0);
    p.amplitude = 0.01;
    EXPECT_NEAR(p.omega, 0.171, 5e-4);
    const double ramp = 3.0 * 2.0 * std::numbers::pi / p.omega;
    EXPECT_NEAR(p.ramp_end(), ramp, 1e-12);
    for (double t = ramp; t < ramp + 200.0; t += 7.3) {
        EXPECT_DOUBLE_EQ(p.shape(t), 1.0);
    }
    EXPECT_LT(p.shape(0.5 * ramp), 1.0);
}

TEST(LaserPulse, QuasiCwRampShapes)
{
    LaserPulse p;
    p.envelope = Envelope::QuasiCW;
    p.omega = 0.21;
    p.amplitude = 0.03;
    p.turn_on = units::au_time_per_fs;
    EXPECT_NEAR(p.shape(0.5 * p.turn_on), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(p.shape(2.0 * p.turn_on), 1.0);
    p.ramp = RampShape::Linear;
    EXPECT_NEAR(p.shape(0.25 * p.turn_on), 0.25, 1e-12);
}

TEST(LaserPulse, DerivativesMatchFiniteDifferences)
{
    for (auto envelope : {Envelope::Sin2, Envelope::QuasiCW, Envelope::CWCycles}) {
        LaserPulse p = sin2_pulse(0.2, 0.04, 60.0);
        p.envelope = envelope;
        p.turn_on = 30.0;
        p.cycles = 2;
        const double h = 1e-5;
        for (double t = 1.0; t < 110.0; t += 3.7) {
            const double fd = (p.field(t + h) - p.field(t - h)) / (2.0 * h);
            EXPECT_NEAR(p.field_derivative(t), fd, 1e-8) << to_string(envelope) << " t=" << t;
        }
    }
}

TEST(LaserPulse, IntensityConversionAndValidation)
{
    EXPECT_NEAR(LaserPulse::amplitude_from_intensity(3.509445e16), 1.0, 1e-12);
    LaserPulse p = sin2_pulse(0.0, 0.1, 10.0);
    EXPECT_THROW(p.validate(), ValidationError);
    p = sin2_pulse(0.1, 0.1, 0.0);
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(EffectiveHamiltonian, LengthGaugeCouplingIsLinear)
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, 2.0, 0.0);
    const BasisSet basis = build_basis(default_recipe(SystemKind::H2plus_aligned), nuclei);
    const auto M = one_electron_matrices(basis, nuclei);
    const ElectronicHamiltonian H(M, nuclei, Vec3::UnitZ());
    const CMatrix a = CMatrix::Zero(basis.size(), 1);
    const double F = 0.037;
    const CMatrix diff = H.local_hamiltonian(F, a) - H.local_hamiltonian(0.0, a);
    EXPECT_LT((diff - F * M.dipole[2].cast<Complex>()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EffectiveHamiltonian, HydrogenGroundStateEnergy)
{
    const auto H = build_hamiltonian(SystemSetup{.kind = SystemKind::H}, Vec3::UnitZ());
    const CMatrix b = H->ground_state(0.0);
    EXPECT_NEAR(H->energy(0.0, b), -0.5, 1e-6);
}

TEST(EffectiveHamiltonian, MolecularIonGroundStateEnergy)
{
    SystemSetup setup{SystemKind::H2plus_aligned};
    setup.distance = 1.9975;
    const auto H = build_hamiltonian(setup, Vec3::UnitZ());
    const CMatrix b = H->ground_state(0.0);
    EXPECT_NEAR(H->energy(0.0, b), -0.60246, 5e-4);
}

TEST(ElectronicRhs, StationaryStateRotatesInPhase)
{
    std::mt19937_64 rng(51);
    const Index n = 6;
    const Matrix S = oracle::random_overlap(rng, n);
    const CMatrix H = oracle::random_hermitian(rng, n);
    const auto frame = solve_field_following(H, S);
    const Matrix Sinv = Orthogonalizer::canonical(S).inverse_overlap();
    const CVector a = frame.U.row(2).transpose();
    const CMatrix zero = CMatrix::Zero(n, n);
    const CMatrix rhs = electronic_rhs(a, H, zero, zero, Sinv);
    const CVector expected = Complex(0.0, -frame.energies(2)) * a;
    EXPECT_LT((rhs.col(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR((a.adjoint() * S * rhs).real()(0, 0), 0.0, 1e-12);
}

TEST(Propagation, SingleModeDecay)
{
    Matrix core = Matrix::Zero(2, 2);
    core.diagonal() << -0.5, 0.5;
    const auto H = model(core, Matrix::Zero(2, 2));
    const AbsorberSpec absorber;
    const double f = absorber_strength(0.5, absorber);
    CMatrix a0 = CMatrix::Zero(2, 1);
    a0(1, 0) = 1.0;
    for (auto kind : {PropagatorKind::Exponential, PropagatorKind::Lawson, PropagatorKind::RungeKutta}) {
        IntegratorOptions options;
        options.kind = kind;
        FixedNucleiPropagator P(H, LaserPulse{}, absorber, options, a0);
        P.run(20.0);
        EXPECT_NEAR(P.diagnostics().norm, std::exp(-2.0 * f * 20.0), 1e-8) << to_string(kind);
    }
}

TEST(Propagation, RabiOscillationMatchesClosedForm)
{
    const double v = 0.07;
    Matrix core(2, 2);
    core << 0.0, v, v, 0.0;
    const auto H = model(core, Matrix::Zero(2, 2));
    AbsorberSpec off;
    off.enabled = false;
    CMatrix a0 = CMatrix::Zero(2, 1);
    a0(0, 0) = 1.0;
    for (auto kind : {PropagatorKind::Exponential, PropagatorKind::Lawson, PropagatorKind::RungeKutta}) {
        IntegratorOptions options;
        options.kind = kind;
        FixedNucleiPropagator P(H, LaserPulse{}, off, options, a0);
        double worst = 0.0;
        for (double t = 5.0; t <= 300.0; t += 5.0) {
            P.run(t);
            const double p2 = std::norm(P.local_coefficients()(1, 0));
            worst = std::max(worst, std::abs(p2 - std::pow(std::sin(v * t), 2)));
        }
        EXPECT_LT(worst, 1e-6) << to_string(kind);
    }
}

TEST(Propagation, StrongAbsorberFreezesGroundState)
{
    // Resonant driving between a bound and a continuum level. The frame is the static one, so
    // the absorbed state is the model's second basis state, with lifetime tau_min -> 0.
    Matrix core = Matrix::Zero(2, 2);
    core.diagonal() << -0.05, 0.05;
    Matrix coupling(2, 2);
    coupling << 0.0, 1.0, 1.0, 0.0;
    const auto H = model(core, coupling);
    LaserPulse pulse;
    pulse.envelope = Envelope::CWCycles;
    pulse.cycles = 1;
    pulse.omega = 0.1;
    pulse.amplitude = 0.05;
    IntegratorOptions options;
    options.field_in_frame = false;
    CMatrix a0 = CMatrix::Zero(2, 1);
    a0(0, 0) = 1.0;

    AbsorberSpec off;
    off.enabled = false;
    FixedNucleiPropagator free(H, pulse, off, options, a0);
    double min_free = 1.0;
    while (free.time() < 2000.0) {
        free.step(2000.0);
        min_free = std::min(min_free, std::norm(free.local_coefficients()(0, 0)));
    }
    EXPECT_LT(min_free, 0.01);

    const AbsorberSpec strong{1e-5, 0.01, true};
    FixedNucleiPropagator frozen(H, pulse, strong, options, a0);
    double min_frozen = 1.0;
    while (frozen.time() < 2000.0) {
        frozen.step(2000.0);
        min_frozen = std::min(min_frozen, std::norm(frozen.local_coefficients()(0, 0)));
    }
    EXPECT_GT(min_frozen, 1.0 - 1e-3);
}

TEST(Propagation, FieldFreeHydrogenIsStationary)
{
    RunSpec spec;
    spec.system.kind = SystemKind::H;
    spec.absorber.enabled = false;
    const auto H = build_hamiltonian(spec.system, Vec3::UnitZ());
    FixedNucleiPropagator P(H, LaserPulse{}, spec.absorber, spec.integrator, H->to_local(H->ground_state(0.0)));
    for (int k = 0; k < 1000; ++k) {
        P.step(1e9);
    }
    const auto d = P.diagnostics();
    EXPECT_GE(P.statistics().accepted, 1000u);
    EXPECT_LT(std::abs(d.norm - 1.0), 1e-10);
    EXPECT_LT(std::abs(d.energy + 0.5), 1e-8);
}

TEST(Propagation, NormIsNonIncreasingAndRateMatchesNorm)
{
    RunSpec spec = hydrogen_run(0.55, 8.78e13, 20.0);
    spec.t_final = 60.0;
    spec.sample_interval = 0.01;
    const auto result = run_trajectory(spec);
    const auto& r = result.record;
    for (std::size_t i = 1; i < r.size(); ++i) {
        EXPECT_LE(r.norm[i], r.norm[i - 1] + 10.0 * spec.integrator.rtol);
        EXPECT_LE(r.norm_rate[i], 0.0);
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double fd = (r.norm[i + 1] - r.norm[i - 1]) / (r.time[i + 1] - r.time[i - 1]);
        worst = std::max(worst, std::abs(fd - r.norm_rate[i]));
    }
    EXPECT_LT(worst, 1e-6);
    EXPECT_GT(1.0 - r.norm.back(), 1e-3);
}

TEST(Propagation, EnergyBalanceClosesOnDrivenAbsorbingRun)
{
    RunSpec spec = hydrogen_run(0.55, 8.78e13, 20.0);
    spec.t_final = 60.0;
    spec.sample_interval = 0.01;
    const auto result = run_trajectory(spec);
    const double change = std::abs(result.record.energy.back() - result.record.energy.front());
    EXPECT_GT(change, 1e-2);
    EXPECT_LT(energy_balance_mismatch(result.record), 1e-7);
}

TEST(Propagation, HalvingTolerancesBarelyChangesIonization)
{
    RunSpec spec = hydrogen_run(0.55, 8.78e13, units::au_time_per_fs);
    const double coarse = run_trajectory(spec).ionization;
    spec.integrator.rtol *= 0.5;
    spec.integrator.atol *= 0.5;
    const double fine = run_trajectory(spec).ionization;
    EXPECT_GT(coarse, 0.05);
    EXPECT_LT(std::abs(coarse - fine), 1e-4);
}

TEST(Propagation, PropagatorsAgreeOnDrivenHydrogen)
{
    RunSpec spec = hydrogen_run(0.55, 8.78e13, 10.0);
    spec.t_final = 40.0;
    const double reference = run_trajectory(spec).ionization;
    for (auto kind : {PropagatorKind::Lawson, PropagatorKind::RungeKutta}) {
        spec.integrator.kind = kind;
        EXPECT_NEAR(run_trajectory(spec).ionization, reference, 1e-6) << to_string(kind);
    }
}

TEST(Propagation, RotatingMoleculeAndFieldTogetherIsCovariant)
{
    BasisRecipe recipe;
    recipe.nuclear = {{0, 0.3, 4, 2.0}, {1, 0.8, 2, 1.7}, {2, 1.5, 1, 1.7}};
    recipe.grids = {{3.0, 4.0, 3, 3}};
    recipe.chains = {{3.0, 4.0, 3}};
    const LaserPulse base = sin2_pulse(0.3, 0.05, 20.0);
    const auto run = [&](const Eigen::Matrix3d& Q) {
        auto nuclei = system_nuclei(SystemKind::H2plus_3d, 2.0, 0.4);
        for (auto& n : nuclei) {
            n.position = Q * n.position;
        }
        BasisRecipe r = recipe;
        r.frame = Q;
        const BasisSet basis = build_basis(r, nuclei);
        LaserPulse pulse = base;
        pulse.polarization = Q * Vec3::UnitZ();
        const auto H = std::make_shared<ElectronicHamiltonian>(one_electron_matrices(basis, nuclei), nuclei,
                                                               pulse.polarization);
        FixedNucleiPropagator P(H, pulse, AbsorberSpec{}, IntegratorOptions{}, H->to_local(H->ground_state(0.0)));
        P.run(50.0);
        return P.diagnostics();
    };
    const auto a = run(Eigen::Matrix3d::Identity());
    const Eigen::Matrix3d Q = (Eigen::AngleAxisd(0.7, Vec3(0.3, -0.5, 0.8).normalized())).toRotationMatrix();
    const auto b = run(Q);
    EXPECT_GT(1.0 - a.norm, 1e-5);
    EXPECT_NEAR(a.norm, b.norm, 1e-8);
    EXPECT_NEAR(a.energy, b.energy, 1e-8);
}

class MolecularForces : public ::testing::Test {
protected:
    static std::vector<Vec3> force_at(double R)
    {
        const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, R, 0.0);
        const BasisSet basis = build_basis(default_recipe(SystemKind::H2plus_aligned), nuclei);
        const NuclearState state = NuclearState::at_rest(nuclei);
        const CMatrix a = MobileNucleiPropagator::ground_state(basis, nuclei, 0.0, Vec3::UnitZ());
        return MobileNucleiPropagator::ehrenfest_force(basis, state, a, 0.0, Vec3::UnitZ(), 1e-3);
    }
    static double curve_energy(double R)
    {
        SystemSetup setup{SystemKind::H2plus_aligned};
        setup.distance = R;
        const auto H = build_hamiltonian(setup, Vec3::UnitZ());
        return H->energy(0.0, H->ground_state(0.0));
    }
};

TEST_F(MolecularForces, NearlyZeroAtEquilibrium)
{
    const auto F = force_at(1.9975);
    EXPECT_LT(F[0].norm(), 1e-3);
    EXPECT_LT(F[1].norm(), 1e-3);
}

TEST_F(MolecularForces, StretchedBondPullsInward)
{
    const auto F = force_at(3.0);
    // Nucleus 1 sits at +R/2 on z, so an attractive force points along -z, and the pair balances.
    EXPECT_LT(F[1](2), -1e-3);
    EXPECT_GT(F[0](2), 1e-3);
    EXPECT_NEAR((F[0] + F[1]).norm(), 0.0, 1e-6);
    const double h = 1e-3;
    const double slope = (curve_energy(3.0 + h) - curve_energy(3.0 - h)) / (2.0 * h);
    EXPECT_GT(slope, 0.0);
    EXPECT_NEAR(F[1](2), -slope, 1e-5);
}

TEST_F(MolecularForces, AntisymmetricAboutEquilibrium)
{
    const double r_eq = 1.9975;
    const double delta = 0.02;
    const double plus = force_at(r_eq + delta)[1](2);
    const double minus = force_at(r_eq - delta)[1](2);
    EXPECT_LT(plus, 0.0);
    EXPECT_GT(minus, 0.0);
    EXPECT_LT(std::abs(plus + minus), 0.1 * std::abs(plus));
}

TEST(MobileNuclei, FieldFreeTotalEnergyIsConserved)
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, 2.6, 0.0);
    const BasisSet basis = build_basis(default_recipe(SystemKind::H2plus_aligned), nuclei);
    const CMatrix a0 = MobileNucleiPropagator::ground_state(basis, nuclei, 0.0, Vec3::UnitZ());
    AbsorberSpec off;
    off.enabled = false;
    MobileNucleiPropagator P(basis, NuclearState::at_rest(nuclei), LaserPulse{}, off, IntegratorOptions{}, a0);
    const auto record = P.run(100.0, 10.0);
    double drift = 0.0;
    for (std::size_t i = 0; i < record.size(); ++i) {
        drift = std::max(drift, std::abs(record.energy[i] - record.energy[0]));
        EXPECT_NEAR(record.norm[i], 1.0, 1e-6);
    }
    EXPECT_LT(record.distance.back(), 2.6);
    EXPECT_LT(drift, 1e-5);
}

TEST(MobileNuclei, RejectsInvalidNuclearState)
{
    NuclearState state = NuclearState::at_rest(system_nuclei(SystemKind::H2plus_aligned, 2.0, 0.0));
    state.masses[0] = 0.0;
    EXPECT_THROW(state.validate(), ValidationError);
}
