#include "naqmd/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace naqmd {

namespace {

constexpr Complex I(0.0, 1.0);

// Dormand-Prince 4(5) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5.0, 0, 0, 0, 0, 0},
    {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0, 0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0, 0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0, 0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
constexpr double kB5[7] = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0};
constexpr double kB4[7] = {5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0,
                           187.0 / 2100.0, 1.0 / 40.0};

/// One Dormand-Prince step: fifth-order solution and embedded error estimate.
template <class Rhs>
void dormand_prince(Rhs&& rhs, const CMatrix& y0, double dt, bool first_stage_zero, CMatrix& y5, CMatrix& err,
                    std::size_t& evaluations)
{
    std::array<CMatrix, 7> k;
    if (first_stage_zero) {
        k[0] = CMatrix::Zero(y0.rows(), y0.cols());
    } else {
        k[0] = rhs(0.0, y0);
        ++evaluations;
    }
    for (int s = 1; s < 7; ++s) {
        CMatrix y = y0;
        for (int j = 0; j < s; ++j) {
            if (kA[s][j] != 0.0) {
                y += (dt * kA[s][j]) * k[static_cast<std::size_t>(j)];
            }
        }
        if (s == 6) {
            y5 = y;
        }
        k[static_cast<std::size_t>(s)] = rhs(kC[s] * dt, y);
        ++evaluations;
    }
    err = CMatrix::Zero(y0.rows(), y0.cols());
    for (int j = 0; j < 7; ++j) {
        const double e = kB5[j] - kB4[j];
        if (e != 0.0) {
            err += (dt * e) * k[static_cast<std::size_t>(j)];
        }
    }
}

/// phi_1, phi_2, phi_3 of z, by Taylor series near zero and by recurrence elsewhere.
void phi_functions(Complex z, Complex& p1, Complex& p2, Complex& p3)
{
    if (std::abs(z) < 1.0) {
        // phi_k(z) = sum_j z^j / (j + k)!
        Complex term1 = 1.0;
        Complex term2 = 0.5;
        Complex term3 = 1.0 / 6.0;
        p1 = p2 = p3 = 0.0;
        for (int j = 0; j < 30; ++j) {
            p1 += term1;
            p2 += term2;
            p3 += term3;
            term1 *= z / static_cast<double>(j + 2);
            term2 *= z / static_cast<double>(j + 3);
            term3 *= z / static_cast<double>(j + 4);
        }
        return;
    }
    p1 = (std::exp(z) - 1.0) / z;
    p2 = (p1 - 1.0) / z;
    p3 = (p2 - 0.5) / z;
}

/// Diagonal weights of one Cox-Matthews step of length h for u' = -lambda u + N(u, tau).
struct EtdWeights {
    double h = 0.0;
    CVector full;
    CVector half;
    CVector half_phi1;
    CVector wu;
    CVector wab;
    CVector wc;
};

EtdWeights etd_weights(const CVector& lambda, double h)
{
    const Index n = lambda.size();
    EtdWeights w;
    w.h = h;
    w.full.resize(n);
    w.half.resize(n);
    w.half_phi1.resize(n);
    w.wu.resize(n);
    w.wab.resize(n);
    w.wc.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Complex z = -lambda(i) * h;
        Complex p1, p2, p3, q1, q2, q3;
        phi_functions(z, p1, p2, p3);
        phi_functions(0.5 * z, q1, q2, q3);
        w.full(i) = std::exp(z);
        w.half(i) = std::exp(0.5 * z);
        w.half_phi1(i) = 0.5 * h * q1;
        w.wu(i) = h * (p1 - 3.0 * p2 + 4.0 * p3);
        w.wab(i) = h * 2.0 * (p2 - 2.0 * p3);
        w.wc(i) = h * (4.0 * p3 - p2);
    }
    return w;
}

/// One Cox-Matthews ETDRK4 step from tau0; `nu` is N(tau0, u).
template <class Nonlinear>
CMatrix etd4_step(Nonlinear&& nonlinear, const CMatrix& u, const CMatrix& nu, double tau0, const EtdWeights& w,
                  std::size_t& evaluations)
{
    const double h = w.h;
    const CMatrix eu = w.half.asDiagonal() * u;
    const CMatrix a = eu + w.half_phi1.asDiagonal() * nu;
    const CMatrix na = nonlinear(tau0 + 0.5 * h, a);
    const CMatrix b = eu + w.half_phi1.asDiagonal() * na;
    const CMatrix nb = nonlinear(tau0 + 0.5 * h, b);
    const CMatrix c = w.half.asDiagonal() * a + w.half_phi1.asDiagonal() * (2.0 * nb - nu);
    const CMatrix nc = nonlinear(tau0 + h, c);
    evaluations += 3;
    return w.full.asDiagonal() * u + w.wu.asDiagonal() * nu + w.wab.asDiagonal() * (na + nb) +
           w.wc.asDiagonal() * nc;
}

/// A full step and two half steps; returns the two-half-step result and the Richardson
/// error estimate of that result.
template <class Nonlinear>
void etd4_doubling(Nonlinear&& nonlinear, const CVector& lambda, const CMatrix& u0, double h, CMatrix& u1,
                   CMatrix& err, std::size_t& evaluations)
{
    const CMatrix n0 = nonlinear(0.0, u0);
    ++evaluations;
    const EtdWeights full = etd_weights(lambda, h);
    const EtdWeights half = etd_weights(lambda, 0.5 * h);
    const CMatrix coarse = etd4_step(nonlinear, u0, n0, 0.0, full, evaluations);
    const CMatrix mid = etd4_step(nonlinear, u0, n0, 0.0, half, evaluations);
    const CMatrix nmid = nonlinear(0.5 * h, mid);
    ++evaluations;
    u1 = etd4_step(nonlinear, mid, nmid, 0.5 * h, half, evaluations);
    err = (u1 - coarse) / 15.0;
}

/// RMS of |e_i| / (atol + rtol max(|y0_i|, |y1_i|)).
double scaled_error(const CMatrix& e, const CMatrix& y0, const CMatrix& y1, double atol, double rtol)
{
    double sum = 0.0;
    for (Index j = 0; j < e.cols(); ++j) {
        for (Index i = 0; i < e.rows(); ++i) {
            const double sc = atol + rtol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
            const double r = std::abs(e(i, j)) / sc;
            sum += r * r;
        }
    }
    const double v = std::sqrt(sum / static_cast<double>(e.size()));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// One attempted step of c' = -lambda c + N(tau, c) from tau0 to tau0 + h with an exponential
/// scheme; returns the scaled error. `frame_current` marks N(tau0, c0) = 0 (Lawson shortcut).
template <class Nonlinear>
double exponential_attempt(PropagatorKind kind, Nonlinear&& nonlinear, const CVector& lambda, const CMatrix& c0,
                           double tau0, double h, bool frame_current, const IntegratorOptions& opt, CMatrix& c1,
                           std::size_t& evaluations)
{
    CMatrix ec;
    if (kind == PropagatorKind::Exponential) {
        auto shifted = [&](double tau, const CMatrix& c) -> CMatrix { return nonlinear(tau0 + tau, c); };
        etd4_doubling(shifted, lambda, c0, h, c1, ec, evaluations);
    } else {
        auto rhs = [&](double tau, const CMatrix& w) -> CMatrix {
            const CVector down = (-lambda * tau).array().exp();
            const CVector up = (lambda * tau).array().exp();
            return up.asDiagonal() * nonlinear(tau0 + tau, (down.asDiagonal() * w).eval());
        };
        CMatrix w5;
        CMatrix ew;
        dormand_prince(rhs, c0, h, frame_current, w5, ew, evaluations);
        const CVector down = (-lambda * h).array().exp();
        c1 = down.asDiagonal() * w5;
        ec = down.asDiagonal() * ew;
    }
    return scaled_error(ec, c0, c1, opt.atol, opt.rtol);
}

/// Real matrix times complex matrix.
CMatrix real_times(const Matrix& M, const CMatrix& b)
{
    CMatrix out(M.rows(), b.cols());
    out.real() = M * b.real();
    out.imag() = M * b.imag();
    return out;
}

double growth_factor(double err, double safety)
{
    if (err <= 0.0) {
        return 5.0;
    }
    return std::clamp(safety * std::pow(err, -0.2), 0.2, 5.0);
}

double nuclear_field_term(const std::vector<Nucleus>& nuclei, const Vec3& polarization, double field)
{
    double s = 0.0;
    for (const auto& n : nuclei) {
        s += n.charge * polarization.dot(n.position);
    }
    return -field * s;
}

} // namespace

NuclearState NuclearState::at_rest(const std::vector<Nucleus>& nuclei)
{
    NuclearState s;
    for (const auto& n : nuclei) {
        s.positions.push_back(n.position);
        s.velocities.push_back(Vec3::Zero());
        s.masses.push_back(n.mass);
        s.charges.push_back(n.charge);
    }
    return s;
}

std::vector<Nucleus> NuclearState::nuclei() const
{
    std::vector<Nucleus> out;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        out.push_back(Nucleus{charges[i], masses[i], positions[i]});
    }
    return out;
}

double NuclearState::kinetic_energy() const
{
    double k = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        k += 0.5 * masses[i] * velocities[i].squaredNorm();
    }
    return k;
}

double NuclearState::distance() const
{
    return positions.size() >= 2 ? (positions[1] - positions[0]).norm() : 0.0;
}

void NuclearState::validate() const
{
    const std::size_t n = positions.size();
    if (velocities.size() != n || masses.size() != n || charges.size() != n) {
        throw ValidationError("nuclear state arrays differ in length");
    }
    for (double m : masses) {
        if (!(m > 0.0)) {
            throw ValidationError("nuclear masses must be positive");
        }
    }
}

PropagatorKind parse_propagator(const std::string& name)
{
    if (name == "etd4") {
        return PropagatorKind::Exponential;
    }
    if (name == "lawson") {
        return PropagatorKind::Lawson;
    }
    if (name == "rk45") {
        return PropagatorKind::RungeKutta;
    }
    throw ValidationError(fmt::format("unknown propagator '{}' (expected etd4, lawson or rk45)", name));
}

std::string to_string(PropagatorKind kind)
{
    switch (kind) {
    case PropagatorKind::Exponential:
        return "etd4";
    case PropagatorKind::Lawson:
        return "lawson";
    case PropagatorKind::RungeKutta:
        break;
    }
    return "rk45";
}

void IntegratorOptions::validate() const
{
    if (!(rtol > 0.0) || !(atol > 0.0)) {
        throw ValidationError("integrator tolerances must be positive");
    }
    if (!(dt_initial > 0.0) || !(dt_min > 0.0) || !(dt_max >= dt_min)) {
        throw ValidationError("integrator step bounds must satisfy 0 < dt_min <= dt_max and dt_initial > 0");
    }
    if (!(safety > 0.0 && safety <= 1.0)) {
        throw ValidationError("integrator safety factor must lie in (0, 1]");
    }
    if (!(force_displacement > 0.0)) {
        throw ValidationError("force displacement must be positive");
    }
    if (!(nuclear_step > 0.0)) {
        throw ValidationError("nuclear step must be positive");
    }
}

void record_step(TrajectoryRecord& record, const StepDiagnostics& d)
{
    if (record.orbital_norms.size() != d.orbital_norms.size()) {
        if (!record.empty()) {
            throw ValidationError("orbital count changed along a trajectory");
        }
        record.orbital_norms.assign(d.orbital_norms.size(), {});
    }
    record.time.push_back(d.time);
    for (std::size_t j = 0; j < d.orbital_norms.size(); ++j) {
        record.orbital_norms[j].push_back(d.orbital_norms[j]);
    }
    record.norm.push_back(d.norm);
    record.energy.push_back(d.energy);
    record.distance.push_back(d.distance);
    record.absorption.push_back(d.absorption);
    record.norm_rate.push_back(d.norm_rate);
    record.energy_rate.push_back(d.energy_rate);
    record.field.push_back(d.field);
}

CMatrix electronic_rhs(const CMatrix& a, const CMatrix& H, const CMatrix& vabs, const CMatrix& B,
                       const Matrix& inverse_overlap)
{
    const Index n = a.rows();
    if (H.rows() != n || H.cols() != n || inverse_overlap.rows() != n) {
        throw ValidationError("electronic_rhs: dimension mismatch");
    }
    CMatrix g = I * (H * a);
    if (vabs.size() > 0) {
        g += vabs * a;
    }
    if (B.size() > 0) {
        g += B * a;
    }
    return -real_times(inverse_overlap, g);
}

// ---------------------------------------------------------------------------------------------
// ElectronicHamiltonian

ElectronicHamiltonian::ElectronicHamiltonian(const OneElectronMatrices& matrices, std::vector<Nucleus> nuclei,
                                             const Vec3& polarization, double lin_dep_threshold)
    : overlap_(matrices.overlap), core_(matrices.core()), nuclei_(std::move(nuclei))
{
    if (!(polarization.norm() > 0.0)) {
        throw ValidationError("polarization must be a nonzero vector");
    }
    polarization_ = polarization.normalized();
    dipole_ = matrices.dipole_along(polarization_);
    nuclear_repulsion_ = naqmd::nuclear_repulsion(nuclei_);
    finish(lin_dep_threshold);
}

ElectronicHamiltonian::ElectronicHamiltonian(std::shared_ptr<const FockContext> meanfield, const Matrix& dipole,
                                             std::vector<Nucleus> nuclei, const Vec3& polarization,
                                             double lin_dep_threshold)
    : nuclei_(std::move(nuclei)), meanfield_(std::move(meanfield))
{
    if (!meanfield_) {
        throw ValidationError("closed-shell Hamiltonian needs a Fock context");
    }
    if (!(polarization.norm() > 0.0)) {
        throw ValidationError("polarization must be a nonzero vector");
    }
    polarization_ = polarization.normalized();
    overlap_ = meanfield_->overlap();
    core_ = meanfield_->core();
    dipole_ = dipole;
    if (dipole_.rows() != core_.rows() || dipole_.cols() != core_.cols()) {
        throw ValidationError("dipole matrix dimension does not match the Fock context");
    }
    nuclear_repulsion_ = meanfield_->nuclear_repulsion();
    finish(lin_dep_threshold);
}

ElectronicHamiltonian ElectronicHamiltonian::from_matrices(const Matrix& overlap, const Matrix& core,
                                                           const Matrix& coupling, double lin_dep_threshold)
{
    if (overlap.rows() != core.rows() || coupling.rows() != core.rows() || overlap.cols() != core.cols() ||
        coupling.cols() != core.cols() || core.rows() != core.cols()) {
        throw ValidationError("model matrices must be square and of equal dimension");
    }
    ElectronicHamiltonian h;
    h.overlap_ = overlap;
    h.core_ = core;
    h.dipole_ = coupling;
    h.finish(lin_dep_threshold);
    return h;
}

void ElectronicHamiltonian::finish(double lin_dep_threshold)
{
    ortho_ = Orthogonalizer::canonical(overlap_, lin_dep_threshold);
    core_o_ = ortho_.transform(Matrix(0.5 * (core_ + core_.transpose())));
    core_o_ = 0.5 * (core_o_ + core_o_.transpose()).eval();
    dipole_o_ = ortho_.transform(Matrix(0.5 * (dipole_ + dipole_.transpose())));
    dipole_o_ = 0.5 * (dipole_o_ + dipole_o_.transpose()).eval();
}

CMatrix ElectronicHamiltonian::local_hamiltonian(double field, const CMatrix& a) const
{
    if (meanfield_) {
        const Matrix extra = field * dipole_;
        return meanfield_->fock_matrix(a.col(0), &extra);
    }
    return (core_ + field * dipole_).cast<Complex>();
}

CMatrix ElectronicHamiltonian::meanfield_orthonormal(const CMatrix& b) const
{
    if (!meanfield_) {
        return CMatrix::Zero(kept(), kept());
    }
    const CMatrix a = to_local(b);
    const CMatrix F = meanfield_->fock_matrix(a.col(0)) - meanfield_->core().cast<Complex>();
    const CMatrix G = ortho_.transform(F);
    return 0.5 * (G + G.adjoint());
}

CMatrix ElectronicHamiltonian::hamiltonian(double field, const CMatrix& b) const
{
    CMatrix H = (core_o_ + field * dipole_o_).cast<Complex>();
    if (meanfield_) {
        H += meanfield_orthonormal(b);
    }
    return H;
}

CMatrix ElectronicHamiltonian::apply(double field, const CMatrix& b) const
{
    CMatrix out = real_times(core_o_, b);
    if (field != 0.0) {
        out += field * real_times(dipole_o_, b);
    }
    if (meanfield_) {
        const CMatrix a = to_local(b);
        const CVector g = meanfield_->meanfield_times_orbital(a.col(0));
        out.col(0) += real_times(ortho_.X().transpose(), g);
    }
    return out;
}

double ElectronicHamiltonian::nuclear_field_energy(double field) const
{
    return nuclear_field_term(nuclei_, polarization_, field);
}

double ElectronicHamiltonian::dipole_expectation(const CMatrix& b) const
{
    return occupation() * (b.adjoint() * real_times(dipole_o_, b)).trace().real();
}

double ElectronicHamiltonian::energy(double field, const CMatrix& b) const
{
    const CMatrix hb = real_times(core_o_, b) + field * real_times(dipole_o_, b);
    double e = occupation() * (b.adjoint() * hb).trace().real();
    if (meanfield_) {
        const CMatrix a = to_local(b);
        e += a.col(0).dot(meanfield_->meanfield_times_orbital(a.col(0))).real();
    }
    return e + nuclear_repulsion_ + nuclear_field_energy(field);
}

CMatrix ElectronicHamiltonian::ground_state(double field) const
{
    if (meanfield_) {
        if (field != 0.0) {
            throw ValidationError("closed-shell ground state is only defined at zero field");
        }
        const ScfResult scf = scf_ground_state(*meanfield_);
        CMatrix a(dimension(), 1);
        a.col(0) = scf.orbital;
        return to_orthonormal(a);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(core_o_ + field * dipole_o_);
    return es.eigenvectors().col(0).cast<Complex>();
}

double positive_energy_population(const ElectronicHamiltonian& H, const CMatrix& b, double field)
{
    Vector eps;
    CMatrix Y;
    hermitian_eigen(H.hamiltonian(field, b), eps, Y);
    const CMatrix c = Y.adjoint() * b;
    double p = 0.0;
    for (Index a = 0; a < eps.size(); ++a) {
        if (eps(a) > 0.0) {
            p += c.row(a).squaredNorm();
        }
    }
    return p / static_cast<double>(b.cols());
}

// ---------------------------------------------------------------------------------------------
// FixedNucleiPropagator

FixedNucleiPropagator::FixedNucleiPropagator(std::shared_ptr<const ElectronicHamiltonian> hamiltonian,
                                             LaserPulse pulse, AbsorberSpec absorber, IntegratorOptions options,
                                             const CMatrix& initial_local, double t0)
    : H_(std::move(hamiltonian)), pulse_(std::move(pulse)), absorber_(absorber), opt_(options), t_(t0)
{
    if (!H_) {
        throw ValidationError("propagator needs a Hamiltonian");
    }
    pulse_.validate();
    absorber_.validate();
    opt_.validate();
    if (initial_local.rows() != H_->dimension() || initial_local.cols() != 1) {
        throw ValidationError(fmt::format("initial coefficients must be a {} x 1 column", H_->dimension()));
    }
    b_ = H_->to_orthonormal(initial_local);
    dt_ = opt_.dt_initial;
    state_changed();
}

void FixedNucleiPropagator::state_changed()
{
    meanfield_ = H_->meanfield_orthonormal(b_);
    frame_valid_ = false;
}

void FixedNucleiPropagator::frame_for_field(double field, Vector& eps, CMatrix& Y) const
{
    CMatrix H = (H_->core_orthonormal() + field * H_->dipole_orthonormal()).cast<Complex>();
    if (H_->closed_shell()) {
        H += meanfield_;
    }
    hermitian_eigen(H, eps, Y);
}

void FixedNucleiPropagator::ensure_frame() const
{
    if (frame_valid_) {
        return;
    }
    frame_for_field(opt_.field_in_frame ? pulse_.field(t_) : 0.0, eps_, Y_);
    f_ = naqmd::absorber_strengths(eps_, absorber_);
    frame_valid_ = true;
}

AdiabaticFrame FixedNucleiPropagator::frame() const
{
    ensure_frame();
    AdiabaticFrame fr;
    fr.energies = eps_;
    fr.U = (H_->orthogonalizer().X() * Y_).transpose();
    fr.n_kept = H_->kept();
    return fr;
}

const Vector& FixedNucleiPropagator::frame_energies() const
{
    ensure_frame();
    return eps_;
}

const Vector& FixedNucleiPropagator::absorber_strengths() const
{
    ensure_frame();
    return f_;
}

bool FixedNucleiPropagator::attempt_exponential(double dt, CMatrix& b_new, double& err)
{
    // Frame and absorber from H' at the step midpoint; in frame coordinates c = Y^dagger b both
    // are diagonal.
    Vector eps;
    CMatrix Y;
    frame_for_field(opt_.field_in_frame ? pulse_.field(t_ + 0.5 * dt) : 0.0, eps, Y);
    const Vector f = naqmd::absorber_strengths(eps, absorber_);
    const CVector lambda = (I * eps.cast<Complex>() + f.cast<Complex>()).eval();
    auto nonlinear = [&](double tau, const CMatrix& c) -> CMatrix {
        const CMatrix b = Y * c;
        const CMatrix r = H_->apply(pulse_.field(t_ + tau), b) - Y * (eps.cast<Complex>().asDiagonal() * c);
        return (-I) * (Y.adjoint() * r);
    };
    const CMatrix c0 = Y.adjoint() * b_;
    CMatrix c1;
    err = exponential_attempt(opt_.kind, nonlinear, lambda, c0, 0.0, dt, false, opt_, c1, stats_.rhs_evaluations);
    b_new = Y * c1;
    return err <= 1.0;
}

bool FixedNucleiPropagator::attempt_runge_kutta(double dt, CMatrix& b_new, double& err)
{
    Vector eps;
    CMatrix Y;
    frame_for_field(opt_.field_in_frame ? pulse_.field(t_ + 0.5 * dt) : 0.0, eps, Y);
    AdiabaticFrame fr;
    fr.energies = eps;
    fr.U = (H_->orthogonalizer().X() * Y).transpose();
    fr.n_kept = H_->kept();
    const CMatrix vabs = build_vabs(fr, absorber_, H_->overlap());
    const Matrix sinv = H_->orthogonalizer().inverse_overlap();
    auto rhs = [&](double tau, const CMatrix& a) -> CMatrix {
        return electronic_rhs(a, H_->local_hamiltonian(pulse_.field(t_ + tau), a), vabs, CMatrix(), sinv);
    };
    const CMatrix a0 = H_->to_local(b_);
    CMatrix a5;
    CMatrix ea;
    dormand_prince(rhs, a0, dt, false, a5, ea, stats_.rhs_evaluations);
    err = scaled_error(ea, a0, a5, opt_.atol, opt_.rtol);
    b_new = H_->to_orthonormal(a5);
    return err <= 1.0;
}

void FixedNucleiPropagator::advance(double t_stop)
{
    if (!(t_stop > t_)) {
        throw ValidationError(fmt::format("step target {:.6f} does not lie after t = {:.6f}", t_stop, t_));
    }
    for (;;) {
        const double remaining = t_stop - t_;
        double dt = std::min({dt_, opt_.dt_max, remaining});
        const bool last = dt >= remaining * (1.0 - 1e-12);
        if (last) {
            dt = remaining;
        }
        CMatrix b_new;
        double err = 0.0;
        const bool ok = opt_.kind == PropagatorKind::RungeKutta ? attempt_runge_kutta(dt, b_new, err)
                                                                : attempt_exponential(dt, b_new, err);
        const double factor = growth_factor(err, opt_.safety);
        if (ok && b_new.allFinite()) {
            b_ = b_new;
            t_ = last ? t_stop : t_ + dt;
            last_dt_ = dt;
            dt_ = (last && dt < dt_) ? std::max(dt_, dt * factor) : dt * factor;
            ++stats_.accepted;
            state_changed();
            return;
        }
        ++stats_.rejected;
        dt_ = dt * std::min(factor, 0.9);
        if (dt_ < opt_.dt_min) {
            throw NumericalError(fmt::format("step size underflow at t = {:.6f} (dt = {:.3e}, error {:.3e})", t_,
                                             dt_, err));
        }
    }
}

StepDiagnostics FixedNucleiPropagator::step(double t_stop)
{
    advance(t_stop);
    return diagnostics();
}

TrajectoryRecord FixedNucleiPropagator::run(double t_end, double sample_interval)
{
    TrajectoryRecord rec;
    record_step(rec, diagnostics());
    const double t0 = t_;
    long k = 1;
    while (t_ < t_end) {
        double target = t_end;
        if (sample_interval > 0.0) {
            target = std::min(t_end, t0 + static_cast<double>(k) * sample_interval);
        }
        advance(target);
        if (sample_interval <= 0.0 || t_ == target) {
            record_step(rec, diagnostics());
            if (t_ == target) {
                ++k;
            }
        }
    }
    return rec;
}

StepDiagnostics FixedNucleiPropagator::diagnostics() const
{
    ensure_frame();
    StepDiagnostics d;
    d.time = t_;
    d.dt = last_dt_;
    d.field = pulse_.field(t_);
    const double occ = H_->occupation();
    d.norm = 1.0;
    for (Index j = 0; j < b_.cols(); ++j) {
        const double n = b_.col(j).squaredNorm();
        for (int s = 0; s < H_->spin_orbitals(); ++s) {
            d.orbital_norms.push_back(n);
            d.norm *= n;
        }
    }
    d.energy = H_->energy(d.field, b_);
    const CMatrix c = Y_.adjoint() * b_;
    const CMatrix vb = Y_ * (f_.cast<Complex>().asDiagonal() * c);
    const CMatrix hb = H_->apply(d.field, b_);
    d.norm_rate = -2.0 * occ * (b_.adjoint() * vb).trace().real();
    d.absorption = -2.0 * occ * (vb.adjoint() * hb).trace().real();
    const double fdot = pulse_.field_derivative(t_);
    d.energy_rate = fdot * H_->dipole_expectation(b_) + H_->nuclear_field_energy(fdot) + d.absorption;
    for (const auto& n : H_->nuclei()) {
        d.positions.push_back(n.position);
        d.velocities.push_back(Vec3::Zero());
    }
    d.distance = d.positions.size() >= 2 ? (d.positions[1] - d.positions[0]).norm() : 0.0;
    d.n_kept = H_->kept();
    return d;
}

// ---------------------------------------------------------------------------------------------
// MobileNucleiPropagator

namespace {

std::vector<Nucleus> with_positions(const NuclearState& s, const std::vector<Vec3>& positions)
{
    std::vector<Nucleus> out;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        out.push_back(Nucleus{s.charges[i], s.masses[i], positions[i]});
    }
    return out;
}

/// Coordinates along which forces are evaluated: only z when every nucleus and velocity lies
/// on the z axis and the field points along z.
std::vector<int> active_axes(const NuclearState& s, const Vec3& polarization)
{
    bool axial = std::abs(polarization.x()) < 1e-14 && std::abs(polarization.y()) < 1e-14;
    for (std::size_t i = 0; i < s.positions.size() && axial; ++i) {
        axial = std::abs(s.positions[i].x()) < 1e-14 && std::abs(s.positions[i].y()) < 1e-14 &&
                std::abs(s.velocities[i].x()) < 1e-14 && std::abs(s.velocities[i].y()) < 1e-14;
    }
    if (axial) {
        return {2};
    }
    return {0, 1, 2};
}

std::vector<Vec3> force_impl(const BasisSet& reference, const NuclearState& nuclei, const CMatrix& a, double field,
                             const Vec3& polarization, double delta)
{
    const std::size_t nn = nuclei.positions.size();
    const BasisSet basis = reference.moved_to(nuclei.positions);
    const std::vector<Nucleus> nuc = with_positions(nuclei, nuclei.positions);
    const OneElectronMatrices m = one_electron_matrices(basis, nuc);
    const Matrix H = m.core() + field * m.dipole_along(polarization);
    const Eigen::LLT<Matrix> llt(m.overlap);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("overlap matrix is not positive definite in the force evaluation");
    }
    const CMatrix Ha = real_times(H, a);
    std::vector<Vec3> F(nn, Vec3::Zero());
    const auto axes = active_axes(nuclei, polarization);
    for (std::size_t A = 0; A < nn; ++A) {
        const auto G = gradient_overlap_matrices(basis, static_cast<int>(A));
        for (int k : axes) {
            double e[2];
            for (int sgn = 0; sgn < 2; ++sgn) {
                std::vector<Vec3> pos = nuclei.positions;
                pos[A][k] += sgn == 0 ? delta : -delta;
                const BasisSet moved = reference.moved_to(pos);
                const OneElectronMatrices md = one_electron_matrices(moved, with_positions(nuclei, pos));
                const Matrix Hd = md.core() + field * md.dipole_along(polarization);
                e[sgn] = (a.adjoint() * real_times(Hd, a)).trace().real();
            }
            double fk = -(e[0] - e[1]) / (2.0 * delta);
            const CMatrix Ga = real_times(G[static_cast<std::size_t>(k)], a);
            CMatrix SinvGa(Ga.rows(), Ga.cols());
            SinvGa.real() = llt.solve(Ga.real());
            SinvGa.imag() = llt.solve(Ga.imag());
            fk += 2.0 * (Ha.adjoint() * SinvGa).trace().real();
            F[A][k] = fk;
        }
        for (std::size_t B = 0; B < nn; ++B) {
            if (B == A) {
                continue;
            }
            const Vec3 d = nuclei.positions[A] - nuclei.positions[B];
            F[A] += nuclei.charges[A] * nuclei.charges[B] * d / std::pow(d.norm(), 3);
        }
        F[A] += nuclei.charges[A] * field * polarization;
    }
    return F;
}

} // namespace

std::vector<Vec3> MobileNucleiPropagator::ehrenfest_force(const BasisSet& reference, const NuclearState& nuclei,
                                                          const CMatrix& a, double field, const Vec3& polarization,
                                                          double displacement)
{
    nuclei.validate();
    return force_impl(reference, nuclei, a, field, polarization.normalized(), displacement);
}

CMatrix MobileNucleiPropagator::ground_state(const BasisSet& reference, const std::vector<Nucleus>& nuclei,
                                             double field, const Vec3& polarization)
{
    std::vector<Vec3> pos;
    for (const auto& n : nuclei) {
        pos.push_back(n.position);
    }
    const BasisSet basis = reference.moved_to(pos);
    const OneElectronMatrices m = one_electron_matrices(basis, nuclei);
    const Orthogonalizer o = Orthogonalizer::canonical(m.overlap);
    Eigen::SelfAdjointEigenSolver<Matrix> es(o.transform(Matrix(m.core() + field * m.dipole_along(polarization))));
    return (o.X() * es.eigenvectors().col(0)).cast<Complex>();
}

MobileNucleiPropagator::MobileNucleiPropagator(const BasisSet& basis, NuclearState nuclei, LaserPulse pulse,
                                               AbsorberSpec absorber, IntegratorOptions options,
                                               const CMatrix& initial_local, double t0)
    : reference_(basis), nuclei_(std::move(nuclei)), pulse_(std::move(pulse)), absorber_(absorber), opt_(options),
      t_(t0)
{
    nuclei_.validate();
    pulse_.validate();
    absorber_.validate();
    opt_.validate();
    pulse_.polarization.normalize();
    if (opt_.kind == PropagatorKind::RungeKutta) {
        throw ValidationError("mobile nuclei are propagated with the etd4 or lawson schemes only");
    }
    if (initial_local.rows() != basis.size() || initial_local.cols() != 1) {
        throw ValidationError(fmt::format("initial coefficients must be a {} x 1 column", basis.size()));
    }
    geom_ = make_geometry(nuclei_.positions);
    b_ = real_times(geom_.Xinv, initial_local);
    force_ = force(geom_, b_, t_);
    dt_ = opt_.dt_initial;
}

MobileNucleiPropagator::Geometry MobileNucleiPropagator::make_geometry(const std::vector<Vec3>& positions) const
{
    Geometry g;
    g.positions = positions;
    g.basis = reference_.moved_to(positions);
    const std::vector<Nucleus> nuc = with_positions(nuclei_, positions);
    const OneElectronMatrices m = one_electron_matrices(g.basis, nuc);
    g.S = m.overlap;
    g.h = m.core();
    g.d = m.dipole_along(pulse_.polarization);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.S);
    g.s = es.eigenvalues();
    g.V = es.eigenvectors();
    if (g.s(0) <= opt_.lin_dep_threshold * g.s(g.s.size() - 1)) {
        throw NumericalError(fmt::format(
            "overlap became near-singular (relative eigenvalue {:.3e}) at internuclear distance {:.3f}",
            g.s(0) / g.s(g.s.size() - 1), positions.size() >= 2 ? (positions[1] - positions[0]).norm() : 0.0));
    }
    g.X = g.V * g.s.cwiseSqrt().cwiseInverse().asDiagonal() * g.V.transpose();
    g.Xinv = g.V * g.s.cwiseSqrt().asDiagonal() * g.V.transpose();
    g.h_o = g.X * g.h * g.X;
    g.h_o = 0.5 * (g.h_o + g.h_o.transpose()).eval();
    g.d_o = g.X * g.d * g.X;
    g.d_o = 0.5 * (g.d_o + g.d_o.transpose()).eval();
    for (std::size_t A = 0; A < positions.size(); ++A) {
        g.G.push_back(gradient_overlap_matrices(g.basis, static_cast<int>(A)));
    }
    return g;
}

Matrix MobileNucleiPropagator::coupling(const Geometry& g, const std::vector<Vec3>& velocities) const
{
    const Index n = g.S.rows();
    Matrix B = Matrix::Zero(n, n);
    for (std::size_t A = 0; A < velocities.size(); ++A) {
        for (int k = 0; k < 3; ++k) {
            if (velocities[A][k] != 0.0) {
                B += velocities[A][k] * g.G[A][static_cast<std::size_t>(k)];
            }
        }
    }
    const Matrix M = g.V.transpose() * (B + B.transpose()) * g.V;
    Matrix dX(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double si = std::sqrt(g.s(i));
            const double sj = std::sqrt(g.s(j));
            dX(i, j) = -M(i, j) / (si * sj * (si + sj));
        }
    }
    const Matrix Xdot = g.V * dX * g.V.transpose();
    Matrix C = g.X * B * g.X + g.Xinv * Xdot;
    return 0.5 * (C - C.transpose());
}

std::vector<Vec3> MobileNucleiPropagator::force(const Geometry& g, const CMatrix& b, double t) const
{
    NuclearState at = nuclei_;
    at.positions = g.positions;
    return force_impl(reference_, at, real_times(g.X, b), pulse_.field(t), pulse_.polarization,
                      opt_.force_displacement);
}

double MobileNucleiPropagator::nuclear_repulsion(const std::vector<Vec3>& positions) const
{
    return naqmd::nuclear_repulsion(with_positions(nuclei_, positions));
}

void MobileNucleiPropagator::ensure_frame() const
{
    if (frame_valid_) {
        return;
    }
    const double field = opt_.field_in_frame ? pulse_.field(t_) : 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(geom_.h_o + field * geom_.d_o);
    if (es.info() != Eigen::Success) {
        throw NumericalError("frame diagonalization failed");
    }
    eps_ = es.eigenvalues();
    Y_ = es.eigenvectors();
    f_ = naqmd::absorber_strengths(eps_, absorber_);
    frame_valid_ = true;
}

CMatrix MobileNucleiPropagator::local_coefficients() const
{
    return real_times(geom_.X, b_);
}

StepDiagnostics MobileNucleiPropagator::step(double t_stop)
{
    if (!(t_stop > t_)) {
        throw ValidationError(fmt::format("step target {:.6f} does not lie after t = {:.6f}", t_stop, t_));
    }
    const std::size_t nn = nuclei_.positions.size();
    const double remaining = t_stop - t_;
    const double H = remaining <= opt_.nuclear_step * (1.0 + 1e-12) ? remaining : opt_.nuclear_step;

    // Velocity Verlet for the nuclei; the electrons follow the straight-line geometry path.
    std::vector<Vec3> vhalf(nn);
    std::vector<Vec3> r1(nn);
    for (std::size_t A = 0; A < nn; ++A) {
        vhalf[A] = nuclei_.velocities[A] + 0.5 * H * force_[A] / nuclei_.masses[A];
        r1[A] = nuclei_.positions[A] + H * vhalf[A];
    }
    Geometry g1 = make_geometry(r1);
    const Matrix C0 = coupling(geom_, vhalf);
    const Matrix C1 = coupling(g1, vhalf);
    const double fm = pulse_.field(t_ + 0.5 * H);
    const Matrix hm = 0.5 * (geom_.h_o + g1.h_o);
    const Matrix dm = 0.5 * (geom_.d_o + g1.d_o);

    // Absorber from the field-following frame at the midpoint of the step.
    Eigen::SelfAdjointEigenSolver<Matrix> frame_m(hm + (opt_.field_in_frame ? fm : 0.0) * dm);
    if (frame_m.info() != Eigen::Success) {
        throw NumericalError("frame diagonalization failed");
    }
    const Vector fabs = naqmd::absorber_strengths(frame_m.eigenvalues(), absorber_);
    const Matrix Vabs = frame_m.eigenvectors() * fabs.asDiagonal() * frame_m.eigenvectors().transpose();

    // Interaction picture of H'' = H' - iC at the midpoint of the nuclear step.
    CMatrix Hm = (hm + fm * dm).cast<Complex>();
    Hm -= I * (0.5 * (C0 + C1)).cast<Complex>();
    Vector lam;
    CMatrix Z;
    hermitian_eigen(Hm, lam, Z);
    const Vector vdiag = (Z.adjoint() * Vabs.cast<Complex>() * Z).diagonal().real();
    const CVector Lambda = (I * lam.cast<Complex>() + vdiag.cast<Complex>()).eval();
    auto nonlinear = [&](double tau, const CMatrix& c) -> CMatrix {
        const double s = tau / H;
        const CMatrix b = Z * c;
        const double fld = pulse_.field(t_ + tau);
        CMatrix hb = (1.0 - s) * real_times(geom_.h_o, b) + s * real_times(g1.h_o, b);
        hb += fld * ((1.0 - s) * real_times(geom_.d_o, b) + s * real_times(g1.d_o, b));
        hb -= I * ((1.0 - s) * real_times(C0, b) + s * real_times(C1, b));
        const CMatrix r = I * hb + real_times(Vabs, b) - Z * (Lambda.asDiagonal() * c);
        return -(Z.adjoint() * r);
    };

    CMatrix c = Z.adjoint() * b_;
    double tau = 0.0;
    double last_dt = 0.0;
    while (tau < H) {
        const double rest = H - tau;
        double h = std::min({dt_, opt_.dt_max, rest});
        const bool last = h >= rest * (1.0 - 1e-12);
        if (last) {
            h = rest;
        }
        CMatrix c1;
        const double err = exponential_attempt(opt_.kind, nonlinear, Lambda, c, tau, h, false, opt_, c1,
                                               stats_.rhs_evaluations);
        const double factor = growth_factor(err, opt_.safety);
        if (err <= 1.0 && c1.allFinite()) {
            c = c1;
            tau = last ? H : tau + h;
            last_dt = h;
            dt_ = (last && h < dt_) ? std::max(dt_, h * factor) : h * factor;
            ++stats_.accepted;
            continue;
        }
        ++stats_.rejected;
        dt_ = h * std::min(factor, 0.9);
        if (dt_ < opt_.dt_min) {
            throw NumericalError(fmt::format("step size underflow at t = {:.6f} (dt = {:.3e}, error {:.3e})",
                                             t_ + tau, dt_, err));
        }
    }

    const double t1 = H == remaining ? t_stop : t_ + H;
    b_ = Z * c;
    geom_ = std::move(g1);
    nuclei_.positions = r1;
    force_ = force(geom_, b_, t1);
    for (std::size_t A = 0; A < nn; ++A) {
        nuclei_.velocities[A] = vhalf[A] + 0.5 * H * force_[A] / nuclei_.masses[A];
    }
    t_ = t1;
    last_dt_ = last_dt;
    ++stats_.nuclear_steps;
    frame_valid_ = false;
    return diagnostics();
}

TrajectoryRecord MobileNucleiPropagator::run(double t_end, double sample_interval)
{
    TrajectoryRecord rec;
    record_step(rec, diagnostics());
    const double t0 = t_;
    long k = 1;
    while (t_ < t_end) {
        double target = t_end;
        if (sample_interval > 0.0) {
            target = std::min(t_end, t0 + static_cast<double>(k) * sample_interval);
        }
        const StepDiagnostics d = step(target);
        if (sample_interval <= 0.0 || t_ == target) {
            record_step(rec, d);
            if (t_ == target) {
                ++k;
            }
        }
    }
    return rec;
}

StepDiagnostics MobileNucleiPropagator::diagnostics() const
{
    ensure_frame();
    StepDiagnostics d;
    d.time = t_;
    d.dt = last_dt_;
    d.field = pulse_.field(t_);
    const double n = b_.squaredNorm();
    d.orbital_norms = {n};
    d.norm = n;
    const CMatrix hb = real_times(geom_.h_o, b_) + d.field * real_times(geom_.d_o, b_);
    const std::vector<Nucleus> nuc = with_positions(nuclei_, nuclei_.positions);
    d.energy = (b_.adjoint() * hb).trace().real() + nuclear_repulsion(nuclei_.positions) +
               nuclear_field_term(nuc, pulse_.polarization, d.field) + nuclei_.kinetic_energy();
    const Matrix Vabs = Y_ * f_.asDiagonal() * Y_.transpose();
    const CMatrix vb = real_times(Vabs, b_);
    d.norm_rate = -2.0 * (b_.adjoint() * vb).trace().real();
    d.absorption = -2.0 * (vb.adjoint() * hb).trace().real();
    const double fdot = pulse_.field_derivative(t_);
    d.energy_rate = fdot * (b_.adjoint() * real_times(geom_.d_o, b_)).trace().real() +
                    nuclear_field_term(nuc, pulse_.polarization, fdot) + d.absorption;
    d.positions = nuclei_.positions;
    d.velocities = nuclei_.velocities;
    d.distance = nuclei_.distance();
    d.n_kept = geom_.S.rows();
    return d;
}

} // namespace naqmd
