#pragma once

#include "naqmd/absorber.hpp"
#include "naqmd/adiabatic.hpp"
#include "naqmd/basis.hpp"
#include "naqmd/integrals.hpp"
#include "naqmd/laser.hpp"
#include "naqmd/meanfield.hpp"
#include "naqmd/observables.hpp"
#include "naqmd/types.hpp"

#include <array>
#include <memory>
#include <vector>

namespace naqmd {

/// Classical nuclei: positions, velocities, masses and charges in atomic units.
struct NuclearState {
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    std::vector<double> masses;
    std::vector<double> charges;

    static NuclearState at_rest(const std::vector<Nucleus>& nuclei);
    std::vector<Nucleus> nuclei() const;
    double kinetic_energy() const;
    /// Distance between the first two nuclei, or 0 for a single nucleus.
    double distance() const;
    void validate() const;
};

enum class PropagatorKind {
    /// Fourth-order exponential time differencing (Cox-Matthews) in the instantaneous frame,
    /// with step-doubling error control.
    Exponential,
    /// Dormand-Prince 4(5) in the interaction picture of the instantaneous frame.
    Lawson,
    /// Plain Dormand-Prince 4(5) on the local-basis equations of motion.
    RungeKutta
};

PropagatorKind parse_propagator(const std::string& name);
std::string to_string(PropagatorKind kind);

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double dt_initial = 0.05;
    double dt_min = 1e-9;
    double dt_max = 2.0;
    double safety = 0.9;
    double lin_dep_threshold = default_lin_dep_threshold;
    /// Build the adiabatic frame from H_eff including the laser term.
    bool field_in_frame = true;
    PropagatorKind kind = PropagatorKind::Exponential;
    /// Central-difference displacement for nuclear forces (bohr).
    double force_displacement = 1e-3;
    /// Velocity Verlet step for mobile nuclei (a.u.); electrons take adaptive substeps within it.
    double nuclear_step = 0.5;

    void validate() const;
};

/// Quantities at a step boundary.
struct StepDiagnostics {
    double time = 0.0;
    /// Size of the step that ended here (0 for the initial point).
    double dt = 0.0;
    double field = 0.0;
    /// Norm of each spin orbital (two equal entries for a closed shell).
    std::vector<double> orbital_norms;
    /// Product of the orbital norms.
    double norm = 1.0;
    /// Total energy: electronic, nuclear repulsion, nucleus-field and nuclear kinetic terms.
    double energy = 0.0;
    /// -2 sum_j a_j^dagger V_abs a_j over spin orbitals.
    double norm_rate = 0.0;
    /// Delta_abs summed over spin orbitals.
    double absorption = 0.0;
    /// Right side of the energy balance: field work on electrons and nuclei plus Delta_abs.
    double energy_rate = 0.0;
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    double distance = 0.0;
    Index n_kept = 0;
};

/// Append a diagnostics row to a trajectory record.
void record_step(TrajectoryRecord& record, const StepDiagnostics& d);

/// da/dt = -S^-1 (i H + V_abs + B) a, with S^-1 the inverse on the retained subspace.
CMatrix electronic_rhs(const CMatrix& a, const CMatrix& H, const CMatrix& vabs, const CMatrix& B,
                       const Matrix& inverse_overlap);

/// Electronic Hamiltonian at fixed nuclear positions.
///
/// One-electron systems use H_eff = T + V_nuc + F(t) D; closed-shell two-electron systems add
/// the mean field 2J - K of the doubly occupied orbital. Orthonormal coordinates are
/// b = X^T S a with X from canonical orthogonalization.
class ElectronicHamiltonian {
public:
    /// One-electron system with the dipole projected on `polarization`.
    ElectronicHamiltonian(const OneElectronMatrices& matrices, std::vector<Nucleus> nuclei, const Vec3& polarization,
                          double lin_dep_threshold = default_lin_dep_threshold);
    /// Closed-shell two-electron system.
    ElectronicHamiltonian(std::shared_ptr<const FockContext> meanfield, const Matrix& dipole,
                          std::vector<Nucleus> nuclei, const Vec3& polarization,
                          double lin_dep_threshold = default_lin_dep_threshold);
    /// Model system from raw matrices: overlap, core and the operator multiplying the field.
    static ElectronicHamiltonian from_matrices(const Matrix& overlap, const Matrix& core, const Matrix& coupling,
                                               double lin_dep_threshold = default_lin_dep_threshold);

    Index dimension() const { return overlap_.rows(); }
    Index kept() const { return ortho_.kept(); }
    const Orthogonalizer& orthogonalizer() const { return ortho_; }
    const Matrix& overlap() const { return overlap_; }
    const Matrix& core() const { return core_; }
    const Matrix& dipole() const { return dipole_; }
    const Matrix& core_orthonormal() const { return core_o_; }
    const Matrix& dipole_orthonormal() const { return dipole_o_; }
    const std::vector<Nucleus>& nuclei() const { return nuclei_; }
    const Vec3& polarization() const { return polarization_; }
    bool closed_shell() const { return static_cast<bool>(meanfield_); }
    /// Electrons per propagated orbital column.
    double occupation() const { return closed_shell() ? 2.0 : 1.0; }
    int spin_orbitals() const { return closed_shell() ? 2 : 1; }

    /// H_eff in the local basis for field strength `field` and orbital coefficients a.
    CMatrix local_hamiltonian(double field, const CMatrix& a) const;
    /// H' = X^T H_eff X for orthonormal coefficients b.
    CMatrix hamiltonian(double field, const CMatrix& b) const;
    /// Mean-field part X^T (2J - K) X of H' (zero for one-electron systems).
    CMatrix meanfield_orthonormal(const CMatrix& b) const;
    /// H'(b) b, using (2J - K) a = J a for the mean field.
    CMatrix apply(double field, const CMatrix& b) const;
    /// Total energy for orthonormal coefficients, including nuclear repulsion and the
    /// nucleus-field term -F sum_A Z_A e.R_A.
    double energy(double field, const CMatrix& b) const;
    /// -F sum_A Z_A e.R_A.
    double nuclear_field_energy(double field) const;
    /// Electron dipole expectation b^dagger d' b summed over spin orbitals.
    double dipole_expectation(const CMatrix& b) const;

    CMatrix to_orthonormal(const CMatrix& a) const { return ortho_.to_orthonormal(a); }
    CMatrix to_local(const CMatrix& b) const { return ortho_.to_local(b); }

    /// Orthonormal coefficients of the lowest eigenstate of H' at the given field (one-electron)
    /// or of the SCF orbital (closed shell).
    CMatrix ground_state(double field = 0.0) const;

private:
    ElectronicHamiltonian() = default;
    void finish(double lin_dep_threshold);

    Matrix overlap_;
    Matrix core_;
    Matrix dipole_;
    std::vector<Nucleus> nuclei_;
    Vec3 polarization_ = Vec3::UnitZ();
    double nuclear_repulsion_ = 0.0;
    std::shared_ptr<const FockContext> meanfield_;
    Orthogonalizer ortho_;
    Matrix core_o_;
    Matrix dipole_o_;
};

/// Population of positive-energy eigenstates of H' at the given field (no absorber involved).
double positive_energy_population(const ElectronicHamiltonian& H, const CMatrix& b, double field = 0.0);

/// Counters of a propagation.
struct StepStatistics {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    std::size_t nuclear_steps = 0;
};

/// Propagation with nuclei clamped at the positions of the Hamiltonian.
///
/// Every step attempt rebuilds the adiabatic frame and V_abs from H_eff at the step midpoint,
/// with the mean field of the state at the step start.
class FixedNucleiPropagator {
public:
    FixedNucleiPropagator(std::shared_ptr<const ElectronicHamiltonian> hamiltonian, LaserPulse pulse,
                          AbsorberSpec absorber, IntegratorOptions options, const CMatrix& initial_local,
                          double t0 = 0.0);

    double time() const { return t_; }
    /// One accepted step that does not pass t_stop. Throws NumericalError on step-size underflow.
    StepDiagnostics step(double t_stop);
    /// Propagate to t_end, recording the initial point and every accepted step (or only the
    /// points of a uniform grid when sample_interval > 0).
    TrajectoryRecord run(double t_end, double sample_interval = 0.0);
    StepDiagnostics diagnostics() const;

    const CMatrix& orthonormal_coefficients() const { return b_; }
    CMatrix local_coefficients() const { return H_->to_local(b_); }
    /// Current frame with U expressed in the local basis.
    AdiabaticFrame frame() const;
    /// Frame energies at the current time.
    const Vector& frame_energies() const;
    /// Absorber strengths f(eps) at the current time.
    const Vector& absorber_strengths() const;
    const StepStatistics& statistics() const { return stats_; }
    const ElectronicHamiltonian& hamiltonian() const { return *H_; }

private:
    void advance(double t_stop);
    void state_changed();
    void frame_for_field(double field, Vector& eps, CMatrix& Y) const;
    void ensure_frame() const;
    bool attempt_exponential(double dt, CMatrix& b_new, double& err);
    bool attempt_runge_kutta(double dt, CMatrix& b_new, double& err);

    std::shared_ptr<const ElectronicHamiltonian> H_;
    LaserPulse pulse_;
    AbsorberSpec absorber_;
    IntegratorOptions opt_;
    double t_ = 0.0;
    double dt_ = 0.0;
    double last_dt_ = 0.0;
    CMatrix b_;
    CMatrix meanfield_;
    mutable Vector eps_;
    mutable CMatrix Y_;
    mutable Vector f_;
    mutable bool frame_valid_ = false;
    StepStatistics stats_;
};

/// One-electron propagation with classical nuclei (Ehrenfest forces).
///
/// Electrons are propagated in Loewdin coordinates b = S^{1/2} a, where the moving basis adds
/// the real antisymmetric coupling C = S^{-1/2} B S^{-1/2} + S^{1/2} d(S^{-1/2})/dt. Nuclei use
/// velocity Verlet with a fixed step; within it the matrices are interpolated linearly between
/// the two geometries and the electrons take error-controlled substeps. step() performs one
/// nuclear step.
class MobileNucleiPropagator {
public:
    MobileNucleiPropagator(const BasisSet& basis, NuclearState nuclei, LaserPulse pulse, AbsorberSpec absorber,
                           IntegratorOptions options, const CMatrix& initial_local, double t0 = 0.0);

    double time() const { return t_; }
    StepDiagnostics step(double t_stop);
    TrajectoryRecord run(double t_end, double sample_interval = 0.0);
    StepDiagnostics diagnostics() const;

    const NuclearState& nuclear_state() const { return nuclei_; }
    const std::vector<Vec3>& forces() const { return force_; }
    CMatrix local_coefficients() const;
    const StepStatistics& statistics() const { return stats_; }

    /// Ehrenfest force on each nucleus for local coefficients a at the given positions.
    static std::vector<Vec3> ehrenfest_force(const BasisSet& reference, const NuclearState& nuclei,
                                             const CMatrix& a, double field, const Vec3& polarization,
                                             double displacement);

    /// Ground-state local coefficients of H_eff at the given geometry.
    static CMatrix ground_state(const BasisSet& reference, const std::vector<Nucleus>& nuclei, double field,
                                const Vec3& polarization);

    struct Geometry {
        std::vector<Vec3> positions;
        BasisSet basis;
        Matrix S;
        Matrix h;
        Matrix d;
        Vector s;
        Matrix V;
        Matrix X;
        Matrix Xinv;
        Matrix h_o;
        Matrix d_o;
        std::vector<std::array<Matrix, 3>> G;
    };

private:
    Geometry make_geometry(const std::vector<Vec3>& positions) const;
    Matrix coupling(const Geometry& g, const std::vector<Vec3>& velocities) const;
    std::vector<Vec3> force(const Geometry& g, const CMatrix& b, double t) const;
    void ensure_frame() const;
    double nuclear_repulsion(const std::vector<Vec3>& positions) const;

    BasisSet reference_;
    NuclearState nuclei_;
    LaserPulse pulse_;
    AbsorberSpec absorber_;
    IntegratorOptions opt_;
    double t_ = 0.0;
    double dt_ = 0.0;
    double last_dt_ = 0.0;
    Geometry geom_;
    CMatrix b_;
    std::vector<Vec3> force_;
    mutable Vector eps_;
    mutable Matrix Y_;
    mutable Vector f_;
    mutable bool frame_valid_ = false;
    StepStatistics stats_;
};

} // namespace naqmd
