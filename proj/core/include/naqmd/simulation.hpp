#pragma once

#include "naqmd/absorber.hpp"
#include "naqmd/basis.hpp"
#include "naqmd/dynamics.hpp"
#include "naqmd/laser.hpp"
#include "naqmd/meanfield.hpp"
#include "naqmd/nuclear.hpp"
#include "naqmd/observables.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace naqmd {

/// Equilibrium distance of H2 used for the fixed-nuclei orientation runs (bohr).
inline constexpr double h2_equilibrium_distance = 1.39384;
/// Equilibrium distance of H2+ (bohr).
inline constexpr double h2plus_equilibrium_distance = 1.9975;

/// Molecule, geometry and basis of one calculation.
struct SystemSetup {
    SystemKind kind = SystemKind::H2plus_aligned;
    /// Internuclear distance (ignored for the H atom).
    double distance = h2plus_equilibrium_distance;
    /// Angle between the molecular axis and z in the y-z plane (radians).
    double angle = 0.0;
    /// Basis recipe; the default recipe of `kind` when empty.
    std::optional<BasisRecipe> recipe{};
    double cholesky_tolerance = 1e-8;
    double lin_dep_threshold = default_lin_dep_threshold;

    BasisRecipe effective_recipe() const;
    std::vector<Nucleus> nuclei() const;
    BasisSet basis() const;
    void validate() const;
};

/// Result of the closed-shell SCF for a setup (H2 only).
struct ScfSummary {
    double energy = 0.0;
    int iterations = 0;
    Vector orbital_energies;
    bool variational_ok = true;
};

/// Electronic Hamiltonian of a setup; for H2 the SCF summary is stored in `scf` when given.
std::shared_ptr<ElectronicHamiltonian> build_hamiltonian(const SystemSetup& setup, const Vec3& polarization,
                                                         ScfSummary* scf = nullptr);

/// Fully specified single trajectory.
struct RunSpec {
    SystemSetup system;
    LaserPulse pulse;
    AbsorberSpec absorber;
    IntegratorOptions integrator;
    bool mobile_nuclei = false;
    /// Initial rate of change of the internuclear distance (mobile nuclei only).
    double distance_rate = 0.0;
    /// End time; the pulse's default final time when not positive.
    double t_final = 0.0;
    /// Uniform sampling interval of the record; every accepted step when not positive.
    double sample_interval = 0.0;

    double final_time() const;
    void validate() const;
};

struct RunResult {
    TrajectoryRecord record;
    /// 1 - N(t_final).
    double ionization = 0.0;
    /// Norms of the spin orbitals at t_final.
    std::vector<double> final_orbital_norms;
    SingleDouble single_double_ionization;
    /// Population of positive-energy field-free eigenstates at t_final (fixed nuclei only).
    double positive_energy_population = 0.0;
    std::optional<ScfSummary> scf;
    StepStatistics statistics;
    Index basis_size = 0;
};

/// Ground state at t = 0, propagation to the final time, and the derived probabilities.
RunResult run_trajectory(const RunSpec& spec);

/// E(R) = lowest eigenvalue of the field-free one-electron Hamiltonian + 1/R on a uniform grid.
struct CurveTable {
    double r_min = 0.0;
    double spacing = 0.0;
    std::vector<double> energies;

    PotentialCurve curve() const;
};
CurveTable ground_state_curve(const SystemSetup& setup, double r_min, double r_max, double spacing);

/// Time series of the ensemble-averaged probabilities on the common sampling grid.
struct EnsembleSeries {
    std::vector<double> time;
    std::vector<double> ionization;
    std::vector<double> ionization_error;
    std::vector<double> dissociation;
    std::vector<double> dissociation_error;
    std::vector<double> fragmentation;
};

/// Average P_ion(t), P_diss(t) and P_frag(t) over trajectories recorded on the same time grid.
EnsembleSeries average_ensemble(const std::vector<TrajectoryRecord>& records, double r_dissociation = 9.5);

/// Run `count` independent jobs with up to `workers` threads. Each job writes only its own slot,
/// so results do not depend on scheduling. The first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

/// Worker count from the NAQMD_WORKERS environment variable, else the hardware concurrency.
unsigned default_worker_count();

} // namespace naqmd
