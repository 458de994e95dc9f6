#pragma once

#include "naqmd/basis.hpp"
#include "naqmd/eri.hpp"
#include "naqmd/types.hpp"

#include <memory>
#include <vector>

namespace naqmd {

/// Commonly quoted restricted Hartree-Fock limit of H2 near equilibrium (hartree).
inline constexpr double h2_restricted_hf_limit = -1.1336;

/// Closed-shell two-electron mean field: one spatial orbital, doubly occupied.
///
/// Holds the field-free core matrix h = T + V_nuc, the overlap, the nuclear repulsion and the
/// factorized two-electron store. A null store gives the non-interacting limit.
class FockContext {
public:
    FockContext(Matrix core, Matrix overlap, std::shared_ptr<const CholeskyEri> eri, double nuclear_repulsion);

    /// Assemble all matrices and the Cholesky-factorized ERIs for a Gaussian basis.
    static FockContext build(const BasisSet& basis, const std::vector<Nucleus>& nuclei,
                             double cholesky_tolerance = 1e-8);

    Index dimension() const { return core_.rows(); }
    const Matrix& core() const { return core_; }
    const Matrix& overlap() const { return overlap_; }
    double nuclear_repulsion() const { return nuclear_repulsion_; }
    const CholeskyEri* eri() const { return eri_.get(); }

    /// F = h + 2 J[D] - K[D] with D = a a^dagger; `extra` (e.g. the laser term) is added to h.
    CMatrix fock_matrix(const CVector& orbital, const Matrix* extra = nullptr) const;
    /// F a, using (2J - K) a = J a for the occupied orbital itself.
    CVector fock_times_orbital(const CVector& orbital, const Matrix* extra = nullptr) const;
    /// Mean-field part (2J - K) a.
    CVector meanfield_times_orbital(const CVector& orbital) const;
    /// Electronic energy 2 <a|h|a> + <a|J|a> plus nuclear repulsion.
    double energy(const CVector& orbital, const Matrix* extra = nullptr) const;

private:
    Matrix core_;
    Matrix overlap_;
    std::shared_ptr<const CholeskyEri> eri_;
    double nuclear_repulsion_ = 0.0;
};

struct ScfOptions {
    double energy_tolerance = 1e-9;
    double density_tolerance = 1e-7;
    int max_iterations = 200;
    int diis_size = 8;
    double damping = 0.5;
    double level_shift = 0.5;
    double lin_dep_threshold = 1e-7;
};

struct ScfResult {
    double energy = 0.0;
    CVector orbital;
    Vector orbital_energies;
    int iterations = 0;
    bool level_shifted = false;
    /// Energy per iteration, for convergence diagnostics.
    std::vector<double> energy_history;
    /// RMS commutator residual per iteration.
    std::vector<double> residual_history;
};

/// Restricted closed-shell SCF with DIIS; on failure retries with damping and a level shift.
/// Throws NumericalError if neither attempt converges.
ScfResult scf_ground_state(const FockContext& context, const ScfOptions& options = {});

/// Log a warning and return false if `energy` lies below `bound`.
bool check_variational_bound(double energy, double bound = h2_restricted_hf_limit);

} // namespace naqmd
