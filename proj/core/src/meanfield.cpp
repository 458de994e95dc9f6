#include "naqmd/meanfield.hpp"

#include "naqmd/adiabatic.hpp"
#include "naqmd/integrals.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <deque>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace naqmd {

FockContext::FockContext(Matrix core, Matrix overlap, std::shared_ptr<const CholeskyEri> eri,
                         double nuclear_repulsion)
    : core_(std::move(core)), overlap_(std::move(overlap)), eri_(std::move(eri)),
      nuclear_repulsion_(nuclear_repulsion)
{
    if (core_.rows() != core_.cols() || overlap_.rows() != core_.rows() || overlap_.cols() != core_.cols()) {
        throw ValidationError("core and overlap matrices must be square and of equal dimension");
    }
    if (eri_ && eri_->dimension() != core_.rows()) {
        throw ValidationError("ERI store dimension does not match the core matrix");
    }
}

FockContext FockContext::build(const BasisSet& basis, const std::vector<Nucleus>& nuclei,
                               double cholesky_tolerance)
{
    const OneElectronMatrices m = one_electron_matrices(basis, nuclei);
    const EriTensor eri = EriTensor::compute(basis);
    auto chol = std::make_shared<const CholeskyEri>(eri, cholesky_tolerance);
    return FockContext(m.core(), m.overlap, std::move(chol), naqmd::nuclear_repulsion(nuclei));
}

CMatrix FockContext::fock_matrix(const CVector& orbital, const Matrix* extra) const
{
    if (orbital.size() != dimension()) {
        throw ValidationError("orbital dimension does not match the Fock context");
    }
    CMatrix F = core_.cast<Complex>();
    if (extra) {
        F += extra->cast<Complex>();
    }
    if (eri_) {
        F += 2.0 * eri_->coulomb(orbital).cast<Complex>();
        F -= eri_->exchange(orbital);
    }
    return 0.5 * (F + F.adjoint());
}

CVector FockContext::meanfield_times_orbital(const CVector& orbital) const
{
    if (!eri_) {
        return CVector::Zero(orbital.size());
    }
    return eri_->coulomb_times(orbital);
}

CVector FockContext::fock_times_orbital(const CVector& orbital, const Matrix* extra) const
{
    if (orbital.size() != dimension()) {
        throw ValidationError("orbital dimension does not match the Fock context");
    }
    CVector out = core_ * orbital;
    if (extra) {
        out += *extra * orbital;
    }
    return out + meanfield_times_orbital(orbital);
}

double FockContext::energy(const CVector& orbital, const Matrix* extra) const
{
    Matrix h = core_;
    if (extra) {
        h += *extra;
    }
    const double one = orbital.dot(h * orbital).real();
    const double two = orbital.dot(meanfield_times_orbital(orbital)).real();
    return 2.0 * one + two + nuclear_repulsion_;
}

namespace {

struct Attempt {
    bool converged = false;
    ScfResult result;
};

Matrix real_fock(const FockContext& ctx, const Vector& c)
{
    return ctx.fock_matrix(c.cast<Complex>()).real();
}

Attempt run_scf(const FockContext& ctx, const Orthogonalizer& ortho, const ScfOptions& opt, bool stabilized)
{
    const Matrix& S = ctx.overlap();
    const Matrix& X = ortho.X();
    const Index k = ortho.kept();
    Attempt out;
    ScfResult& r = out.result;
    r.level_shifted = stabilized;

    Eigen::SelfAdjointEigenSolver<Matrix> es(ortho.transform(ctx.core()));
    Vector y = es.eigenvectors().col(0);
    Vector c = X * y;
    Matrix D = c * c.transpose();

    std::deque<Matrix> focks;
    std::deque<Matrix> errors;
    Matrix previous_fock;
    double previous_energy = 0.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const Matrix F = real_fock(ctx, c);
        const double E = ctx.energy(c.cast<Complex>());
        const Matrix err = X.transpose() * (F * D * S - S * D * F) * X;
        const double rms = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
        r.energy_history.push_back(E);
        r.residual_history.push_back(rms);
        r.iterations = it + 1;

        Matrix Fuse = F;
        if (stabilized) {
            if (previous_fock.size() > 0) {
                Fuse = (1.0 - opt.damping) * F + opt.damping * previous_fock;
            }
        } else {
            focks.push_back(F);
            errors.push_back(err);
            if (static_cast<int>(focks.size()) > opt.diis_size) {
                focks.pop_front();
                errors.pop_front();
            }
            const Index m = static_cast<Index>(focks.size());
            if (m >= 2) {
                Matrix B = Matrix::Zero(m + 1, m + 1);
                Vector rhs = Vector::Zero(m + 1);
                for (Index i = 0; i < m; ++i) {
                    for (Index j = 0; j <= i; ++j) {
                        B(i, j) = B(j, i) = (errors[static_cast<std::size_t>(i)].array() *
                                             errors[static_cast<std::size_t>(j)].array()).sum();
                    }
                    B(i, m) = B(m, i) = -1.0;
                }
                rhs(m) = -1.0;
                const Vector w = B.completeOrthogonalDecomposition().solve(rhs);
                if (w.allFinite()) {
                    Fuse.setZero();
                    for (Index i = 0; i < m; ++i) {
                        Fuse += w(i) * focks[static_cast<std::size_t>(i)];
                    }
                }
            }
        }
        previous_fock = Fuse;

        Matrix Fp = X.transpose() * Fuse * X;
        if (stabilized) {
            const Vector yo = ortho.to_orthonormal(c.cast<Complex>()).col(0).real();
            Fp += opt.level_shift * (Matrix::Identity(k, k) - yo * yo.transpose());
        }
        Eigen::SelfAdjointEigenSolver<Matrix> fs(0.5 * (Fp + Fp.transpose()));
        if (fs.info() != Eigen::Success) {
            throw NumericalError("Fock diagonalization failed");
        }
        y = fs.eigenvectors().col(0);
        const Vector c_new = X * y;
        const Matrix D_new = c_new * c_new.transpose();
        const double dD = std::sqrt((D_new - D).squaredNorm() / static_cast<double>(D.size()));
        c = c_new;
        D = D_new;
        if (it > 0 && std::abs(E - previous_energy) < opt.energy_tolerance && dD < opt.density_tolerance) {
            out.converged = true;
            break;
        }
        previous_energy = E;
    }
    // Report energy and orbital energies for the final orbital.
    const Matrix F = real_fock(ctx, c);
    Eigen::SelfAdjointEigenSolver<Matrix> fs(ortho.transform(F));
    r.orbital_energies = fs.eigenvalues();
    r.orbital = (X * fs.eigenvectors().col(0)).cast<Complex>();
    const double sign = r.orbital.real().dot(S * c) < 0.0 ? -1.0 : 1.0;
    r.orbital *= sign;
    r.energy = ctx.energy(r.orbital);
    return out;
}

} // namespace

ScfResult scf_ground_state(const FockContext& context, const ScfOptions& options)
{
    const Orthogonalizer ortho = Orthogonalizer::canonical(context.overlap(), options.lin_dep_threshold);
    Attempt a = run_scf(context, ortho, options, false);
    if (!a.converged) {
        spdlog::warn("SCF did not converge with DIIS after {} iterations; retrying with damping and level shift",
                     a.result.iterations);
        a = run_scf(context, ortho, options, true);
        if (!a.converged) {
            throw NumericalError(fmt::format("SCF did not converge after {} iterations (last residual {:.3e})",
                                             a.result.iterations, a.result.residual_history.back()));
        }
    }
    spdlog::info("SCF converged in {} iterations: E = {:.10f}", a.result.iterations, a.result.energy);
    return a.result;
}

bool check_variational_bound(double energy, double bound)
{
    if (energy < bound) {
        spdlog::warn("SCF energy {:.6f} lies below the restricted Hartree-Fock limit {:.4f}", energy, bound);
        return false;
    }
    return true;
}

} // namespace naqmd
