#include "naqmd/adiabatic.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace naqmd {

namespace {

void decompose(const Matrix& S, Vector& s, Matrix& v)
{
    if (S.rows() != S.cols()) {
        throw ValidationError("overlap matrix must be square");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success) {
        throw NumericalError("overlap diagonalization failed");
    }
    s = es.eigenvalues();
    v = es.eigenvectors();
    const double smax = s.maxCoeff();
    if (!(smax > 0.0)) {
        throw NumericalError("overlap matrix has no positive eigenvalue");
    }
    if (s.minCoeff() < -1e-8 * smax) {
        throw NumericalError(fmt::format("overlap matrix is indefinite (min eigenvalue {:.3e})", s.minCoeff()));
    }
}

} // namespace

Orthogonalizer Orthogonalizer::canonical(const Matrix& S, double threshold)
{
    Orthogonalizer o;
    decompose(S, o.s_, o.v_);
    const double cut = threshold * o.s_.maxCoeff();
    Index first = 0;
    while (first < o.s_.size() && o.s_(first) <= cut) {
        ++first;
    }
    const Index k = o.s_.size() - first;
    o.x_ = o.v_.rightCols(k) * o.s_.tail(k).cwiseSqrt().cwiseInverse().asDiagonal();
    o.xts_ = o.x_.transpose() * S;
    if (first > 0) {
        spdlog::debug("canonical orthogonalization kept {} of {} functions", k, S.rows());
    }
    return o;
}

Orthogonalizer Orthogonalizer::symmetric(const Matrix& S, double threshold)
{
    Orthogonalizer o;
    decompose(S, o.s_, o.v_);
    if (o.s_.minCoeff() <= threshold * o.s_.maxCoeff()) {
        throw NumericalError(fmt::format(
            "overlap is near-singular (relative min eigenvalue {:.3e}); symmetric orthogonalization "
            "needs a full-rank basis",
            o.s_.minCoeff() / o.s_.maxCoeff()));
    }
    o.x_ = o.v_ * o.s_.cwiseSqrt().cwiseInverse().asDiagonal() * o.v_.transpose();
    o.xts_ = o.v_ * o.s_.cwiseSqrt().asDiagonal() * o.v_.transpose();
    return o;
}

void hermitian_eigen(const CMatrix& H, Vector& values, CMatrix& vectors)
{
    if (H.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(H.real());
        if (es.info() != Eigen::Success) {
            throw NumericalError("eigensolver failed");
        }
        values = es.eigenvalues();
        vectors = es.eigenvectors().cast<Complex>();
        return;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigensolver failed");
    }
    values = es.eigenvalues();
    vectors = es.eigenvectors();
}

AdiabaticFrame solve_field_following(const CMatrix& H, const Orthogonalizer& ortho)
{
    if (H.rows() != ortho.dimension() || H.cols() != ortho.dimension()) {
        throw ValidationError("Hamiltonian and overlap dimensions differ");
    }
    const CMatrix Hp = ortho.transform(H);
    Vector eps;
    CMatrix Y;
    hermitian_eigen(0.5 * (Hp + Hp.adjoint()), eps, Y);
    AdiabaticFrame frame;
    frame.energies = eps;
    frame.U = (ortho.X() * Y).transpose();
    frame.n_kept = ortho.kept();
    return frame;
}

AdiabaticFrame solve_field_following(const CMatrix& H, const Matrix& S, double threshold)
{
    if (H.rows() != S.rows() || H.cols() != S.cols()) {
        throw ValidationError("Hamiltonian and overlap dimensions differ");
    }
    return solve_field_following(H, Orthogonalizer::canonical(S, threshold));
}

AdiabaticFrame solve_field_following(const Matrix& H, const Matrix& S, double threshold)
{
    return solve_field_following(CMatrix(H.cast<Complex>()), S, threshold);
}

CVector coeffs_to_adiabatic(const CVector& a_local, const AdiabaticFrame& frame, const Matrix& S)
{
    return frame.U.conjugate() * (S * a_local);
}

CVector coeffs_from_adiabatic(const CVector& c, const AdiabaticFrame& frame)
{
    return frame.U.transpose() * c;
}

CMatrix operator_to_local(const CMatrix& O_adiabatic, const AdiabaticFrame& frame, const Matrix& S)
{
    const CMatrix left = S * frame.U.transpose();
    return left * O_adiabatic * left.adjoint();
}

AdiabaticFrame phase_fixed(const AdiabaticFrame& frame)
{
    AdiabaticFrame out = frame;
    for (Index a = 0; a < out.U.rows(); ++a) {
        Index best = 0;
        out.U.row(a).cwiseAbs().maxCoeff(&best);
        const Complex c = out.U(a, best);
        if (std::abs(c) > 0.0) {
            out.U.row(a) *= std::conj(c) / std::abs(c);
        }
    }
    return out;
}

} // namespace naqmd
