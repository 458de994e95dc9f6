#pragma once

#include "naqmd/types.hpp"

namespace naqmd {

/// Relative overlap-eigenvalue cutoff for canonical orthogonalization.
inline constexpr double default_lin_dep_threshold = 1e-7;

/// Orthonormalizing map X (n x k) with X^T S X = I.
///
/// Canonical: X = V_k s_k^{-1/2}, dropping overlap eigenvalues below threshold * max.
/// Symmetric: X = S^{-1/2} (k = n); rejects overlaps with eigenvalues below the threshold.
class Orthogonalizer {
public:
    static Orthogonalizer canonical(const Matrix& S, double threshold = default_lin_dep_threshold);
    static Orthogonalizer symmetric(const Matrix& S, double threshold = default_lin_dep_threshold);

    const Matrix& X() const { return x_; }
    Index dimension() const { return x_.rows(); }
    Index kept() const { return x_.cols(); }
    /// Local coefficients to orthonormal coordinates: b = X^T S a.
    CMatrix to_orthonormal(const CMatrix& a) const { return xts_ * a; }
    /// Orthonormal coordinates to local coefficients: a = X b.
    CMatrix to_local(const CMatrix& b) const { return x_ * b; }
    /// X X^T, the inverse of S on the retained subspace.
    Matrix inverse_overlap() const { return x_ * x_.transpose(); }
    /// Transform a local-basis operator: X^T O X.
    Matrix transform(const Matrix& O) const { return x_.transpose() * O * x_; }
    CMatrix transform(const CMatrix& O) const { return x_.transpose() * O * x_; }

    /// Overlap eigenvalues (ascending) and eigenvectors of the decomposed S.
    const Vector& overlap_eigenvalues() const { return s_; }
    const Matrix& overlap_eigenvectors() const { return v_; }

private:
    Matrix x_;
    Matrix xts_;
    Vector s_;
    Matrix v_;
};

/// Instantaneous eigenstates chi_a = sum_alpha U(a, alpha) phi_alpha of H_eff.
///
/// Convention: conj(U) S U^T = I on the retained subspace; energies ascending.
struct AdiabaticFrame {
    Vector energies;
    CMatrix U;
    Index n_kept = 0;
};

/// Solve H c = eps S c on the subspace kept by canonical orthogonalization.
AdiabaticFrame solve_field_following(const CMatrix& H, const Matrix& S,
                                     double threshold = default_lin_dep_threshold);
AdiabaticFrame solve_field_following(const Matrix& H, const Matrix& S,
                                     double threshold = default_lin_dep_threshold);

/// Same as above with a precomputed orthogonalizer for S.
AdiabaticFrame solve_field_following(const CMatrix& H, const Orthogonalizer& ortho);

/// a_a = sum conj(U(a, alpha)) S(alpha, beta) a_beta.
CVector coeffs_to_adiabatic(const CVector& a_local, const AdiabaticFrame& frame, const Matrix& S);

/// a_alpha = sum_a U(a, alpha) c_a.
CVector coeffs_from_adiabatic(const CVector& c, const AdiabaticFrame& frame);

/// Local-basis matrix of sum_ab |chi_a> O_ab <chi_b|: S U^T O conj(U) S.
CMatrix operator_to_local(const CMatrix& O_adiabatic, const AdiabaticFrame& frame, const Matrix& S);

/// Copy with each eigenvector rephased so its largest-magnitude component is real positive.
AdiabaticFrame phase_fixed(const AdiabaticFrame& frame);

/// Eigen-decomposition of a Hermitian matrix, real fast path when the imaginary part vanishes.
void hermitian_eigen(const CMatrix& H, Vector& values, CMatrix& vectors);

} // namespace naqmd
