#pragma once

#include "naqmd/basis.hpp"
#include "naqmd/types.hpp"

#include <cstddef>
#include <vector>

namespace naqmd {

/// Two-electron repulsion integrals (ij|kl) stored once per unique quartet.
///
/// Layout: pair index ij = i(i+1)/2 + j for i >= j; the pair-pair supermatrix is stored as
/// its packed lower triangle, which realizes the 8-fold permutational symmetry.
class EriTensor {
public:
    EriTensor() = default;
    /// All-zero tensor over n functions.
    explicit EriTensor(Index n);

    /// Compute all integrals of a Gaussian basis with Cauchy-Schwarz screening.
    static EriTensor compute(const BasisSet& basis, double screening = 1e-12);

    Index dimension() const { return n_; }
    Index pair_count() const { return n_ * (n_ + 1) / 2; }
    double operator()(Index i, Index j, Index k, Index l) const;
    double pair_element(Index ij, Index kl) const;
    void set(Index i, Index j, Index k, Index l, double value);

    static Index pair_index(Index i, Index j) { return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i; }
    static std::size_t packed_index(Index p, Index q)
    {
        return p >= q ? static_cast<std::size_t>(p) * static_cast<std::size_t>(p + 1) / 2 + static_cast<std::size_t>(q)
                      : static_cast<std::size_t>(q) * static_cast<std::size_t>(q + 1) / 2 + static_cast<std::size_t>(p);
    }

    /// Number of shell quartets skipped by screening in the last compute.
    std::size_t screened_quartets() const { return screened_; }

private:
    Index n_ = 0;
    std::vector<double> data_;
    std::size_t screened_ = 0;
};

/// Pivoted Cholesky factorization of the ERI supermatrix: (ij|kl) ~ sum_P L_{ij,P} L_{kl,P}.
///
/// The factor is stored over packed pair indices (pair_count x rank), so a Coulomb build is
/// two matrix-vector products with it.
class CholeskyEri {
public:
    CholeskyEri() = default;
    CholeskyEri(const EriTensor& eri, double tolerance = 1e-8);

    Index dimension() const { return n_; }
    Index rank() const { return static_cast<Index>(vectors_.cols()); }
    /// Largest remaining diagonal at termination (error bound on each diagonal element).
    double residual() const { return residual_; }
    const Matrix& vectors() const { return vectors_; }

    /// Coulomb matrix J[D] for a real symmetric density D.
    Matrix coulomb(const Matrix& density) const;
    /// Coulomb matrix J[D] for D = a a^dagger.
    Matrix coulomb(const CVector& a) const;
    /// Exchange matrix K[D] for D = a a^dagger.
    CMatrix exchange(const CVector& a) const;
    /// J[D] a for D = a a^dagger, which for a single orbital also equals K[D] a.
    CVector coulomb_times(const CVector& a) const;

private:
    Matrix coulomb_from_pairs(const Vector& pairs) const;

    Index n_ = 0;
    double residual_ = 0.0;
    Matrix vectors_;
};

} // namespace naqmd
