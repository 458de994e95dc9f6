#include "naqmd/eri.hpp"

#include "integrals_kernels.hpp"
#include "naqmd/integrals.hpp"

#include <array>
#include <cmath>
#include <spdlog/spdlog.h>

namespace naqmd {

namespace {

struct HermiteIndex {
    std::vector<std::array<int, 3>> tuv;
};

const HermiteIndex& hermite_index(int L)
{
    static const std::array<HermiteIndex, 5> table = [] {
        std::array<HermiteIndex, 5> t;
        for (int l = 0; l <= 4; ++l) {
            for (int a = 0; a <= l; ++a) {
                for (int b = 0; b <= l - a; ++b) {
                    for (int c = 0; c <= l - a - b; ++c) {
                        t[static_cast<std::size_t>(l)].tuv.push_back({a, b, c});
                    }
                }
            }
        }
        return t;
    }();
    return table[static_cast<std::size_t>(L)];
}

/// Shell pair data: Gaussian product centre and spherical Hermite expansion matrix.
struct ShellPair {
    std::size_t a = 0;
    std::size_t b = 0;
    double p = 0.0;
    Vec3 P = Vec3::Zero();
    int L = 0;
    Matrix E; // (size_a * size_b) x n_hermite
    double bound = 0.0;
};

ShellPair make_pair(const std::vector<Shell>& shells, const std::vector<Matrix>& tr, std::size_t A, std::size_t B)
{
    const Shell& sa = shells[A];
    const Shell& sb = shells[B];
    ShellPair sp;
    sp.a = A;
    sp.b = B;
    const double a = sa.exponent();
    const double b = sb.exponent();
    sp.p = a + b;
    sp.P = (a * sa.center + b * sb.center) / sp.p;
    sp.L = sa.l + sb.l;
    detail::HermiteE1D E[3];
    for (int d = 0; d < 3; ++d) {
        detail::hermite_e_1d(sa.l, sb.l, a, b, sa.center[d], sb.center[d], E[d]);
    }
    const auto pa = cartesian_powers(sa.l);
    const auto pb = cartesian_powers(sb.l);
    const auto& herm = hermite_index(sp.L).tuv;
    const Index na = static_cast<Index>(pa.size());
    const Index nb = static_cast<Index>(pb.size());
    Matrix cart(na * nb, static_cast<Index>(herm.size()));
    for (Index i = 0; i < na; ++i) {
        const auto& I = pa[static_cast<std::size_t>(i)];
        for (Index j = 0; j < nb; ++j) {
            const auto& J = pb[static_cast<std::size_t>(j)];
            for (std::size_t h = 0; h < herm.size(); ++h) {
                const auto& t = herm[h];
                double v = 0.0;
                if (t[0] <= I[0] + J[0] && t[1] <= I[1] + J[1] && t[2] <= I[2] + J[2]) {
                    v = E[0].e[I[0]][J[0]][t[0]] * E[1].e[I[1]][J[1]][t[1]] * E[2].e[I[2]][J[2]][t[2]];
                }
                cart(i * nb + j, static_cast<Index>(h)) = v;
            }
        }
    }
    const Matrix& ca = tr[A];
    const Matrix& cb = tr[B];
    Matrix kron(ca.rows() * cb.rows(), na * nb);
    for (Index r = 0; r < ca.rows(); ++r) {
        for (Index s = 0; s < cb.rows(); ++s) {
            for (Index i = 0; i < na; ++i) {
                for (Index j = 0; j < nb; ++j) {
                    kron(r * cb.rows() + s, i * nb + j) = ca(r, i) * cb(s, j);
                }
            }
        }
    }
    sp.E = kron * cart;
    return sp;
}

/// Block of (ab|cd) over spherical functions, rows (a, b), columns (c, d).
void quartet(const ShellPair& ab, const ShellPair& cd, Matrix& rmat, Matrix& out)
{
    const double p = ab.p;
    const double q = cd.p;
    const double alpha = p * q / (p + q);
    const double pref = 2.0 * std::pow(M_PI, 2.5) / (p * q * std::sqrt(p + q));
    const int L = ab.L + cd.L;
    double R[(detail::kMaxHermite + 1) * (detail::kMaxHermite + 1) * (detail::kMaxHermite + 1)];
    detail::hermite_coulomb(L, alpha, ab.P - cd.P, R);
    if (L == 0) {
        out.resize(ab.E.rows(), cd.E.rows());
        out(0, 0) = pref * ab.E(0, 0) * cd.E(0, 0) * R[0];
        return;
    }
    const int D = L + 1;
    const auto& h1 = hermite_index(ab.L).tuv;
    const auto& h2 = hermite_index(cd.L).tuv;
    rmat.resize(static_cast<Index>(h1.size()), static_cast<Index>(h2.size()));
    for (std::size_t x = 0; x < h1.size(); ++x) {
        for (std::size_t y = 0; y < h2.size(); ++y) {
            const auto& a = h1[x];
            const auto& b = h2[y];
            const double sign = ((b[0] + b[1] + b[2]) % 2 == 0) ? 1.0 : -1.0;
            rmat(static_cast<Index>(x), static_cast<Index>(y)) =
                sign * R[((a[0] + b[0]) * D + (a[1] + b[1])) * D + (a[2] + b[2])];
        }
    }
    out.noalias() = pref * (ab.E * rmat * cd.E.transpose());
}

} // namespace

EriTensor::EriTensor(Index n) : n_(n)
{
    const std::size_t np = static_cast<std::size_t>(pair_count());
    data_.assign(np * (np + 1) / 2, 0.0);
}

double EriTensor::operator()(Index i, Index j, Index k, Index l) const
{
    return data_[packed_index(pair_index(i, j), pair_index(k, l))];
}

double EriTensor::pair_element(Index ij, Index kl) const
{
    return data_[packed_index(ij, kl)];
}

void EriTensor::set(Index i, Index j, Index k, Index l, double value)
{
    data_[packed_index(pair_index(i, j), pair_index(k, l))] = value;
}

EriTensor EriTensor::compute(const BasisSet& basis, double screening)
{
    if (basis.has_hydrogenic()) {
        throw ValidationError("two-electron integrals require a Gaussian-only basis");
    }
    EriTensor eri(basis.size());
    const auto& shells = basis.shells();
    std::vector<Matrix> tr;
    for (const auto& s : shells) {
        tr.push_back(spherical_transform(s.l, s.exponent()));
    }
    std::vector<ShellPair> pairs;
    for (std::size_t A = 0; A < shells.size(); ++A) {
        for (std::size_t B = 0; B <= A; ++B) {
            pairs.push_back(make_pair(shells, tr, A, B));
        }
    }
    Matrix rmat;
    Matrix block;
    for (auto& sp : pairs) {
        quartet(sp, sp, rmat, block);
        sp.bound = std::sqrt(block.diagonal().cwiseAbs().maxCoeff());
    }
    std::size_t screened = 0;
    for (std::size_t x = 0; x < pairs.size(); ++x) {
        const ShellPair& ab = pairs[x];
        const Shell& sa = shells[ab.a];
        const Shell& sb = shells[ab.b];
        for (std::size_t y = 0; y <= x; ++y) {
            const ShellPair& cd = pairs[y];
            if (ab.bound * cd.bound < screening) {
                ++screened;
                continue;
            }
            quartet(ab, cd, rmat, block);
            const Shell& sc = shells[cd.a];
            const Shell& sd = shells[cd.b];
            for (Index i = 0; i < sa.size; ++i) {
                for (Index j = 0; j < sb.size; ++j) {
                    const Index ij = pair_index(sa.first + i, sb.first + j);
                    for (Index k = 0; k < sc.size; ++k) {
                        for (Index l = 0; l < sd.size; ++l) {
                            const Index kl = pair_index(sc.first + k, sd.first + l);
                            eri.data_[packed_index(ij, kl)] = block(i * sb.size + j, k * sd.size + l);
                        }
                    }
                }
            }
        }
    }
    eri.screened_ = screened;
    return eri;
}

double eri(const BasisFunction& a, const BasisFunction& b, const BasisFunction& c, const BasisFunction& d)
{
    std::vector<Shell> shells;
    std::vector<Matrix> tr;
    for (const BasisFunction* f : {&a, &b, &c, &d}) {
        if (f->kind != FunctionKind::Gaussian) {
            throw ValidationError("two-electron integrals require Gaussian functions");
        }
        Shell s;
        s.kind = f->kind;
        s.center = f->center;
        s.nucleus = f->nucleus;
        s.l = f->l;
        s.width = f->width;
        s.size = 2 * f->l + 1;
        shells.push_back(s);
        tr.push_back(spherical_transform(f->l, f->exponent()));
    }
    const ShellPair ab = make_pair(shells, tr, 0, 1);
    const ShellPair cd = make_pair(shells, tr, 2, 3);
    Matrix rmat;
    Matrix block;
    quartet(ab, cd, rmat, block);
    return block((a.m + a.l) * shells[1].size + b.m + b.l, (c.m + c.l) * shells[3].size + d.m + d.l);
}

CholeskyEri::CholeskyEri(const EriTensor& eri, double tolerance) : n_(eri.dimension())
{
    const Index N = eri.pair_count();
    Vector diag(N);
    for (Index p = 0; p < N; ++p) {
        diag(p) = eri.pair_element(p, p);
    }
    Index capacity = std::min<Index>(N, 4 * n_ + 16);
    Matrix L = Matrix::Zero(N, capacity);
    Index m = 0;
    Vector column(N);
    residual_ = 0.0;
    while (m < N) {
        Index q = 0;
        const double dmax = diag.maxCoeff(&q);
        residual_ = std::max(dmax, 0.0);
        if (dmax <= tolerance) {
            break;
        }
        if (m == capacity) {
            capacity = std::min<Index>(N, 2 * capacity);
            L.conservativeResize(N, capacity);
            L.rightCols(capacity - m).setZero();
        }
        for (Index p = 0; p < N; ++p) {
            column(p) = eri.pair_element(p, q);
        }
        if (m > 0) {
            column.noalias() -= L.leftCols(m) * L.block(q, 0, 1, m).transpose();
        }
        L.col(m) = column / std::sqrt(dmax);
        diag -= L.col(m).cwiseAbs2();
        diag(q) = 0.0;
        ++m;
    }
    vectors_ = L.leftCols(m);
    spdlog::debug("ERI Cholesky rank {} of {} pairs (residual {:.2e})", m, N, residual_);
}

Matrix CholeskyEri::coulomb_from_pairs(const Vector& pairs) const
{
    const Vector y = vectors_.transpose() * pairs;
    const Vector packed = vectors_ * y;
    Matrix J(n_, n_);
    for (Index i = 0; i < n_; ++i) {
        for (Index j = 0; j <= i; ++j) {
            J(i, j) = J(j, i) = packed(EriTensor::pair_index(i, j));
        }
    }
    return J;
}

Matrix CholeskyEri::coulomb(const Matrix& density) const
{
    if (density.rows() != n_ || density.cols() != n_) {
        throw ValidationError("density dimension does not match the ERI store");
    }
    Vector pairs(vectors_.rows());
    for (Index i = 0; i < n_; ++i) {
        for (Index j = 0; j < i; ++j) {
            pairs(EriTensor::pair_index(i, j)) = density(i, j) + density(j, i);
        }
        pairs(EriTensor::pair_index(i, i)) = density(i, i);
    }
    return coulomb_from_pairs(pairs);
}

Matrix CholeskyEri::coulomb(const CVector& a) const
{
    if (a.size() != n_) {
        throw ValidationError("coefficient dimension does not match the ERI store");
    }
    Vector pairs(vectors_.rows());
    for (Index i = 0; i < n_; ++i) {
        for (Index j = 0; j < i; ++j) {
            pairs(EriTensor::pair_index(i, j)) = 2.0 * std::real(std::conj(a(i)) * a(j));
        }
        pairs(EriTensor::pair_index(i, i)) = std::norm(a(i));
    }
    return coulomb_from_pairs(pairs);
}

CMatrix CholeskyEri::exchange(const CVector& a) const
{
    if (a.size() != n_) {
        throw ValidationError("coefficient dimension does not match the ERI store");
    }
    const Index M = rank();
    // W(:, P) = L_P a with L_P the symmetric matrix of Cholesky vector P; K = W W^dagger.
    // Row i of the packed lower triangle is contiguous: entries (i, 0..i).
    const Vector ar = a.real();
    const Vector ai = a.imag();
    Matrix Wr = Matrix::Zero(n_, M);
    Matrix Wi = Matrix::Zero(n_, M);
    for (Index P = 0; P < M; ++P) {
        const double* col = vectors_.col(P).data();
        double* wr = Wr.col(P).data();
        double* wi = Wi.col(P).data();
        Index ij = 0;
        for (Index i = 0; i < n_; ++i) {
            const Eigen::Map<const Vector> row(col + ij, i);
            Eigen::Map<Vector>(wr, i) += ar(i) * row;
            Eigen::Map<Vector>(wi, i) += ai(i) * row;
            const double d = col[ij + i];
            wr[i] += row.dot(ar.head(i)) + d * ar(i);
            wi[i] += row.dot(ai.head(i)) + d * ai(i);
            ij += i + 1;
        }
    }
    CMatrix K(n_, n_);
    Matrix re = Wr * Wr.transpose();
    re.noalias() += Wi * Wi.transpose();
    Matrix im = Wi * Wr.transpose();
    im.noalias() -= Wr * Wi.transpose();
    K.real() = re;
    K.imag() = im;
    return K;
}

CVector CholeskyEri::coulomb_times(const CVector& a) const
{
    const Matrix J = coulomb(a);
    CVector out(n_);
    out.real() = J * a.real();
    out.imag() = J * a.imag();
    return out;
}

} // namespace naqmd
