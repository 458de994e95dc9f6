#include "naqmd/integrals.hpp"

#include "naqmd/boys.hpp"
#include "integrals_kernels.hpp"

#include <cmath>
#include <fmt/format.h>

namespace naqmd {

namespace {

double double_factorial(int n)
{
    double r = 1.0;
    for (int k = n; k > 1; k -= 2) {
        r *= k;
    }
    return r;
}

/// int x^n exp(-2 alpha x^2) dx over the real line.
double gaussian_moment(int n, double alpha)
{
    if (n % 2 != 0) {
        return 0.0;
    }
    return double_factorial(n - 1) / std::pow(4.0 * alpha, n / 2) * std::sqrt(M_PI / (2.0 * alpha));
}

const Matrix& unnormalized_solid_harmonics(int l)
{
    static const std::array<Matrix, 3> table = [] {
        std::array<Matrix, 3> t;
        t[0] = Matrix::Ones(1, 1);
        t[1] = Matrix::Zero(3, 3);
        t[1](0, 1) = 1.0; // y
        t[1](1, 2) = 1.0; // z
        t[1](2, 0) = 1.0; // x
        t[2] = Matrix::Zero(5, 6);
        // columns: xx xy xz yy yz zz
        t[2](0, 1) = 1.0;
        t[2](1, 4) = 1.0;
        t[2](2, 0) = -1.0;
        t[2](2, 3) = -1.0;
        t[2](2, 5) = 2.0;
        t[2](3, 2) = 1.0;
        t[2](4, 0) = 1.0;
        t[2](4, 3) = -1.0;
        return t;
    }();
    return table[static_cast<std::size_t>(l)];
}

void require_gaussian(const BasisFunction& f)
{
    if (f.kind != FunctionKind::Gaussian) {
        throw ValidationError("operation requires Gaussian basis functions");
    }
}

BasisSet single(const BasisFunction& f)
{
    // Expand the single function into its full shell so shell kernels can be reused.
    std::vector<BasisFunction> shell;
    if (f.kind == FunctionKind::Gaussian) {
        for (int m = -f.l; m <= f.l; ++m) {
            BasisFunction g = f;
            g.m = m;
            shell.push_back(g);
        }
    } else {
        shell.push_back(f);
    }
    return BasisSet(std::move(shell));
}

Index local_index(const BasisFunction& f)
{
    return f.kind == FunctionKind::Gaussian ? f.m + f.l : 0;
}

} // namespace

std::vector<std::array<int, 3>> cartesian_powers(int l)
{
    std::vector<std::array<int, 3>> out;
    for (int i = l; i >= 0; --i) {
        for (int j = l - i; j >= 0; --j) {
            out.push_back({i, j, l - i - j});
        }
    }
    return out;
}

Matrix spherical_transform(int l, double alpha)
{
    Matrix c = unnormalized_solid_harmonics(l);
    const auto powers = cartesian_powers(l);
    const Index nc = static_cast<Index>(powers.size());
    Matrix gram(nc, nc);
    for (Index a = 0; a < nc; ++a) {
        for (Index b = 0; b < nc; ++b) {
            const auto& pa = powers[static_cast<std::size_t>(a)];
            const auto& pb = powers[static_cast<std::size_t>(b)];
            gram(a, b) = gaussian_moment(pa[0] + pb[0], alpha) * gaussian_moment(pa[1] + pb[1], alpha) *
                         gaussian_moment(pa[2] + pb[2], alpha);
        }
    }
    for (Index m = 0; m < c.rows(); ++m) {
        const double norm2 = c.row(m) * gram * c.row(m).transpose();
        c.row(m) /= std::sqrt(norm2);
    }
    return c;
}

double evaluate(const BasisFunction& f, const Vec3& r)
{
    const Vec3 d = r - f.center;
    if (f.kind == FunctionKind::Hydrogenic) {
        return detail::hydrogenic_value(f, d);
    }
    const Matrix c = spherical_transform(f.l, f.exponent());
    const auto powers = cartesian_powers(f.l);
    double sum = 0.0;
    for (std::size_t k = 0; k < powers.size(); ++k) {
        sum += c(f.m + f.l, static_cast<Index>(k)) * std::pow(d.x(), powers[k][0]) *
               std::pow(d.y(), powers[k][1]) * std::pow(d.z(), powers[k][2]);
    }
    return sum * std::exp(-f.exponent() * d.squaredNorm());
}

Matrix OneElectronMatrices::dipole_along(const Vec3& direction) const
{
    return direction.x() * dipole[0] + direction.y() * dipole[1] + direction.z() * dipole[2];
}

namespace detail {

void hermite_coulomb(int L, double p, const Vec3& PC, double* out)
{
    double F[kMaxHermite + 1];
    boys(L, p * PC.squaredNorm(), F);
    if (L == 0) {
        out[0] = F[0];
        return;
    }
    const int D = L + 1;
    // R[n][t][u][v] flattened; only n + t + u + v <= L is used.
    thread_local std::vector<double> R;
    R.assign(static_cast<std::size_t>(D * D * D * D), 0.0);
    auto at = [D](int n, int t, int u, int v) { return ((n * D + t) * D + u) * D + v; };
    double factor = 1.0;
    for (int n = 0; n <= L; ++n) {
        R[static_cast<std::size_t>(at(n, 0, 0, 0))] = factor * F[n];
        factor *= -2.0 * p;
    }
    for (int N = 1; N <= L; ++N) {
        for (int t = 0; t <= N; ++t) {
            for (int u = 0; u <= N - t; ++u) {
                const int v = N - t - u;
                for (int n = 0; n <= L - N; ++n) {
                    double value;
                    if (t > 0) {
                        value = PC.x() * R[static_cast<std::size_t>(at(n + 1, t - 1, u, v))];
                        if (t > 1) {
                            value += (t - 1) * R[static_cast<std::size_t>(at(n + 1, t - 2, u, v))];
                        }
                    } else if (u > 0) {
                        value = PC.y() * R[static_cast<std::size_t>(at(n + 1, t, u - 1, v))];
                        if (u > 1) {
                            value += (u - 1) * R[static_cast<std::size_t>(at(n + 1, t, u - 2, v))];
                        }
                    } else {
                        value = PC.z() * R[static_cast<std::size_t>(at(n + 1, t, u, v - 1))];
                        if (v > 1) {
                            value += (v - 1) * R[static_cast<std::size_t>(at(n + 1, t, u, v - 2))];
                        }
                    }
                    R[static_cast<std::size_t>(at(n, t, u, v))] = value;
                }
            }
        }
    }
    for (int t = 0; t <= L; ++t) {
        for (int u = 0; u <= L - t; ++u) {
            for (int v = 0; v <= L - t - u; ++v) {
                out[(t * D + u) * D + v] = R[static_cast<std::size_t>(at(0, t, u, v))];
            }
        }
    }
}

void hermite_e_1d(int imax, int jmax, double a, double b, double A, double B, HermiteE1D& E)
{
    const double p = a + b;
    const double Xab = A - B;
    const double Xpa = -b * Xab / p;
    const double Xpb = a * Xab / p;
    const double inv2p = 0.5 / p;
    for (int i = 0; i <= imax; ++i) {
        for (int j = 0; j <= jmax; ++j) {
            for (int t = 0; t <= i + j + 1 && t < HermiteE1D::kT; ++t) {
                E.e[i][j][t] = 0.0;
            }
        }
    }
    E.e[0][0][0] = std::exp(-a * b / p * Xab * Xab);
    for (int i = 0; i < imax; ++i) {
        for (int t = 0; t <= i + 1; ++t) {
            double v = Xpa * E.e[i][0][t];
            if (t > 0) {
                v += inv2p * E.e[i][0][t - 1];
            }
            if (t + 1 <= i) {
                v += (t + 1) * E.e[i][0][t + 1];
            }
            E.e[i + 1][0][t] = v;
        }
    }
    for (int j = 0; j < jmax; ++j) {
        for (int i = 0; i <= imax; ++i) {
            for (int t = 0; t <= i + j + 1; ++t) {
                double v = t <= i + j ? Xpb * E.e[i][j][t] : 0.0;
                if (t > 0) {
                    v += inv2p * E.e[i][j][t - 1];
                }
                if (t + 1 <= i + j) {
                    v += (t + 1) * E.e[i][j][t + 1];
                }
                E.e[i][j + 1][t] = v;
            }
        }
    }
}

CartesianPairBlocks cartesian_pair(const Shell& sa, const Shell& sb, const std::vector<Nucleus>& nuclei,
                                   bool with_nuclear)
{
    const int la = sa.l;
    const int lb = sb.l;
    const double a = sa.exponent();
    const double b = sb.exponent();
    const double p = a + b;
    const Vec3 P = (a * sa.center + b * sb.center) / p;
    HermiteE1D E[3];
    for (int d = 0; d < 3; ++d) {
        hermite_e_1d(la, lb + 2, a, b, sa.center[d], sb.center[d], E[d]);
    }
    const double sq = std::sqrt(M_PI / p);
    double s[3][HermiteE1D::kI][HermiteE1D::kJ];
    double t1[3][HermiteE1D::kI][HermiteE1D::kJ];
    double x1[3][HermiteE1D::kI][HermiteE1D::kJ];
    for (int d = 0; d < 3; ++d) {
        for (int i = 0; i <= la; ++i) {
            for (int j = 0; j <= lb + 2; ++j) {
                s[d][i][j] = E[d].e[i][j][0] * sq;
            }
            for (int j = 0; j <= lb; ++j) {
                double k = -2.0 * b * (2 * j + 1) * s[d][i][j] + 4.0 * b * b * s[d][i][j + 2];
                if (j >= 2) {
                    k += j * (j - 1) * s[d][i][j - 2];
                }
                t1[d][i][j] = -0.5 * k;
                x1[d][i][j] = (E[d].e[i][j][1] + P[d] * E[d].e[i][j][0]) * sq;
            }
        }
    }
    const auto pa = cartesian_powers(la);
    const auto pb = cartesian_powers(lb);
    const Index na = static_cast<Index>(pa.size());
    const Index nb = static_cast<Index>(pb.size());
    CartesianPairBlocks out;
    out.overlap.resize(na, nb);
    out.kinetic.resize(na, nb);
    for (auto& m : out.dipole) {
        m.resize(na, nb);
    }
    for (Index i = 0; i < na; ++i) {
        const auto& A = pa[static_cast<std::size_t>(i)];
        for (Index j = 0; j < nb; ++j) {
            const auto& B = pb[static_cast<std::size_t>(j)];
            const double sx = s[0][A[0]][B[0]];
            const double sy = s[1][A[1]][B[1]];
            const double sz = s[2][A[2]][B[2]];
            out.overlap(i, j) = sx * sy * sz;
            out.kinetic(i, j) = t1[0][A[0]][B[0]] * sy * sz + sx * t1[1][A[1]][B[1]] * sz +
                                sx * sy * t1[2][A[2]][B[2]];
            out.dipole[0](i, j) = x1[0][A[0]][B[0]] * sy * sz;
            out.dipole[1](i, j) = sx * x1[1][A[1]][B[1]] * sz;
            out.dipole[2](i, j) = sx * sy * x1[2][A[2]][B[2]];
        }
    }
    if (with_nuclear) {
        out.nuclear = Matrix::Zero(na, nb);
        const int L = la + lb;
        const int D = L + 1;
        double R[(kMaxHermite + 1) * (kMaxHermite + 1) * (kMaxHermite + 1)];
        for (const auto& nucleus : nuclei) {
            hermite_coulomb(L, p, P - nucleus.position, R);
            const double pref = -nucleus.charge * 2.0 * M_PI / p;
            for (Index i = 0; i < na; ++i) {
                const auto& A = pa[static_cast<std::size_t>(i)];
                for (Index j = 0; j < nb; ++j) {
                    const auto& B = pb[static_cast<std::size_t>(j)];
                    double sum = 0.0;
                    for (int t = 0; t <= A[0] + B[0]; ++t) {
                        const double ex = E[0].e[A[0]][B[0]][t];
                        for (int u = 0; u <= A[1] + B[1]; ++u) {
                            const double exy = ex * E[1].e[A[1]][B[1]][u];
                            for (int v = 0; v <= A[2] + B[2]; ++v) {
                                sum += exy * E[2].e[A[2]][B[2]][v] * R[(t * D + u) * D + v];
                            }
                        }
                    }
                    out.nuclear(i, j) += pref * sum;
                }
            }
        }
    }
    return out;
}

std::array<Matrix, 3> cartesian_grad_pair(const Shell& sa, const Shell& sb)
{
    const int la = sa.l;
    const int lb = sb.l;
    const double a = sa.exponent();
    const double b = sb.exponent();
    const double p = a + b;
    HermiteE1D E[3];
    for (int d = 0; d < 3; ++d) {
        hermite_e_1d(la, lb + 1, a, b, sa.center[d], sb.center[d], E[d]);
    }
    const double sq = std::sqrt(M_PI / p);
    double s[3][HermiteE1D::kI][HermiteE1D::kJ];
    double g[3][HermiteE1D::kI][HermiteE1D::kJ];
    for (int d = 0; d < 3; ++d) {
        for (int i = 0; i <= la; ++i) {
            for (int j = 0; j <= lb + 1; ++j) {
                s[d][i][j] = E[d].e[i][j][0] * sq;
            }
            for (int j = 0; j <= lb; ++j) {
                g[d][i][j] = 2.0 * b * s[d][i][j + 1] - (j > 0 ? j * s[d][i][j - 1] : 0.0);
            }
        }
    }
    const auto pa = cartesian_powers(la);
    const auto pb = cartesian_powers(lb);
    const Index na = static_cast<Index>(pa.size());
    const Index nb = static_cast<Index>(pb.size());
    std::array<Matrix, 3> out;
    for (auto& m : out) {
        m.resize(na, nb);
    }
    for (Index i = 0; i < na; ++i) {
        const auto& A = pa[static_cast<std::size_t>(i)];
        for (Index j = 0; j < nb; ++j) {
            const auto& B = pb[static_cast<std::size_t>(j)];
            const double sx = s[0][A[0]][B[0]];
            const double sy = s[1][A[1]][B[1]];
            const double sz = s[2][A[2]][B[2]];
            out[0](i, j) = g[0][A[0]][B[0]] * sy * sz;
            out[1](i, j) = sx * g[1][A[1]][B[1]] * sz;
            out[2](i, j) = sx * sy * g[2][A[2]][B[2]];
        }
    }
    return out;
}

} // namespace detail

namespace {

struct ShellTransforms {
    std::vector<Matrix> c;
    explicit ShellTransforms(const BasisSet& basis)
    {
        for (const auto& s : basis.shells()) {
            c.push_back(s.kind == FunctionKind::Gaussian ? spherical_transform(s.l, s.exponent())
                                                         : Matrix());
        }
    }
};

void check_hydrogenic_nuclei(const Shell& s, const std::vector<Nucleus>& nuclei)
{
    for (const auto& nucleus : nuclei) {
        if ((nucleus.position - s.center).norm() > 1e-12) {
            throw ValidationError(
                "hydrogenic basis functions support only the nucleus at their own centre");
        }
    }
}

/// Fill blocks for pairs that involve at least one hydrogenic function.
void hydrogenic_blocks(const BasisSet& basis, const Shell& sa, const Shell& sb,
                       const std::vector<Nucleus>& nuclei, OneElectronMatrices& out)
{
    const bool ha = sa.kind == FunctionKind::Hydrogenic;
    const Shell& hs = ha ? sa : sb;
    const Shell& os = ha ? sb : sa;
    check_hydrogenic_nuclei(hs, nuclei);
    const BasisFunction& h = basis[hs.first];
    const double Z = h.charge;
    const double En = detail::hydrogenic_energy(h);
    for (Index k = 0; k < os.size; ++k) {
        const BasisFunction& o = basis[os.first + k];
        const auto pair = detail::hydrogenic_pair(h, o);
        double s = pair.overlap;
        double inv_r = pair.inverse_r;
        if (o.kind == FunctionKind::Hydrogenic && (o.center - h.center).norm() < 1e-12) {
            s = (o.n == h.n && o.l == h.l && o.m == h.m) ? 1.0 : 0.0;
            if (o.l != h.l || o.m != h.m) {
                inv_r = 0.0;
            }
        }
        // (T + V_own) h = E_n h  =>  <o|T|h> = E_n <o|h> + Z <o|1/r|h>
        const double t = En * s + Z * inv_r;
        const double v = -Z * inv_r;
        const Index i = ha ? hs.first : os.first + k;
        const Index j = ha ? os.first + k : hs.first;
        out.overlap(i, j) = out.overlap(j, i) = s;
        out.kinetic(i, j) = out.kinetic(j, i) = t;
        out.nuclear(i, j) = out.nuclear(j, i) = v;
        for (int d = 0; d < 3; ++d) {
            out.dipole[static_cast<std::size_t>(d)](i, j) = pair.dipole[d];
            out.dipole[static_cast<std::size_t>(d)](j, i) = pair.dipole[d];
        }
    }
}

} // namespace

OneElectronMatrices one_electron_matrices(const BasisSet& basis, const std::vector<Nucleus>& nuclei)
{
    const Index n = basis.size();
    OneElectronMatrices out;
    out.overlap.resize(n, n);
    out.kinetic.resize(n, n);
    out.nuclear.resize(n, n);
    for (auto& d : out.dipole) {
        d.resize(n, n);
    }
    const auto& shells = basis.shells();
    const ShellTransforms tr(basis);
    for (std::size_t A = 0; A < shells.size(); ++A) {
        for (std::size_t B = 0; B <= A; ++B) {
            const Shell& sa = shells[A];
            const Shell& sb = shells[B];
            if (sa.kind == FunctionKind::Hydrogenic || sb.kind == FunctionKind::Hydrogenic) {
                hydrogenic_blocks(basis, sa, sb, nuclei, out);
                continue;
            }
            const auto cart = detail::cartesian_pair(sa, sb, nuclei, true);
            const Matrix& ca = tr.c[A];
            const Matrix& cb = tr.c[B];
            auto store = [&](Matrix& target, const Matrix& block) {
                const Matrix sph = ca * block * cb.transpose();
                target.block(sa.first, sb.first, sa.size, sb.size) = sph;
                target.block(sb.first, sa.first, sb.size, sa.size) = sph.transpose();
            };
            store(out.overlap, cart.overlap);
            store(out.kinetic, cart.kinetic);
            store(out.nuclear, cart.nuclear);
            for (std::size_t d = 0; d < 3; ++d) {
                store(out.dipole[d], cart.dipole[d]);
            }
        }
    }
    // Symmetrize the kinetic block to remove rounding asymmetry of the one-sided formula.
    out.kinetic = 0.5 * (out.kinetic + out.kinetic.transpose()).eval();
    return out;
}

Matrix overlap_matrix(const BasisSet& basis)
{
    return one_electron_matrices(basis, {}).overlap;
}

Matrix core_hamiltonian(const BasisSet& basis, const std::vector<Nucleus>& nuclei)
{
    return one_electron_matrices(basis, nuclei).core();
}

std::array<Matrix, 3> gradient_overlap_matrices(const BasisSet& basis, int nucleus)
{
    const Index n = basis.size();
    std::array<Matrix, 3> out;
    for (auto& m : out) {
        m = Matrix::Zero(n, n);
    }
    const auto& shells = basis.shells();
    const ShellTransforms tr(basis);
    for (std::size_t B = 0; B < shells.size(); ++B) {
        const Shell& sb = shells[B];
        if (sb.nucleus != nucleus) {
            continue;
        }
        if (sb.kind != FunctionKind::Gaussian) {
            throw ValidationError("gradient overlap requires Gaussian basis functions");
        }
        for (std::size_t A = 0; A < shells.size(); ++A) {
            const Shell& sa = shells[A];
            if (sa.kind != FunctionKind::Gaussian) {
                throw ValidationError("gradient overlap requires Gaussian basis functions");
            }
            const auto g = detail::cartesian_grad_pair(sa, sb);
            for (std::size_t d = 0; d < 3; ++d) {
                out[d].block(sa.first, sb.first, sa.size, sb.size) = tr.c[A] * g[d] * tr.c[B].transpose();
            }
        }
    }
    return out;
}

double overlap(const BasisFunction& a, const BasisFunction& b)
{
    const BasisSet sa = single(a);
    const BasisSet sb = single(b);
    std::vector<BasisFunction> both = sa.functions();
    both.insert(both.end(), sb.functions().begin(), sb.functions().end());
    return overlap_matrix(BasisSet(both))(local_index(a), sa.size() + local_index(b));
}

namespace {

OneElectronMatrices pair_matrices(const BasisFunction& a, const BasisFunction& b,
                                  const std::vector<Nucleus>& nuclei, Index& ia, Index& ib)
{
    const BasisSet sa = single(a);
    const BasisSet sb = single(b);
    std::vector<BasisFunction> both = sa.functions();
    both.insert(both.end(), sb.functions().begin(), sb.functions().end());
    ia = local_index(a);
    ib = sa.size() + local_index(b);
    return one_electron_matrices(BasisSet(both), nuclei);
}

} // namespace

double kinetic(const BasisFunction& a, const BasisFunction& b)
{
    if (a.kind == FunctionKind::Hydrogenic || b.kind == FunctionKind::Hydrogenic) {
        const BasisFunction& h = a.kind == FunctionKind::Hydrogenic ? a : b;
        Index ia = 0;
        Index ib = 0;
        const auto m = pair_matrices(a, b, {Nucleus{h.charge, units::proton_mass, h.center}}, ia, ib);
        return m.kinetic(ia, ib);
    }
    Index ia = 0;
    Index ib = 0;
    return pair_matrices(a, b, {}, ia, ib).kinetic(ia, ib);
}

double nuclear_attraction(const BasisFunction& a, const BasisFunction& b, const Vec3& C, double Z)
{
    Index ia = 0;
    Index ib = 0;
    return pair_matrices(a, b, {Nucleus{Z, units::proton_mass, C}}, ia, ib).nuclear(ia, ib);
}

Vec3 dipole(const BasisFunction& a, const BasisFunction& b)
{
    Index ia = 0;
    Index ib = 0;
    std::vector<Nucleus> nuclei;
    if (a.kind == FunctionKind::Hydrogenic || b.kind == FunctionKind::Hydrogenic) {
        const BasisFunction& h = a.kind == FunctionKind::Hydrogenic ? a : b;
        nuclei.push_back(Nucleus{h.charge, units::proton_mass, h.center});
    }
    const auto m = pair_matrices(a, b, nuclei, ia, ib);
    return Vec3(m.dipole[0](ia, ib), m.dipole[1](ia, ib), m.dipole[2](ia, ib));
}

Vec3 grad_overlap(const BasisFunction& a, const BasisFunction& b, int nucleus)
{
    require_gaussian(a);
    require_gaussian(b);
    if (b.nucleus != nucleus || nucleus < 0) {
        return Vec3::Zero();
    }
    std::vector<BasisFunction> both = single(a).functions();
    const Index offset = static_cast<Index>(both.size());
    const BasisSet sb = single(b);
    both.insert(both.end(), sb.functions().begin(), sb.functions().end());
    const auto g = gradient_overlap_matrices(BasisSet(both), nucleus);
    const Index i = local_index(a);
    const Index j = offset + local_index(b);
    return Vec3(g[0](i, j), g[1](i, j), g[2](i, j));
}

double nuclear_repulsion(const std::vector<Nucleus>& nuclei)
{
    double u = 0.0;
    for (std::size_t a = 0; a < nuclei.size(); ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            u += nuclei[a].charge * nuclei[b].charge / (nuclei[a].position - nuclei[b].position).norm();
        }
    }
    return u;
}

} // namespace naqmd
