#include "integrals_kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <array>
#include <cmath>
#include <vector>

namespace naqmd::detail {

namespace {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Gauss-Legendre rule on [-1, 1].
template <unsigned N>
Rule legendre()
{
    using G = boost::math::quadrature::gauss<double, N>;
    Rule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
        r.x.push_back(a[i]);
        r.w.push_back(w[i]);
        if (a[i] != 0.0) {
            r.x.push_back(-a[i]);
            r.w.push_back(w[i]);
        }
    }
    return r;
}

double radial(const BasisFunction& f, double r)
{
    const double Z = f.charge;
    if (f.n == 1) {
        return 2.0 * std::pow(Z, 1.5) * std::exp(-Z * r);
    }
    if (f.l == 0) {
        return 2.0 * std::pow(Z / 2.0, 1.5) * (1.0 - Z * r / 2.0) * std::exp(-Z * r / 2.0);
    }
    return std::pow(Z / 2.0, 1.5) / std::sqrt(3.0) * Z * r * std::exp(-Z * r / 2.0);
}

/// Real spherical harmonic for l <= 1 at unit vector u.
double angular(int l, int m, const Vec3& u)
{
    if (l == 0) {
        return 1.0 / std::sqrt(4.0 * M_PI);
    }
    const double c = std::sqrt(3.0 / (4.0 * M_PI));
    if (m == -1) {
        return c * u.y();
    }
    if (m == 0) {
        return c * u.z();
    }
    return c * u.x();
}

bool axial(const BasisFunction& h, const BasisFunction& o)
{
    const Vec3 d = o.center - h.center;
    return h.m == 0 && o.m == 0 && std::abs(d.x()) < 1e-14 && std::abs(d.y()) < 1e-14;
}

} // namespace

double hydrogenic_value(const BasisFunction& f, const Vec3& d)
{
    const double r = d.norm();
    const Vec3 u = r > 0.0 ? Vec3(d / r) : Vec3(0.0, 0.0, 1.0);
    return radial(f, r) * angular(f.l, f.m, u);
}

double hydrogenic_energy(const BasisFunction& f)
{
    return -f.charge * f.charge / (2.0 * f.n * f.n);
}

HydrogenicPair hydrogenic_pair(const BasisFunction& h, const BasisFunction& o)
{
    static const Rule rr = legendre<32>();
    static const Rule rm = legendre<96>();
    const double scale = 1.0 / h.charge;
    const double panels[] = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 96.0, 128.0};
    const bool is_axial = axial(h, o);
    const int nphi = is_axial ? 1 : 48;
    // Precompute the Cartesian expansion of a Gaussian partner once.
    std::vector<double> coef;
    std::vector<std::array<int, 3>> powers;
    if (o.kind == FunctionKind::Gaussian) {
        const Matrix c = spherical_transform(o.l, o.exponent());
        powers = cartesian_powers(o.l);
        for (std::size_t q = 0; q < powers.size(); ++q) {
            coef.push_back(c(o.m + o.l, static_cast<Index>(q)));
        }
    }
    auto value_o = [&](const Vec3& pos) {
        if (o.kind != FunctionKind::Gaussian) {
            return evaluate(o, pos);
        }
        const Vec3 d = pos - o.center;
        double sum = 0.0;
        for (std::size_t q = 0; q < powers.size(); ++q) {
            double term = coef[q];
            for (int e = 0; e < powers[q][0]; ++e) {
                term *= d.x();
            }
            for (int e = 0; e < powers[q][1]; ++e) {
                term *= d.y();
            }
            for (int e = 0; e < powers[q][2]; ++e) {
                term *= d.z();
            }
            sum += term;
        }
        return sum * std::exp(-o.exponent() * d.squaredNorm());
    };
    HydrogenicPair out;
    double acc[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k + 1 < std::size(panels); ++k) {
        const double r0 = panels[k] * scale;
        const double r1 = panels[k + 1] * scale;
        const double half = 0.5 * (r1 - r0);
        const double mid = 0.5 * (r1 + r0);
        for (std::size_t ir = 0; ir < rr.x.size(); ++ir) {
            const double r = mid + half * rr.x[ir];
            const double wr = half * rr.w[ir] * r * r;
            const double hr = radial(h, r);
            for (std::size_t im = 0; im < rm.x.size(); ++im) {
                const double mu = rm.x[im];
                const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                const double wm = rm.w[im];
                for (int ip = 0; ip < nphi; ++ip) {
                    const double phi = 2.0 * M_PI * ip / nphi;
                    const double wp = 2.0 * M_PI / nphi;
                    const Vec3 u(st * std::cos(phi), st * std::sin(phi), mu);
                    const double hv = hr * angular(h.l, h.m, u);
                    const Vec3 pos = h.center + r * u;
                    const double w = wr * wm * wp * hv * value_o(pos);
                    acc[0] += w;
                    acc[1] += w / r;
                    acc[2] += w * pos.x();
                    acc[3] += w * pos.y();
                    acc[4] += w * pos.z();
                }
            }
        }
    }
    out.overlap = acc[0];
    out.inverse_r = acc[1];
    out.dipole = Vec3(acc[2], acc[3], acc[4]);
    if (is_axial) {
        out.dipole.x() = h.center.x() * out.overlap;
        out.dipole.y() = h.center.y() * out.overlap;
    }
    return out;
}

} // namespace naqmd::detail
