#include "naqmd/boys.hpp"

#include <cmath>

namespace naqmd {

void boys(int mmax, double x, double* out)
{
    if (x < boys_switchover) {
        const double ex = std::exp(-x);
        // F_m(x) = exp(-x) sum_k (2x)^k / ((2m+1)(2m+3)...(2m+2k+1))
        double term = 1.0 / (2 * mmax + 1);
        double sum = term;
        for (int k = 1; k < 400; ++k) {
            term *= 2.0 * x / (2 * mmax + 2 * k + 1);
            sum += term;
            if (term < 1e-17 * sum) {
                break;
            }
        }
        out[mmax] = ex * sum;
        for (int m = mmax - 1; m >= 0; --m) {
            out[m] = (2.0 * x * out[m + 1] + ex) / (2 * m + 1);
        }
        return;
    }
    const double ex = std::exp(-x);
    const double sx = std::sqrt(x);
    out[0] = 0.5 * std::sqrt(M_PI) / sx * std::erf(sx);
    for (int m = 0; m < mmax; ++m) {
        out[m + 1] = ((2 * m + 1) * out[m] - ex) / (2.0 * x);
    }
}

} // namespace naqmd
