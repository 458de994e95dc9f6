#pragma once

namespace naqmd {

/// Boys functions F_0(x) .. F_mmax(x), F_m(x) = int_0^1 t^(2m) exp(-x t^2) dt.
/// Series plus downward recursion below the switchover, erf plus upward recursion above it.
void boys(int mmax, double x, double* out);

/// Argument at which the evaluation switches from the series to upward recursion.
inline constexpr double boys_switchover = 20.0;

} // namespace naqmd
