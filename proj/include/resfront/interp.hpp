#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace resfront::interp {

/// Four-point Lagrange interpolation of uniformly spaced samples v[0..m] at
/// fractional index s in [0, m]. Exact for cubics; reproduces nodes exactly.
inline double cubic_uniform(const std::vector<double>& v, double s) {
    const long m = static_cast<long>(v.size()) - 1;
    if (m <= 0) return v.empty() ? 0.0 : v[0];
    if (s <= 0.0) return v[0];
    if (s >= static_cast<double>(m)) return v[m];
    long j = static_cast<long>(std::floor(s));
    const double frac = s - static_cast<double>(j);
    if (frac == 0.0) return v[j];
    if (m < 3) return v[j] + frac * (v[j + 1] - v[j]);
    // Stencil j-1 .. j+2, shifted inward at the ends.
    long k0 = std::clamp(j - 1, 0L, m - 3);
    const double t = s - static_cast<double>(k0);
    const double y0 = v[k0], y1 = v[k0 + 1], y2 = v[k0 + 2], y3 = v[k0 + 3];
    const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    const double l1 = t * (t - 2) * (t - 3) / 2.0;
    const double l2 = -t * (t - 1) * (t - 3) / 2.0;
    const double l3 = t * (t - 1) * (t - 2) / 6.0;
    return l0 * y0 + l1 * y1 + l2 * y2 + l3 * y3;
}

/// Value at physical coordinate x of samples spread uniformly over [a, b].
inline double cubic_on_interval(const std::vector<double>& v, double a, double b, double x) {
    const double m = static_cast<double>(v.size()) - 1;
    return cubic_uniform(v, (x - a) / (b - a) * m);
}

}  // namespace resfront::interp
