#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library; each routine is a plain textbook method so that agreement with
// the library is meaningful.

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

inline double logistic_F(double u) { return u * u / 2.0 - u * u * u / 3.0; }

inline double cubic_f(double u, double th) { return u * (u - th) * (1.0 - u); }
inline double cubic_F(double u, double th) {
    return -u * u * u * u / 4.0 + (1.0 + th) * u * u * u / 3.0 - th * u * u / 2.0;
}

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = std::abs(left + right - whole);
    if (depth <= 0 || diff <= 15.0 * tol || diff <= 64.0 * 2.2e-16 * std::abs(left + right))
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson_rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

/// Root of a continuous g on [a, b] with a sign change, by plain bisection.
inline double bisect(const std::function<double(double)>& g, double a, double b, int iters = 200) {
    double ga = g(a);
    for (int k = 0; k < iters; ++k) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm > 0) == (ga > 0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

struct Shot {
    double peak_x;  // first x with v' = 0
    double peak_v;
};

/// RK4 for v'' = -f(v), v(0) = 0, v'(0) = alpha, stepped until v' changes
/// sign; the crossing is refined by a cubic Hermite fit of (x, v').
inline Shot shoot_peak(const std::function<double(double)>& f, double alpha, double dx = 1e-4, double x_max = 200.0) {
    double x = 0.0, v = 0.0, p = alpha;
    while (x < x_max) {
        const double k1v = p, k1p = -f(v);
        const double k2v = p + 0.5 * dx * k1p, k2p = -f(v + 0.5 * dx * k1v);
        const double k3v = p + 0.5 * dx * k2p, k3p = -f(v + 0.5 * dx * k2v);
        const double k4v = p + dx * k3p, k4p = -f(v + dx * k3v);
        const double vn = v + dx / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        const double pn = p + dx / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        if (pn <= 0.0) {
            // p(s) on [0, dx] as a cubic Hermite with p' = -f(v).
            const double d0 = -f(v), d1 = -f(vn);
            auto herm = [&](double s) {
                const double t = s / dx;
                const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
                const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
                return h00 * p + h10 * dx * d0 + h01 * pn + h11 * dx * d1;
            };
            const double s = bisect(herm, 0.0, dx, 80);
            return {x + s, v + (vn - v) * s / dx};
        }
        x += dx;
        v = vn;
        p = pn;
    }
    return {x_max, v};
}

enum class Side { Over, Under };

/// Semi-wave shot q'' = c q' - f(q), q(0) = 0, q'(0) = c + alpha with RK4.
inline Side semiwave_side(const std::function<double(double)>& f, double alpha, double c, double dz = 2e-3,
                          double z_max = 120.0) {
    double q = 0.0, p = c + alpha;
    for (double z = 0.0; z < z_max; z += dz) {
        auto acc = [&](double qq, double pp) { return c * pp - f(qq); };
        const double k1q = p, k1p = acc(q, p);
        const double k2q = p + 0.5 * dz * k1p, k2p = acc(q + 0.5 * dz * k1q, p + 0.5 * dz * k1p);
        const double k3q = p + 0.5 * dz * k2p, k3p = acc(q + 0.5 * dz * k2q, p + 0.5 * dz * k2p);
        const double k4q = p + dz * k3p, k4p = acc(q + dz * k3q, p + dz * k3p);
        q += dz / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
        p += dz / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        if (q > 1.0) return Side::Over;
        if (p < 0.0) return Side::Under;
    }
    return q > 1.0 ? Side::Over : Side::Under;
}

/// c* by bisection on the shot side between c = lo and c = hi.
inline double semiwave_speed(const std::function<double(double)>& f, double alpha, double lo, double hi,
                             double tol = 1e-9) {
    const Side s_lo = semiwave_side(f, alpha, lo);
    while (hi - lo > tol) {
        const double m = 0.5 * (lo + hi);
        (semiwave_side(f, alpha, m) == s_lo ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

/// Finite-difference weights for the m-th derivative at x0 on nodes xs (Fornberg).
std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

/// m-th derivative at node i from a 9-point stencil, shifted inward at the ends.
double derivative(const std::vector<double>& x, const std::vector<double>& v, int i, int m) {
    const int n = static_cast<int>(v.size());
    const int lo = std::clamp(i - 4, 0, n - 9);
    std::vector<double> xs(x.begin() + lo, x.begin() + lo + 9);
    const auto w = fd_weights(x[i], xs, m);
    double d = 0.0;
    for (int k = 0; k < 9; ++k) d += w[k] * v[lo + k];
    return d;
}

}  // namespace oracle
