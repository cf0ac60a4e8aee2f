#pragma once

// Independent oracles shared by the unit tests. Nothing here calls into the
// library's quadrature or shape-function code.

#include "mhm/common.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// int_T x^a y^b over the reference triangle (0,0), (1,0), (0,1).
inline double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// Tensor Gauss rule on [0,1]^2 split into m x m cells.
inline double integrate_unit_square(const std::function<double(double, double)>& f, int m = 8, int n = 12) {
    std::vector<double> x, w;
    gauss(n, x, w);
    double sum = 0.0;
    const double h = 1.0 / m;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const double px = h * (i + 0.5 * (x[a] + 1.0));
                    const double py = h * (j + 0.5 * (x[b] + 1.0));
                    sum += 0.25 * h * h * w[a] * w[b] * f(px, py);
                }
    return sum;
}

inline std::mt19937& rng() {
    static std::mt19937 gen(20240917u);
    return gen;
}

inline double uniform(double a = -1.0, double b = 1.0) {
    return std::uniform_real_distribution<double>(a, b)(rng());
}

/// Uniform point in the reference triangle.
inline mhm::Point reference_point() {
    double a = uniform(0.0, 1.0), b = uniform(0.0, 1.0);
    if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    return {a, b};
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
