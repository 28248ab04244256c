#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bdp/numcore.hpp"

// Test-only reference implementations. These deliberately take different
// algorithmic routes than the library code they check.

namespace oracles {

// Cyclic Jacobi eigensolver for symmetric matrices: returns all eigenvalues.
inline std::vector<double> jacobi_eigenvalues(bdp::Mat64 a, int sweeps = 100) {
    if (a.rows != a.cols) throw std::invalid_argument("jacobi: square matrix required");
    const int n = a.rows;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a(i, i);
    return eig;
}

// Eigenvalue of largest magnitude, sign preserved.
inline double dominant_eigenvalue(const bdp::Mat64& a) {
    const auto eig = jacobi_eigenvalues(a);
    double best = eig[0];
    for (double v : eig) {
        if (std::abs(v) > std::abs(best)) best = v;
    }
    return best;
}

// Two-pass population variance.
inline double variance_two_pass(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size());
}

// Random symmetric matrix with entries in [-1, 1].
inline bdp::Mat64 random_symmetric(int n, bdp::RngStream& rng) {
    bdp::Mat64 a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = rng.uniform(-1.0, 1.0);
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

}  // namespace oracles
