#include "bdp/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bdp {

void Mat64::set_row(int r, const Vec64& v) {
    if (static_cast<int>(v.size()) != cols) throw std::invalid_argument("set_row: length mismatch");
    std::copy(v.begin(), v.end(), data.begin() + static_cast<size_t>(r) * cols);
}

uint64_t RngStream::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + uniform01() * (hi - lo);
}

double RngStream::normal(double mean, double sigma) {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return mean + sigma * cached_normal_;
    }
    // Box-Muller; u1 is kept away from 0 so the log is finite.
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return mean + sigma * r * std::cos(theta);
}

uint64_t RngStream::uniform_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const uint64_t threshold = (0ULL - n) % n;  // rejection bound for unbiased modulo
    uint64_t r = 0;
    do {
        r = next_u64();
    } while (r < threshold);
    return r % n;
}

void RngStream::shuffle(std::vector<int>& v) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(uniform_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

RngStream RngStream::fork(uint64_t tag) const {
    // Child seed mixes the parent seed with the tag through one splitmix
    // finalizer round, so children with distinct tags are decorrelated.
    uint64_t z = seed_ ^ (0xD1B54A32D192ED03ULL * (tag + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return RngStream(z, z);
}

Vec64 softmax(const Vec64& v) {
    if (v.empty()) throw std::invalid_argument("softmax: empty input");
    if (!all_finite(v)) throw std::invalid_argument("softmax: non-finite logits");
    const double m = *std::max_element(v.begin(), v.end());
    Vec64 out(v.size());
    double sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

double l2_distance(const Vec64& p, const Vec64& y) {
    if (p.size() != y.size()) throw std::invalid_argument("l2_distance: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double dot(const Vec64& a, const Vec64& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec64& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void axpy(double a, const Vec64& x, Vec64& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Vec64 matvec(const Mat64& m, const Vec64& x) {
    if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec: length mismatch");
    Vec64 out(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        const double* row = m.data.data() + static_cast<size_t>(r) * m.cols;
        for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

int argmax(const Vec64& v) {
    if (v.empty()) throw std::invalid_argument("argmax: empty input");
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;  // ties keep the lowest index
    }
    return best;
}

bool all_finite(const Vec64& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

PowerIterResult power_iteration(const MatVecFn& matvec_fn, int dim, int max_iters,
                                double tol, RngStream& rng) {
    if (dim < 1) throw std::invalid_argument("power_iteration: dim must be >= 1");

    Vec64 v(dim);
    double vnorm = 0.0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        for (int i = 0; i < dim; ++i) v[i] = rng.normal();
        vnorm = norm2(v);
        if (vnorm > 1e-12) break;
    }
    if (vnorm <= 1e-12) throw std::runtime_error("power_iteration: could not draw a nonzero start vector");
    for (double& x : v) x /= vnorm;

    PowerIterResult res;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < max_iters; ++k) {
        Vec64 w = matvec_fn(v);
        if (static_cast<int>(w.size()) != dim)
            throw std::runtime_error("power_iteration: operator returned wrong dimension");
        const double lambda = dot(v, w);  // Rayleigh quotient, v is unit norm
        res.eigval = lambda;
        res.iterations = k + 1;
        const double wnorm = norm2(w);
        if (wnorm <= 1e-300) {
            // Operator annihilated the iterate: eigenvalue 0 along v.
            res.eigval = 0.0;
            res.eigvec = v;
            res.converged = true;
            return res;
        }
        for (int i = 0; i < dim; ++i) v[i] = w[i] / wnorm;
        if (k > 0 && std::abs(lambda - prev) <= tol) {
            res.eigvec = v;
            res.converged = true;
            return res;
        }
        prev = lambda;
    }
    res.eigvec = v;
    return res;
}

Vec64 central_diff_gradient(const ScalarFn& f, const Vec64& x, double h) {
    if (h <= 0.0) throw std::invalid_argument("central_diff_gradient: h must be positive");
    Vec64 g(x.size(), 0.0);
    Vec64 probe = x;
    for (size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        probe[i] = xi + h;
        const double fp = f(probe);
        probe[i] = xi - h;
        const double fm = f(probe);
        probe[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("central_diff_gradient: non-finite probe at component " + std::to_string(i));
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace bdp
