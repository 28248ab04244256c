#pragma once

#include <cstdint>
#include <functional>
#include <vector>

// Deterministic numeric kernels shared by every module: dense vector/matrix
// helpers, softmax, seeded randomness, power iteration, finite differences.
// Everything is 64-bit float and bit-reproducible for a fixed seed.

namespace bdp {

using Vec64 = std::vector<double>;

struct Mat64 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    Mat64() = default;
    Mat64(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    Vec64 row(int r) const {
        return Vec64(data.begin() + static_cast<size_t>(r) * cols,
                     data.begin() + static_cast<size_t>(r + 1) * cols);
    }
    void set_row(int r, const Vec64& v);
};

// Counter-based stream built on splitmix64: the state advances by a fixed
// odd constant and each output is a finalizer of the state, so sequences
// depend only on the seed and draw count (stable across platforms).
class RngStream {
public:
    explicit RngStream(uint64_t seed) : seed_(seed), state_(seed) {}

    uint64_t next_u64();
    double uniform01();                        // [0, 1)
    double uniform(double lo, double hi);
    double normal(double mean = 0.0, double sigma = 1.0);
    uint64_t uniform_below(uint64_t n);        // unbiased integer in [0, n)
    void shuffle(std::vector<int>& v);         // Fisher-Yates

    // Independent child stream; `tag` selects the child deterministically.
    RngStream fork(uint64_t tag) const;

    uint64_t seed() const { return seed_; }

private:
    RngStream(uint64_t seed, uint64_t state) : seed_(seed), state_(state) {}
    uint64_t seed_ = 0;
    uint64_t state_ = 0;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// Numerically stable softmax (max subtraction). Throws on non-finite input.
Vec64 softmax(const Vec64& v);

// ||p - y||_2; throws on length mismatch.
double l2_distance(const Vec64& p, const Vec64& y);

double dot(const Vec64& a, const Vec64& b);
double norm2(const Vec64& v);
void axpy(double a, const Vec64& x, Vec64& y);   // y += a*x
Vec64 matvec(const Mat64& m, const Vec64& x);
int argmax(const Vec64& v);
bool all_finite(const Vec64& v);

using MatVecFn = std::function<Vec64(const Vec64&)>;
using ScalarFn = std::function<double(const Vec64&)>;

struct PowerIterResult {
    double eigval = 0.0;   // Rayleigh quotient, sign-correct for symmetric operators
    Vec64 eigvec;          // unit norm
    int iterations = 0;
    bool converged = false;
};

// Power iteration over a symmetric linear operator given as a matvec
// closure. Stops when successive Rayleigh quotients differ by <= tol.
// The start vector is drawn from `rng`; a zero draw is retried 3 times.
PowerIterResult power_iteration(const MatVecFn& matvec_fn, int dim, int max_iters,
                                double tol, RngStream& rng);

// Component-wise central difference (f(x+h e_i) - f(x-h e_i)) / 2h.
Vec64 central_diff_gradient(const ScalarFn& f, const Vec64& x, double h);

}  // namespace bdp
