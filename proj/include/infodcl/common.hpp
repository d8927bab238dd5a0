#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace infodcl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

// Dense row-major matrix of doubles. Activations and batch buffers live here;
// learnable parameters are stored separately as float32 (see ParamTensor) and
// promoted to double for arithmetic.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

    double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return v.size(); }
};

bool all_finite(const Mat& m);
double frobenius_norm(const Mat& m);
double dot(const double* a, const double* b, int n);

// Deterministic RNG built on splitmix64 with an explicit Box-Muller gaussian,
// so streams reproduce bit-for-bit regardless of standard library version.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    int uniform_int(int n);                 // [0, n)
    double gaussian();                      // N(0, 1)
    void fill_gaussian(Mat& m);

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

uint64_t mix_seed(uint64_t a, uint64_t b);
uint64_t fnv1a(const std::string& s);

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace infodcl
