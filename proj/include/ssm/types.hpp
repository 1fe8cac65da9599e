// SPDX-License-Identifier: Apache-2.0
//
// Common numeric types, error classes and seeded random streams.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ssm
{

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

/// Invalid arguments or configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: non-PD covariance, rank-deficient channel (exit code 3).
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Seeded random stream. The engine is the only mutable state; copies are
/// independent replicas of the stream at the point of copy.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Standard complex Gaussian CN(0,1): real and imaginary parts N(0, 1/2).
    Complex complex_normal()
    {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re * kHalfSqrt, im * kHalfSqrt};
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    static constexpr double kHalfSqrt = 0.70710678118654752440;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `seed`, optionally tagged by a purpose code.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0)
{
    return mix_seed(mix_seed(mix_seed(seed) ^ index) ^ (tag * 0x632be59bd9b4e019ULL));
}

/// Complex Gaussian vector with CN(0, I) entries.
inline CVec complex_normal_vector(Rng& rng, Eigen::Index n)
{
    CVec out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out(i) = rng.complex_normal();
    return out;
}

inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

} // namespace ssm
