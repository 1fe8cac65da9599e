// SPDX-License-Identifier: Apache-2.0
//
// Secure spatial-modulation system model: constellations, the SM signal set,
// Rayleigh channel sampling, the artificial-noise projector, interference
// covariances, the transmit chain and the ML detector.
//
// Indices are zero-based throughout: antenna n in [0, n_tx), symbol m in
// [0, M), and the SM symbol s_{n,m} has linear index n * M + m.

#pragma once

#include "ssm/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace ssm
{

enum class Scheme
{
    Psk,
    Qam
};

inline std::string to_string(Scheme s) { return s == Scheme::Psk ? "PSK" : "QAM"; }

/// M-ary unit-average-energy constellation driven through n_tx antennas.
struct SMCodebook
{
    int order = 0;
    Scheme scheme = Scheme::Psk;
    std::vector<Complex> symbols;
    int n_tx = 0;

    int size() const { return order * n_tx; }
    int linear_index(int n, int m) const { return n * order + m; }
    int antenna_of(int idx) const { return idx / order; }
    int symbol_of(int idx) const { return idx % order; }

    double spectral_efficiency() const { return std::log2(static_cast<double>(size())); }
};

inline SMCodebook make_codebook(int order, Scheme scheme, int n_tx)
{
    if (order < 1 || (order & (order - 1)) != 0)
        throw ConfigError("constellation order must be a power of two, got " + std::to_string(order));
    if (n_tx < 1)
        throw ConfigError("n_tx must be positive");

    SMCodebook cb;
    cb.order = order;
    cb.scheme = scheme;
    cb.n_tx = n_tx;
    cb.symbols.reserve(static_cast<std::size_t>(order));

    if (scheme == Scheme::Psk)
    {
        for (int k = 0; k < order; ++k)
        {
            const double phase = 2.0 * std::numbers::pi * k / order;
            // snap the axis points so BPSK/QPSK are exact
            Complex s = std::polar(1.0, phase);
            if (std::abs(s.real()) < 1e-15)
                s.real(0.0);
            if (std::abs(s.imag()) < 1e-15)
                s.imag(0.0);
            cb.symbols.push_back(s);
        }
        return cb;
    }

    if (order != 4 && order != 16 && order != 64)
        throw ConfigError("QAM supports M in {4, 16, 64}, got " + std::to_string(order));
    const int side = static_cast<int>(std::lround(std::sqrt(order)));
    // average energy of the odd-integer grid {±1, ±3, ...}^2 is 2(M-1)/3
    const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q)
            cb.symbols.emplace_back((2 * i - side + 1) * scale, (2 * q - side + 1) * scale);
    return cb;
}

/// s_{n,m} = e_n s_m.
inline CVec sm_signal(const SMCodebook& cb, int n, int m)
{
    if (n < 0 || n >= cb.n_tx || m < 0 || m >= cb.order)
        throw ConfigError("SM index out of range");
    CVec s = CVec::Zero(cb.n_tx);
    s(n) = cb.symbols[static_cast<std::size_t>(m)];
    return s;
}

/// Legitimate (H, n_b x n_tx) and eavesdropper (G, n_e x n_tx) channels.
struct ChannelPair
{
    CMat H;
    CMat G;

    Eigen::Index n_tx() const { return H.cols(); }

    void validate() const
    {
        if (H.size() == 0 || G.size() == 0)
            throw ConfigError("empty channel matrix");
        if (H.cols() != G.cols())
            throw ConfigError("H and G must share the transmit dimension");
    }
};

struct PowerConfig
{
    double p_total = 1.0;
    double p1 = 0.5;
    double p2 = 0.5;
    double sigma2_b = 1.0;
    double sigma2_e = 1.0;

    void validate() const
    {
        if (!(p_total >= 0.0) || !(p1 >= 0.0) || !(p2 >= 0.0))
            throw ConfigError("powers must be nonnegative");
        if (p1 + p2 > p_total * (1.0 + 1e-12))
            throw ConfigError("p1 + p2 exceeds the total power budget");
        if (!(sigma2_b > 0.0) || !(sigma2_e > 0.0))
            throw ConfigError("noise variances must be positive");
    }
};

/// Rayleigh block: i.i.d. CN(0,1) entries.
inline CMat sample_channel(Rng& rng, Eigen::Index rows, Eigen::Index cols)
{
    if (rows < 1 || cols < 1)
        throw ConfigError("channel dimensions must be positive");
    CMat out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            out(i, j) = rng.complex_normal();
    return out;
}

inline ChannelPair sample_channel_pair(Rng& rng, int n_b, int n_e, int n_tx)
{
    ChannelPair ch;
    ch.H = sample_channel(rng, n_b, n_tx);
    ch.G = sample_channel(rng, n_e, n_tx);
    return ch;
}

/// Normalized projector onto null(H): t_an = P / ||P||_F.
struct ANProjector
{
    CMat t_an;
    double mu_norm = 0.0;

    /// t_an * t_an^H, the AN spatial covariance.
    CMat covariance() const { return t_an * t_an.adjoint(); }
};

inline constexpr double kMaxGramCondition = 1e12;

inline ANProjector an_projector(const CMat& H)
{
    const Eigen::Index n_b = H.rows();
    const Eigen::Index n_tx = H.cols();
    if (n_tx <= n_b)
        throw ConfigError("AN projection needs n_tx > n_b (null space of H is empty); use p2 = 0 instead");

    const CMat gram = hermitian_part(H * H.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxGramCondition)
        throw NumericalError("legitimate channel is rank deficient; AN projector undefined");

    const CMat x = gram.ldlt().solve(H);
    CMat proj = CMat::Identity(n_tx, n_tx) - H.adjoint() * x;
    proj = hermitian_part(proj);
    const double mu = proj.norm();
    if (!(mu > 0.0))
        throw NumericalError("empty null space");
    return {proj / mu, mu};
}

/// Q = p2 C t_an t_an^H C^H + sigma2 I, the interference-plus-noise covariance.
inline CMat noise_covariance(const CMat& C, const ANProjector& proj, double p2, double sigma2)
{
    if (C.cols() != proj.t_an.rows())
        throw ConfigError("channel and projector dimensions differ");
    const CMat ct = C * proj.t_an;
    CMat q = p2 * (ct * ct.adjoint());
    q.diagonal().array() += sigma2;
    return hermitian_part(q);
}

/// x = sqrt(p1) diag(v) s_{n,m} + sqrt(p2) t_an an_sample.
inline CVec transmit(const SMCodebook& cb, const CVec& v, const ANProjector& proj, const PowerConfig& powers,
                     int n, int m, const CVec& an_sample)
{
    if (v.size() != cb.n_tx || an_sample.size() != cb.n_tx || proj.t_an.rows() != cb.n_tx)
        throw ConfigError("transmit: dimension mismatch");
    CVec x = std::sqrt(powers.p2) * (proj.t_an * an_sample);
    x(n) += std::sqrt(powers.p1) * v(n) * cb.symbols[static_cast<std::size_t>(m)];
    return x;
}

struct Detection
{
    int antenna = 0;
    int symbol = 0;
    bool operator==(const Detection&) const = default;
};

/// Exhaustive ML search; ties resolve to the lowest linear index.
inline Detection ml_detect(const CVec& y, const CMat& C, const CVec& v, const SMCodebook& cb, double p1)
{
    if (y.size() != C.rows() || C.cols() != cb.n_tx || v.size() != cb.n_tx)
        throw ConfigError("ml_detect: dimension mismatch");
    const double amp = std::sqrt(p1);
    Detection best;
    double best_metric = std::numeric_limits<double>::infinity();
    for (int n = 0; n < cb.n_tx; ++n)
    {
        const CVec col = amp * v(n) * C.col(n);
        for (int m = 0; m < cb.order; ++m)
        {
            const double metric = (y - col * cb.symbols[static_cast<std::size_t>(m)]).squaredNorm();
            if (metric < best_metric)
            {
                best_metric = metric;
                best = {n, m};
            }
        }
    }
    return best;
}

} // namespace ssm
