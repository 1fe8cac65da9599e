// SPDX-License-Identifier: Apache-2.0
//
// Mutual information and secrecy rate of the finite-alphabet SM link:
// Monte-Carlo estimates of the exact values, the closed-form approximation
// built on the per-pair quadratic forms, and the cache holding those forms.

#pragma once

#include "ssm/sm_model.hpp"
#include "ssm/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace ssm
{

enum class Side
{
    Bob,
    Eve
};

/// Numerically stable log(sum(exp(x))).
inline double log_sum_exp(std::span<const double> x)
{
    if (x.empty())
        return -std::numeric_limits<double>::infinity();
    const double hi = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(hi))
        return hi;
    double acc = 0.0;
    for (double xi : x)
        acc += std::exp(xi - hi);
    return hi + std::log(acc);
}

/// Q^{-1/2} of a Hermitian positive definite matrix.
inline CMat whiten(const CMat& q)
{
    Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_part(q));
    if (eig.info() != Eigen::Success)
        throw NumericalError("whiten: eigendecomposition failed");
    const RVec& lambda = eig.eigenvalues();
    if (!(lambda.minCoeff() > 0.0))
        throw NumericalError("whiten: covariance is not positive definite");
    const CMat& u = eig.eigenvectors();
    CMat w = u * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * u.adjoint();
    return hermitian_part(w);
}

/// Per-pair quadratic forms B_{k}^{k'} = K_b ⊙ conj(Δ), E_{k}^{k'} = K_e ⊙ conj(Δ)
/// with Δ = (s_k - s_k')(s_k - s_k')^H and K the whitened Gram matrix, so that
/// ||sqrt(p1) Q^{-1/2} C diag(v) (s_k - s_k')||^2 = p1 v^H A v.
///
/// Every Δ is supported on the rows/columns of the (at most two) active
/// antennas of the pair; the fast accessors touch only that support.
class QuadFormCache
{
public:
    struct Pair
    {
        std::array<int, 2> support{0, 0};
        int support_size = 0;
        CMat b;
        CMat e;
    };

    QuadFormCache() = default;

    QuadFormCache(const SMCodebook& cb, double p1, CMat whitened_bob, CMat whitened_eve)
        : n_tx_(cb.n_tx), order_(cb.order), p1_(p1), codebook_(cb), whitened_bob_(std::move(whitened_bob)),
          whitened_eve_(std::move(whitened_eve))
    {
        gram_b_ = hermitian_part(whitened_bob_.adjoint() * whitened_bob_);
        gram_e_ = hermitian_part(whitened_eve_.adjoint() * whitened_eve_);

        const int k_total = size();
        pairs_.resize(static_cast<std::size_t>(k_total) * static_cast<std::size_t>(k_total));
        for (int k = 0; k < k_total; ++k)
        {
            for (int kp = 0; kp < k_total; ++kp)
            {
                Pair& p = pairs_[index(k, kp)];
                p.b = CMat::Zero(n_tx_, n_tx_);
                p.e = CMat::Zero(n_tx_, n_tx_);
                if (k == kp)
                    continue;

                // d = s_k - s_k' has nonzeros only on the two active antennas
                const int n = cb.antenna_of(k);
                const int np = cb.antenna_of(kp);
                std::array<Complex, 2> d{};
                if (n == np)
                {
                    p.support = {n, n};
                    p.support_size = 1;
                    d[0] = cb.symbols[cb.symbol_of(k)] - cb.symbols[cb.symbol_of(kp)];
                }
                else
                {
                    p.support = {n, np};
                    p.support_size = 2;
                    d[0] = cb.symbols[cb.symbol_of(k)];
                    d[1] = -cb.symbols[cb.symbol_of(kp)];
                }
                for (int a = 0; a < p.support_size; ++a)
                {
                    for (int c = 0; c < p.support_size; ++c)
                    {
                        const int ia = p.support[a];
                        const int ic = p.support[c];
                        const Complex w = std::conj(d[a]) * d[c];
                        p.b(ia, ic) = gram_b_(ia, ic) * w;
                        p.e(ia, ic) = gram_e_(ia, ic) * w;
                    }
                }
            }
        }
    }

    int n_tx() const { return n_tx_; }
    int order() const { return order_; }
    /// M * n_tx, the number of SM symbols.
    int size() const { return order_ * n_tx_; }
    double p1() const { return p1_; }
    const SMCodebook& codebook() const { return codebook_; }

    const CMat& gram(Side s) const { return s == Side::Bob ? gram_b_ : gram_e_; }
    const CMat& whitened_channel(Side s) const { return s == Side::Bob ? whitened_bob_ : whitened_eve_; }

    const Pair& pair(int k, int kp) const { return pairs_[index(k, kp)]; }
    const CMat& b(int k, int kp) const { return pair(k, kp).b; }
    const CMat& e(int k, int kp) const { return pair(k, kp).e; }
    const CMat& mat(Side s, int k, int kp) const { return s == Side::Bob ? b(k, kp) : e(k, kp); }

    /// v^H A v (without p1).
    double quad(Side s, int k, int kp, const CVec& v) const
    {
        const Pair& p = pair(k, kp);
        const CMat& a = s == Side::Bob ? p.b : p.e;
        double acc = 0.0;
        for (int i = 0; i < p.support_size; ++i)
            for (int j = 0; j < p.support_size; ++j)
            {
                const int r = p.support[i];
                const int c = p.support[j];
                acc += (std::conj(v(r)) * a(r, c) * v(c)).real();
            }
        return acc;
    }

    /// Re tr(W A) (without p1).
    double trace(Side s, int k, int kp, const CMat& w) const
    {
        const Pair& p = pair(k, kp);
        const CMat& a = s == Side::Bob ? p.b : p.e;
        double acc = 0.0;
        for (int i = 0; i < p.support_size; ++i)
            for (int j = 0; j < p.support_size; ++j)
            {
                const int r = p.support[i];
                const int c = p.support[j];
                acc += (w(r, c) * a(c, r)).real();
            }
        return acc;
    }

    /// out += scale * A v
    void add_apply(Side s, int k, int kp, const CVec& v, double scale, CVec& out) const
    {
        const Pair& p = pair(k, kp);
        const CMat& a = s == Side::Bob ? p.b : p.e;
        for (int i = 0; i < p.support_size; ++i)
            for (int j = 0; j < p.support_size; ++j)
            {
                const int r = p.support[i];
                const int c = p.support[j];
                out(r) += scale * a(r, c) * v(c);
            }
    }

    /// out += scale * A
    void add_scaled(Side s, int k, int kp, double scale, CMat& out) const
    {
        const Pair& p = pair(k, kp);
        const CMat& a = s == Side::Bob ? p.b : p.e;
        for (int i = 0; i < p.support_size; ++i)
            for (int j = 0; j < p.support_size; ++j)
            {
                const int r = p.support[i];
                const int c = p.support[j];
                out(r, c) += scale * a(r, c);
            }
    }

private:
    std::size_t index(int k, int kp) const
    {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(size()) + static_cast<std::size_t>(kp);
    }

    int n_tx_ = 0;
    int order_ = 0;
    double p1_ = 0.0;
    SMCodebook codebook_;
    CMat whitened_bob_;
    CMat whitened_eve_;
    CMat gram_b_;
    CMat gram_e_;
    std::vector<Pair> pairs_;
};

inline QuadFormCache build_cache(const ChannelPair& channels, const ANProjector& proj, const PowerConfig& powers,
                                 const SMCodebook& cb)
{
    channels.validate();
    powers.validate();
    if (channels.n_tx() != cb.n_tx)
        throw ConfigError("build_cache: codebook and channel n_tx differ");
    const CMat qb = noise_covariance(channels.H, proj, powers.p2, powers.sigma2_b);
    const CMat qe = noise_covariance(channels.G, proj, powers.p2, powers.sigma2_e);
    return QuadFormCache(cb, powers.p1, whiten(qb) * channels.H, whiten(qe) * channels.G);
}

/// Inner term log2 sum_{k'} exp(-p1 v^H A_k^{k'} v / 2) for outer symbol k.
inline double lower_bound_inner(const QuadFormCache& cache, Side side, int k, const CVec& v)
{
    thread_local std::vector<double> expo;
    expo.resize(static_cast<std::size_t>(cache.size()));
    for (int kp = 0; kp < cache.size(); ++kp)
        expo[static_cast<std::size_t>(kp)] = -0.5 * cache.p1() * cache.quad(side, k, kp, v);
    return log_sum_exp(expo) / std::numbers::ln2;
}

/// Closed-form approximation of I(s; y) in bits.
inline double mi_lower_bound(const QuadFormCache& cache, Side side, const CVec& v)
{
    if (v.size() != cache.n_tx())
        throw ConfigError("precoder length differs from n_tx");
    const int k_total = cache.size();
    double acc = 0.0;
    for (int k = 0; k < k_total; ++k)
        acc += lower_bound_inner(cache, side, k, v);
    return std::log2(static_cast<double>(k_total)) - acc / k_total;
}

/// Rigorous Jensen bound: mi_lower_bound minus N_rx (1/ln2 - 1). The closed
/// form alone can exceed the exact mutual information at moderate SNR.
inline double mi_jensen_bound(const QuadFormCache& cache, Side side, const CVec& v)
{
    const double n_rx = static_cast<double>(cache.whitened_channel(side).rows());
    return mi_lower_bound(cache, side, v) - n_rx * (1.0 / std::numbers::ln2 - 1.0);
}

/// Approximated secrecy rate; the log2(M n_tx) terms cancel.
inline double asr(const QuadFormCache& cache, const CVec& v, bool clamp = false)
{
    if (v.size() != cache.n_tx())
        throw ConfigError("precoder length differs from n_tx");
    const int k_total = cache.size();
    double acc = 0.0;
    for (int k = 0; k < k_total; ++k)
        acc += lower_bound_inner(cache, Side::Eve, k, v) - lower_bound_inner(cache, Side::Bob, k, v);
    const double value = acc / k_total;
    return clamp ? std::max(value, 0.0) : value;
}

struct MIEstimate
{
    double value = 0.0;
    double std_error = 0.0;
    int n_samples = 0;
};

/// Per-noise-sample estimates of I(s; y) for the whitened link `eff`
/// (= Q^{-1/2} C). Sample t contributes
///   log2(MN) - 1/(MN) sum_k log2 sum_k' exp(||z_t||^2 - ||alpha_k^k' + z_t||^2)
/// with one z_t shared across all outer symbols k.
inline std::vector<double> mi_samples(const CMat& eff, const SMCodebook& cb, const CVec& v, double p1, int n_samp,
                                      Rng& rng)
{
    if (n_samp < 1)
        throw ConfigError("n_samp must be at least 1");
    if (eff.cols() != cb.n_tx || v.size() != cb.n_tx)
        throw ConfigError("mi_monte_carlo: dimension mismatch");

    const int k_total = cb.size();
    const Eigen::Index n_rx = eff.rows();
    const double amp = std::sqrt(p1);

    // received noiseless points u_k = sqrt(p1) eff diag(v) s_k
    CMat u(n_rx, k_total);
    for (int k = 0; k < k_total; ++k)
        u.col(k) = amp * v(cb.antenna_of(k)) * cb.symbols[cb.symbol_of(k)] * eff.col(cb.antenna_of(k));

    std::vector<double> dist2(static_cast<std::size_t>(k_total) * k_total);
    for (int k = 0; k < k_total; ++k)
        for (int kp = 0; kp < k_total; ++kp)
            dist2[static_cast<std::size_t>(k) * k_total + kp] = (u.col(k) - u.col(kp)).squaredNorm();

    const double log_mn = std::log2(static_cast<double>(k_total));
    std::vector<double> out(static_cast<std::size_t>(n_samp));
    std::vector<double> proj(static_cast<std::size_t>(k_total));
    std::vector<double> expo(static_cast<std::size_t>(k_total));
    for (int t = 0; t < n_samp; ++t)
    {
        const CVec z = complex_normal_vector(rng, n_rx);
        for (int k = 0; k < k_total; ++k)
            proj[static_cast<std::size_t>(k)] = z.dot(u.col(k)).real(); // Re(z^H u_k)
        double acc = 0.0;
        for (int k = 0; k < k_total; ++k)
        {
            // ||z||^2 - ||alpha + z||^2 = -||alpha||^2 - 2 Re(z^H alpha), alpha = u_k - u_k'
            for (int kp = 0; kp < k_total; ++kp)
                expo[static_cast<std::size_t>(kp)] =
                    -dist2[static_cast<std::size_t>(k) * k_total + kp] -
                    2.0 * (proj[static_cast<std::size_t>(k)] - proj[static_cast<std::size_t>(kp)]);
            acc += log_sum_exp(expo) / std::numbers::ln2;
        }
        out[static_cast<std::size_t>(t)] = log_mn - acc / k_total;
    }
    return out;
}

inline MIEstimate summarize(std::span<const double> samples)
{
    MIEstimate est;
    est.n_samples = static_cast<int>(samples.size());
    if (samples.empty())
        return est;
    double mean = 0.0;
    for (double x : samples)
        mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples)
        var += (x - mean) * (x - mean);
    if (samples.size() > 1)
        var /= static_cast<double>(samples.size() - 1);
    est.value = mean;
    est.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    return est;
}

/// Monte-Carlo estimate of I(s; y) for channel C with whitening Q^{-1/2}.
inline MIEstimate mi_monte_carlo(const CMat& channel, const CMat& whitening, const SMCodebook& cb, const CVec& v,
                                 double p1, int n_samp, Rng& rng)
{
    const std::vector<double> s = mi_samples(whitening * channel, cb, v, p1, n_samp, rng);
    return summarize(s);
}

struct SecrecyEstimate
{
    double rate = 0.0;       ///< [I_b - I_e]^+
    double difference = 0.0; ///< I_b - I_e before clamping
    double std_error = 0.0;  ///< of the paired per-sample difference
    MIEstimate bob;
    MIEstimate eve;
};

/// Monte-Carlo secrecy rate with common random numbers: Bob and Eve draw their
/// noise from replicas of the same stream. `rng` is advanced past Bob's draws.
inline SecrecyEstimate secrecy_rate_mc(const QuadFormCache& cache, const CVec& v, int n_samp, Rng& rng)
{
    Rng eve_rng = rng;
    const auto sb = mi_samples(cache.whitened_channel(Side::Bob), cache.codebook(), v, cache.p1(), n_samp, rng);
    const auto se = mi_samples(cache.whitened_channel(Side::Eve), cache.codebook(), v, cache.p1(), n_samp, eve_rng);

    std::vector<double> diff(sb.size());
    for (std::size_t i = 0; i < sb.size(); ++i)
        diff[i] = sb[i] - se[i];
    const MIEstimate d = summarize(diff);

    SecrecyEstimate out;
    out.bob = summarize(sb);
    out.eve = summarize(se);
    out.difference = d.value;
    out.std_error = d.std_error;
    out.rate = std::max(d.value, 0.0);
    return out;
}

inline SecrecyEstimate secrecy_rate_mc(const ChannelPair& channels, const ANProjector& proj, const PowerConfig& powers,
                                       const SMCodebook& cb, const CVec& v, int n_samp, Rng& rng)
{
    return secrecy_rate_mc(build_cache(channels, proj, powers, cb), v, n_samp, rng);
}

} // namespace ssm
