// SPDX-License-Identifier: Apache-2.0
//
// Precoder optimizers for secure SM:
//   * max_asr_gd  - gradient ascent on the approximated secrecy rate with
//                   power renormalization and step halving;
//   * max_asr_sca - semidefinite lift W = v v^H, successive convex
//                   approximation of the relaxed objective, followed by
//                   rank-one extraction or Gaussian randomization;
//   * max_sr_gd   - the same ascent loop driven by the Monte-Carlo secrecy
//                   rate on a fixed set of noise samples.
//
// Gradients with respect to complex vectors are conjugate (Wirtinger)
// gradients g = df/dv*, so f(v + d) - f(v) = 2 Re(g^H d) + O(|d|^2).
// Matrix gradients pair with the trace: f(W + D) - f(W) = Re tr(G D) + ...

#pragma once

#include "ssm/secrecy_metrics.hpp"
#include "ssm/sm_model.hpp"
#include "ssm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace ssm
{

struct GDParams
{
    double step_init = 0.5;
    double step_min = 0.01;
    int max_iters = 200;
    /// optional early stop: an accepted step gaining less than this ends the
    /// run; 0 keeps only the step-floor and iteration-cap rules
    double tol = 0.0;

    void validate() const
    {
        if (!(step_init > 0.0) || !(step_min > 0.0) || !(step_min < step_init))
            throw ConfigError("GD step sizes must satisfy 0 < step_min < step_init");
        if (max_iters < 1)
            throw ConfigError("GD max_iters must be positive");
        if (!(tol >= 0.0))
            throw ConfigError("GD tol must be nonnegative");
    }
};

struct SCAParams
{
    double tol = 1e-3;
    int max_outer = 50;
    double inner_tol = 1e-8;
    int inner_max = 500;
    double rank_tol = 1e-3;
    int n_randomizations = 100;

    void validate() const
    {
        if (!(tol > 0.0) || !(inner_tol > 0.0) || !(rank_tol > 0.0))
            throw ConfigError("SCA tolerances must be positive");
        if (max_outer < 1 || inner_max < 1 || n_randomizations < 0)
            throw ConfigError("SCA iteration limits must be positive");
    }
};

struct OptTrace
{
    std::vector<double> objective_history;
    int iterations = 0;
    bool converged = false;
    CVec final_vector;
};

/// Scales v so that tr(v v^H) = budget.
inline CVec normalize_power(const CVec& v, double budget)
{
    const double e = v.squaredNorm();
    if (!(e > 0.0))
        throw ConfigError("cannot normalize a zero precoder");
    return std::sqrt(budget / e) * v;
}

/// All-ones precoder, i.e. no precoding under the power constraint.
inline CVec identity_precoder(int n_tx) { return CVec::Ones(n_tx); }

// ---------------------------------------------------------------------------
// Max-ASR-GD
// ---------------------------------------------------------------------------

/// Conjugate gradient of asr(cache, v) (unclamped).
inline CVec asr_gradient(const QuadFormCache& cache, const CVec& v)
{
    if (v.size() != cache.n_tx())
        throw ConfigError("precoder length differs from n_tx");
    const int k_total = cache.size();
    const double p1 = cache.p1();
    CVec grad = CVec::Zero(cache.n_tx());
    std::vector<double> expo(static_cast<std::size_t>(k_total));

    // d/dv* [-log2 kappa] = p1/(2 ln2) * sum softmax_k' * A v
    auto accumulate = [&](Side side, int k, double sign) {
        for (int kp = 0; kp < k_total; ++kp)
            expo[static_cast<std::size_t>(kp)] = -0.5 * p1 * cache.quad(side, k, kp, v);
        const double lse = log_sum_exp(expo);
        for (int kp = 0; kp < k_total; ++kp)
        {
            if (kp == k)
                continue;
            const double w = std::exp(expo[static_cast<std::size_t>(kp)] - lse);
            cache.add_apply(side, k, kp, v, sign * w, grad);
        }
    };
    for (int k = 0; k < k_total; ++k)
    {
        accumulate(Side::Bob, k, 1.0);
        accumulate(Side::Eve, k, -1.0);
    }
    return grad * (p1 / (2.0 * std::numbers::ln2 * k_total));
}

namespace detail
{

/// Ascent with renormalization; a step is kept when the objective does not
/// decrease, otherwise the step size is halved.
template <class Objective, class Gradient>
OptTrace normalized_ascent(const CVec& v0, int n_tx, const GDParams& params, Objective&& objective,
                           Gradient&& gradient)
{
    params.validate();
    if (v0.size() != n_tx)
        throw ConfigError("initial precoder length differs from n_tx");
    if (!(v0.squaredNorm() > 0.0))
        throw ConfigError("initial precoder must be nonzero (the origin is stationary)");

    const double budget = static_cast<double>(n_tx);
    OptTrace trace;
    CVec v = normalize_power(v0, budget);
    double value = objective(v);
    trace.objective_history.push_back(value);

    double step = params.step_init;
    CVec grad = gradient(v);
    while (true)
    {
        if (step < params.step_min)
        {
            trace.converged = true;
            break;
        }
        if (trace.iterations >= params.max_iters)
            break;
        // exactly stationary: every candidate equals v
        if (grad.norm() <= 1e-14 * std::sqrt(budget))
        {
            trace.converged = true;
            break;
        }
        const CVec raw = v + step * grad;
        if (!(raw.squaredNorm() > 0.0))
        {
            step *= 0.5;
            continue;
        }
        const CVec cand = normalize_power(raw, budget);
        const double cand_value = objective(cand);
        if (cand_value >= value)
        {
            const double gain = cand_value - value;
            v = cand;
            value = cand_value;
            trace.objective_history.push_back(value);
            ++trace.iterations;
            if (gain < params.tol)
            {
                trace.converged = true;
                break;
            }
            grad = gradient(v);
        }
        else
        {
            step *= 0.5;
        }
    }
    trace.final_vector = v;
    return trace;
}

} // namespace detail

inline OptTrace max_asr_gd(const QuadFormCache& cache, const CVec& v0, const GDParams& params = {})
{
    return detail::normalized_ascent(
        v0, cache.n_tx(), params, [&](const CVec& v) { return asr(cache, v); },
        [&](const CVec& v) { return asr_gradient(cache, v); });
}

// ---------------------------------------------------------------------------
// Max-SR-GD baseline: Monte-Carlo secrecy rate on frozen noise samples
// ---------------------------------------------------------------------------

/// Secrecy-rate estimator I_b - I_e with the noise samples drawn once, making
/// it a deterministic smooth function of v with an analytic gradient.
class FixedSampleSecrecy
{
public:
    FixedSampleSecrecy(const QuadFormCache& cache, int n_samp, Rng& rng) : cache_(&cache)
    {
        if (n_samp < 1)
            throw ConfigError("n_samp must be at least 1");
        Rng eve_rng = rng;
        bob_ = draw(cache.whitened_channel(Side::Bob), n_samp, rng);
        eve_ = draw(cache.whitened_channel(Side::Eve), n_samp, eve_rng);
    }

    int n_samples() const { return static_cast<int>(bob_.noise.cols()); }

    double mutual_information(Side side, const CVec& v) const
    {
        return evaluate(side == Side::Bob ? bob_ : eve_, v, nullptr);
    }

    /// Unclamped I_b - I_e.
    double value(const CVec& v) const { return evaluate(bob_, v, nullptr) - evaluate(eve_, v, nullptr); }

    /// Conjugate gradient of value().
    CVec gradient(const CVec& v) const
    {
        CVec gb = CVec::Zero(v.size());
        CVec ge = CVec::Zero(v.size());
        evaluate(bob_, v, &gb);
        evaluate(eve_, v, &ge);
        return gb - ge;
    }

private:
    struct Link
    {
        CMat eff;       ///< Q^{-1/2} C
        CMat noise;     ///< n_rx x n_samp whitened noise
        CMat eff_noise; ///< eff^H noise, n_tx x n_samp
    };

    static Link draw(const CMat& eff, int n_samp, Rng& rng)
    {
        Link l;
        l.eff = eff;
        l.noise.resize(eff.rows(), n_samp);
        for (int t = 0; t < n_samp; ++t)
            l.noise.col(t) = complex_normal_vector(rng, eff.rows());
        l.eff_noise = eff.adjoint() * l.noise;
        return l;
    }

    double evaluate(const Link& link, const CVec& v, CVec* grad) const
    {
        const SMCodebook& cb = cache_->codebook();
        const int k_total = cb.size();
        const double amp = std::sqrt(cache_->p1());
        const int n_samp = static_cast<int>(link.noise.cols());

        CMat u(link.eff.rows(), k_total);
        for (int k = 0; k < k_total; ++k)
            u.col(k) = amp * v(cb.antenna_of(k)) * cb.symbols[cb.symbol_of(k)] * link.eff.col(cb.antenna_of(k));
        // eff^H u, for the gradient
        const CMat eu = link.eff.adjoint() * u;

        std::vector<double> dist2(static_cast<std::size_t>(k_total) * k_total);
        for (int k = 0; k < k_total; ++k)
            for (int kp = 0; kp < k_total; ++kp)
                dist2[static_cast<std::size_t>(k) * k_total + kp] = (u.col(k) - u.col(kp)).squaredNorm();

        std::vector<double> proj(static_cast<std::size_t>(k_total));
        std::vector<double> expo(static_cast<std::size_t>(k_total));
        double acc = 0.0;
        for (int t = 0; t < n_samp; ++t)
        {
            for (int k = 0; k < k_total; ++k)
                proj[static_cast<std::size_t>(k)] = link.noise.col(t).dot(u.col(k)).real();
            for (int k = 0; k < k_total; ++k)
            {
                for (int kp = 0; kp < k_total; ++kp)
                    expo[static_cast<std::size_t>(kp)] =
                        -dist2[static_cast<std::size_t>(k) * k_total + kp] -
                        2.0 * (proj[static_cast<std::size_t>(k)] - proj[static_cast<std::size_t>(kp)]);
                const double lse = log_sum_exp(expo);
                acc += lse;
                if (grad == nullptr)
                    continue;

                // d(expo_k')/dv* = -A^H (alpha + z), A = sqrt(p1) eff diag(s_k - s_k')
                const int n = cb.antenna_of(k);
                const Complex sk = cb.symbols[cb.symbol_of(k)];
                for (int kp = 0; kp < k_total; ++kp)
                {
                    if (kp == k)
                        continue;
                    const double w = std::exp(expo[static_cast<std::size_t>(kp)] - lse);
                    const int np = cb.antenna_of(kp);
                    const Complex skp = cb.symbols[cb.symbol_of(kp)];
                    // eff.col(j)^H (u_k - u_k' + z_t)
                    const Complex cn = eu(n, k) - eu(n, kp) + link.eff_noise(n, t);
                    const Complex cnp = eu(np, k) - eu(np, kp) + link.eff_noise(np, t);
                    (*grad)(n) += w * amp * std::conj(sk) * cn;
                    (*grad)(np) -= w * amp * std::conj(skp) * cnp;
                }
            }
        }
        const double norm = static_cast<double>(k_total) * n_samp;
        if (grad != nullptr)
            *grad /= norm * std::numbers::ln2;
        return std::log2(static_cast<double>(k_total)) - acc / (norm * std::numbers::ln2);
    }

    const QuadFormCache* cache_;
    Link bob_;
    Link eve_;
};

/// Gradient ascent on the Monte-Carlo secrecy rate (baseline). Noise samples
/// are frozen for the whole run (common random numbers).
inline OptTrace max_sr_gd(const QuadFormCache& cache, const CVec& v0, const GDParams& params, int n_samp, Rng& rng)
{
    const FixedSampleSecrecy sr(cache, n_samp, rng);
    return detail::normalized_ascent(
        v0, cache.n_tx(), params, [&](const CVec& v) { return sr.value(v); },
        [&](const CVec& v) { return sr.gradient(v); });
}

inline OptTrace max_sr_gd(const ChannelPair& channels, const ANProjector& proj, const PowerConfig& powers,
                          const SMCodebook& cb, const CVec& v0, const GDParams& params, int n_samp, Rng& rng)
{
    return max_sr_gd(build_cache(channels, proj, powers, cb), v0, params, n_samp, rng);
}

// ---------------------------------------------------------------------------
// Semidefinite lift
// ---------------------------------------------------------------------------

namespace detail
{

inline double lifted_log_sum(const QuadFormCache& cache, Side side, const CMat& w, int k)
{
    thread_local std::vector<double> expo;
    expo.resize(static_cast<std::size_t>(cache.size()));
    for (int kp = 0; kp < cache.size(); ++kp)
        expo[static_cast<std::size_t>(kp)] = -0.5 * cache.p1() * cache.trace(side, k, kp, w);
    return log_sum_exp(expo) / std::numbers::ln2;
}

inline CMat lifted_gradient(const QuadFormCache& cache, Side side, const CMat& w, int k)
{
    const int k_total = cache.size();
    std::vector<double> expo(static_cast<std::size_t>(k_total));
    for (int kp = 0; kp < k_total; ++kp)
        expo[static_cast<std::size_t>(kp)] = -0.5 * cache.p1() * cache.trace(side, k, kp, w);
    const double lse = log_sum_exp(expo);
    CMat g = CMat::Zero(cache.n_tx(), cache.n_tx());
    for (int kp = 0; kp < k_total; ++kp)
    {
        if (kp == k)
            continue;
        cache.add_scaled(side, k, kp, std::exp(expo[static_cast<std::size_t>(kp)] - lse), g);
    }
    // A is Hermitian, so A^H = A
    return g * (-cache.p1() / (2.0 * std::numbers::ln2));
}

} // namespace detail

/// log2 sum_k' exp(-p1 tr(W E_k^k') / 2); k = n * M + m.
inline double f1(const QuadFormCache& cache, const CMat& w, int k)
{
    return detail::lifted_log_sum(cache, Side::Eve, w, k);
}

/// log2 sum_k' exp(-p1 tr(W B_k^k') / 2).
inline double f2(const QuadFormCache& cache, const CMat& w, int k)
{
    return detail::lifted_log_sum(cache, Side::Bob, w, k);
}

inline CMat grad_f1(const QuadFormCache& cache, const CMat& w0, int k)
{
    return detail::lifted_gradient(cache, Side::Eve, w0, k);
}

inline CMat grad_f2(const QuadFormCache& cache, const CMat& w0, int k)
{
    return detail::lifted_gradient(cache, Side::Bob, w0, k);
}

/// Relaxed objective 1/(MN) sum_k [f1(W) - f2(W)]; equals asr(v) at W = v v^H.
inline double relaxed_asr(const QuadFormCache& cache, const CMat& w)
{
    double acc = 0.0;
    for (int k = 0; k < cache.size(); ++k)
        acc += f1(cache, w, k) - f2(cache, w, k);
    return acc / cache.size();
}

/// Euclidean projection of a real vector onto {x >= 0, sum(x) <= budget}.
inline RVec project_capped_simplex(const RVec& x, double budget)
{
    RVec clipped = x.cwiseMax(0.0);
    if (clipped.sum() <= budget)
        return clipped;
    // sorted-threshold: find theta with sum(max(x - theta, 0)) = budget
    std::vector<double> s(x.data(), x.data() + x.size());
    std::sort(s.begin(), s.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        cum += s[i];
        const double t = (cum - budget) / static_cast<double>(i + 1);
        if (i + 1 == s.size() || s[i + 1] <= t)
        {
            theta = t;
            break;
        }
    }
    return (x.array() - theta).cwiseMax(0.0).matrix();
}

/// Frobenius-nearest point of {X >= 0, tr(X) <= budget}.
inline CMat project_spectrahedron(const CMat& w, double budget)
{
    Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_part(w));
    if (eig.info() != Eigen::Success)
        throw NumericalError("project_spectrahedron: eigendecomposition failed");
    const RVec lambda = project_capped_simplex(eig.eigenvalues(), budget);
    const CMat& u = eig.eigenvectors();
    return hermitian_part(u * lambda.asDiagonal() * u.adjoint());
}

inline bool is_feasible_lift(const CMat& w, double budget, double tol = 1e-9)
{
    if (w.rows() != w.cols())
        return false;
    const double scale = std::max(1.0, w.norm());
    if ((w - w.adjoint()).norm() > 1e-8 * scale)
        return false;
    Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_part(w), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -tol * scale && w.trace().real() <= budget * (1.0 + tol);
}

/// Concave SCA surrogate around W_prev: f1 linearized, f2 kept exact.
class ScaSurrogate
{
public:
    ScaSurrogate(const QuadFormCache& cache, const CMat& w_prev) : cache_(&cache)
    {
        const int k_total = cache.size();
        linear_ = CMat::Zero(cache.n_tx(), cache.n_tx());
        double f1_sum = 0.0;
        for (int k = 0; k < k_total; ++k)
        {
            linear_ += grad_f1(cache, w_prev, k);
            f1_sum += f1(cache, w_prev, k);
        }
        linear_ /= k_total;
        offset_ = f1_sum / k_total - (linear_ * w_prev).trace().real();
    }

    /// 1/(MN) sum_k f(W, W_prev).
    double value(const CMat& w) const
    {
        double f2_sum = 0.0;
        for (int k = 0; k < cache_->size(); ++k)
            f2_sum += f2(*cache_, w, k);
        return offset_ + (linear_ * w).trace().real() - f2_sum / cache_->size();
    }

    CMat gradient(const CMat& w) const
    {
        CMat g = linear_;
        for (int k = 0; k < cache_->size(); ++k)
            g -= grad_f2(*cache_, w, k) / cache_->size();
        return g;
    }

private:
    const QuadFormCache* cache_;
    CMat linear_;
    double offset_ = 0.0;
};

/// Projected gradient ascent with backtracking on the concave surrogate.
inline CMat solve_sca_subproblem(const QuadFormCache& cache, const CMat& w_prev, const SCAParams& params = {})
{
    const double budget = static_cast<double>(cache.n_tx());
    if (!is_feasible_lift(w_prev, budget))
        throw ConfigError("SCA subproblem needs a feasible starting point");

    const ScaSurrogate sur(cache, w_prev);
    CMat w = hermitian_part(w_prev);
    double value = sur.value(w);
    double step = 1.0;

    for (int it = 0; it < params.inner_max; ++it)
    {
        const CMat g = sur.gradient(w);
        CMat cand;
        double cand_value = value;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt)
        {
            cand = project_spectrahedron(w + step * g, budget);
            const CMat d = cand - w;
            const double dn2 = d.squaredNorm();
            if (dn2 <= 1e-30)
                break;
            cand_value = sur.value(cand);
            if (cand_value >= value + (g * d).trace().real() - dn2 / (2.0 * step))
            {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved || cand_value < value)
            break;
        const double gain = cand_value - value;
        w = cand;
        value = cand_value;
        step *= 2.0;
        if (gain < params.inner_tol)
            break;
    }
    return w;
}

/// Rank-one recovery from a lifted solution; Gaussian randomization when W is
/// not numerically rank one. Candidates keep their natural scale (clipped to
/// the power budget) and are also tried at full power; the best ASR wins.
/// The leading eigenpair sqrt(l1) u1 is always a candidate.
inline CVec extract_precoder(const QuadFormCache& cache, const CMat& w_star, const SCAParams& params, Rng& rng)
{
    const int n_tx = cache.n_tx();
    const double budget = static_cast<double>(n_tx);
    Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_part(w_star));
    if (eig.info() != Eigen::Success)
        throw NumericalError("extract_precoder: eigendecomposition failed");
    const RVec lambda = eig.eigenvalues().cwiseMax(0.0);
    const CMat& u = eig.eigenvectors();
    const double l1 = lambda(n_tx - 1);
    if (!(l1 > 0.0))
        return normalize_power(identity_precoder(n_tx), budget);

    auto clip = [&](const CVec& x) { return x.squaredNorm() > budget ? normalize_power(x, budget) : x; };
    const CVec lead = clip(std::sqrt(l1) * u.col(n_tx - 1));
    const double l2 = n_tx > 1 ? lambda(n_tx - 2) : 0.0;
    if (l2 / l1 <= params.rank_tol)
        return lead;

    CVec best = lead;
    double best_value = asr(cache, best);
    auto consider = [&](const CVec& cand) {
        const double val = asr(cache, cand);
        if (val > best_value)
        {
            best_value = val;
            best = cand;
        }
    };
    consider(normalize_power(lead, budget));
    const CMat shape = u * lambda.cwiseSqrt().asDiagonal();
    for (int r = 0; r < params.n_randomizations; ++r)
    {
        const CVec xi = shape * complex_normal_vector(rng, n_tx);
        if (!(xi.squaredNorm() > 0.0))
            continue;
        consider(clip(xi));
        consider(normalize_power(xi, budget));
    }
    return best;
}

struct ScaResult
{
    CMat w_star;
    OptTrace trace;
};

/// Successive convex approximation on the relaxed (lifted) problem.
/// objective_history holds the relaxed objective of every iterate; the
/// trace's final_vector is the scaled leading eigenvector of W*.
inline ScaResult max_asr_sca(const QuadFormCache& cache, const CVec& v0, const SCAParams& params = {})
{
    params.validate();
    const int n_tx = cache.n_tx();
    const double budget = static_cast<double>(n_tx);
    if (v0.size() != n_tx)
        throw ConfigError("initial precoder length differs from n_tx");
    if (!(v0.squaredNorm() > 0.0))
        throw ConfigError("initial precoder must be nonzero");
    if (v0.squaredNorm() > budget * (1.0 + 1e-9))
        throw ConfigError("initial precoder violates the power constraint");

    ScaResult res;
    CMat w = v0 * v0.adjoint();
    double value = relaxed_asr(cache, w);
    res.trace.objective_history.push_back(value);

    while (res.trace.iterations < params.max_outer)
    {
        const CMat next = solve_sca_subproblem(cache, w, params);
        const double next_value = relaxed_asr(cache, next);
        ++res.trace.iterations;
        res.trace.objective_history.push_back(next_value);
        const bool done = std::abs(next_value - value) <= params.tol;
        w = next;
        value = next_value;
        if (done)
        {
            res.trace.converged = true;
            break;
        }
    }

    res.w_star = w;
    Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian_part(w));
    const CVec lead = eig.eigenvectors().col(n_tx - 1);
    res.trace.final_vector = normalize_power(lead, budget);
    return res;
}

} // namespace ssm
