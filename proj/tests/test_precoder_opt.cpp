// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace ssm;

namespace
{

CVec random_direction(Rng& rng, int n, double norm)
{
    const CVec d = complex_normal_vector(rng, n);
    return d * (norm / d.norm());
}

/// Best ASR over `restarts` random full-power precoders.
double random_search_asr(const QuadFormCache& cache, int restarts, Rng& rng)
{
    double best = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r)
        best = std::max(best, asr(cache, oracle::random_precoder(rng, cache.n_tx())));
    return best;
}

void expect_non_decreasing(const std::vector<double>& h, double tol)
{
    for (std::size_t i = 1; i < h.size(); ++i)
        EXPECT_GE(h[i], h[i - 1] - tol) << "step " << i;
}

} // namespace

TEST(AsrGradient, VanishesForSymmetricChannels)
{
    const auto in = oracle::symmetric_instance(71, 4, 4, 5.0);
    Rng rng(71);
    EXPECT_LT(asr_gradient(in.cache, complex_normal_vector(rng, 4)).norm(), 1e-12);
}

TEST(AsrGradient, VanishesAtOrigin)
{
    const auto in = oracle::random_instance(72, 4, 2, 5.0);
    EXPECT_EQ(asr_gradient(in.cache, CVec::Zero(4)).norm(), 0.0);
}

TEST(AsrGradient, MatchesCentralDifferences)
{
    Rng rng(73);
    for (int inst = 0; inst < 5; ++inst)
    {
        const auto in = oracle::random_instance(730 + inst, 4, inst % 2 ? 4 : 2, -5.0 + 5.0 * inst);
        for (int point = 0; point < 10; ++point)
        {
            const CVec v = oracle::random_precoder(rng, 4);
            const CVec d = random_direction(rng, 4, 1e-5);
            const CVec g = asr_gradient(in.cache, v);
            const double predicted = 2.0 * g.dot(d).real();
            const double fd = 0.5 * (asr(in.cache, CVec(v + d)) - asr(in.cache, CVec(v - d)));
            EXPECT_LE(std::abs(fd - predicted), 1e-4 * std::abs(predicted)) << inst << "/" << point;
        }
    }
}

TEST(MaxAsrGd, SymmetricInstanceStaysPut)
{
    const auto in = oracle::symmetric_instance(74, 4, 2, 5.0);
    CVec v0(4);
    v0 << 1.0, Complex(0.0, 2.0), -0.5, 0.3;
    const auto t = max_asr_gd(in.cache, v0);
    EXPECT_NEAR(t.objective_history.back(), 0.0, 1e-12);
    EXPECT_LT((t.final_vector - normalize_power(v0, 4.0)).norm(), 1e-12);
    EXPECT_TRUE(t.converged);
}

TEST(MaxAsrGd, NeverWorseThanStart)
{
    Rng rng(75);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto in = oracle::random_instance(750 + trial, 4, 2, 2.0 * trial);
        const CVec v0 = complex_normal_vector(rng, 4);
        const auto t = max_asr_gd(in.cache, v0);
        EXPECT_GE(asr(in.cache, t.final_vector), asr(in.cache, normalize_power(v0, 4.0)) - 1e-12);
        expect_non_decreasing(t.objective_history, 0.0);
        EXPECT_LE(t.final_vector.squaredNorm(), 4.0 * (1.0 + 1e-9));
        EXPECT_EQ(static_cast<int>(t.objective_history.size()), t.iterations + 1);
    }
}

TEST(MaxAsrGd, CompetitiveWithRandomSearch)
{
    Rng rng(76);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto in = oracle::random_instance(760 + trial, 4, 2, 10.0);
        const auto t = max_asr_gd(in.cache, identity_precoder(4));
        const double oracle_best = random_search_asr(in.cache, 200, rng);
        EXPECT_GE(asr(in.cache, t.final_vector), oracle_best - 0.2) << trial;
    }
}

TEST(MaxAsrGd, RejectsBadInput)
{
    const auto in = oracle::random_instance(77, 4, 2, 5.0);
    EXPECT_THROW(max_asr_gd(in.cache, CVec::Zero(4)), ConfigError);
    EXPECT_THROW(max_asr_gd(in.cache, CVec::Ones(3)), ConfigError);
    GDParams bad;
    bad.step_min = 1.0;
    EXPECT_THROW(max_asr_gd(in.cache, CVec::Ones(4), bad), ConfigError);
}

TEST(MaxAsrGd, StepFloorStopsRun)
{
    const auto in = oracle::random_instance(78, 4, 2, 5.0);
    GDParams p;
    p.tol = 0.0;
    p.max_iters = 10000;
    const auto t = max_asr_gd(in.cache, identity_precoder(4), p);
    EXPECT_TRUE(t.converged);
    EXPECT_LT(t.iterations, p.max_iters);
}

TEST(MaxAsrGd, OptionalGainThresholdStopsEarly)
{
    const auto in = oracle::random_instance(79, 4, 2, 5.0);
    const auto full = max_asr_gd(in.cache, identity_precoder(4));
    GDParams p;
    p.tol = 1e-2;
    const auto early = max_asr_gd(in.cache, identity_precoder(4), p);
    EXPECT_TRUE(early.converged);
    EXPECT_LE(early.iterations, full.iterations);
    const auto& h = early.objective_history;
    ASSERT_GE(h.size(), 2u);
    EXPECT_LT(h[h.size() - 1] - h[h.size() - 2], p.tol);
}

TEST(FixedSampleSecrecy, GradientMatchesFiniteDifferences)
{
    Rng rng(81);
    for (int inst = 0; inst < 5; ++inst)
    {
        const auto in = oracle::random_instance(810 + inst, 4, inst % 2 ? 4 : 2, 5.0 * inst - 5.0);
        const FixedSampleSecrecy obj(in.cache, 100, rng);
        for (int point = 0; point < 4; ++point)
        {
            const CVec v = oracle::random_precoder(rng, 4);
            const CVec d = random_direction(rng, 4, 1e-5);
            const double predicted = 2.0 * obj.gradient(v).dot(d).real();
            const double fd = 0.5 * (obj.value(CVec(v + d)) - obj.value(CVec(v - d)));
            EXPECT_LE(std::abs(fd - predicted), 1e-3 * std::abs(predicted)) << inst << "/" << point;
        }
    }
}

TEST(FixedSampleSecrecy, MatchesMonteCarloOnSameNoise)
{
    const auto in = oracle::random_instance(82, 4, 2, 5.0);
    Rng a(82);
    Rng b(82);
    const FixedSampleSecrecy obj(in.cache, 300, a);
    const CVec v = CVec::Ones(4);
    const auto sr = secrecy_rate_mc(in.cache, v, 300, b);
    EXPECT_NEAR(obj.value(v), sr.difference, 1e-12);
    EXPECT_NEAR(obj.mutual_information(Side::Bob, v), sr.bob.value, 1e-12);
    EXPECT_EQ(obj.n_samples(), 300);
}

TEST(MaxSrGd, SymmetricInstanceStaysPut)
{
    const auto in = oracle::symmetric_instance(83, 4, 2, 5.0);
    Rng rng(83);
    CVec v0(4);
    v0 << 1.0, 2.0, Complex(0.0, 1.0), 0.5;
    const auto t = max_sr_gd(in.cache, v0, GDParams{}, 100, rng);
    for (double h : t.objective_history)
        EXPECT_EQ(h, 0.0);
    EXPECT_LT((t.final_vector - normalize_power(v0, 4.0)).norm(), 1e-12);
}

TEST(MaxSrGd, MonotoneAndFeasible)
{
    Rng rng(84);
    for (int trial = 0; trial < 5; ++trial)
    {
        const auto in = oracle::random_instance(840 + trial, 4, 2, 5.0);
        const auto t = max_sr_gd(in.cache, identity_precoder(4), GDParams{}, 100, rng);
        expect_non_decreasing(t.objective_history, 0.0);
        EXPECT_LE(t.final_vector.squaredNorm(), 4.0 * (1.0 + 1e-9));
    }
}

TEST(MaxSrGd, RejectsZeroStart)
{
    const auto in = oracle::random_instance(85, 4, 2, 5.0);
    Rng rng(85);
    EXPECT_THROW(max_sr_gd(in.cache, CVec::Zero(4), GDParams{}, 10, rng), ConfigError);
}

TEST(Lift, ZeroMatrix)
{
    const auto in = oracle::random_instance(91, 4, 4, 5.0);
    const CMat zero = CMat::Zero(4, 4);
    for (int k = 0; k < in.cache.size(); ++k)
    {
        EXPECT_NEAR(f1(in.cache, zero, k), 4.0, 1e-14);
        EXPECT_NEAR(f2(in.cache, zero, k), 4.0, 1e-14);
    }
}

TEST(Lift, RankOneMatchesVectorForm)
{
    const auto in = oracle::random_instance(92, 4, 4, 5.0);
    Rng rng(92);
    const CVec v = oracle::random_precoder(rng, 4);
    const CMat w = v * v.adjoint();
    for (int k = 0; k < in.cache.size(); ++k)
    {
        EXPECT_NEAR(f1(in.cache, w, k), lower_bound_inner(in.cache, Side::Eve, k, v), 1e-12);
        EXPECT_NEAR(f2(in.cache, w, k), lower_bound_inner(in.cache, Side::Bob, k, v), 1e-12);
    }
    EXPECT_NEAR(relaxed_asr(in.cache, w), asr(in.cache, v), 1e-12);
}

TEST(Lift, MidpointConvexity)
{
    const auto in = oracle::random_instance(93, 4, 2, 5.0);
    Rng rng(93);
    for (int trial = 0; trial < 50; ++trial)
    {
        const CMat a = oracle::random_psd(rng, 4, 4.0 * rng.uniform());
        const CMat b = oracle::random_psd(rng, 4, 4.0 * rng.uniform());
        const int k = trial % in.cache.size();
        EXPECT_LE(f1(in.cache, CMat(0.5 * (a + b)), k), 0.5 * (f1(in.cache, a, k) + f1(in.cache, b, k)) + 1e-10);
        EXPECT_LE(f2(in.cache, CMat(0.5 * (a + b)), k), 0.5 * (f2(in.cache, a, k) + f2(in.cache, b, k)) + 1e-10);
    }
}

TEST(LiftGradient, UniformWeightsAtZero)
{
    const auto in = oracle::random_instance(94, 4, 2, 5.0);
    const int k = 3;
    CMat expect = CMat::Zero(4, 4);
    for (int kp = 0; kp < in.cache.size(); ++kp)
        expect += in.cache.e(k, kp).adjoint();
    expect *= -in.cache.p1() / (2.0 * std::numbers::ln2 * in.cache.size());
    EXPECT_LT((grad_f1(in.cache, CMat::Zero(4, 4), k) - expect).norm(), 1e-14);
}

TEST(LiftGradient, GlobalUnderestimator)
{
    const auto in = oracle::random_instance(95, 4, 2, 10.0);
    Rng rng(95);
    for (int trial = 0; trial < 100; ++trial)
    {
        const CMat w0 = oracle::random_hermitian(rng, 4);
        const CMat w = oracle::random_hermitian(rng, 4);
        const int k = trial % in.cache.size();
        const double linear = f1(in.cache, w0, k) + (grad_f1(in.cache, w0, k) * (w - w0)).trace().real();
        EXPECT_GE(f1(in.cache, w, k), linear - 1e-10);
    }
}

TEST(LiftGradient, TracePairingFiniteDifferences)
{
    const auto in = oracle::random_instance(96, 4, 4, 5.0);
    Rng rng(96);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CMat w0 = oracle::random_psd(rng, 4, 2.0);
        CMat d = oracle::random_hermitian(rng, 4);
        d *= 1e-5 / d.norm();
        const int k = trial % in.cache.size();
        for (bool eve : {true, false})
        {
            auto f = [&](const CMat& w) { return eve ? f1(in.cache, w, k) : f2(in.cache, w, k); };
            const CMat g = eve ? grad_f1(in.cache, w0, k) : grad_f2(in.cache, w0, k);
            const double predicted = (g * d).trace().real();
            const double fd = 0.5 * (f(CMat(w0 + d)) - f(CMat(w0 - d)));
            EXPECT_LE(std::abs(fd - predicted), 1e-5 * std::abs(predicted)) << trial;
        }
    }
}

TEST(Spectrahedron, FeasiblePointUnchanged)
{
    Rng rng(101);
    const CMat w = oracle::random_psd(rng, 4, 3.0);
    EXPECT_LT((project_spectrahedron(w, 4.0) - w).norm(), 1e-12);
}

TEST(Spectrahedron, DiagonalCases)
{
    CMat a = CMat::Zero(4, 4);
    a(0, 0) = 8.0;
    CMat ea = CMat::Zero(4, 4);
    ea(0, 0) = 4.0;
    EXPECT_LT((project_spectrahedron(a, 4.0) - ea).norm(), 1e-12);

    CMat b = CMat::Zero(2, 2);
    b(0, 0) = 1.0;
    b(1, 1) = -1.0;
    CMat eb = CMat::Zero(2, 2);
    eb(0, 0) = 1.0;
    EXPECT_LT((project_spectrahedron(b, 2.0) - eb).norm(), 1e-12);
}

TEST(Spectrahedron, MatchesEnumerationOracle)
{
    Rng rng(102);
    for (int trial = 0; trial < 100; ++trial)
    {
        const CMat w = oracle::random_hermitian(rng, 3, 0.5 + 2.0 * rng.uniform());
        const CMat got = project_spectrahedron(w, 3.0);
        const CMat want = oracle::spectrahedron_by_enumeration(w, 3.0);
        EXPECT_LT((got - want).norm(), 1e-6) << trial;
    }
}

TEST(Spectrahedron, Idempotent)
{
    Rng rng(103);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CMat p = project_spectrahedron(oracle::random_hermitian(rng, 4, 3.0), 4.0);
        EXPECT_LT((project_spectrahedron(p, 4.0) - p).norm(), 1e-10);
        EXPECT_TRUE(is_feasible_lift(p, 4.0));
    }
}

TEST(Spectrahedron, FeasibilityCheck)
{
    EXPECT_TRUE(is_feasible_lift(CMat::Identity(4, 4), 4.0));
    EXPECT_FALSE(is_feasible_lift(2.0 * CMat::Identity(4, 4), 4.0));
    CMat neg = CMat::Identity(2, 2);
    neg(1, 1) = -0.5;
    EXPECT_FALSE(is_feasible_lift(neg, 4.0));
}

TEST(ScaSubproblem, SurrogateAtStartEqualsRelaxedObjective)
{
    const auto in = oracle::random_instance(111, 4, 2, 5.0);
    Rng rng(111);
    const CMat w = oracle::random_psd(rng, 4, 3.0);
    const ScaSurrogate sur(in.cache, w);
    EXPECT_NEAR(sur.value(w), relaxed_asr(in.cache, w), 1e-12);
}

TEST(ScaSubproblem, AscentFromFeasibleStart)
{
    Rng rng(112);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto in = oracle::random_instance(1120 + trial, 4, 2, 2.0 * trial);
        const CMat w0 = oracle::random_psd(rng, 4, 4.0 * rng.uniform());
        const ScaSurrogate sur(in.cache, w0);
        const CMat w = solve_sca_subproblem(in.cache, w0);
        EXPECT_GE(sur.value(w), sur.value(w0) - 1e-12);
        EXPECT_TRUE(is_feasible_lift(w, 4.0));
        // the surrogate underestimates the relaxed objective, so that rises too
        EXPECT_GE(relaxed_asr(in.cache, w), relaxed_asr(in.cache, w0) - 1e-12);
    }
}

TEST(ScaSubproblem, RejectsInfeasibleStart)
{
    const auto in = oracle::random_instance(113, 4, 2, 5.0);
    EXPECT_THROW(solve_sca_subproblem(in.cache, 2.0 * CMat::Identity(4, 4)), ConfigError);
}

TEST(ScaSubproblem, MatchesGridSearchOnRealTwoByTwo)
{
    // real channels and BPSK make every pair matrix real, so a real W is optimal
    Rng rng(114);
    for (int trial = 0; trial < 3; ++trial)
    {
        ChannelPair ch;
        ch.H = sample_channel(rng, 1, 2).real().cast<Complex>();
        ch.G = sample_channel(rng, 1, 2).real().cast<Complex>();
        const auto proj = an_projector(ch.H);
        const PowerConfig powers{1.0, 0.5, 0.5, 0.1, 0.1};
        const auto cb = make_codebook(2, Scheme::Psk, 2);
        const auto cache = build_cache(ch, proj, powers, cb);
        const CMat w0 = 0.5 * CMat::Identity(2, 2);
        const ScaSurrogate sur(cache, w0);
        SCAParams p;
        p.inner_tol = 1e-12;
        p.inner_max = 5000;
        const double got = sur.value(solve_sca_subproblem(cache, w0, p));

        // W = [[a, c], [c, b]], a, b >= 0, a + b <= 2, c^2 <= a b; coarse-to-fine
        auto eval = [&](double a, double b, double c) {
            if (a < 0 || b < 0 || a + b > 2.0 || c * c > a * b)
                return -std::numeric_limits<double>::infinity();
            CMat w(2, 2);
            w << a, c, c, b;
            return sur.value(w);
        };
        double ba = 0.5, bb = 0.5, bc = 0.0;
        double best = eval(ba, bb, bc);
        double half = 1.0;
        for (int level = 0; level < 14; ++level)
        {
            const double ca = ba, cbb = bb, cc = bc;
            constexpr int kN = 20;
            for (int i = -kN; i <= kN; ++i)
                for (int j = -kN; j <= kN; ++j)
                    for (int l = -kN; l <= kN; ++l)
                    {
                        const double a = ca + half * i / kN;
                        const double b = cbb + half * j / kN;
                        const double c = cc + half * l / kN;
                        const double val = eval(a, b, c);
                        if (val > best)
                        {
                            best = val;
                            ba = a;
                            bb = b;
                            bc = c;
                        }
                    }
            half *= 0.5;
        }
        EXPECT_NEAR(got, best, 1e-3) << trial;
        EXPECT_LE(got, best + 1e-9);
    }
}

TEST(MaxAsrSca, SymmetricInstance)
{
    const auto in = oracle::symmetric_instance(121, 4, 2, 5.0);
    const auto r = max_asr_sca(in.cache, identity_precoder(4));
    EXPECT_TRUE(r.trace.converged);
    EXPECT_LE(r.trace.iterations, 2);
    EXPECT_NEAR(r.trace.objective_history.back(), 0.0, 1e-9);
}

TEST(MaxAsrSca, MonotoneAndFeasible)
{
    Rng rng(122);
    for (int trial = 0; trial < 10; ++trial)
    {
        const auto in = oracle::random_instance(1220 + trial, 4, trial % 2 ? 4 : 2, -5.0 + 2.5 * trial);
        const auto r = max_asr_sca(in.cache, identity_precoder(4));
        expect_non_decreasing(r.trace.objective_history, 1e-9);
        EXPECT_TRUE(is_feasible_lift(r.w_star, 4.0));
        EXPECT_LE(r.trace.iterations, SCAParams{}.max_outer);
        EXPECT_NEAR(r.trace.final_vector.squaredNorm(), 4.0, 1e-9);
    }
}

TEST(MaxAsrSca, RejectsBadStart)
{
    const auto in = oracle::random_instance(123, 4, 2, 5.0);
    EXPECT_THROW(max_asr_sca(in.cache, CVec::Zero(4)), ConfigError);
    EXPECT_THROW(max_asr_sca(in.cache, CVec::Constant(4, 2.0)), ConfigError);
}

TEST(MaxAsrSca, BeatsGradientAscentMostOfTheTime)
{
    int wins = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial)
    {
        const auto in = oracle::random_instance(12400 + trial, 4, 2, 10.0);
        const auto r = max_asr_sca(in.cache, identity_precoder(4));
        Rng rng(derive_seed(124, static_cast<std::uint64_t>(trial)));
        const CVec v = extract_precoder(in.cache, r.w_star, SCAParams{}, rng);
        const auto gd = max_asr_gd(in.cache, identity_precoder(4));
        wins += asr(in.cache, v) >= asr(in.cache, gd.final_vector) ? 1 : 0;
    }
    EXPECT_GE(wins, 70);
}

TEST(Extract, RankOneRecovery)
{
    const auto in = oracle::random_instance(131, 4, 2, 5.0);
    Rng rng(131);
    const CVec v = oracle::random_precoder(rng, 4);
    const CVec got = extract_precoder(in.cache, v * v.adjoint(), SCAParams{}, rng);
    EXPECT_LT((got * got.adjoint() - v * v.adjoint()).norm(), 1e-8);
}

TEST(Extract, IdentityUsesRandomizationAndStaysFeasible)
{
    const auto in = oracle::random_instance(132, 4, 2, 5.0);
    Rng rng(132);
    const CVec got = extract_precoder(in.cache, CMat::Identity(4, 4), SCAParams{}, rng);
    EXPECT_LE(got.squaredNorm(), 4.0 * (1.0 + 1e-10));
    EXPECT_GT(got.squaredNorm(), 0.0);
    // randomization keeps the best candidate, which includes the full-power lead vector
    const CVec lead = normalize_power(Eigen::SelfAdjointEigenSolver<CMat>(CMat::Identity(4, 4)).eigenvectors().col(3),
                                      4.0);
    EXPECT_GE(asr(in.cache, got), asr(in.cache, lead) - 1e-12);
}

TEST(Extract, ZeroMatrixFallsBackToIdentityPrecoder)
{
    const auto in = oracle::random_instance(133, 4, 2, 5.0);
    Rng rng(133);
    EXPECT_LT((extract_precoder(in.cache, CMat::Zero(4, 4), SCAParams{}, rng) - CVec::Ones(4)).norm(), 1e-15);
}

TEST(Extract, BelowRelaxedObjective)
{
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto in = oracle::random_instance(1340 + trial, 4, 2, 5.0 * (trial % 4));
        const auto r = max_asr_sca(in.cache, identity_precoder(4));
        Rng rng(derive_seed(134, static_cast<std::uint64_t>(trial)));
        const CVec v = extract_precoder(in.cache, r.w_star, SCAParams{}, rng);
        EXPECT_LE(asr(in.cache, v), relaxed_asr(in.cache, r.w_star) + 1e-9) << trial;
        EXPECT_LE(v.squaredNorm(), 4.0 * (1.0 + 1e-10));
    }
}

TEST(Params, Validation)
{
    SCAParams s;
    EXPECT_NO_THROW(s.validate());
    s.tol = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    SCAParams t;
    t.max_outer = 0;
    EXPECT_THROW(t.validate(), ConfigError);
    EXPECT_THROW(normalize_power(CVec::Zero(3), 3.0), ConfigError);
    EXPECT_NEAR(normalize_power(CVec::Ones(3) * 7.0, 3.0).squaredNorm(), 3.0, 1e-14);
}
