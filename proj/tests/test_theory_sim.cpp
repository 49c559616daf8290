#include <cmath>

#include <gtest/gtest.h>

#include "rtl/theory_sim.hpp"

using namespace rtl;
using namespace rtl::sim;

namespace {

SimDesign small_design(std::size_t n, std::size_t p, std::size_t k, double beta, std::size_t reps, std::uint64_t seed)
{
    SimDesign d;
    d.n = n;
    d.p = p;
    d.k = k;
    d.beta_magnitude = beta;
    d.n_reps = reps;
    d.seed = seed;
    return d;
}

double label_mean(const SyntheticData& s)
{
    double m = 0.0;
    for (int y : s.y) m += y;
    return m / static_cast<double>(s.y.size());
}

} // namespace

TEST(Synthetic, TrueCoefficients)
{
    const auto d = small_design(10, 6, 3, 2.0, 1, 1);
    EXPECT_EQ(true_coefficients(d), (std::vector<double>{2.0, -2.0, 2.0, 0.0, 0.0, 0.0}));
    auto bad = d;
    bad.k = 7;
    EXPECT_THROW(bad.validate(), Error);
    bad = d;
    bad.p = 0;
    bad.k = 0;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Synthetic, NullModelLabelsBalanced)
{
    const auto s = gen_synthetic(small_design(20000, 3, 0, 2.0, 1, 3));
    EXPECT_NEAR(label_mean(s), 0.5, 3.0 * 0.5 / std::sqrt(20000.0));
}

TEST(Synthetic, FeaturesStandardNormal)
{
    const auto s = gen_synthetic(small_design(20000, 2, 0, 1.0, 1, 4));
    const auto& x = s.x.matrix();
    for (Eigen::Index j = 0; j < 2; ++j) {
        const double mean = x.col(j).mean();
        const double var = (x.col(j).array() - mean).square().mean();
        EXPECT_NEAR(mean, 0.0, 0.03);
        EXPECT_NEAR(var, 1.0, 0.04);
    }
}

TEST(Synthetic, LabelMeanMatchesMonteCarlo)
{
    // E sigmoid(2 Z) by a large independent Monte Carlo sample.
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    double mc = 0.0;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) mc += 1.0 / (1.0 + std::exp(-2.0 * nd(rng)));
    mc /= draws;
    const auto s = gen_synthetic(small_design(200000, 2, 1, 2.0, 1, 5));
    EXPECT_NEAR(label_mean(s), mc, 0.01);
}

TEST(Synthetic, HugeCoefficientGivesSignLabels)
{
    const auto s = gen_synthetic(small_design(2000, 2, 1, 1e6, 1, 6));
    std::size_t agree = 0;
    for (std::size_t i = 0; i < 2000; ++i)
        agree += (s.x.matrix()(static_cast<Eigen::Index>(i), 0) > 0) == (s.y[i] == 1);
    EXPECT_GE(agree, 1998u);
}

TEST(Synthetic, DeterministicPerSeedAndRep)
{
    const auto d = small_design(50, 4, 2, 1.0, 1, 7);
    const auto a = gen_synthetic(d, 0), b = gen_synthetic(d, 0), c = gen_synthetic(d, 1);
    EXPECT_EQ(a.x.matrix(), b.x.matrix());
    EXPECT_EQ(a.y, b.y);
    EXPECT_NE(a.x.matrix(), c.x.matrix());
}

TEST(Synthetic, SparseVariantIsNonnegative)
{
    auto d = small_design(500, 5, 2, 1.0, 1, 8);
    d.sparse_features = true;
    const auto s = gen_synthetic(d);
    EXPECT_GE(s.x.matrix().minCoeff(), 0.0);
    const double zeros = static_cast<double>((s.x.matrix().array() == 0.0).count()) / 2500.0;
    EXPECT_NEAR(zeros, 0.9, 0.03);
}

TEST(Sparsity, LambdaAboveMaxZeroesEverything)
{
    Tuning t;
    t.fixed_lambda = 1e3;
    const auto r = sparsity_experiment(small_design(100, 10, 3, 2.0, 5, 9), t);
    EXPECT_EQ(r.zero_recovery_rate, 1.0);
    EXPECT_EQ(r.support_recovery_rate, 0.0);
    for (const auto& rep : r.report.reps) EXPECT_EQ(rep.selected, 0u);
}

TEST(Sparsity, RateNonDecreasingInN)
{
    Tuning t;
    t.rule = LambdaRule::OneStandardError;
    t.path.count = 15;
    const auto small = sparsity_experiment(small_design(50, 10, 2, 2.0, 20, 10), t);
    const auto large = sparsity_experiment(small_design(2000, 10, 2, 2.0, 20, 10), t);
    EXPECT_LE(small.zero_recovery_rate, large.zero_recovery_rate);
}

TEST(Consistency, RejectsTooFewSizes)
{
    EXPECT_THROW(consistency_experiment({small_design(100, 5, 2, 1.0, 2, 1), small_design(200, 5, 2, 1.0, 2, 1)}, {}),
                 Error);
}

TEST(Consistency, DeterministicTables)
{
    Tuning t;
    t.fixed_lambda = 0.05;
    std::vector<SimDesign> ds;
    for (std::size_t n : {100, 200, 400}) ds.push_back(small_design(n, 8, 2, 1.0, 4, 11));
    const auto a = consistency_experiment(ds, t), b = consistency_experiment(ds, t);
    ASSERT_EQ(a.rows.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.rows[i].median_error, b.rows[i].median_error);
        EXPECT_NEAR(a.rows[i].scaled_error, a.rows[i].median_error * std::sqrt(a.rows[i].n / 8.0), 1e-14);
    }
}

TEST(Ks, KnownValues)
{
    // A perfectly spread sample: statistic is 1/(2n) at the plotting positions.
    std::vector<double> s;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const double q = (i + 0.5) / n;
        // Bisection inverse of the normal CDF.
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (standard_normal_cdf(mid) < q ? lo : hi) = mid;
        }
        s.push_back(0.5 * (lo + hi));
    }
    const auto r = ks_test_normal(s);
    EXPECT_NEAR(r.statistic, 0.5 / n, 1e-9);
    EXPECT_GT(r.p_value, 0.99);

    // A shifted sample is rejected.
    for (auto& v : s) v += 1.0;
    EXPECT_LT(ks_test_normal(s).p_value, 1e-6);
    EXPECT_THROW(ks_test_normal({}), Error);
}

TEST(Ks, KolmogorovCriticalValues)
{
    EXPECT_NEAR(kolmogorov_survival(1.2238), 0.10, 5e-4);
    EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 5e-4);
    EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 5e-5);
    EXPECT_EQ(kolmogorov_survival(0.1), 1.0);
    EXPECT_NEAR(ks_test_normal({0.0}).statistic, 0.5, 1e-15);
}

TEST(Oracle, NoZerosTinyLambdaGivesZeroGap)
{
    Tuning t;
    t.fixed_lambda = 1e-10;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
    a(0) = 1.0;
    const auto r = oracle_experiment(small_design(300, 3, 3, 0.5, 5, 12), t, {a});
    EXPECT_EQ(r.dropped, 0u);
    for (double g : r.oracle_gap) EXPECT_LT(g, 1e-6);
    EXPECT_EQ(r.statistics[0].size(), 5u);
}

TEST(Oracle, RejectsNonUnitDirection)
{
    Eigen::VectorXd a = Eigen::VectorXd::Ones(3);
    EXPECT_THROW(oracle_experiment(small_design(50, 3, 3, 0.5, 1, 1), {}, {a}), Error);
}

TEST(GlobalProbe, IdenticalStartsGiveZeroSpread)
{
    Tuning t;
    t.fixed_lambda = 0.05;
    const auto r = global_optimum_probe(small_design(200, 6, 2, 1.0, 1, 13), 4, t, 1.0, true);
    EXPECT_EQ(r.spread, 0.0);
    EXPECT_THROW(global_optimum_probe(small_design(200, 6, 2, 1.0, 1, 13), 1, t), Error);
}

TEST(GlobalProbe, TinyNonconvexInstanceIsReported)
{
    Tuning t;
    t.fixed_lambda = 0.05;
    t.gamma = 2.1;
    const auto r = global_optimum_probe(small_design(30, 20, 3, 2.0, 1, 14), 5, t);
    EXPECT_EQ(r.objectives.size(), 5u);
    EXPECT_GE(r.spread, 0.0);
    EXPECT_FALSE(r.convex_regime());
}
