#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rtl/penalty.hpp"

using rtl::ScadParams;

TEST(ScadParams, Validation)
{
    EXPECT_NO_THROW(ScadParams(0.0, 3.7));
    EXPECT_THROW(ScadParams(-0.1, 3.7), rtl::Error);
    EXPECT_THROW(ScadParams(1.0, 2.0), rtl::Error);
    EXPECT_THROW(ScadParams(1.0, 1.5), rtl::Error);
}

TEST(ScadPenalty, Examples)
{
    EXPECT_EQ(rtl::scad_penalty(0.0, ScadParams(1.0, 3.7)), 0.0);
    EXPECT_DOUBLE_EQ(rtl::scad_penalty(3.0, ScadParams(1.0, 3.0)), 2.0);
    EXPECT_NEAR(rtl::scad_penalty(2.0, ScadParams(1.0, 3.7)), -(4.0 - 14.8 + 1.0) / (2.0 * 2.7), 1e-14);
    EXPECT_NEAR(rtl::scad_penalty(2.0, ScadParams(1.0, 3.7)), 1.81481, 1e-5);
    EXPECT_DOUBLE_EQ(rtl::scad_penalty(-2.0, ScadParams(1.0, 3.7)), rtl::scad_penalty(2.0, ScadParams(1.0, 3.7)));
    EXPECT_DOUBLE_EQ(rtl::scad_penalty(0.4, ScadParams(1.0, 3.7)), 0.4);
    EXPECT_DOUBLE_EQ(rtl::scad_penalty(100.0, ScadParams(0.5, 3.7)), 4.7 * 0.25 / 2.0);
}

TEST(ScadPenalty, MiddleBranchMatchesIntegratedDerivative)
{
    const ScadParams p(1.0, 3.7);
    // Trapezoid integral of the derivative from 0 to 2.
    const int steps = 200000;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double a = 2.0 * i / steps, b = 2.0 * (i + 1) / steps;
        const double fa = a == 0.0 ? p.lambda() : rtl::scad_derivative(a, p);
        integral += 0.5 * (b - a) * (fa + rtl::scad_derivative(b, p));
    }
    EXPECT_NEAR(integral, rtl::scad_penalty(2.0, p), 1e-8);
}

TEST(ScadPenalty, ContinuousAtKnots)
{
    for (double lambda : {0.1, 0.5, 1.0, 3.0})
        for (double gamma : {2.1, 3.0, 3.7, 6.0}) {
            const ScadParams p(lambda, gamma);
            for (double knot : {lambda, gamma * lambda}) {
                EXPECT_NEAR(rtl::scad_penalty(knot - 1e-9, p), rtl::scad_penalty(knot + 1e-9, p), 1e-8);
                EXPECT_NEAR(rtl::scad_penalty(knot, p), oracle::scad(knot, lambda, gamma), 1e-14);
            }
        }
}

TEST(ScadDerivative, Examples)
{
    const ScadParams p(1.0, 3.7);
    EXPECT_DOUBLE_EQ(rtl::scad_derivative(0.5, p), 1.0);
    EXPECT_EQ(rtl::scad_derivative(4.0, p), 0.0);
    EXPECT_NEAR(rtl::scad_derivative(2.0, p), 1.7 / 2.7, 1e-14);
    EXPECT_NEAR(rtl::scad_derivative(2.0, p), 0.62963, 1e-5);
    EXPECT_THROW(rtl::scad_derivative(0.0, p), rtl::Error);
    EXPECT_THROW(rtl::scad_derivative(-1.0, p), rtl::Error);
}

TEST(ScadDerivative, FiniteDifferences)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(0.05, 2.0), gam(2.1, 6.0), u(0.0, 1.0);
    int checked = 0;
    while (checked < 500) {
        const ScadParams p(lam(rng), gam(rng));
        const double beta = u(rng) * 1.5 * p.gamma() * p.lambda();
        const double h = 1e-6;
        if (beta < 2 * h || std::abs(beta - p.lambda()) < 2 * h || std::abs(beta - p.gamma() * p.lambda()) < 2 * h)
            continue;
        const double fd = (rtl::scad_penalty(beta + h, p) - rtl::scad_penalty(beta - h, p)) / (2 * h);
        EXPECT_NEAR(fd, rtl::scad_derivative(beta, p), 1e-6) << beta;
        ++checked;
    }
}

TEST(SoftThreshold, Examples)
{
    EXPECT_EQ(rtl::soft_threshold(0.5, 1.0), 0.0);
    EXPECT_EQ(rtl::soft_threshold(-3.0, 1.0), -2.0);
    EXPECT_EQ(rtl::soft_threshold(1.0, 1.0), 0.0);
    EXPECT_EQ(rtl::soft_threshold(2.5, 0.0), 2.5);
    EXPECT_THROW(rtl::soft_threshold(1.0, -1.0), rtl::Error);
}

TEST(CoordinateUpdate, Examples)
{
    const ScadParams p(0.5, 3.7);
    EXPECT_EQ(rtl::scad_coordinate_update(0.0, 1.0, p), 0.0);
    const double z = 10.0 * 1.0 * 3.7 * 0.5;
    EXPECT_DOUBLE_EQ(rtl::scad_coordinate_update(z, 1.0, p), z);
    EXPECT_DOUBLE_EQ(rtl::scad_coordinate_update(-z, 1.0, p), -z);
    EXPECT_THROW(rtl::scad_coordinate_update(1.0, 0.0, p), rtl::Error);
    EXPECT_THROW(rtl::scad_coordinate_update(1.0, -1.0, p), rtl::Error);
}

TEST(CoordinateUpdate, FineGridExample)
{
    const double scan = oracle::grid_argmin(1.2, 1.0, 0.5, 3.7, -5.0, 5.0, 1e-5);
    EXPECT_NEAR(rtl::scad_coordinate_update(1.2, 1.0, ScadParams(0.5, 3.7)), scan, 1e-4);
}

TEST(CoordinateUpdate, ThreeBranchRuleInConvexRegime)
{
    const double lambda = 0.7, gamma = 3.7, v = 1.3;
    const ScadParams p(lambda, gamma);
    for (double z : {0.3, 1.5, 2.0, 3.0, 3.3, 4.0, 10.0}) {
        double expected;
        if (std::abs(z) <= lambda * (v + 1.0)) expected = rtl::soft_threshold(z, lambda) / v;
        else if (std::abs(z) <= v * gamma * lambda)
            expected = rtl::soft_threshold(z, gamma * lambda / (gamma - 1.0)) / (v - 1.0 / (gamma - 1.0));
        else expected = z / v;
        EXPECT_NEAR(rtl::scad_coordinate_update(z, v, p), expected, 1e-14) << z;
        EXPECT_NEAR(rtl::scad_coordinate_update(-z, v, p), -expected, 1e-14) << z;
    }
}

TEST(CoordinateUpdate, RandomInstancesMatchBruteForce)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> zd(-5.0, 5.0), vd(0.05, 3.0), ld(0.05, 2.0), gd(2.05, 6.0);
    for (int t = 0; t < 300; ++t) {
        const double z = zd(rng), v = vd(rng), l = ld(rng), g = gd(rng);
        const double got = rtl::scad_coordinate_update(z, v, ScadParams(l, g));
        const double ref = oracle::brute_argmin(z, v, l, g);
        EXPECT_NEAR(got, ref, 1e-4) << "z=" << z << " v=" << v << " lambda=" << l << " gamma=" << g;
        EXPECT_LE(oracle::prox_objective(got, z, v, l, g), oracle::prox_objective(ref, z, v, l, g) + 1e-12);
    }
}

TEST(CoordinateUpdate, ZeroLambdaIsLeastSquares)
{
    EXPECT_DOUBLE_EQ(rtl::scad_coordinate_update(1.7, 0.4, ScadParams(0.0, 3.7)), 1.7 / 0.4);
}

TEST(RescaledUpdate, MinimizesRescaledObjective)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> zd(-3.0, 3.0), vd(0.05, 3.0), ld(0.05, 1.5), gd(2.1, 5.0);
    for (int t = 0; t < 100; ++t) {
        const double z = zd(rng), v = vd(rng), l = ld(rng), g = gd(rng);
        const double got = rtl::scad_rescaled_update(z, v, ScadParams(l, g));
        // argmin_b 0.5 v b^2 - z b + scad(v b) / v, via u = v b.
        const double ref = oracle::brute_argmin(z, 1.0, l, g) / v;
        EXPECT_NEAR(got, ref, 1e-4 / v);
    }
}
