#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace clustersync;
using namespace clustersync::testsupport;

TEST(FourierSeries, ReferenceSeriesAtZeroIsCoefficientSum)
{
    const double expected = -2.0214064 + 1.994447 + 0.010604496 - 0.051657807 - 0.029127343 - 0.01054942 -
                            0.002131111 + 9.9814584e-05 + 0.00015646126 - 8.1846403e-05;
    EXPECT_NEAR(eval(printed_reference_series(), 0.0), expected, 1e-14);
}

TEST(FourierSeries, ConstantSeriesIsConstant)
{
    const FourierSeries s(1.0, {0.0, 0.0}, {0.0, 0.0});
    for (double t : {-3.0, 0.0, 0.7, 10.0}) EXPECT_DOUBLE_EQ(eval(s, t), 1.0);
}

TEST(FourierSeries, SineIdentity)
{
    const FourierSeries s(0.0, {0.0}, {1.0});
    EXPECT_NEAR(eval(s, std::numbers::pi / 2), 1.0, 1e-15);
}

TEST(FourierSeries, DerivativeOfCosineAndSineAtZero)
{
    EXPECT_NEAR(eval_derivative(FourierSeries(0.0, {1.0}, {0.0}), 0.0), 0.0, 1e-15);
    EXPECT_NEAR(eval_derivative(FourierSeries(0.0, {0.0}, {1.0}), 0.0), 1.0, 1e-15);
}

TEST(FourierSeries, DerivativeMatchesCentredDifference)
{
    const auto s = printed_reference_series();
    const double h = 1e-5;
    double worst = 0.0;
    for (int j = 0; j < 400; ++j) {
        const double t = kTwoPi * j / 400.0;
        const double fd = (s(t + h) - s(t - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - s.derivative(t)));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(FourierSeries, PeriodicToMachinePrecision)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const auto s = printed_reference_series();
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        EXPECT_LT(std::abs(s(t) - s(t + kTwoPi)), 1e-12);
    }
}

TEST(FourierSeries, RejectsMismatchedOrEmptyCoefficients)
{
    EXPECT_THROW(FourierSeries(0.0, {1.0, 2.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(FourierSeries(0.0, {}, {}), InvalidArgument);
    EXPECT_THROW(FourierSeries(0.0, {NAN}, {0.0}), InvalidArgument);
}

TEST(FourierSeries, NegatedAndTruncated)
{
    const auto s = printed_reference_series();
    EXPECT_NEAR(s.negated()(1.3), -s(1.3), 1e-15);
    const auto t = s.truncated(1);
    EXPECT_EQ(t.order(), 1u);
    EXPECT_NEAR(t(0.4), s.a0() + s.a()[0] * std::cos(0.4) + s.b()[0] * std::sin(0.4), 1e-15);
}

TEST(FourierFit, CosineOnSixtyFourPoints)
{
    const auto r = fit(sample_grid(FourierSeries(0.0, {1.0}, {0.0}), 64), 3);
    EXPECT_NEAR(r.series.a0(), 0.0, 1e-12);
    EXPECT_NEAR(r.series.a()[0], 1.0, 1e-12);
    for (std::size_t k = 1; k < 3; ++k) EXPECT_NEAR(r.series.a()[k], 0.0, 1e-12);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(r.series.b()[k], 0.0, 1e-12);
    EXPECT_LT(r.residual_rms, 1e-12);
}

TEST(FourierFit, RecoversReferenceSeries)
{
    const auto s = printed_reference_series();
    const auto r = fit(sample_grid(s, 256), 9);
    EXPECT_LT(r.series.max_coefficient_difference(s), 1e-10);
}

TEST(FourierFit, SineTwoPlusHalf)
{
    std::vector<PhaseSample> samples;
    for (int j = 0; j < 32; ++j) {
        const double t = kTwoPi * j / 32.0;
        samples.push_back({t, std::sin(2 * t) + 0.5});
    }
    const auto r = fit(samples, 2);
    EXPECT_NEAR(r.series.a0(), 0.5, 1e-12);
    EXPECT_NEAR(r.series.b()[1], 1.0, 1e-12);
    EXPECT_NEAR(r.series.a()[0], 0.0, 1e-12);
    EXPECT_NEAR(r.series.a()[1], 0.0, 1e-12);
    EXPECT_NEAR(r.series.b()[0], 0.0, 1e-12);
}

TEST(FourierFit, MinimalGridAndNyquist)
{
    const FourierSeries s(0.3, {0.2, -0.4}, {0.1, 0.7});
    const auto exact = fit(sample_grid(s, 5), 2);
    EXPECT_LT(exact.series.max_coefficient_difference(s), 1e-12);
    const auto even = fit(sample_grid(s, 6), 2);
    EXPECT_LT(even.series.max_coefficient_difference(s), 1e-12);
}

TEST(FourierFit, RejectsTooFewSamples)
{
    const auto samples = sample_grid(printed_reference_series(), 18);
    EXPECT_THROW(fit(samples, 9), InsufficientSamples);
    EXPECT_NO_THROW(fit(sample_grid(printed_reference_series(), 19), 9));
}

TEST(FourierFit, RejectsNonUniformGrid)
{
    auto samples = sample_grid(printed_reference_series(), 64);
    samples[10].theta += 0.01;
    EXPECT_THROW(fit(samples, 9), NonUniformGrid);
}

TEST(FourierFit, ResidualReportsTruncationError)
{
    const auto r = fit(sample_grid(printed_reference_series(), 128), 1);
    EXPECT_GT(r.residual_rms, 1e-3);
}

class FitRoundTrip : public ::testing::TestWithParam<int> {};

TEST_P(FitRoundTrip, EvalThenFitIsIdentity)
{
    std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
    for (std::size_t order = 1; order <= 16; ++order) {
        const auto s = random_series(rng, order);
        for (std::size_t m : {2 * order + 1, 4 * order + 4, std::size_t{512}}) {
            const auto r = fit(sample_grid(s, m), order);
            EXPECT_LT(r.series.max_coefficient_difference(s), 1e-10) << "order " << order << " grid " << m;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, FitRoundTrip, ::testing::Values(1, 2, 3, 4, 5));

TEST(FourierSerialization, JsonRoundTripIsExact)
{
    std::mt19937_64 rng(11);
    const auto s = random_series(rng, 9);
    const auto back = fourier_from_json(nlohmann::json::parse(to_json(s).dump()));
    EXPECT_EQ(back.max_coefficient_difference(s), 0.0);
}

TEST(FourierSerialization, RejectsUnknownKeys)
{
    auto j = to_json(printed_reference_series());
    j["colour"] = 1;
    EXPECT_THROW(fourier_from_json(j), SchemaError);
}

TEST(FourierSerialization, SampleCsvRoundTrip)
{
    const auto s = printed_reference_series();
    const auto samples = sample_grid(s, 64);
    const auto back = samples_from_csv(samples_csv(samples, &s));
    ASSERT_EQ(back.size(), samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].theta, samples[i].theta);
        EXPECT_EQ(back[i].h, samples[i].h);
    }
}
