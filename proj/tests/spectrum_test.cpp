#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace clustersync;
using namespace clustersync::testsupport;

namespace {

const double kPi = std::numbers::pi;

double published_omega() { return kTwoPi / published_period(); }

} // namespace

TEST(CirculantSpectrum, SynchronySignFollowsDerivative)
{
    const auto h = printed_reference_series();
    const auto w = CouplingTopology::distance_weighted(7);
    for (double eta : {0.1, 0.9, 2.0, 3.5, 5.0}) {
        const auto s = circulant_spectrum(h, w, PhaseRatio{0, 7}, eta);
        const double hp = h.derivative(-eta);
        for (int j = 1; j < 7; ++j) {
            double sum = 0.0;
            for (int k = 1; k < 7; ++k) sum += w.weight(k) * (1.0 - std::cos(kTwoPi * k * j / 7.0));
            EXPECT_NEAR(s.eigenvalues[static_cast<std::size_t>(j)].real(), -hp * sum, 1e-12);
            EXPECT_EQ(std::signbit(s.eigenvalues[static_cast<std::size_t>(j)].real()), std::signbit(-hp));
        }
    }
}

TEST(CirculantSpectrum, ZeroModeIsExact)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 50; ++i) {
        const int N = 2 + i % 11;
        const auto h = random_series(rng, 1 + static_cast<std::size_t>(i % 9));
        const auto s = circulant_spectrum(h, CouplingTopology::circulant(random_row(rng, N, false)), PhaseRatio{i % N, N}, u(rng));
        EXPECT_EQ(s.eigenvalues[0], Complex(0.0, 0.0));
        EXPECT_EQ(s.zero_mode_index, 0u);
    }
}

TEST(CirculantSpectrum, MatchesDenseEigensolverOnSevenOscillators)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    const auto h = random_series(rng, 9);
    const auto w = CouplingTopology::circulant(random_row(rng, 7, false));
    const int q = 3;
    const double eta = u(rng);
    const auto closed = circulant_spectrum(h, w, PhaseRatio{q, 7}, eta);
    const auto dense = dense_spectrum(h, w.matrix(), phases_of(symmetric_solution(7, q)), eta);
    EXPECT_LT(multiset_distance(closed.eigenvalues, dense.eigenvalues), 1e-10);
}

TEST(CirculantSpectrum, OracleEquivalenceOnRandomInstances)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        const int N = 3 + i % 10;
        const auto h = random_series(rng, 1 + static_cast<std::size_t>(rng() % 9));
        const auto w = CouplingTopology::circulant(random_row(rng, N, i % 2 == 0));
        const int q = static_cast<int>(rng() % static_cast<unsigned>(N));
        const double eta = u(rng);
        const auto a = circulant_spectrum(h, w, PhaseRatio{q, N}, eta);
        const auto b = dense_spectrum(h, w.matrix(), phases_of(symmetric_solution(N, q)), eta);
        EXPECT_LT(multiset_distance(a.eigenvalues, b.eigenvalues), 1e-10) << "instance " << i;
    }
}

TEST(CirculantSpectrum, RejectsDenseTopologyAndSizeMismatch)
{
    Mat m = CouplingTopology::distance_weighted(4).matrix();
    m(0, 1) = 0.3;
    const auto dense = CouplingTopology::dense(m);
    EXPECT_THROW(circulant_spectrum(printed_reference_series(), dense, PhaseRatio{0, 4}, 0.1), InvalidArgument);
    EXPECT_THROW(circulant_spectrum(printed_reference_series(), CouplingTopology::distance_weighted(5), PhaseRatio{0, 4}, 0.1),
                 InvalidArgument);
}

TEST(CirculantSpectrum, StructuralZeroAlwaysPresent)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 200; ++i) {
        const int N = 2 + i % 15;
        const auto s = circulant_spectrum(random_series(rng, 9), CouplingTopology::circulant(random_row(rng, N, false)),
                                          PhaseRatio{static_cast<int>(rng() % static_cast<unsigned>(N)), N}, u(rng));
        double smallest = 1e300;
        for (auto l : s.eigenvalues) smallest = std::min(smallest, std::abs(l));
        EXPECT_LT(smallest, 1e-10);
        EXPECT_FALSE(s.anomaly);
    }
}

TEST(CirculantSpectrum, BidirectionalPartnersShareSpectrum)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 100; ++i) {
        const int N = 3 + i % 12;
        const auto h = random_series(rng, 9);
        const auto w = CouplingTopology::bidirectional(random_row(rng, N, true));
        const int q = static_cast<int>(rng() % static_cast<unsigned>(N));
        const double eta = u(rng);
        const auto a = circulant_spectrum(h, w, PhaseRatio{q, N}, eta);
        const auto b = circulant_spectrum(h, w, PhaseRatio{(N - q) % N, N}, eta);
        EXPECT_LT(multiset_distance(a.eigenvalues, b.eigenvalues), 1e-10);
    }
}

TEST(CirculantSpectrum, NearestNeighbourClosedForm)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 50; ++i) {
        const int N = 3 + i % 10;
        const double w1 = 0.5 + u(rng);
        const auto h = random_series(rng, 9);
        const int q = static_cast<int>(rng() % static_cast<unsigned>(N));
        const double eta = u(rng), psi = kTwoPi * q / N;
        const auto s = circulant_spectrum(h, CouplingTopology::nearest_neighbour(N, w1), PhaseRatio{q, N}, eta);
        for (int j = 0; j < N; ++j) {
            const double expected = -w1 * (h.derivative(psi - eta) + h.derivative(-psi - eta)) * (1.0 - std::cos(kTwoPi * j / N));
            EXPECT_NEAR(s.eigenvalues[static_cast<std::size_t>(j)].real(), expected, 1e-12);
        }
    }
}

TEST(HomogeneousSpectrum, ClusterSpectrumScalesWithNetworkSize)
{
    const auto h = printed_reference_series();
    for (double eta : {0.3, 1.7, 4.2}) {
        const auto s6 = homogeneous_spectrum(h, 6, 3, eta);
        const auto s9 = homogeneous_spectrum(h, 9, 3, eta);
        ASSERT_EQ(s6.eigenvalues.size(), s9.eigenvalues.size());
        for (std::size_t i = 0; i < s6.eigenvalues.size(); ++i) {
            EXPECT_LT(std::abs(s6.eigenvalues[i] / 2.0 - s9.eigenvalues[i] / 3.0), 1e-12);
            EXPECT_EQ(std::signbit(s6.eigenvalues[i].real()), std::signbit(s9.eigenvalues[i].real()));
        }
        EXPECT_EQ(classify(s6, CouplingSign::positive), classify(s9, CouplingSign::positive));
    }
}

TEST(HomogeneousSpectrum, SingleClusterReducesToSynchrony)
{
    const auto h = printed_reference_series();
    const double eta = 0.4;
    const auto s = homogeneous_spectrum(h, 5, 1, eta);
    const auto all = s.expanded();
    ASSERT_EQ(all.size(), 5u);
    int zeros = 0;
    for (auto l : all) {
        if (std::abs(l) < 1e-14) ++zeros;
        else EXPECT_NEAR(l.real(), -5.0 * h.derivative(-eta), 1e-12);
    }
    EXPECT_EQ(zeros, 1);
}

TEST(HomogeneousSpectrum, MatchesCirculantFormula)
{
    const auto h = printed_reference_series();
    const double eta = published_omega() * 5.0;
    const auto a = homogeneous_spectrum(h, 6, 2, eta).expanded();
    const auto b = circulant_spectrum(h, CouplingTopology::global_homogeneous(6), PhaseRatio{3, 6}, eta).eigenvalues;
    EXPECT_LT(multiset_distance(a, b), 1e-12);
}

TEST(HomogeneousSpectrum, AgreesWithCirculantForEveryDivisor)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int N = 2; N <= 12; ++N) {
        const auto h = random_series(rng, 9);
        const double eta = u(rng);
        for (const auto& sol : enumerate_symmetric(N)) {
            const auto a = homogeneous_spectrum(h, N, sol.n, eta).expanded();
            const auto b = circulant_spectrum(h, CouplingTopology::global_homogeneous(N), sol.psi(), eta).eigenvalues;
            // Every n-cluster state with the same n has the same spectrum under all-to-all coupling.
            EXPECT_LT(multiset_distance(a, b), 1e-10) << "N=" << N << " q=" << sol.q;
        }
    }
}

TEST(HomogeneousSpectrum, ClassificationIndependentOfNetworkSize)
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    const auto h = printed_reference_series();
    for (int n = 1; n <= 8; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            const double eta = u(rng);
            const auto ref = classify(homogeneous_spectrum(h, 2 * n, n, eta), CouplingSign::positive);
            for (int m : {3, 4}) EXPECT_EQ(classify(homogeneous_spectrum(h, m * n, n, eta), CouplingSign::positive), ref);
        }
    }
}

TEST(HomogeneousSpectrum, RejectsNonDivisors)
{
    EXPECT_THROW(homogeneous_spectrum(printed_reference_series(), 6, 4, 0.1), InvalidArgument);
}

TEST(AlternatingSpectrum, EightOscillatorsStableAtShortDelayWithNegativeCoupling)
{
    const auto w = CouplingTopology::distance_weighted(8);
    const auto h = printed_reference_series();
    const double eta = published_omega() * 2.0;
    for (auto v : {AlternatingVariant::A, AlternatingVariant::B}) {
        const auto s = alternating_spectrum(h, w, v, eta);
        EXPECT_EQ(classify(s, CouplingSign::negative), Stability::stable);
    }
}

TEST(AlternatingSpectrum, EightOscillatorsWithComputedH)
{
    const auto& pm = ml_model();
    const auto w = CouplingTopology::distance_weighted(8);
    const auto s = alternating_spectrum(pm.h.series, w, AlternatingVariant::A, pm.cycle.omega() * 2.0);
    EXPECT_EQ(classify(s, CouplingSign::negative), Stability::stable);
}

TEST(AlternatingSpectrum, ConstantHGivesZeroMatrix)
{
    const FourierSeries flat(0.7, {0.0, 0.0}, {0.0, 0.0});
    const auto L = alternating_jacobian(flat, CouplingTopology::distance_weighted(8), AlternatingVariant::A, 1.1);
    EXPECT_EQ(L.cwiseAbs().maxCoeff(), 0.0);
}

namespace {

std::vector<double> admissible_row(std::mt19937_64& rng, int N)
{
    auto w = random_row(rng, N, false);
    double s1 = 0, s3 = 0;
    for (int k = 0; k < N / 4; ++k) {
        s1 += w[static_cast<std::size_t>(4 * k + 1)];
        if (4 * k + 3 != N - 1) s3 += w[static_cast<std::size_t>(4 * k + 3)];
    }
    w[static_cast<std::size_t>(N - 1)] = s1 - s3;
    if (w[static_cast<std::size_t>(N - 1)] < 0) {
        w[1] -= w[static_cast<std::size_t>(N - 1)];
        w[static_cast<std::size_t>(N - 1)] = 0.0;
    }
    return w;
}

Mat finite_difference_jacobian(const FourierSeries& h, const CouplingTopology& w, std::vector<double> phi, double eta)
{
    const int N = w.size();
    const double d = 1e-6;
    Mat j(N, N);
    for (int c = 0; c < N; ++c) {
        auto up = phi, dn = phi;
        up[static_cast<std::size_t>(c)] += d;
        dn[static_cast<std::size_t>(c)] -= d;
        const auto fu = phase_difference_field(h, w, up, eta);
        const auto fd = phase_difference_field(h, w, dn, eta);
        for (int r = 0; r < N; ++r) j(r, c) = (fu[static_cast<std::size_t>(r)] - fd[static_cast<std::size_t>(r)]) / (2 * d);
    }
    return j;
}

} // namespace

TEST(AlternatingSpectrum, VariantsShareSpectrum)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 30; ++i) {
        const int N = 4 * (1 + i % 4);
        const auto w = CouplingTopology::circulant(admissible_row(rng, N));
        ASSERT_TRUE(alternating_exists(w).exists);
        const auto h = random_series(rng, 9);
        const double eta = u(rng);
        const auto a = alternating_spectrum(h, w, AlternatingVariant::A, eta);
        const auto b = alternating_spectrum(h, w, AlternatingVariant::B, eta);
        EXPECT_LT(multiset_distance(a.eigenvalues, b.eigenvalues), 1e-10);
    }
}

TEST(AlternatingSpectrum, JacobianMatchesFiniteDifferences)
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    for (int i = 0; i < 40; ++i) {
        const int N = 4 * (1 + i % 4);
        const auto w = CouplingTopology::circulant(admissible_row(rng, N));
        const auto h = random_series(rng, 9);
        const double eta = u(rng);
        for (auto v : {AlternatingVariant::A, AlternatingVariant::B}) {
            const auto phi = phase_differences(alternating_solution(N, v));
            const auto field = phase_difference_field(h, w, phi, eta);
            for (double f : field) EXPECT_LT(std::abs(f), 1e-12) << "alternating state is an equilibrium";
            const Mat L = alternating_jacobian(h, w, v, eta);
            const Mat J = finite_difference_jacobian(h, w, phi, eta);
            EXPECT_LT((L - J).cwiseAbs().maxCoeff(), 1e-6) << "N=" << N << " variant " << to_string(v);
        }
    }
}

TEST(AlternatingSpectrum, RejectsInadmissibleTopology)
{
    EXPECT_THROW(alternating_spectrum(printed_reference_series(), CouplingTopology::circulant({0, 1, 0, 0, 0, 0, 0, 2}),
                                      AlternatingVariant::A, 0.3),
                 InvalidArgument);
    EXPECT_THROW(alternating_spectrum(printed_reference_series(), CouplingTopology::distance_weighted(6), AlternatingVariant::A, 0.3),
                 InvalidArgument);
}

TEST(DenseSpectrum, TwoOscillators)
{
    const auto h = printed_reference_series();
    const double w1 = 0.8, eta = 0.9;
    Mat W(2, 2);
    W << 0, w1, w1, 0;
    for (int q : {0, 1}) {
        const double psi = kPi * q;
        const auto s = dense_spectrum(h, W, phases_of(symmetric_solution(2, q)), eta);
        const double expected = -w1 * (h.derivative(psi - eta) + h.derivative(-psi - eta));
        ASSERT_TRUE(s.zero_mode_index.has_value());
        const auto other = s.eigenvalues[1 - *s.zero_mode_index];
        EXPECT_NEAR(other.real(), expected, 1e-12);
        EXPECT_NEAR(other.imag(), 0.0, 1e-12);
    }
}

TEST(DenseSpectrum, SmallWeightPerturbationMovesSpectrumLittle)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    const double eps = 1e-3;
    for (int i = 0; i < 20; ++i) {
        const int N = 3 + i % 8;
        const auto w = CouplingTopology::circulant(random_row(rng, N, false));
        const auto h = random_series(rng, 9);
        const auto phases = phases_of(symmetric_solution(N, i % N));
        const double eta = u(rng);
        const Mat M = random_unit_matrix(N, static_cast<std::uint64_t>(i + 100));
        const Mat Wp = w.matrix().cwiseProduct(Mat::Ones(N, N) + eps * M);
        const auto a = dense_spectrum(h, w.matrix(), phases, eta);
        const auto b = dense_spectrum(h, Wp, phases, eta);
        double norm = 0.0;
        for (auto l : a.eigenvalues) norm = std::max(norm, std::abs(l));
        EXPECT_LT(multiset_distance(a.eigenvalues, b.eigenvalues), 10 * eps * norm) << "instance " << i;
    }
}

TEST(DenseSpectrum, RejectsBadInput)
{
    const auto h = printed_reference_series();
    Mat W = Mat::Ones(3, 3);
    EXPECT_THROW(dense_spectrum(h, W, {0, 0, 0}, 0.1), InvalidArgument);
    W.diagonal().setZero();
    EXPECT_THROW(dense_spectrum(h, W, {0, 0}, 0.1), InvalidArgument);
}

TEST(Classify, SynchronyWithPositiveDerivativeIsStable)
{
    const auto h = printed_reference_series().negated();
    const double eta = 0.2;
    ASSERT_GT(h.derivative(-eta), 0.0);
    const auto s = circulant_spectrum(h, CouplingTopology::distance_weighted(5), PhaseRatio{0, 5}, eta);
    EXPECT_EQ(classify(s, CouplingSign::positive), Stability::stable);
    EXPECT_EQ(classify(s, CouplingSign::negative), Stability::unstable);
}

TEST(Classify, AllZeroSpectrumIsMarginal)
{
    Spectrum s;
    s.eigenvalues.assign(4, Complex(0.0, 0.0));
    s.zero_mode_index = 0;
    EXPECT_EQ(classify(s, CouplingSign::positive), Stability::marginal);
    EXPECT_EQ(classify(s, CouplingSign::negative), Stability::marginal);
}

TEST(Classify, SynchronyMatchesDerivativeSignTest)
{
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    const auto h = ml_model().h.series;
    const auto w = CouplingTopology::distance_weighted(6);
    for (int i = 0; i < 1000; ++i) {
        const double eta = u(rng);
        const double hp = h.derivative(-eta);
        if (std::abs(hp) < 1e-9) continue;
        const auto s = circulant_spectrum(h, w, PhaseRatio{0, 6}, eta);
        EXPECT_EQ(classify(s, CouplingSign::positive), hp > 0 ? Stability::stable : Stability::unstable);
        EXPECT_EQ(classify(s, CouplingSign::negative), hp > 0 ? Stability::unstable : Stability::stable);
    }
}

TEST(Spectrum, MissingStructuralZeroIsFlagged)
{
    Spectrum s;
    s.eigenvalues = {Complex(-1.0, 0.0), Complex(-2.0, 0.0)};
    detail::designate_zero(s);
    EXPECT_TRUE(s.anomaly);
    EXPECT_FALSE(s.zero_mode_index.has_value());
    EXPECT_EQ(s.max_nonzero_real, -1.0);
}

TEST(Spectrum, SolutionDispatch)
{
    const auto h = printed_reference_series();
    const auto w = CouplingTopology::distance_weighted(8);
    const auto sym = symmetric_solution(8, 2);
    EXPECT_LT(multiset_distance(spectrum_for(h, w, sym, 0.5).eigenvalues, circulant_spectrum(h, w, sym.psi(), 0.5).eigenvalues), 1e-15);
    const auto alt = alternating_solution(8, AlternatingVariant::B);
    EXPECT_LT(multiset_distance(spectrum_for(h, w, alt, 0.5).eigenvalues,
                                alternating_spectrum(h, w, AlternatingVariant::B, 0.5).eigenvalues),
              1e-15);
    EXPECT_THROW(spectrum_for(h, CouplingTopology::distance_weighted(6), sym, 0.5), InvalidArgument);
}
