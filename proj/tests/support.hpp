#pragma once

#include <random>

#include "clustersync/clustersync.hpp"

namespace clustersync::testsupport {

inline OscillatorSystem ml_system() { return morris_lecar(MorrisLecarParams{}, SynapseParams{0.0}); }

inline Vec ml_guess()
{
    Vec g(2);
    g << 0.0, 0.0;
    return g;
}

/// Reduced Morris-Lecar phase model at default settings, computed once per test binary.
inline const PhaseModel& ml_model()
{
    static const PhaseModel pm = reduce(ml_system(), ml_guess(), 25.0);
    return pm;
}

inline FourierSeries random_series(std::mt19937_64& rng, std::size_t order)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(order), b(order);
    for (std::size_t k = 0; k < order; ++k) {
        const double decay = 1.0 / static_cast<double>(k + 1);
        a[k] = u(rng) * decay;
        b[k] = u(rng) * decay;
    }
    return FourierSeries(u(rng), a, b);
}

inline std::vector<double> random_row(std::mt19937_64& rng, int n, bool symmetric)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) w[static_cast<std::size_t>(k)] = u(rng);
    if (symmetric)
        for (int k = 1; k < n; ++k) w[static_cast<std::size_t>(n - k)] = w[static_cast<std::size_t>(k)];
    return w;
}

inline std::vector<double> sampled(const FourierSeries& s, std::size_t m)
{
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) out[j] = s(kTwoPi * static_cast<double>(j) / static_cast<double>(m));
    return out;
}

inline std::vector<PhaseSample> sample_grid(const FourierSeries& s, std::size_t m)
{
    std::vector<PhaseSample> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
        out[j] = {t, s(t)};
    }
    return out;
}

} // namespace clustersync::testsupport
