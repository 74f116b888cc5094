#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "clustersync/errors.hpp"
#include "clustersync/fourier_series.hpp"
#include "clustersync/topology.hpp"

namespace clustersync {

/// Exact phase step psi = 2 pi q / N.
struct PhaseRatio {
    int q = 0;
    int N = 1;
    double radians() const { return kTwoPi * static_cast<double>(q) / static_cast<double>(N); }
};

enum class AlternatingVariant { A, B };

inline std::string to_string(AlternatingVariant v) { return v == AlternatingVariant::A ? "A" : "B"; }

struct ClusterSolution {
    int N = 0;
    /// Symmetric kind: psi = 2 pi q / N. Unused for the alternating kind.
    int q = 0;
    std::optional<AlternatingVariant> alternating;
    int n = 0;
    /// members[r-1] is cluster C_r, listing 1-based oscillator indices.
    std::vector<std::vector<int>> members;
    /// Cluster labels (1-based) in firing order, starting at C_1.
    std::vector<int> ordering;
    /// theta_i = 2 pi * phase_numerators[i] / phase_denominator.
    std::vector<int> phase_numerators;
    int phase_denominator = 1;
    /// Global homogeneous coupling admits further rearranged solutions of the same type.
    bool rearrangement_family = false;
    std::optional<double> omega_correction;

    bool is_alternating() const noexcept { return alternating.has_value(); }
    PhaseRatio psi() const { return {q, N}; }

    std::string label() const
    {
        if (alternating) return "alternating-" + to_string(*alternating);
        return "q=" + std::to_string(q) + "/" + std::to_string(N);
    }

    /// phi_i = theta_{i+1} - theta_i as integer numerators over phase_denominator (wrapped to [0, den)).
    std::vector<int> difference_numerators() const
    {
        std::vector<int> out(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            const int d = phase_numerators[static_cast<std::size_t>((i + 1) % N)] - phase_numerators[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] = ((d % phase_denominator) + phase_denominator) % phase_denominator;
        }
        return out;
    }
};

inline ClusterSolution symmetric_solution(int N, int q)
{
    if (N < 2) throw InvalidArgument("cluster catalog: N must be at least 2");
    q = ((q % N) + N) % N;
    ClusterSolution s;
    s.N = N;
    s.q = q;
    s.n = N / std::gcd(q, N);
    s.members.assign(static_cast<std::size_t>(s.n), {});
    for (int i = 1; i <= N; ++i) s.members[static_cast<std::size_t>((i - 1) % s.n)].push_back(i);
    s.phase_denominator = N;
    s.phase_numerators.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) s.phase_numerators[static_cast<std::size_t>(i)] = static_cast<int>((static_cast<long>(i) * q) % N);
    s.ordering.resize(static_cast<std::size_t>(s.n));
    std::iota(s.ordering.begin(), s.ordering.end(), 1);
    std::stable_sort(s.ordering.begin(), s.ordering.end(), [&](int a, int b) {
        return s.phase_numerators[static_cast<std::size_t>(a - 1)] < s.phase_numerators[static_cast<std::size_t>(b - 1)];
    });
    return s;
}

/// All N symmetric solutions psi_q = 2 pi q / N, q = 0..N-1.
inline std::vector<ClusterSolution> enumerate_symmetric(int N)
{
    if (N < 2) throw InvalidArgument("cluster catalog: N must be at least 2");
    std::vector<ClusterSolution> out;
    out.reserve(static_cast<std::size_t>(N));
    for (int q = 0; q < N; ++q) out.push_back(symmetric_solution(N, q));
    return out;
}

inline std::vector<ClusterSolution> enumerate_symmetric(const CouplingTopology& w)
{
    auto out = enumerate_symmetric(w.size());
    if (w.form() == TopologyForm::global_homogeneous && w.size() > 2)
        for (auto& s : out) s.rearrangement_family = s.n >= 2;
    return out;
}

/// q of the order-reversed partner solution (psi -> 2 pi - psi).
inline int partner_q(const ClusterSolution& s) { return (s.N - s.q) % s.N; }

inline ClusterSolution alternating_solution(int N, AlternatingVariant v)
{
    if (N < 4 || N % 4 != 0) throw InvalidArgument("alternating cluster solution requires N = 4p");
    ClusterSolution s;
    s.N = N;
    s.alternating = v;
    s.n = 2;
    s.phase_denominator = 2;
    s.phase_numerators.resize(static_cast<std::size_t>(N));
    // phi alternates (0, 1, 0, 1, ...) half-turns for A and (1, 0, 1, 0, ...) for B.
    int theta = 0;
    for (int i = 0; i < N; ++i) {
        s.phase_numerators[static_cast<std::size_t>(i)] = theta;
        const int phi = (v == AlternatingVariant::A) ? (i % 2) : ((i + 1) % 2);
        theta = (theta + phi) % 2;
    }
    s.members.assign(2, {});
    for (int i = 0; i < N; ++i) s.members[static_cast<std::size_t>(s.phase_numerators[static_cast<std::size_t>(i)])].push_back(i + 1);
    s.ordering = {1, 2};
    return s;
}

struct AlternatingCertificate {
    bool exists = false;
    int p = 0;
    double sum_1_mod_4 = 0.0;
    double sum_3_mod_4 = 0.0;
    std::vector<ClusterSolution> solutions;
};

/// The alternating 2-cluster state exists iff N = 4p and sum_k w_{4k+1} == sum_k w_{4k+3}.
inline AlternatingCertificate alternating_exists(const CouplingTopology& w)
{
    AlternatingCertificate c;
    const int N = w.size();
    if (!w.is_circulant() || N % 4 != 0) return c;
    c.p = N / 4;
    for (int k = 0; k < c.p; ++k) {
        c.sum_1_mod_4 += w.weight(4 * k + 1);
        c.sum_3_mod_4 += w.weight(4 * k + 3);
    }
    c.exists = std::abs(c.sum_1_mod_4 - c.sum_3_mod_4) <= 1e-12;
    if (c.exists) c.solutions = {alternating_solution(N, AlternatingVariant::A), alternating_solution(N, AlternatingVariant::B)};
    return c;
}

/// theta offsets of each oscillator in radians, theta_1 = 0.
inline std::vector<double> phases_of(const ClusterSolution& s)
{
    std::vector<double> out;
    out.reserve(s.phase_numerators.size());
    for (int num : s.phase_numerators)
        out.push_back(kTwoPi * static_cast<double>(num) / static_cast<double>(s.phase_denominator));
    return out;
}

/// phi_i = theta_{i+1} - theta_i in radians.
inline std::vector<double> phase_differences(const ClusterSolution& s)
{
    std::vector<double> out;
    for (int num : s.difference_numerators())
        out.push_back(kTwoPi * static_cast<double>(num) / static_cast<double>(s.phase_denominator));
    return out;
}

/// Collective frequency shift omega = sum_j W_1j H(theta_j - theta_1 - eta).
template <class Series>
double omega_correction(const Series& h, const CouplingTopology& w, const ClusterSolution& s, double eta)
{
    const auto theta = phases_of(s);
    const auto m = w.matrix();
    double sum = 0.0;
    for (int j = 0; j < s.N; ++j) sum += m(0, j) * h(theta[static_cast<std::size_t>(j)] - theta[0] - eta);
    return sum;
}

} // namespace clustersync
