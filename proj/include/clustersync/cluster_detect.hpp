#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/dde.hpp"
#include "clustersync/errors.hpp"

namespace clustersync {

struct ClusterVerdict {
    int n = 0;
    /// partition[r-1] lists the 1-based members of cluster C_r; C_r is labelled by its smallest member.
    std::vector<std::vector<int>> partition;
    /// Cluster labels in firing order starting from C_1.
    std::vector<int> ordering;
    /// Phase of oscillator i relative to oscillator 1, as a fraction of the period in [0, 1).
    std::vector<double> relative_phases;
    /// Mean phase of each cluster (same order as partition), fraction of the period.
    std::vector<double> cluster_phases;
    double period = 0.0;
    /// Largest deviation from the matched catalog pattern, fraction of the period.
    double residual = 0.0;
    std::optional<ClusterSolution> match;

    std::string label() const
    {
        std::string s = std::to_string(n) + "C";
        for (int c : ordering) {
            s += " (";
            const auto& m = partition[static_cast<std::size_t>(c - 1)];
            for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "," : "") + std::to_string(m[i]);
            s += ")";
        }
        return s;
    }
};

struct ClassifyOptions {
    double transient_fraction = 0.6;
    std::size_t min_spikes = 5;
    /// Coefficient of variation of inter-spike intervals above which no period is accepted.
    double max_period_cv = 0.05;
    /// Allowed relative offset of the measured period from the expected one.
    double max_period_offset = 0.25;
    std::size_t reference_spikes = 10;
};

/// Circular distance between two fractions of a period.
inline double circular_distance(double a, double b)
{
    const double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1.0 - d);
}

inline double wrap_unit(double x)
{
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

/// Fractional ideal phases theta_i / 2pi of a catalogued solution.
inline std::vector<double> ideal_fractions(const ClusterSolution& s)
{
    std::vector<double> out;
    for (int num : s.phase_numerators) out.push_back(static_cast<double>(num) / static_cast<double>(s.phase_denominator));
    return out;
}

/// Largest circular deviation of measured relative phases from a solution's pattern.
inline double pattern_residual(const std::vector<double>& relative, const ClusterSolution& s)
{
    const auto ideal = ideal_fractions(s);
    if (ideal.size() != relative.size()) throw InvalidArgument("pattern_residual: size mismatch");
    double r = 0.0;
    for (std::size_t i = 0; i < relative.size(); ++i) r = std::max(r, circular_distance(relative[i], ideal[i] - ideal[0]));
    return r;
}

namespace detail {

inline double nearest_spike(const std::vector<double>& train, double t)
{
    auto it = std::lower_bound(train.begin(), train.end(), t);
    if (it == train.end()) return train.back();
    if (it == train.begin()) return *it;
    const double after = *it, before = *(it - 1);
    return (after - t) < (t - before) ? after : before;
}

inline double circular_mean(const std::vector<double>& fractions)
{
    std::complex<double> acc(0.0, 0.0);
    for (double f : fractions) acc += std::polar(1.0, kTwoPi * f);
    return wrap_unit(std::arg(acc) / kTwoPi);
}

} // namespace detail

/// Phases of every oscillator relative to oscillator 1 at one reference spike of oscillator 1.
inline std::vector<double> relative_phases_at(const SpikeRaster& raster, double t_ref, double period)
{
    std::vector<double> out;
    for (const auto& train : raster.times) {
        if (train.empty()) throw TooFewSpikes("relative phase: an oscillator never spiked");
        out.push_back(wrap_unit((t_ref - detail::nearest_spike(train, t_ref)) / period));
    }
    out[0] = 0.0;
    return out;
}

/// Residual against a catalogued pattern at every spike of oscillator 1 that has neighbours on both sides.
inline std::vector<std::pair<double, double>> residual_series(const SpikeRaster& raster, const ClusterSolution& s)
{
    std::vector<std::pair<double, double>> out;
    const auto& ref = raster.times.at(0);
    for (std::size_t r = 1; r + 1 < ref.size(); ++r) {
        const double local_period = 0.5 * (ref[r + 1] - ref[r - 1]);
        out.emplace_back(ref[r], pattern_residual(relative_phases_at(raster, ref[r], local_period), s));
    }
    return out;
}

/// Group late-time spike phases into clusters and match them against the catalog.
inline ClusterVerdict classify_clusters(const SpikeRaster& raster, double expected_period, double tol_fraction = 0.05,
                                        const ClassifyOptions& opt = {})
{
    const int N = raster.size();
    if (N < 1) throw InvalidArgument("classify_clusters: empty raster");
    const double t_cut = opt.transient_fraction * raster.horizon;
    std::vector<std::vector<double>> late(static_cast<std::size_t>(N));
    std::vector<double> isi;
    for (int i = 0; i < N; ++i) {
        for (double t : raster.times[static_cast<std::size_t>(i)])
            if (t >= t_cut) late[static_cast<std::size_t>(i)].push_back(t);
        const auto& l = late[static_cast<std::size_t>(i)];
        if (l.size() < opt.min_spikes)
            throw TooFewSpikes("classify_clusters: oscillator " + std::to_string(i + 1) + " has " + std::to_string(l.size()) +
                               " spikes after the transient (need " + std::to_string(opt.min_spikes) + ")");
        for (std::size_t k = 1; k < l.size(); ++k) isi.push_back(l[k] - l[k - 1]);
    }
    const double mean = std::accumulate(isi.begin(), isi.end(), 0.0) / static_cast<double>(isi.size());
    double var = 0.0;
    for (double v : isi) var += (v - mean) * (v - mean);
    const double cv = std::sqrt(var / static_cast<double>(isi.size())) / mean;
    if (cv > opt.max_period_cv)
        throw NoStablePeriod("classify_clusters: inter-spike intervals vary too much (cv = " + std::to_string(cv) + ")");
    if (expected_period > 0.0 && std::abs(mean - expected_period) > opt.max_period_offset * expected_period)
        throw NoStablePeriod("classify_clusters: measured period " + std::to_string(mean) + " is far from the expected " +
                             std::to_string(expected_period));

    SpikeRaster late_raster;
    late_raster.times = late;
    late_raster.horizon = raster.horizon;
    late_raster.threshold = raster.threshold;
    const auto& ref = late[0];
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(N));
    const std::size_t first = ref.size() > opt.reference_spikes + 1 ? ref.size() - opt.reference_spikes - 1 : 1;
    for (std::size_t r = first; r + 1 < ref.size(); ++r) {
        const auto rel = relative_phases_at(late_raster, ref[r], mean);
        for (int i = 0; i < N; ++i) samples[static_cast<std::size_t>(i)].push_back(rel[static_cast<std::size_t>(i)]);
    }

    ClusterVerdict v;
    v.period = mean;
    for (int i = 0; i < N; ++i) v.relative_phases.push_back(detail::circular_mean(samples[static_cast<std::size_t>(i)]));
    v.relative_phases[0] = 0.0;

    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return v.relative_phases[static_cast<std::size_t>(a)] < v.relative_phases[static_cast<std::size_t>(b)];
    });
    auto ph = [&](std::size_t k) { return v.relative_phases[static_cast<std::size_t>(order[k % static_cast<std::size_t>(N)])]; };
    std::vector<std::size_t> cuts;
    for (std::size_t k = 0; k < static_cast<std::size_t>(N); ++k) {
        const double gap = (k + 1 < static_cast<std::size_t>(N)) ? ph(k + 1) - ph(k) : ph(0) + 1.0 - ph(k);
        if (gap >= tol_fraction) cuts.push_back(k);
    }
    std::vector<std::vector<int>> groups;
    if (cuts.empty()) {
        groups.emplace_back();
        for (int i = 1; i <= N; ++i) groups.back().push_back(i);
    } else {
        for (std::size_t c = 0; c < cuts.size(); ++c) {
            const std::size_t start = cuts[c] + 1;
            const std::size_t end = (c + 1 < cuts.size()) ? cuts[c + 1] : cuts[0] + static_cast<std::size_t>(N);
            std::vector<int> g;
            for (std::size_t k = start; k <= end; ++k) g.push_back(order[k % static_cast<std::size_t>(N)] + 1);
            std::sort(g.begin(), g.end());
            groups.push_back(std::move(g));
        }
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    v.partition = groups;
    v.n = static_cast<int>(groups.size());
    for (const auto& g : groups) {
        std::vector<double> f;
        for (int m : g) f.push_back(v.relative_phases[static_cast<std::size_t>(m - 1)]);
        v.cluster_phases.push_back(detail::circular_mean(f));
    }
    v.ordering.resize(static_cast<std::size_t>(v.n));
    std::iota(v.ordering.begin(), v.ordering.end(), 1);
    const double base = v.cluster_phases[0];
    std::stable_sort(v.ordering.begin(), v.ordering.end(), [&](int a, int b) {
        const double pa = a == 1 ? 0.0 : wrap_unit(v.cluster_phases[static_cast<std::size_t>(a - 1)] - base);
        const double pb = b == 1 ? 0.0 : wrap_unit(v.cluster_phases[static_cast<std::size_t>(b - 1)] - base);
        return pa < pb;
    });

    std::vector<ClusterSolution> candidates = N >= 2 ? enumerate_symmetric(N) : std::vector<ClusterSolution>{};
    if (N >= 4 && N % 4 == 0) {
        candidates.push_back(alternating_solution(N, AlternatingVariant::A));
        candidates.push_back(alternating_solution(N, AlternatingVariant::B));
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        const double r = pattern_residual(v.relative_phases, c);
        if (r < best) {
            best = r;
            if (r <= tol_fraction) v.match = c;
        }
    }
    v.residual = N >= 2 ? best : 0.0;
    return v;
}

} // namespace clustersync
