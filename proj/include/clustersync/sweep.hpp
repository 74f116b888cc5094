#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/spectrum.hpp"

namespace clustersync {

/// Open interval (lower, upper) of delays.
struct TauInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct StabilityInterval {
    ClusterSolution solution;
    CouplingSign sign = CouplingSign::positive;
    double tau_max = 0.0;
    double omega = 0.0;
    std::vector<TauInterval> intervals;
};

struct SweepOptions {
    std::size_t grid = 400;
    int bisection_depth = 40;
    double resolution = 1e-4;
    double margin = 1e-9;
    CouplingSign sign = CouplingSign::positive;
};

struct SweepPoint {
    double tau = 0.0;
    double max_nonzero_real = 0.0;
    double min_nonzero_real = 0.0;
    Stability stability = Stability::marginal;
};

/// Real parts of the non-structural eigenvalues of one solution as a function of tau.
template <class Series>
class StabilityProbe {
public:
    StabilityProbe(const Series& h, const CouplingTopology& w, const ClusterSolution& sol, double omega)
        : h_(h), w_(w), sol_(sol), omega_(omega)
    {
        if (sol.N != w.size()) throw InvalidArgument("sweep: solution size differs from topology size");
        if (w.is_circulant() && !sol.is_alternating()) kernel_.emplace(w.size());
    }

    SweepPoint evaluate(double tau, CouplingSign sign, double margin) const
    {
        const double eta = omega_ * tau;
        Spectrum s;
        if (kernel_) {
            s.eigenvalues = kernel_->eigenvalues(kernel_->coefficients(h_, w_, sol_.q, eta));
            detail::finish_with_zero(s, 0);
        } else {
            s = spectrum_for(h_, w_, sol_, eta);
        }
        SweepPoint p;
        p.tau = tau;
        p.max_nonzero_real = s.max_nonzero_real;
        p.min_nonzero_real = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
            if (!s.zero_mode_index || i != *s.zero_mode_index) p.min_nonzero_real = std::min(p.min_nonzero_real, s.eigenvalues[i].real());
        p.stability = classify(s, sign, margin);
        return p;
    }

    bool stable(double tau, CouplingSign sign, double margin) const
    {
        return evaluate(tau, sign, margin).stability == Stability::stable;
    }

private:
    const Series& h_;
    const CouplingTopology& w_;
    const ClusterSolution& sol_;
    double omega_;
    std::optional<CirculantKernel> kernel_;
};

/// tau_i = tau_max * i / (grid - 1), i = 0..grid-1.
template <class Series>
std::vector<SweepPoint> sweep_profile(const Series& h, const CouplingTopology& w, const ClusterSolution& sol,
                                      double omega, double tau_max, const SweepOptions& opt = {})
{
    if (opt.grid < 2) throw InvalidArgument("sweep: grid must have at least 2 points");
    if (!(tau_max > 0.0)) throw InvalidArgument("sweep: tau_max must be positive");
    const StabilityProbe<Series> probe(h, w, sol, omega);
    std::vector<SweepPoint> out(opt.grid);
    for (std::size_t i = 0; i < opt.grid; ++i)
        out[i] = probe.evaluate(tau_max * static_cast<double>(i) / static_cast<double>(opt.grid - 1), opt.sign, opt.margin);
    return out;
}

/// Open stability intervals in [0, tau_max]; every predicate change on the grid is refined by bisection.
template <class Series>
StabilityInterval sweep_tau(const Series& h, const CouplingTopology& w, const ClusterSolution& sol, double omega,
                            double tau_max, const SweepOptions& opt = {})
{
    const auto profile = sweep_profile(h, w, sol, omega, tau_max, opt);
    const StabilityProbe<Series> probe(h, w, sol, omega);
    auto refine = [&](double a, double b, bool stable_at_a) {
        for (int it = 0; it < opt.bisection_depth && b - a > opt.resolution; ++it) {
            const double mid = 0.5 * (a + b);
            if (probe.stable(mid, opt.sign, opt.margin) == stable_at_a) a = mid;
            else b = mid;
        }
        return 0.5 * (a + b);
    };

    StabilityInterval out;
    out.solution = sol;
    out.sign = opt.sign;
    out.tau_max = tau_max;
    out.omega = omega;
    const std::size_t n = profile.size();
    std::size_t i = 0;
    while (i < n) {
        if (profile[i].stability != Stability::stable) {
            ++i;
            continue;
        }
        const double lower = (i == 0) ? profile[0].tau : refine(profile[i - 1].tau, profile[i].tau, false);
        std::size_t j = i;
        while (j + 1 < n && profile[j + 1].stability == Stability::stable) ++j;
        const double upper = (j + 1 == n) ? profile[n - 1].tau : refine(profile[j].tau, profile[j + 1].tau, true);
        out.intervals.push_back({lower, upper});
        i = j + 1;
    }
    return out;
}

} // namespace clustersync
