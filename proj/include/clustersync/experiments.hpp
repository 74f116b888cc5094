#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/cluster_detect.hpp"
#include "clustersync/dde.hpp"
#include "clustersync/errors.hpp"
#include "clustersync/phase_reduction.hpp"

namespace clustersync {

/// Seeded uniform [0, 1) stream with the same values on every platform.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// N x N matrix of seeded uniform [0, 1) entries with a zero diagonal.
inline Mat random_unit_matrix(int n, std::uint64_t seed)
{
    UniformStream u(seed);
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) m(i, j) = u.next();
    return m;
}

/// True when all entries lie in [-1, 1].
inline bool entries_bounded(const Mat& m) { return m.cwiseAbs().maxCoeff() <= 1.0; }

/// W~_ij = w_ij (1 + eps m_ij) and tau_ij = tau (1 + eps sigma_ij); zero matrices leave the network unchanged.
inline NetworkSpec apply_symmetry_breaking(const NetworkSpec& spec, const Mat& m, const Mat& s)
{
    const int n = spec.size();
    if (m.rows() != n || m.cols() != n || s.rows() != n || s.cols() != n)
        throw InvalidArgument("apply_symmetry_breaking: perturbation matrices must be N x N");
    NetworkSpec out = spec;
    if (!m.isZero(0.0)) out.weight_override = spec.weights().cwiseProduct((Mat::Ones(n, n) + spec.epsilon * m));
    if (!s.isZero(0.0)) {
        Mat d = spec.delays().cwiseProduct(Mat::Ones(n, n) + spec.epsilon * s);
        d.diagonal().setZero();
        out.delay_override = d;
    }
    return out;
}

/// History on the uncoupled cycle at the catalogued phases, each shifted by a seeded uniform
/// offset in [-jitter, jitter] periods (oscillator 1 included).
inline History catalog_history(const OscillatorSystem& sys, const LimitCycle& cycle, const ClusterSolution& sol,
                               double jitter = 0.0, std::uint64_t seed = 0)
{
    auto phases = phases_of(sol);
    if (jitter != 0.0) {
        UniformStream u(seed);
        for (auto& p : phases) p += kTwoPi * jitter * (2.0 * u.next() - 1.0);
    }
    return History::on_cycle(sys, cycle, std::move(phases));
}

/// Constant history with every oscillator frozen at a seeded random point of the uncoupled cycle.
inline History random_constant_history(const LimitCycle& cycle, int n, std::uint64_t seed)
{
    UniformStream u(seed);
    std::vector<Vec> states;
    for (int i = 0; i < n; ++i) states.push_back(cycle.state_at(u.next() * cycle.period()));
    return History::constant(std::move(states));
}

struct PulseExperimentOptions {
    double horizon = 0.0;
    double step = 0.01;
    double expected_period = 0.0;
    double tol_fraction = 0.05;
    ClassifyOptions classify;
    IntegrateOptions integrate;
};

struct PulseExperimentResult {
    ClusterVerdict before;
    ClusterVerdict after;
    SimulationResult simulation;
};

/// Classify the state before the pulse window and after it, from one continuous run.
inline PulseExperimentResult perturbation_experiment(const NetworkSpec& spec, const History& history,
                                                     const InputPulse& pulse, const PulseExperimentOptions& opt)
{
    if (!(pulse.t_begin >= 0.0 && pulse.t_end >= pulse.t_begin && pulse.t_end < opt.horizon))
        throw InvalidArgument("perturbation_experiment: pulse window must lie inside the horizon");
    IntegrateOptions io = opt.integrate;
    io.pulses.push_back(pulse);
    PulseExperimentResult r;
    r.simulation = integrate(spec, history, opt.horizon, opt.step, io);
    r.before = classify_clusters(r.simulation.raster.window(0.0, pulse.t_begin), opt.expected_period, opt.tol_fraction, opt.classify);
    r.after = classify_clusters(r.simulation.raster.window(pulse.t_end, r.simulation.final_time), opt.expected_period,
                                opt.tol_fraction, opt.classify);
    return r;
}

} // namespace clustersync
