#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustersync/errors.hpp"
#include "clustersync/hermite.hpp"
#include "clustersync/oscillator.hpp"
#include "clustersync/phase_reduction.hpp"
#include "clustersync/topology.hpp"

namespace clustersync {

/// dX_i/dt = F(X_i) + eps * sum_j W_ij G(X_i(t), X_j(t - tau_ij)).
struct NetworkSpec {
    OscillatorSystem oscillator;
    CouplingTopology topology = CouplingTopology::global_homogeneous(2);
    double epsilon = 0.0;
    double tau = 0.0;
    std::optional<Mat> weight_override;
    std::optional<Mat> delay_override;

    int size() const { return topology.size(); }

    Mat weights() const { return weight_override ? *weight_override : topology.matrix(); }

    Mat delays() const
    {
        if (delay_override) return *delay_override;
        Mat d = Mat::Constant(size(), size(), tau);
        d.diagonal().setZero();
        return d;
    }

    double max_delay() const
    {
        const Mat d = delays();
        double m = 0.0;
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            for (Eigen::Index j = 0; j < d.cols(); ++j)
                if (i != j) m = std::max(m, d(i, j));
        return m;
    }
};

/// Solution values for t <= 0.
class History {
public:
    using StateFn = std::function<Vec(int, double)>;

    History(int size, StateFn state, StateFn derivative, std::string kind)
        : size_(size), state_(std::move(state)), derivative_(std::move(derivative)), kind_(std::move(kind)) {}

    static History constant(std::vector<Vec> states)
    {
        const int n = static_cast<int>(states.size());
        auto shared = std::make_shared<std::vector<Vec>>(std::move(states));
        return History(
            n, [shared](int i, double) { return (*shared)[static_cast<std::size_t>(i)]; },
            [shared](int i, double) { return Vec::Zero((*shared)[static_cast<std::size_t>(i)].size()).eval(); },
            "constant");
    }

    /// Oscillator i follows Xhat(t + theta_i / Omega) on the uncoupled cycle.
    static History on_cycle(const OscillatorSystem& sys, const LimitCycle& cycle, std::vector<double> phases)
    {
        const int n = static_cast<int>(phases.size());
        auto c = std::make_shared<LimitCycle>(cycle);
        auto ph = std::make_shared<std::vector<double>>(std::move(phases));
        auto f = sys.rhs;
        const int dim = sys.dim;
        auto state = [c, ph](int i, double t) { return c->state_at(t + (*ph)[static_cast<std::size_t>(i)] / c->omega()); };
        auto deriv = [c, ph, f, dim](int i, double t) {
            const Vec x = c->state_at(t + (*ph)[static_cast<std::size_t>(i)] / c->omega());
            Vec dx(dim);
            f({x.data(), static_cast<std::size_t>(dim)}, {dx.data(), static_cast<std::size_t>(dim)});
            return dx;
        };
        return History(n, state, deriv, "cycle");
    }

    int size() const noexcept { return size_; }
    Vec state(int i, double t) const { return state_(i, t); }
    Vec derivative(int i, double t) const { return derivative_(i, t); }
    const std::string& kind() const noexcept { return kind_; }

private:
    int size_;
    StateFn state_;
    StateFn derivative_;
    std::string kind_;
};

/// Extra current added to the input component of the target oscillators (1-based) during [t_begin, t_end].
struct InputPulse {
    std::vector<int> targets;
    double amplitude = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct SpikeRaster {
    std::vector<std::vector<double>> times;
    double horizon = 0.0;
    double threshold = 0.0;

    int size() const noexcept { return static_cast<int>(times.size()); }

    /// Spikes with t_begin <= t < t_end, shifted so the window starts at zero.
    SpikeRaster window(double t_begin, double t_end) const
    {
        SpikeRaster out;
        out.threshold = threshold;
        out.horizon = t_end - t_begin;
        for (const auto& train : times) {
            std::vector<double> kept;
            for (double t : train)
                if (t >= t_begin && t < t_end) kept.push_back(t - t_begin);
            out.times.push_back(std::move(kept));
        }
        return out;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
};

struct IntegrateOptions {
    double threshold = 0.0;
    /// Record every k-th step into the trajectory; 0 records nothing.
    std::size_t snapshot_stride = 0;
    std::vector<InputPulse> pulses;
    /// Called after every spike of oscillator 1; returning true ends the run early.
    std::function<bool(const SpikeRaster&)> monitor;
};

struct SimulationResult {
    SpikeRaster raster;
    Trajectory trajectory;
    Vec final_state;
    double final_time = 0.0;
    double step = 0.0;
    long steps = 0;
};

/// Largest step not exceeding `requested` that divides tau into an integer number of steps.
inline double aligned_step(double tau, double requested)
{
    if (!(requested > 0.0)) throw InvalidArgument("step must be positive");
    if (tau <= 0.0) return requested;
    const double m = std::ceil(tau / requested - 1e-9);
    return tau / m;
}

/// Fixed-step RK4 by the method of steps with cubic Hermite interpolation of delayed states.
inline SimulationResult integrate(const NetworkSpec& spec, const History& history, double horizon, double step,
                                  const IntegrateOptions& opt = {})
{
    const int N = spec.size();
    const int d = spec.oscillator.dim;
    const auto D = static_cast<std::size_t>(N * d);
    const auto ud = static_cast<std::size_t>(d);
    if (!(step > 0.0)) throw InvalidArgument("integrate: step must be positive");
    if (!(horizon > 0.0)) throw InvalidArgument("integrate: horizon must be positive");
    if (history.size() != N) throw InvalidArgument("integrate: history size differs from network size");
    const Mat w = spec.weights();
    const Mat tau = spec.delays();
    if (w.rows() != N || w.cols() != N || tau.rows() != N || tau.cols() != N)
        throw InvalidArgument("integrate: weight or delay matrix has the wrong dimension");

    struct Link {
        int source;
        double weight;
        double delay;
        double lag;
    };
    std::vector<std::vector<Link>> inputs(static_cast<std::size_t>(N));
    double max_lag = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (i == j || w(i, j) == 0.0 || spec.epsilon == 0.0) continue;
            const double dl = tau(i, j);
            if (dl < 0.0 || !std::isfinite(dl)) throw InvalidArgument("integrate: delays must be finite and non-negative");
            if (dl > 0.0 && dl < step * (1.0 - 1e-9))
                throw InvalidArgument("integrate: delay " + std::to_string(dl) + " is smaller than the step " + std::to_string(step));
            inputs[static_cast<std::size_t>(i)].push_back({j, w(i, j), dl, dl / step});
            max_lag = std::max(max_lag, dl / step);
        }

    const auto capacity = static_cast<std::size_t>(std::ceil(max_lag)) + 3;
    std::vector<double> ybuf(capacity * D), fbuf(capacity * D);

    std::vector<std::vector<char>> pulse_mask;
    for (const auto& p : opt.pulses) {
        std::vector<char> mask(static_cast<std::size_t>(N), 0);
        for (int t : p.targets) {
            if (t < 1 || t > N) throw InvalidArgument("integrate: pulse target out of range");
            mask[static_cast<std::size_t>(t - 1)] = 1;
        }
        pulse_mask.push_back(std::move(mask));
    }

    long n = 0;
    const double rounded = std::round(horizon / step);
    const long total = std::abs(horizon / step - rounded) < 1e-6 ? static_cast<long>(rounded)
                                                                  : static_cast<long>(std::ceil(horizon / step));

    std::vector<double> y(D), k1(D), k2(D), k3(D), k4(D), tmp(D), gbuf(ud), other(ud);
    for (int i = 0; i < N; ++i) {
        const Vec x0 = history.state(i, 0.0);
        if (x0.size() != d) throw InvalidArgument("integrate: history state has the wrong dimension");
        std::copy(x0.data(), x0.data() + d, y.begin() + static_cast<long>(i * d));
    }

    const auto& sys = spec.oscillator;
    auto delayed = [&](int j, double t, double stage_pos, double lag, double delay, const std::vector<double>& ystage) {
        if (delay == 0.0) {
            std::copy(ystage.begin() + static_cast<long>(j * d), ystage.begin() + static_cast<long>((j + 1) * d), other.begin());
            return;
        }
        const double s = t - delay;
        if (s <= 0.0) {
            const Vec hx = history.state(j, s);
            std::copy(hx.data(), hx.data() + d, other.begin());
            return;
        }
        const double pos = stage_pos - lag;
        auto k = static_cast<long>(std::floor(pos + 1e-9));
        double theta = pos - static_cast<double>(k);
        if (theta < 1e-9) theta = 0.0;
        if (k > n || (k == n && theta > 0.0) || n - k + 1 >= static_cast<long>(capacity))
            throw InsufficientHistory("integrate: delayed lookup outside the stored history");
        const double* y0 = &ybuf[(static_cast<std::size_t>(k) % capacity) * D + static_cast<std::size_t>(j * d)];
        if (theta == 0.0) {
            std::copy(y0, y0 + d, other.begin());
            return;
        }
        const double* f0 = &fbuf[(static_cast<std::size_t>(k) % capacity) * D + static_cast<std::size_t>(j * d)];
        const double* y1 = &ybuf[(static_cast<std::size_t>(k + 1) % capacity) * D + static_cast<std::size_t>(j * d)];
        const double* f1 = &fbuf[(static_cast<std::size_t>(k + 1) % capacity) * D + static_cast<std::size_t>(j * d)];
        const auto hw = hermite_weights(theta);
        for (int c = 0; c < d; ++c) other[static_cast<std::size_t>(c)] = hw[0] * y0[c] + hw[1] * step * f0[c] + hw[2] * y1[c] + hw[3] * step * f1[c];
    };

    auto rhs = [&](double t, double stage_pos, const std::vector<double>& ys, std::vector<double>& out) {
        for (int i = 0; i < N; ++i) {
            const std::span<const double> xi(ys.data() + i * d, ud);
            std::span<double> oi(out.data() + i * d, ud);
            sys.rhs(xi, oi);
            for (std::size_t p = 0; p < opt.pulses.size(); ++p)
                if (pulse_mask[p][static_cast<std::size_t>(i)] && t >= opt.pulses[p].t_begin && t <= opt.pulses[p].t_end)
                    oi[static_cast<std::size_t>(sys.input_index)] += opt.pulses[p].amplitude;
            for (const auto& link : inputs[static_cast<std::size_t>(i)]) {
                delayed(link.source, t, stage_pos, link.lag, link.delay, ys);
                sys.coupling(xi, other, gbuf);
                const double gain = spec.epsilon * link.weight;
                for (int c = 0; c < d; ++c) oi[static_cast<std::size_t>(c)] += gain * gbuf[static_cast<std::size_t>(c)];
            }
        }
    };

    SimulationResult res;
    res.step = step;
    res.raster.threshold = opt.threshold;
    res.raster.times.assign(static_cast<std::size_t>(N), {});
    const int vi = sys.voltage_index;
    auto snapshot = [&](double t) {
        res.trajectory.times.push_back(t);
        res.trajectory.states.push_back(Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(D)));
    };
    if (opt.snapshot_stride > 0) snapshot(0.0);
    std::size_t reference_seen = 0;

    for (n = 0; n < total; ++n) {
        const double t = static_cast<double>(n) * step;
        const double nd = static_cast<double>(n);
        std::copy(y.begin(), y.end(), ybuf.begin() + static_cast<long>((static_cast<std::size_t>(n) % capacity) * D));
        rhs(t, nd, y, k1);
        std::copy(k1.begin(), k1.end(), fbuf.begin() + static_cast<long>((static_cast<std::size_t>(n) % capacity) * D));
        for (std::size_t c = 0; c < D; ++c) tmp[c] = y[c] + 0.5 * step * k1[c];
        rhs(t + 0.5 * step, nd + 0.5, tmp, k2);
        for (std::size_t c = 0; c < D; ++c) tmp[c] = y[c] + 0.5 * step * k2[c];
        rhs(t + 0.5 * step, nd + 0.5, tmp, k3);
        for (std::size_t c = 0; c < D; ++c) tmp[c] = y[c] + step * k3[c];
        rhs(t + step, nd + 1.0, tmp, k4);
        bool finite = true;
        for (std::size_t c = 0; c < D; ++c) {
            tmp[c] = y[c] + (step / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            finite = finite && std::isfinite(tmp[c]);
        }
        if (!finite) throw NonFiniteState("integrate: state became non-finite at t = " + std::to_string(t + step));
        for (int i = 0; i < N; ++i) {
            const double v0 = y[static_cast<std::size_t>(i * d + vi)], v1 = tmp[static_cast<std::size_t>(i * d + vi)];
            if (v0 < opt.threshold && v1 >= opt.threshold)
                res.raster.times[static_cast<std::size_t>(i)].push_back(t + step * (opt.threshold - v0) / (v1 - v0));
        }
        const std::size_t ref_spikes = res.raster.times[0].size();
        y.swap(tmp);
        if (opt.snapshot_stride > 0 && (static_cast<std::size_t>(n + 1) % opt.snapshot_stride) == 0) snapshot(t + step);
        if (opt.monitor && ref_spikes > reference_seen) {
            reference_seen = ref_spikes;
            res.raster.horizon = t + step;
            if (opt.monitor(res.raster)) {
                ++n;
                break;
            }
        }
    }
    res.steps = n;
    res.final_time = static_cast<double>(n) * step;
    res.raster.horizon = res.final_time;
    res.final_state = Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(D));
    return res;
}

} // namespace clustersync
