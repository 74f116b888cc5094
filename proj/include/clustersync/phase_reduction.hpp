#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "clustersync/errors.hpp"
#include "clustersync/fourier_series.hpp"
#include "clustersync/hermite.hpp"
#include "clustersync/oscillator.hpp"

namespace clustersync {

struct LimitCycleOptions {
    double transient = 200.0;
    double search_step = 0.01;
    std::size_t sample_count = 4096;
    int max_iterations = 60;
    /// A return to the section must happen within this multiple of the guessed period.
    double max_return_factor = 4.0;
};

/// Periodic orbit sampled at t_m = m T / M, optionally with its adjoint Z.
class LimitCycle {
public:
    LimitCycle() = default;
    LimitCycle(double period, std::vector<Vec> orbit, std::vector<Vec> velocity)
        : period_(period), orbit_(std::move(orbit)), velocity_(std::move(velocity)) {}

    double period() const noexcept { return period_; }
    double omega() const noexcept { return kTwoPi / period_; }
    std::size_t sample_count() const noexcept { return orbit_.size(); }
    double dt() const noexcept { return period_ / static_cast<double>(orbit_.size()); }
    int dim() const noexcept { return orbit_.empty() ? 0 : static_cast<int>(orbit_[0].size()); }
    const std::vector<Vec>& orbit() const noexcept { return orbit_; }
    const std::vector<Vec>& velocity() const noexcept { return velocity_; }
    const std::vector<Vec>& adjoint() const noexcept { return adjoint_; }
    bool has_adjoint() const noexcept { return !adjoint_.empty(); }
    double closure_error() const noexcept { return closure_error_; }
    int section_iterations() const noexcept { return iterations_; }

    Vec state_at(double t) const { return interpolate(orbit_, velocity_, t); }

    Vec adjoint_at(double t) const
    {
        if (!has_adjoint()) throw InvalidArgument("limit cycle has no adjoint; call compute_adjoint first");
        return interpolate(adjoint_, adjoint_velocity_, t);
    }

    void set_adjoint(std::vector<Vec> z, std::vector<Vec> dz)
    {
        adjoint_ = std::move(z);
        adjoint_velocity_ = std::move(dz);
    }
    void set_diagnostics(double closure, int iterations)
    {
        closure_error_ = closure;
        iterations_ = iterations;
    }

private:
    Vec interpolate(const std::vector<Vec>& y, const std::vector<Vec>& dy, double t) const
    {
        const std::size_t m = y.size();
        const double h = dt();
        double u = std::fmod(t, period_);
        if (u < 0.0) u += period_;
        double pos = u / h;
        auto k = static_cast<std::size_t>(pos);
        if (k >= m) k = m - 1;
        const double s = pos - static_cast<double>(k);
        const std::size_t k1 = (k + 1) % m;
        const auto w = hermite_weights(s);
        return w[0] * y[k] + w[1] * h * dy[k] + w[2] * y[k1] + w[3] * h * dy[k1];
    }

    double period_ = 0.0;
    std::vector<Vec> orbit_;
    std::vector<Vec> velocity_;
    std::vector<Vec> adjoint_;
    std::vector<Vec> adjoint_velocity_;
    double closure_error_ = 0.0;
    int iterations_ = 0;
};

namespace detail {

inline bool all_finite(const Vec& x) { return x.allFinite(); }

struct SectionReturn {
    Vec state;
    double time;
};

inline SectionReturn return_to_section(const OscillatorSystem& sys, const Vec& x0, const Vec& anchor,
                                       const Vec& normal, double h, double guess_period,
                                       const LimitCycleOptions& opt)
{
    auto f = [&](const Vec& y) { return sys.f(y); };
    auto g = [&](const Vec& y) { return normal.dot(y - anchor); };
    Vec x = x0;
    double t = 0.0;
    double gx = g(x);
    const double t_min = 0.1 * guess_period;
    const double t_max = opt.max_return_factor * guess_period;
    while (t < t_max) {
        const Vec xn = rk4_step(f, x, h);
        if (!all_finite(xn)) throw NoConvergence("limit cycle search: trajectory became non-finite");
        const double gn = g(xn);
        if (t + h > t_min && gx < 0.0 && gn >= 0.0) {
            double delta = h * (-gx) / (gn - gx);
            Vec y = rk4_step(f, x, delta);
            for (int it = 0; it < 12; ++it) {
                const double r = g(y);
                const double slope = normal.dot(sys.f(y));
                if (slope == 0.0) break;
                const double step = r / slope;
                delta -= step;
                y = rk4_step(f, x, delta);
                if (std::abs(step) < 1e-15 * std::max(1.0, h)) break;
            }
            return {y, t + delta};
        }
        x = xn;
        gx = gn;
        t += h;
    }
    if (sys.f(x).norm() < 1e-8)
        throw FixedPointDetected("limit cycle search: trajectory converged to an equilibrium");
    throw NoConvergence("limit cycle search: no return to the section within " +
                        std::to_string(opt.max_return_factor) + " guessed periods");
}

} // namespace detail

/// Locate a stable periodic orbit by iterating the return map on a section through the max-voltage point.
inline LimitCycle find_limit_cycle(const OscillatorSystem& sys, const Vec& guess, double guess_period,
                                   double tol = 1e-10, const LimitCycleOptions& opt = {})
{
    if (guess.size() != sys.dim) throw InvalidArgument("find_limit_cycle: guess has wrong dimension");
    if (!(guess_period > 0.0)) throw InvalidArgument("find_limit_cycle: guess_period must be positive");
    if (opt.sample_count < 16) throw InvalidArgument("find_limit_cycle: sample_count must be at least 16");
    auto f = [&](const Vec& y) { return sys.f(y); };

    Vec x = guess;
    const double h0 = opt.search_step;
    const auto transient_steps = static_cast<long>(std::ceil(opt.transient / h0));
    for (long i = 0; i < transient_steps; ++i) {
        x = rk4_step(f, x, h0);
        if (!detail::all_finite(x)) throw NoConvergence("limit cycle search: transient became non-finite");
    }

    const int vi = sys.voltage_index;
    Vec peak = x;
    double vmax = x[vi], vmin = x[vi];
    const auto window_steps = static_cast<long>(std::ceil(3.0 * guess_period / h0));
    for (long i = 0; i < window_steps; ++i) {
        x = rk4_step(f, x, h0);
        if (!detail::all_finite(x)) throw NoConvergence("limit cycle search: trajectory became non-finite");
        if (x[vi] > vmax) {
            vmax = x[vi];
            peak = x;
        }
        vmin = std::min(vmin, x[vi]);
    }
    const Vec fp = sys.f(peak);
    if (vmax - vmin < 1e-6 * (1.0 + std::abs(vmax)) || fp.norm() < 1e-9)
        throw FixedPointDetected("limit cycle search: no oscillation after the transient");
    const Vec normal = fp / fp.norm();

    const std::size_t m = opt.sample_count;
    Vec x0 = peak;
    double period = std::numeric_limits<double>::quiet_NaN();
    bool refined = false;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        const double h = refined ? period / static_cast<double>(m) : h0;
        const auto ret = detail::return_to_section(sys, x0, peak, normal, h, guess_period, opt);
        const double dx = (ret.state - x0).lpNorm<Eigen::Infinity>() / (1.0 + x0.lpNorm<Eigen::Infinity>());
        const double dT = std::isnan(period) ? 1.0 : std::abs(ret.time - period) / ret.time;
        x0 = ret.state;
        const bool was_refined = refined;
        if (!refined && dx < std::max(tol, 1e-9)) refined = true;
        period = ret.time;
        if (was_refined && dx < tol && dT < tol) break;
    }
    if (iter >= opt.max_iterations)
        throw NoConvergence("limit cycle search: return map did not converge in " +
                            std::to_string(opt.max_iterations) + " iterations");

    const double h = period / static_cast<double>(m);
    std::vector<Vec> orbit(m), vel(m);
    Vec y = x0;
    for (std::size_t k = 0; k < m; ++k) {
        orbit[k] = y;
        vel[k] = sys.f(y);
        y = rk4_step(f, y, h);
    }
    const double closure = (y - x0).lpNorm<Eigen::Infinity>() / (1.0 + x0.lpNorm<Eigen::Infinity>());
    if (closure > 1e-8)
        throw NoConvergence("limit cycle search: sampled orbit does not close (error " + std::to_string(closure) + ")");
    LimitCycle cycle(period, std::move(orbit), std::move(vel));
    cycle.set_diagnostics(closure, iter + 1);
    return cycle;
}

struct AdjointOptions {
    int max_periods = 10;
    double tol = 1e-9;
};

/// Solve dZ/dt = -DF(Xhat)^T Z backwards in time, normalised so that (1/T) int Z.F dt = 1.
inline LimitCycle compute_adjoint(const OscillatorSystem& sys, LimitCycle cycle, const AdjointOptions& opt = {})
{
    const std::size_t m = cycle.sample_count();
    const int d = cycle.dim();
    if (m == 0) throw InvalidArgument("compute_adjoint: empty limit cycle");
    const double h = cycle.dt();

    std::vector<Mat> jt(m + 1), jmid(m);
    for (std::size_t k = 0; k < m; ++k) {
        jt[k] = sys.df(cycle.orbit()[k]);
        jmid[k] = sys.df(cycle.state_at((static_cast<double>(k) + 0.5) * h));
    }
    jt[m] = jt[0];

    // Reversed time s = T - t turns the adjoint equation into dZ/ds = J(T - s)^T Z.
    auto back_step = [&](const Mat& z, std::size_t k) -> Mat {
        const Mat k1 = jt[k + 1].transpose() * z;
        const Mat k2 = jmid[k].transpose() * (z + 0.5 * h * k1);
        const Mat k3 = jmid[k].transpose() * (z + 0.5 * h * k2);
        const Mat k4 = jt[k].transpose() * (z + h * k3);
        return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    Mat phi = Mat::Identity(d, d);
    for (std::size_t k = m; k-- > 0;) phi = back_step(phi, k);
    Eigen::EigenSolver<Mat> es(phi);
    int best = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(es.eigenvalues()[i] - 1.0) < std::abs(es.eigenvalues()[best] - 1.0)) best = i;
    Vec z_start = es.eigenvectors().col(best).real();
    if (z_start.norm() == 0.0) z_start = Vec::Ones(d);

    std::vector<Vec> z(m + 1);
    bool converged = false;
    for (int period = 0; period < opt.max_periods && !converged; ++period) {
        z[m] = z_start;
        for (std::size_t k = m; k-- > 0;) z[k] = back_step(Mat(z[k + 1]), k);
        double norm = 0.0;
        for (std::size_t k = 0; k < m; ++k) norm += z[k].dot(cycle.velocity()[k]);
        norm /= static_cast<double>(m);
        if (!std::isfinite(norm) || norm == 0.0) throw NoConvergence("compute_adjoint: degenerate normalisation");
        double scale = 0.0;
        for (auto& v : z) {
            v /= norm;
            scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
        }
        const double mismatch = (z[0] - z[m]).lpNorm<Eigen::Infinity>() / scale;
        converged = mismatch < opt.tol;
        z_start = z[0];
    }
    if (!converged)
        throw NoConvergence("compute_adjoint: backward iteration did not become periodic in " +
                            std::to_string(opt.max_periods) + " periods");

    z.pop_back();
    std::vector<Vec> dz(m);
    for (std::size_t k = 0; k < m; ++k) dz[k] = -(jt[k].transpose() * z[k]);
    cycle.set_adjoint(std::move(z), std::move(dz));
    return cycle;
}

/// (1/T) int Z.F dt on a grid refined by the given factor relative to the stored samples.
inline double adjoint_normalization(const OscillatorSystem& sys, const LimitCycle& cycle, int refinement = 1)
{
    const std::size_t n = cycle.sample_count() * static_cast<std::size_t>(std::max(1, refinement));
    const double h = cycle.period() / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = h * static_cast<double>(k);
        sum += cycle.adjoint_at(t).dot(sys.f(cycle.state_at(t)));
    }
    return sum / static_cast<double>(n);
}

/// Largest pointwise deviation of Z.F from its mean over the stored samples.
inline double adjoint_invariant_spread(const LimitCycle& cycle)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < cycle.sample_count(); ++k) {
        const double v = cycle.adjoint()[k].dot(cycle.velocity()[k]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

/// Sample H(theta) = (1/T) int Z(s).G(Xhat(s), Xhat(s + theta/Omega)) ds on a uniform phase grid.
inline std::vector<PhaseSample> compute_H(const OscillatorSystem& sys, const LimitCycle& cycle, std::size_t grid_size)
{
    if (!cycle.has_adjoint()) throw InvalidArgument("compute_H: limit cycle has no adjoint");
    if (grid_size < 64) throw InvalidArgument("compute_H: grid_size must be at least 64");
    const std::size_t m = cycle.sample_count();
    const int d = cycle.dim();
    const auto& orbit = cycle.orbit();
    const auto& z = cycle.adjoint();
    const bool aligned = m % grid_size == 0;
    std::vector<PhaseSample> out(grid_size);
    Vec gbuf(d);
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double shift = cycle.period() * static_cast<double>(j) / static_cast<double>(grid_size);
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const Vec other = aligned ? orbit[(k + j * (m / grid_size)) % m]
                                      : cycle.state_at(cycle.dt() * static_cast<double>(k) + shift);
            sys.coupling({orbit[k].data(), static_cast<std::size_t>(d)},
                         {other.data(), static_cast<std::size_t>(d)}, {gbuf.data(), static_cast<std::size_t>(d)});
            sum += z[k].dot(gbuf);
        }
        out[j] = {kTwoPi * static_cast<double>(j) / static_cast<double>(grid_size), sum / static_cast<double>(m)};
    }
    return out;
}

struct ReductionOptions {
    LimitCycleOptions cycle;
    AdjointOptions adjoint;
    double tol = 1e-10;
    std::size_t grid_size = 512;
    std::size_t order = 20;
};

struct PhaseModel {
    LimitCycle cycle;
    std::vector<PhaseSample> samples;
    FourierFit h;
};

inline PhaseModel reduce(const OscillatorSystem& sys, const Vec& guess, double guess_period,
                         const ReductionOptions& opt = {})
{
    PhaseModel pm;
    pm.cycle = compute_adjoint(sys, find_limit_cycle(sys, guess, guess_period, opt.tol, opt.cycle), opt.adjoint);
    pm.samples = compute_H(sys, pm.cycle, opt.grid_size);
    pm.h = fit(pm.samples, opt.order);
    return pm;
}

} // namespace clustersync
