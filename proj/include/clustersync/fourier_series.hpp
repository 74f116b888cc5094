#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clustersync/errors.hpp"

namespace clustersync {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle into [0, 2pi).
inline double wrap_angle(double theta)
{
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

/// Signed distance between two angles, in (-pi, pi].
inline double angle_distance(double a, double b)
{
    return std::remainder(a - b, kTwoPi);
}

struct PhaseSample {
    double theta = 0.0;
    double h = 0.0;
};

/// H(theta) = a0 + sum_{k=1..K} (a_k cos k theta + b_k sin k theta)
class FourierSeries {
public:
    FourierSeries() = default;

    FourierSeries(double a0, std::vector<double> a, std::vector<double> b)
        : a0_(a0), a_(std::move(a)), b_(std::move(b))
    {
        if (a_.size() != b_.size())
            throw InvalidArgument("Fourier series: cosine and sine coefficient counts differ");
        if (a_.empty()) throw InvalidArgument("Fourier series: truncation order must be at least 1");
        for (double c : a_)
            if (!std::isfinite(c)) throw InvalidArgument("Fourier series: non-finite coefficient");
        for (double c : b_)
            if (!std::isfinite(c)) throw InvalidArgument("Fourier series: non-finite coefficient");
        if (!std::isfinite(a0_)) throw InvalidArgument("Fourier series: non-finite coefficient");
    }

    /// Build from a combined list a = [a0, a1, ...], b = [b0, b1, ...]; b0 is ignored.
    static FourierSeries from_tables(std::span<const double> a, std::span<const double> b)
    {
        if (a.empty() || a.size() != b.size())
            throw InvalidArgument("Fourier series: coefficient tables must be non-empty and equal length");
        return FourierSeries(a[0], std::vector<double>(a.begin() + 1, a.end()),
                             std::vector<double>(b.begin() + 1, b.end()));
    }

    double a0() const noexcept { return a0_; }
    std::span<const double> a() const noexcept { return a_; }
    std::span<const double> b() const noexcept { return b_; }
    std::size_t order() const noexcept { return a_.size(); }

    double operator()(double theta) const
    {
        double sum = a0_;
        const double c1 = std::cos(theta), s1 = std::sin(theta);
        double ck = c1, sk = s1;
        for (std::size_t k = 0; k < a_.size(); ++k) {
            sum += a_[k] * ck + b_[k] * sk;
            const double cn = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = cn;
        }
        return sum;
    }

    double derivative(double theta) const
    {
        double sum = 0.0;
        const double c1 = std::cos(theta), s1 = std::sin(theta);
        double ck = c1, sk = s1;
        for (std::size_t k = 0; k < a_.size(); ++k) {
            const double kk = static_cast<double>(k + 1);
            sum += kk * (b_[k] * ck - a_[k] * sk);
            const double cn = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = cn;
        }
        return sum;
    }

    FourierSeries negated() const
    {
        FourierSeries out = *this;
        out.a0_ = -a0_;
        for (double& c : out.a_) c = -c;
        for (double& c : out.b_) c = -c;
        return out;
    }

    FourierSeries truncated(std::size_t order) const
    {
        const std::size_t k = std::min(std::max<std::size_t>(order, 1), a_.size());
        return FourierSeries(a0_, std::vector<double>(a_.begin(), a_.begin() + k),
                             std::vector<double>(b_.begin(), b_.begin() + k));
    }

    /// Largest coefficient difference against another series, padding the shorter one with zeros.
    double max_coefficient_difference(const FourierSeries& other) const
    {
        double d = std::abs(a0_ - other.a0_);
        const std::size_t n = std::max(order(), other.order());
        for (std::size_t k = 0; k < n; ++k) {
            const double a1 = k < a_.size() ? a_[k] : 0.0, a2 = k < other.a_.size() ? other.a_[k] : 0.0;
            const double b1 = k < b_.size() ? b_[k] : 0.0, b2 = k < other.b_.size() ? other.b_[k] : 0.0;
            d = std::max({d, std::abs(a1 - a2), std::abs(b1 - b2)});
        }
        return d;
    }

private:
    double a0_ = 0.0;
    std::vector<double> a_;
    std::vector<double> b_;
};

inline double eval(const FourierSeries& h, double theta) { return h(theta); }
inline double eval_derivative(const FourierSeries& h, double theta) { return h.derivative(theta); }

struct FourierFit {
    FourierSeries series;
    double residual_rms = 0.0;
};

/// Least-squares projection of uniformly spaced samples on [0, 2pi) onto K harmonics.
inline FourierFit fit(std::span<const PhaseSample> samples, std::size_t order)
{
    const std::size_t m = samples.size();
    if (order < 1) throw InvalidArgument("fit: truncation order must be at least 1");
    if (m < 2 * order + 1)
        throw InsufficientSamples("fit: " + std::to_string(m) + " samples cannot determine " +
                                  std::to_string(order) + " harmonics (need at least " +
                                  std::to_string(2 * order + 1) + ")");
    const double step = kTwoPi / static_cast<double>(m);
    const double theta0 = samples[0].theta;
    for (std::size_t j = 0; j < m; ++j) {
        if (!std::isfinite(samples[j].h) || !std::isfinite(samples[j].theta))
            throw InvalidArgument("fit: non-finite sample");
        const double expected = theta0 + step * static_cast<double>(j);
        if (std::abs(samples[j].theta - expected) > 1e-9 * kTwoPi)
            throw NonUniformGrid("fit: samples must be uniformly spaced over one period in increasing order");
    }

    double a0 = 0.0;
    for (const auto& s : samples) a0 += s.h;
    a0 /= static_cast<double>(m);

    std::vector<double> a(order, 0.0), b(order, 0.0);
    for (std::size_t k = 1; k <= order; ++k) {
        double sa = 0.0, sb = 0.0;
        for (const auto& s : samples) {
            const double arg = static_cast<double>(k) * s.theta;
            sa += s.h * std::cos(arg);
            sb += s.h * std::sin(arg);
        }
        double scale = 2.0 / static_cast<double>(m);
        // The Nyquist harmonic of an even grid has no sine part and half the cosine weight.
        if (2 * k == m) {
            scale = 1.0 / static_cast<double>(m);
            sb = 0.0;
        }
        a[k - 1] = scale * sa;
        b[k - 1] = scale * sb;
    }

    FourierFit out{FourierSeries(a0, std::move(a), std::move(b)), 0.0};
    double ss = 0.0;
    for (const auto& s : samples) {
        const double r = s.h - out.series(s.theta);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(m));
    return out;
}

} // namespace clustersync
