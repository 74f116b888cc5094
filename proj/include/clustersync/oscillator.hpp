#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "clustersync/errors.hpp"

namespace clustersync {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A single uncoupled oscillator dX/dt = F(X) together with its pairwise coupling G(X_i, X_j).
struct OscillatorSystem {
    std::string name;
    int dim = 0;
    /// Component used for section placement and spike detection.
    int voltage_index = 0;
    /// Component that receives an injected current.
    int input_index = 0;
    std::function<void(std::span<const double> x, std::span<double> dx)> rhs;
    std::function<void(std::span<const double> x, Eigen::Ref<Mat> jac)> jacobian;
    std::function<void(std::span<const double> self, std::span<const double> other, std::span<double> out)> coupling;
    std::map<std::string, double> parameters;

    Vec f(const Vec& x) const
    {
        Vec out(dim);
        rhs({x.data(), static_cast<std::size_t>(dim)}, {out.data(), static_cast<std::size_t>(dim)});
        return out;
    }

    Mat df(const Vec& x) const
    {
        Mat out(dim, dim);
        jacobian({x.data(), static_cast<std::size_t>(dim)}, out);
        return out;
    }

    Vec g(const Vec& self, const Vec& other) const
    {
        Vec out(dim);
        coupling({self.data(), static_cast<std::size_t>(dim)}, {other.data(), static_cast<std::size_t>(dim)},
                 {out.data(), static_cast<std::size_t>(dim)});
        return out;
    }
};

struct MorrisLecarParams {
    double v_ca = 1.0;
    double v_k = -0.7;
    double v_l = -0.5;
    double g_k = 2.0;
    double g_l = 0.5;
    double phi = 1.0 / 3.0;
    double nu1 = -0.01;
    double nu2 = 0.15;
    double nu3 = 0.1;
    double nu4 = 0.145;
    double g_ca = 1.0;
    double i_app = 0.09;
};

/// Synaptic reversal potential; deliberately has no default.
struct SynapseParams {
    double e_syn;
};

inline double synaptic_gate(double v) { return 0.5 * (1.0 + std::tanh(10.0 * v)); }

inline OscillatorSystem morris_lecar(const MorrisLecarParams& p, SynapseParams syn)
{
    OscillatorSystem sys;
    sys.name = "morris_lecar";
    sys.dim = 2;
    sys.voltage_index = 0;
    sys.input_index = 0;
    sys.parameters = {{"v_ca", p.v_ca}, {"v_k", p.v_k},   {"v_l", p.v_l},   {"g_k", p.g_k},
                      {"g_l", p.g_l},   {"phi", p.phi},   {"nu1", p.nu1},   {"nu2", p.nu2},
                      {"nu3", p.nu3},   {"nu4", p.nu4},   {"g_ca", p.g_ca}, {"i_app", p.i_app},
                      {"e_syn", syn.e_syn}};
    sys.rhs = [p](std::span<const double> x, std::span<double> dx) {
        const double v = x[0], w = x[1];
        const double m_inf = 0.5 * (1.0 + std::tanh((v - p.nu1) / p.nu2));
        const double w_inf = 0.5 * (1.0 + std::tanh((v - p.nu3) / p.nu4));
        const double lambda = std::cosh((v - p.nu3) / (2.0 * p.nu4));
        dx[0] = p.i_app - p.g_ca * m_inf * (v - p.v_ca) - p.g_k * w * (v - p.v_k) - p.g_l * (v - p.v_l);
        dx[1] = p.phi * lambda * (w_inf - w);
    };
    sys.jacobian = [p](std::span<const double> x, Eigen::Ref<Mat> j) {
        const double v = x[0], w = x[1];
        const double tm = std::tanh((v - p.nu1) / p.nu2);
        const double tw = std::tanh((v - p.nu3) / p.nu4);
        const double m_inf = 0.5 * (1.0 + tm);
        const double w_inf = 0.5 * (1.0 + tw);
        const double dm = 0.5 * (1.0 - tm * tm) / p.nu2;
        const double dw_inf = 0.5 * (1.0 - tw * tw) / p.nu4;
        const double arg = (v - p.nu3) / (2.0 * p.nu4);
        const double lambda = std::cosh(arg);
        const double dlambda = std::sinh(arg) / (2.0 * p.nu4);
        j(0, 0) = -p.g_ca * (dm * (v - p.v_ca) + m_inf) - p.g_k * w - p.g_l;
        j(0, 1) = -p.g_k * (v - p.v_k);
        j(1, 0) = p.phi * (dlambda * (w_inf - w) + lambda * dw_inf);
        j(1, 1) = -p.phi * lambda;
    };
    const double e_syn = syn.e_syn;
    sys.coupling = [e_syn](std::span<const double> self, std::span<const double> other, std::span<double> out) {
        out[0] = -synaptic_gate(other[0]) * (self[0] - e_syn);
        out[1] = 0.0;
    };
    return sys;
}

/// Planar oscillator with a circular unit-radius limit cycle of period 2pi and diffusive coupling.
inline OscillatorSystem stuart_landau()
{
    OscillatorSystem sys;
    sys.name = "stuart_landau";
    sys.dim = 2;
    sys.rhs = [](std::span<const double> x, std::span<double> dx) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        dx[0] = x[0] - x[1] - x[0] * r2;
        dx[1] = x[0] + x[1] - x[1] * r2;
    };
    sys.jacobian = [](std::span<const double> x, Eigen::Ref<Mat> j) {
        const double a = x[0], b = x[1];
        j(0, 0) = 1.0 - 3.0 * a * a - b * b;
        j(0, 1) = -1.0 - 2.0 * a * b;
        j(1, 0) = 1.0 - 2.0 * a * b;
        j(1, 1) = 1.0 - a * a - 3.0 * b * b;
    };
    sys.coupling = [](std::span<const double> self, std::span<const double> other, std::span<double> out) {
        out[0] = other[0] - self[0];
        out[1] = other[1] - self[1];
    };
    return sys;
}

/// Max relative error between the analytic Jacobian and a central difference estimate at x.
inline double jacobian_error(const OscillatorSystem& sys, const Vec& x, double h = 1e-6)
{
    const Mat analytic = sys.df(x);
    double worst = 0.0;
    for (int c = 0; c < sys.dim; ++c) {
        Vec xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const Vec col = (sys.f(xp) - sys.f(xm)) / (2.0 * h);
        for (int r = 0; r < sys.dim; ++r) {
            const double scale = std::max(1.0, std::abs(analytic(r, c)));
            worst = std::max(worst, std::abs(col[r] - analytic(r, c)) / scale);
        }
    }
    return worst;
}

template <class Rhs>
Vec rk4_step(const Rhs& f, const Vec& y, double h)
{
    const Vec k1 = f(y);
    const Vec k2 = f(y + 0.5 * h * k1);
    const Vec k3 = f(y + 0.5 * h * k2);
    const Vec k4 = f(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace clustersync
