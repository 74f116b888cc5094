#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/errors.hpp"
#include "clustersync/fourier_series.hpp"
#include "clustersync/topology.hpp"

namespace clustersync {

using Complex = std::complex<double>;

struct Spectrum {
    std::vector<Complex> eigenvalues;
    std::optional<std::size_t> zero_mode_index;
    double max_nonzero_real = -std::numeric_limits<double>::infinity();
    /// Set when no eigenvalue was small enough to be taken as the structural zero.
    bool anomaly = false;
    /// Multiplicity of each entry when the spectrum is reported in compressed form; empty means all ones.
    std::vector<int> multiplicities;

    std::vector<Complex> expanded() const
    {
        if (multiplicities.empty()) return eigenvalues;
        std::vector<Complex> out;
        for (std::size_t i = 0; i < eigenvalues.size(); ++i)
            out.insert(out.end(), static_cast<std::size_t>(multiplicities[i]), eigenvalues[i]);
        return out;
    }
};

namespace detail {

inline void finish_with_zero(Spectrum& s, std::size_t zero)
{
    s.zero_mode_index = zero;
    s.max_nonzero_real = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        const int mult = s.multiplicities.empty() ? 1 : s.multiplicities[i];
        if (i == zero && mult <= 1) continue;
        s.max_nonzero_real = std::max(s.max_nonzero_real, s.eigenvalues[i].real());
    }
}

/// Designate the smallest-modulus eigenvalue as structural if it is below 1e-8.
inline void designate_zero(Spectrum& s)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.eigenvalues.size(); ++i)
        if (std::abs(s.eigenvalues[i]) < std::abs(s.eigenvalues[best])) best = i;
    if (s.eigenvalues.empty() || std::abs(s.eigenvalues[best]) >= 1e-8) {
        s.anomaly = true;
        s.zero_mode_index.reset();
        s.max_nonzero_real = -std::numeric_limits<double>::infinity();
        for (const auto& l : s.eigenvalues) s.max_nonzero_real = std::max(s.max_nonzero_real, l.real());
        return;
    }
    finish_with_zero(s, best);
}

inline std::vector<Complex> eigenvalues_of(const Eigen::MatrixXd& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed to converge");
    std::vector<Complex> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    return out;
}

} // namespace detail

/// Precomputed roots of unity for repeated circulant evaluations at one N.
class CirculantKernel {
public:
    explicit CirculantKernel(int n) : n_(n), cos_(static_cast<std::size_t>(n)), sin_(static_cast<std::size_t>(n))
    {
        for (int m = 0; m < n; ++m) {
            const double a = kTwoPi * static_cast<double>(m) / static_cast<double>(n);
            cos_[static_cast<std::size_t>(m)] = std::cos(a);
            sin_[static_cast<std::size_t>(m)] = std::sin(a);
        }
        cos_[0] = 1.0;
        sin_[0] = 0.0;
    }

    int size() const noexcept { return n_; }

    /// c_k = w_k H'(k psi - eta) for k = 0..N-1 (c_0 = 0).
    template <class Series>
    std::vector<double> coefficients(const Series& h, const CouplingTopology& w, int q, double eta) const
    {
        std::vector<double> c(static_cast<std::size_t>(n_), 0.0);
        const auto& row = w.weights();
        for (int k = 1; k < n_; ++k) {
            const double wk = row[static_cast<std::size_t>(k)];
            if (wk == 0.0) continue;
            const long r = (static_cast<long>(k) * q) % n_;
            c[static_cast<std::size_t>(k)] = wk * h.derivative(kTwoPi * static_cast<double>(r) / n_ - eta);
        }
        return c;
    }

    /// lambda_j = -sum_k c_k (1 - exp(2 pi i k j / N)).
    std::vector<Complex> eigenvalues(const std::vector<double>& c) const
    {
        std::vector<Complex> out(static_cast<std::size_t>(n_));
        out[0] = Complex(0.0, 0.0);
        for (int j = 1; j < n_; ++j) {
            double re = 0.0, im = 0.0;
            for (int k = 1; k < n_; ++k) {
                const double ck = c[static_cast<std::size_t>(k)];
                if (ck == 0.0) continue;
                const auto m = static_cast<std::size_t>((static_cast<long>(k) * j) % n_);
                re -= ck * (1.0 - cos_[m]);
                im += ck * sin_[m];
            }
            out[static_cast<std::size_t>(j)] = Complex(re, im);
        }
        return out;
    }

    double max_nonzero_real(const std::vector<double>& c) const
    {
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 1; j < n_; ++j) {
            double re = 0.0;
            for (int k = 1; k < n_; ++k) {
                const double ck = c[static_cast<std::size_t>(k)];
                if (ck == 0.0) continue;
                re -= ck * (1.0 - cos_[static_cast<std::size_t>((static_cast<long>(k) * j) % n_)]);
            }
            best = std::max(best, re);
        }
        return best;
    }

private:
    int n_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

template <class Series>
Spectrum circulant_spectrum(const Series& h, const CouplingTopology& w, PhaseRatio psi, double eta)
{
    if (!w.is_circulant()) throw InvalidArgument("circulant_spectrum: topology is not circulant; use dense_spectrum");
    if (psi.N != w.size()) throw InvalidArgument("circulant_spectrum: phase ratio denominator must equal N");
    const CirculantKernel kernel(w.size());
    Spectrum s;
    s.eigenvalues = kernel.eigenvalues(kernel.coefficients(h, w, psi.q, eta));
    detail::finish_with_zero(s, 0);
    return s;
}

/// Global homogeneous coupling, n-cluster state: compressed spectrum {0, lambda_0^(n) x (N-n), lambda_j^(n)}.
template <class Series>
Spectrum homogeneous_spectrum(const Series& h, int N, int n, double eta)
{
    if (N < 2 || n < 1 || N % n != 0) throw InvalidArgument("homogeneous_spectrum: n must divide N");
    const double scale = static_cast<double>(N) / static_cast<double>(n);
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = h.derivative(kTwoPi * k / n - eta);

    Spectrum s;
    s.eigenvalues.push_back(Complex(0.0, 0.0));
    s.multiplicities.push_back(1);
    if (N - n > 0) {
        double sum = 0.0;
        for (double v : d) sum += v;
        s.eigenvalues.push_back(Complex(-scale * sum, 0.0));
        s.multiplicities.push_back(N - n);
    }
    for (int j = 1; j < n; ++j) {
        Complex acc(0.0, 0.0);
        for (int k = 0; k < n; ++k) {
            const double a = kTwoPi * static_cast<double>((static_cast<long>(k) * j) % n) / n;
            acc += d[static_cast<std::size_t>(k)] * (1.0 - std::polar(1.0, a));
        }
        s.eigenvalues.push_back(-scale * acc);
        s.multiplicities.push_back(1);
    }
    detail::finish_with_zero(s, 0);
    return s;
}

/// Rows alternate alpha and beta, each shifted one place to the right: L_ij = row_i[(j - i) mod N].
template <class Series>
Eigen::MatrixXd alternating_jacobian(const Series& h, const CouplingTopology& w, AlternatingVariant v, double eta)
{
    const auto cert = alternating_exists(w);
    if (!cert.exists) throw InvalidArgument("alternating_jacobian: existence condition N = 4p with balanced odd weights fails");
    const int N = w.size(), p = cert.p;
    const double a = h.derivative(-eta), b = h.derivative(std::numbers::pi - eta), d = b - a;
    auto wk = [&](int k) { return k < N ? w.weight(k) : 0.0; };
    auto s1 = [&](int lo) { double s = 0.0; for (int j = lo; j < p; ++j) s += wk(4 * j + 1); return s; };
    auto s3 = [&](int lo) { double s = 0.0; for (int j = lo; j < p; ++j) s += wk(4 * j + 3); return s; };

    std::vector<double> alpha(static_cast<std::size_t>(N)), beta(static_cast<std::size_t>(N));
    double w4 = 0.0, w2 = 0.0, w3 = 0.0, w1 = 0.0;
    for (int k = 0; k < p; ++k) {
        if (k >= 1) w4 += wk(4 * k);
        w1 += wk(4 * k + 1);
        w2 += wk(4 * k + 2);
        w3 += wk(4 * k + 3);
    }
    alpha[0] = -a * (w1 + w4) - b * (w2 + w3);
    beta[0] = -a * (w3 + w4) - b * (w1 + w2);
    for (int k = 1; k < N; ++k) {
        const int s = k / 4, r = k % 4;
        const double odd_tail = s1(s + 1) - s3(s);
        const double even_tail = (r == 0) ? s1(s) - s3(s) : s1(s + 1) - s3(s + 1);
        switch (r) {
        case 1:
            alpha[k] = wk(k) * b + d * odd_tail;
            beta[k] = wk(k) * a - d * odd_tail;
            break;
        case 2:
            alpha[k] = wk(k) * b + d * odd_tail;
            beta[k] = wk(k) * b - d * odd_tail;
            break;
        case 3:
            alpha[k] = wk(k) * a + d * even_tail;
            beta[k] = wk(k) * b - d * even_tail;
            break;
        default:
            alpha[k] = wk(k) * a + d * even_tail;
            beta[k] = wk(k) * a - d * even_tail;
            break;
        }
    }
    Eigen::MatrixXd l(N, N);
    for (int i = 0; i < N; ++i) {
        const bool first = (i % 2 == 0) == (v == AlternatingVariant::A);
        const auto& row = first ? alpha : beta;
        for (int j = 0; j < N; ++j) l(i, j) = row[static_cast<std::size_t>(((j - i) % N + N) % N)];
    }
    return l;
}

template <class Series>
Spectrum alternating_spectrum(const Series& h, const CouplingTopology& w, AlternatingVariant v, double eta)
{
    Spectrum s;
    s.eigenvalues = detail::eigenvalues_of(alternating_jacobian(h, w, v, eta));
    detail::designate_zero(s);
    return s;
}

/// J_ij = W_ij H'(theta_j - theta_i - eta_ij), J_ii = -sum_{j != i} J_ij.
template <class Series>
Eigen::MatrixXd phase_jacobian(const Series& h, const Eigen::MatrixXd& w, const std::vector<double>& phases,
                               const Eigen::MatrixXd& eta)
{
    const Eigen::Index n = w.rows();
    if (w.cols() != n || static_cast<Eigen::Index>(phases.size()) != n || eta.rows() != n || eta.cols() != n)
        throw InvalidArgument("phase_jacobian: dimension mismatch");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        double diag = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            if (c == r || w(r, c) == 0.0) continue;
            const double v = w(r, c) * h.derivative(phases[static_cast<std::size_t>(c)] - phases[static_cast<std::size_t>(r)] - eta(r, c));
            j(r, c) = v;
            diag -= v;
        }
        j(r, r) = diag;
    }
    return j;
}

template <class Series>
Spectrum dense_spectrum(const Series& h, const Eigen::MatrixXd& w, const std::vector<double>& phases,
                        const Eigen::MatrixXd& eta)
{
    for (Eigen::Index i = 0; i < w.rows() && i < w.cols(); ++i)
        if (w(i, i) != 0.0) throw InvalidArgument("dense_spectrum: W must have a zero diagonal");
    Spectrum s;
    s.eigenvalues = detail::eigenvalues_of(phase_jacobian(h, w, phases, eta));
    detail::designate_zero(s);
    return s;
}

template <class Series>
Spectrum dense_spectrum(const Series& h, const Eigen::MatrixXd& w, const std::vector<double>& phases, double eta)
{
    return dense_spectrum(h, w, phases, Eigen::MatrixXd::Constant(w.rows(), w.cols(), eta));
}

/// Right-hand side of the phase-difference system for circulant weights.
template <class Series>
std::vector<double> phase_difference_field(const Series& h, const CouplingTopology& w, const std::vector<double>& phi,
                                           double eta)
{
    const int N = w.size();
    if (static_cast<int>(phi.size()) != N) throw InvalidArgument("phase_difference_field: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
        double s_here = 0.0, s_next = 0.0;
        for (int k = 1; k < N; ++k) {
            s_here += phi[static_cast<std::size_t>((i + k - 1) % N)];
            s_next += phi[static_cast<std::size_t>((i + k) % N)];
            const double wk = w.weight(k);
            if (wk != 0.0) out[static_cast<std::size_t>(i)] += wk * (h(s_next - eta) - h(s_here - eta));
        }
    }
    return out;
}

enum class CouplingSign { positive = 1, negative = -1 };
enum class Stability { stable, unstable, marginal };

inline std::string to_string(CouplingSign s) { return s == CouplingSign::positive ? "positive" : "negative"; }
inline std::string to_string(Stability s)
{
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
    }
    return "unknown";
}

/// Stable iff every non-structural eigenvalue times the coupling sign has real part below -margin.
inline Stability classify(const Spectrum& s, CouplingSign sign, double margin = 1e-9)
{
    const double sg = static_cast<double>(static_cast<int>(sign));
    bool marginal = false;
    bool unstable = false;
    bool any = false;
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        const int mult = s.multiplicities.empty() ? 1 : s.multiplicities[i];
        if (s.zero_mode_index && i == *s.zero_mode_index && mult <= 1) continue;
        any = true;
        const double re = sg * s.eigenvalues[i].real();
        if (std::abs(re) <= margin) marginal = true;
        else if (re > 0.0) unstable = true;
    }
    if (!any) return Stability::marginal;
    if (unstable) return Stability::unstable;
    if (marginal) return Stability::marginal;
    return Stability::stable;
}

/// Phase-model spectrum of any catalogued solution under a circulant topology.
template <class Series>
Spectrum spectrum_for(const Series& h, const CouplingTopology& w, const ClusterSolution& sol, double eta)
{
    if (sol.N != w.size()) throw InvalidArgument("spectrum_for: solution size differs from topology size");
    if (sol.is_alternating()) return alternating_spectrum(h, w, *sol.alternating, eta);
    if (!w.is_circulant()) return dense_spectrum(h, w.matrix(), phases_of(sol), eta);
    return circulant_spectrum(h, w, sol.psi(), eta);
}

/// Largest distance between optimally paired eigenvalues, using greedy nearest matching.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::vector<bool> used(b.size(), false);
    std::sort(a.begin(), a.end(), [](Complex x, Complex y) { return std::abs(x) > std::abs(y); });
    for (const auto& x : a) {
        std::size_t best = b.size();
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double dd = std::abs(x - b[j]);
            if (dd < bd) {
                bd = dd;
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, bd);
    }
    return worst;
}

} // namespace clustersync
