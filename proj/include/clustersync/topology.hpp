#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clustersync/errors.hpp"

namespace clustersync {

enum class TopologyForm { general_circulant, bidirectional, global_homogeneous, nearest_neighbour, dense };

inline std::string to_string(TopologyForm f)
{
    switch (f) {
    case TopologyForm::general_circulant: return "general-circulant";
    case TopologyForm::bidirectional: return "bidirectional";
    case TopologyForm::global_homogeneous: return "global-homogeneous";
    case TopologyForm::nearest_neighbour: return "nearest-neighbour";
    case TopologyForm::dense: return "dense";
    }
    return "unknown";
}

/// Coupling matrix W with W_ij = w_{(j - i) mod N}, or an arbitrary dense matrix.
class CouplingTopology {
public:
    static CouplingTopology circulant(std::vector<double> first_row)
    {
        validate_row(first_row);
        CouplingTopology t;
        t.weights_ = std::move(first_row);
        t.form_ = t.row_is_symmetric() ? TopologyForm::bidirectional : TopologyForm::general_circulant;
        return t;
    }

    static CouplingTopology bidirectional(std::vector<double> first_row)
    {
        validate_row(first_row);
        CouplingTopology t;
        t.weights_ = std::move(first_row);
        if (!t.row_is_symmetric())
            throw InvalidArgument("bidirectional topology requires w_k == w_{N-k} for all k");
        t.form_ = TopologyForm::bidirectional;
        return t;
    }

    /// circ(0, 1, 1/2, 1/3, ..., 1/3, 1/2, 1): weight decays with ring distance.
    static CouplingTopology distance_weighted(int n)
    {
        if (n < 2) throw InvalidArgument("topology size must be at least 2");
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        for (int k = 1; k < n; ++k) row[static_cast<std::size_t>(k)] = 1.0 / static_cast<double>(std::min(k, n - k));
        return bidirectional(std::move(row));
    }

    /// circ(0, 1, 1, ..., 1): all-to-all coupling.
    static CouplingTopology global_homogeneous(int n)
    {
        if (n < 2) throw InvalidArgument("topology size must be at least 2");
        std::vector<double> row(static_cast<std::size_t>(n), 1.0);
        row[0] = 0.0;
        CouplingTopology t = bidirectional(std::move(row));
        t.form_ = TopologyForm::global_homogeneous;
        return t;
    }

    static CouplingTopology nearest_neighbour(int n, double w1 = 1.0)
    {
        if (n < 2) throw InvalidArgument("topology size must be at least 2");
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        row[1] = w1;
        row[static_cast<std::size_t>(n - 1)] = w1;
        CouplingTopology t = bidirectional(std::move(row));
        t.form_ = TopologyForm::nearest_neighbour;
        t.radius_ = 1;
        return t;
    }

    /// Arbitrary square matrix with zero diagonal, e.g. a perturbed circulant network.
    static CouplingTopology dense(Eigen::MatrixXd w)
    {
        if (w.rows() != w.cols() || w.rows() < 1) throw InvalidArgument("dense topology must be square and non-empty");
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            if (w(i, i) != 0.0) throw InvalidArgument("dense topology must have a zero diagonal");
        if (!w.allFinite()) throw InvalidArgument("dense topology has non-finite entries");
        CouplingTopology t;
        t.form_ = TopologyForm::dense;
        t.dense_ = std::move(w);
        return t;
    }

    int size() const noexcept
    {
        return form_ == TopologyForm::dense ? static_cast<int>(dense_->rows()) : static_cast<int>(weights_.size());
    }
    TopologyForm form() const noexcept { return form_; }
    bool is_circulant() const noexcept { return form_ != TopologyForm::dense; }

    const std::vector<double>& weights() const
    {
        if (!is_circulant()) throw InvalidArgument("topology is not circulant; use the dense matrix");
        return weights_;
    }

    /// w_k with k taken modulo N.
    double weight(long k) const
    {
        const long n = static_cast<long>(weights().size());
        return weights_[static_cast<std::size_t>(((k % n) + n) % n)];
    }

    Eigen::MatrixXd matrix() const
    {
        if (!is_circulant()) return *dense_;
        const int n = size();
        Eigen::MatrixXd w(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) w(i, j) = weight(j - i);
        return w;
    }

    /// Largest r with w_k > 0 for all k <= r (counting ring distance), if the weights vanish beyond r.
    std::optional<int> connectivity_radius() const
    {
        if (radius_) return radius_;
        if (!is_circulant()) return std::nullopt;
        const int n = size();
        int r = 0;
        while (r + 1 <= n / 2 && weight(r + 1) > 0.0 && weight(n - r - 1) > 0.0) ++r;
        for (int k = r + 1; k <= n - r - 1; ++k)
            if (weight(k) != 0.0) return std::nullopt;
        return r;
    }

private:
    static void validate_row(const std::vector<double>& row)
    {
        if (row.size() < 2) throw InvalidArgument("circulant topology needs N >= 2 weights");
        if (row[0] != 0.0) throw InvalidArgument("circulant topology requires w_0 = 0 (no self coupling)");
        for (double w : row)
            if (!std::isfinite(w)) throw InvalidArgument("circulant topology has non-finite weights");
    }

    bool row_is_symmetric() const
    {
        const std::size_t n = weights_.size();
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(weights_[k] - weights_[n - k]) > 1e-14 * (1.0 + std::abs(weights_[k]))) return false;
        return true;
    }

    TopologyForm form_ = TopologyForm::general_circulant;
    std::vector<double> weights_;
    std::optional<Eigen::MatrixXd> dense_;
    std::optional<int> radius_;
};

} // namespace clustersync
