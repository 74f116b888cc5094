#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/fourier_series.hpp"
#include "clustersync/published_intervals_data.hpp"
#include "clustersync/sweep.hpp"
#include "clustersync/topology.hpp"

namespace clustersync {

struct PublishedRow {
    int N = 0;
    int n = 0;
    std::vector<int> q;
    std::vector<TauInterval> intervals;
};

struct PublishedTable {
    std::string id;
    std::string topology;
    std::vector<PublishedRow> rows;
};

inline const nlohmann::json& published_document()
{
    static const nlohmann::json doc = nlohmann::json::parse(embedded::published_intervals_json);
    return doc;
}

inline double published_period() { return published_document().at("period").get<double>(); }

inline std::vector<std::string> published_table_ids()
{
    std::vector<std::string> ids;
    for (const auto& [key, _] : published_document().at("tables").items()) ids.push_back(key);
    return ids;
}

inline PublishedTable published_table(const std::string& id)
{
    const auto& tables = published_document().at("tables");
    if (!tables.contains(id)) throw InvalidArgument("unknown published table '" + id + "'");
    const auto& t = tables.at(id);
    PublishedTable out;
    out.id = id;
    out.topology = t.at("topology").get<std::string>();
    for (const auto& r : t.at("rows")) {
        PublishedRow row;
        row.N = r.at("N").get<int>();
        row.n = r.at("n").get<int>();
        row.q = r.at("q").get<std::vector<int>>();
        for (const auto& iv : r.at("intervals")) row.intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Topology named in the tables: "W1" is distance weighted, "W2" is all-to-all.
inline CouplingTopology table_topology(const std::string& name, int N)
{
    if (name == "W1") return CouplingTopology::distance_weighted(N);
    if (name == "W2") return CouplingTopology::global_homogeneous(N);
    throw InvalidArgument("unknown table topology '" + name + "'");
}

/// Printed nine-term interaction function coefficients, k = 0..9.
inline FourierSeries printed_reference_series()
{
    static const double a[] = {-2.0214064,    1.994447,     0.010604496,   -0.051657807, -0.029127343,
                               -0.01054942,   -0.002131111, 9.9814584e-05, 0.00015646126, -8.1846403e-05};
    static const double b[] = {0.0,          -0.93897837,  0.27575842,   0.042355601, 0.01801952,
                               0.010251001,  0.0046384884, 0.0013808256, 7.391713e-05, -0.00024995379};
    return FourierSeries::from_tables(a, b);
}

/// Largest endpoint difference between interval lists; infinite when the counts differ.
inline double interval_distance(const std::vector<TauInterval>& a, const std::vector<TauInterval>& b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max({d, std::abs(a[i].lower - b[i].lower), std::abs(a[i].upper - b[i].upper)});
    return d;
}

inline std::string format_intervals(const std::vector<TauInterval>& iv)
{
    if (iv.empty()) return "all unstable";
    std::string s;
    char buf[64];
    for (std::size_t i = 0; i < iv.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s(%.2f, %.2f)", i ? " U " : "", iv[i].lower, iv[i].upper);
        s += buf;
    }
    return s;
}

struct RowComparison {
    PublishedRow published;
    std::vector<StabilityInterval> computed;
    double max_endpoint_difference = 0.0;
    bool within(double tol) const { return max_endpoint_difference <= tol; }
};

/// Sweep every q listed in a published row and compare with the published intervals.
template <class Series>
RowComparison compare_row(const Series& h, const std::string& topology, const PublishedRow& row, double omega,
                          double tau_max, const SweepOptions& opt)
{
    RowComparison c;
    c.published = row;
    const auto w = table_topology(topology, row.N);
    for (int q : row.q) {
        const auto sol = symmetric_solution(row.N, q);
        if (sol.n != row.n) throw InvalidArgument("published row lists q inconsistent with n");
        c.computed.push_back(sweep_tau(h, w, sol, omega, tau_max, opt));
        c.max_endpoint_difference = std::max(c.max_endpoint_difference, interval_distance(c.computed.back().intervals, row.intervals));
    }
    return c;
}

} // namespace clustersync
