#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/cluster_detect.hpp"
#include "clustersync/dde.hpp"
#include "clustersync/fourier_series.hpp"
#include "clustersync/phase_reduction.hpp"
#include "clustersync/spectrum.hpp"
#include "clustersync/sweep.hpp"

namespace clustersync {

using nlohmann::json;

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json to_json(const FourierSeries& s)
{
    return json{{"a0", s.a0()},
                {"a", std::vector<double>(s.a().begin(), s.a().end())},
                {"b", std::vector<double>(s.b().begin(), s.b().end())}};
}

/// Accepts {"a0": x, "a": [...], "b": [...]} with a and b of equal length.
inline FourierSeries fourier_from_json(const json& j)
{
    if (!j.is_object()) throw SchemaError("H", "expected an object with a0, a, b");
    for (const auto& [key, _] : j.items())
        if (key != "a0" && key != "a" && key != "b" && key != "period" && key != "residual_rms")
            throw SchemaError("H." + key, "unknown key");
    if (!j.contains("a0") || !j.at("a0").is_number()) throw SchemaError("H.a0", "required number");
    if (!j.contains("a") || !j.at("a").is_array()) throw SchemaError("H.a", "required array");
    if (!j.contains("b") || !j.at("b").is_array()) throw SchemaError("H.b", "required array");
    const auto a = j.at("a").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (a.size() != b.size()) throw SchemaError("H.b", "must have the same length as H.a");
    return FourierSeries(j.at("a0").get<double>(), a, b);
}

inline json to_json(const ClusterSolution& s)
{
    json j{{"N", s.N}, {"n", s.n}, {"members", s.members}, {"ordering", s.ordering}, {"label", s.label()}};
    if (s.alternating) {
        j["kind"] = "alternating";
        j["variant"] = to_string(*s.alternating);
    } else {
        j["kind"] = "symmetric";
        j["psi"] = json{{"q", s.q}, {"N", s.N}, {"radians", s.psi().radians()}};
        j["partner_q"] = partner_q(s);
    }
    j["phases"] = phases_of(s);
    if (s.rearrangement_family) j["rearrangement_family"] = true;
    if (s.omega_correction) j["omega_correction"] = *s.omega_correction;
    return j;
}

inline json to_json(const Spectrum& s)
{
    json ev = json::array();
    const auto all = s.expanded();
    for (const auto& l : all) ev.push_back(json::array({l.real(), l.imag()}));
    json j{{"eigenvalues", ev}, {"anomaly", s.anomaly}};
    j["max_nonzero_real"] = std::isfinite(s.max_nonzero_real) ? json(s.max_nonzero_real) : json(nullptr);
    if (s.zero_mode_index) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < *s.zero_mode_index; ++i) idx += s.multiplicities.empty() ? 1 : static_cast<std::size_t>(s.multiplicities[i]);
        j["zero_mode_index"] = idx;
    } else {
        j["zero_mode_index"] = nullptr;
    }
    return j;
}

inline json to_json(const StabilityInterval& s)
{
    json iv = json::array();
    for (const auto& t : s.intervals) iv.push_back(json::array({t.lower, t.upper}));
    return json{{"solution", to_json(s.solution)}, {"epsilon_sign", to_string(s.sign)}, {"tau_max", s.tau_max},
                {"omega", s.omega}, {"tau_intervals", iv}};
}

inline json to_json(const ClusterVerdict& v)
{
    json j{{"n", v.n},
           {"partition", v.partition},
           {"ordering", v.ordering},
           {"relative_phases", v.relative_phases},
           {"cluster_phases", v.cluster_phases},
           {"period", v.period},
           {"residual", v.residual},
           {"label", v.label()}};
    j["match"] = v.match ? to_json(*v.match) : json("unclassified");
    return j;
}

inline json to_json(const LimitCycle& c)
{
    return json{{"period", c.period()},
                {"omega", c.omega()},
                {"sample_count", c.sample_count()},
                {"closure_error", c.closure_error()},
                {"section_iterations", c.section_iterations()},
                {"initial_state", std::vector<double>(c.orbit()[0].data(), c.orbit()[0].data() + c.dim())}};
}

inline std::string raster_csv(const SpikeRaster& r)
{
    std::ostringstream os;
    os << "oscillator_index,spike_time\n";
    for (std::size_t i = 0; i < r.times.size(); ++i)
        for (double t : r.times[i]) os << (i + 1) << ',' << format_double(t) << '\n';
    return os.str();
}

inline std::string trajectory_csv(const Trajectory& tr, int n, int dim)
{
    std::ostringstream os;
    os << "time";
    for (int i = 1; i <= n; ++i)
        for (int c = 0; c < dim; ++c) os << ",x" << i << '_' << c;
    os << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << format_double(tr.times[k]);
        for (Eigen::Index c = 0; c < tr.states[k].size(); ++c) os << ',' << format_double(tr.states[k][c]);
        os << '\n';
    }
    return os.str();
}

inline std::string samples_csv(const std::vector<PhaseSample>& s, const FourierSeries* fit = nullptr)
{
    std::ostringstream os;
    os << "theta,h" << (fit ? ",h_fit,h_prime_fit" : "") << '\n';
    for (const auto& p : s) {
        os << format_double(p.theta) << ',' << format_double(p.h);
        if (fit) os << ',' << format_double((*fit)(p.theta)) << ',' << format_double(fit->derivative(p.theta));
        os << '\n';
    }
    return os.str();
}

/// Parse "theta,h" rows (header optional) into samples.
inline std::vector<PhaseSample> samples_from_csv(const std::string& text)
{
    std::vector<PhaseSample> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' || line[0] == '.')) continue;
        std::istringstream ls(line);
        std::string a, b;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        out.push_back({std::stod(a), std::stod(b)});
    }
    return out;
}

inline std::string profile_csv(const std::vector<SweepPoint>& pts)
{
    std::ostringstream os;
    os << "tau,max_nonzero_real,min_nonzero_real,stability\n";
    for (const auto& p : pts)
        os << format_double(p.tau) << ',' << format_double(p.max_nonzero_real) << ',' << format_double(p.min_nonzero_real)
           << ',' << to_string(p.stability) << '\n';
    return os.str();
}

inline std::string intervals_csv(const std::vector<StabilityInterval>& all)
{
    std::ostringstream os;
    os << "N,solution,n,epsilon_sign,tau_lower,tau_upper\n";
    for (const auto& s : all)
        for (const auto& t : s.intervals)
            os << s.solution.N << ',' << s.solution.label() << ',' << s.solution.n << ',' << to_string(s.sign) << ','
               << format_double(t.lower) << ',' << format_double(t.upper) << '\n';
    return os.str();
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

} // namespace clustersync
