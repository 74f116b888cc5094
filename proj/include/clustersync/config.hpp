#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "clustersync/cluster_catalog.hpp"
#include "clustersync/errors.hpp"
#include "clustersync/oscillator.hpp"
#include "clustersync/spectrum.hpp"
#include "clustersync/topology.hpp"

namespace clustersync {

struct OscillatorConfig {
    std::string model = "morris_lecar";
    MorrisLecarParams morris_lecar;
    std::optional<double> e_syn;
};

struct ReductionConfig {
    std::size_t sample_count = 4096;
    std::size_t grid_size = 512;
    std::size_t order = 20;
    double transient = 200.0;
    double guess_period = 25.0;
    std::vector<double> guess_state{0.0, 0.0};
    double tol = 1e-10;
};

struct TopologyConfig {
    std::string form = "distance-weighted";
    int N = 0;
    std::vector<double> weights;
    double w1 = 1.0;
};

struct SolutionConfig {
    std::optional<int> q;
    std::optional<AlternatingVariant> alternating;
};

struct InteractionConfig {
    /// "compute", "printed-reference", "printed-reference-negated" or a path to a JSON/CSV file.
    std::string source = "compute";
    std::optional<double> period;
};

struct CouplingConfig {
    std::optional<double> epsilon;
    std::optional<double> g_syn;
    CouplingSign sign = CouplingSign::positive;
};

struct TauConfig {
    std::optional<double> value;
    std::optional<double> max;
    std::size_t grid = 400;
};

struct SimulationConfig {
    double horizon_periods = 100.0;
    double step = 0.01;
    double threshold = 0.0;
    double transient_fraction = 0.6;
    double tol_fraction = 0.05;
    /// "catalog", "constant" or "random-constant".
    std::string initial = "catalog";
    double jitter = 0.0;
    std::vector<std::vector<double>> constant_states;
    bool perturb_weights = false;
    bool perturb_delays = false;
    std::size_t snapshot_stride = 100;
};

struct PulseConfig {
    std::vector<int> targets;
    double amplitude = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct ExperimentConfig {
    std::string command;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    OscillatorConfig oscillator;
    ReductionConfig reduction;
    TopologyConfig topology;
    SolutionConfig solution;
    InteractionConfig interaction;
    CouplingConfig coupling;
    TauConfig tau;
    SimulationConfig simulation;
    std::optional<PulseConfig> pulse;
};

namespace detail {

/// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const nlohmann::json& raw(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback)
    {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number()) throw SchemaError(field(key), "expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const std::string& key)
    {
        if (!has(key)) return std::nullopt;
        return number(key, 0.0);
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback)
    {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number_integer()) throw SchemaError(field(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    std::size_t count(const std::string& key, std::size_t fallback)
    {
        const auto v = integer(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw SchemaError(field(key), "must be non-negative");
        return static_cast<std::size_t>(v);
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw SchemaError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_string()) throw SchemaError(field(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback)
    {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_array()) throw SchemaError(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw SchemaError(field(key), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    Section child(const std::string& key)
    {
        seen_.insert(key);
        return Section(j_.at(key), field(key));
    }

    void finish() const
    {
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw SchemaError(field(key), "unknown key");
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace detail

inline const std::vector<std::string>& known_commands()
{
    static const std::vector<std::string> c{"reduce", "catalog", "stability", "sweep", "simulate", "perturb", "reproduce-table"};
    return c;
}

/// Strict parse: unknown keys, wrong types and out-of-range values raise SchemaError naming the field.
inline ExperimentConfig parse_config(const nlohmann::json& doc)
{
    ExperimentConfig c;
    detail::Section root(doc, "");
    c.command = root.text("command", "");
    if (!c.command.empty() && std::find(known_commands().begin(), known_commands().end(), c.command) == known_commands().end())
        throw SchemaError("command", "unknown command '" + c.command + "'");
    const auto seed = root.integer("seed", 1);
    if (seed < 0) throw SchemaError("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.output_dir = root.text("output_dir", c.output_dir);

    if (root.has("oscillator")) {
        auto s = root.child("oscillator");
        c.oscillator.model = s.text("model", c.oscillator.model);
        if (c.oscillator.model != "morris_lecar" && c.oscillator.model != "stuart_landau")
            throw SchemaError(s.field("model"), "expected \"morris_lecar\" or \"stuart_landau\"");
        c.oscillator.e_syn = s.optional_number("e_syn");
        if (s.has("params")) {
            auto p = s.child("params");
            auto& m = c.oscillator.morris_lecar;
            m.v_ca = p.number("v_ca", m.v_ca);
            m.v_k = p.number("v_k", m.v_k);
            m.v_l = p.number("v_l", m.v_l);
            m.g_k = p.number("g_k", m.g_k);
            m.g_l = p.number("g_l", m.g_l);
            m.phi = p.number("phi", m.phi);
            m.nu1 = p.number("nu1", m.nu1);
            m.nu2 = p.number("nu2", m.nu2);
            m.nu3 = p.number("nu3", m.nu3);
            m.nu4 = p.number("nu4", m.nu4);
            m.g_ca = p.number("g_ca", m.g_ca);
            m.i_app = p.number("i_app", m.i_app);
            p.finish();
        }
        s.finish();
    }
    if (root.has("reduction")) {
        auto s = root.child("reduction");
        auto& r = c.reduction;
        r.sample_count = s.count("sample_count", r.sample_count);
        r.grid_size = s.count("grid_size", r.grid_size);
        r.order = s.count("order", r.order);
        r.transient = s.number("transient", r.transient);
        r.guess_period = s.number("guess_period", r.guess_period);
        r.guess_state = s.numbers("guess_state", r.guess_state);
        r.tol = s.number("tol", r.tol);
        if (r.sample_count < 16) throw SchemaError(s.field("sample_count"), "must be at least 16");
        if (r.grid_size < 3) throw SchemaError(s.field("grid_size"), "must be at least 3");
        if (!(r.guess_period > 0.0)) throw SchemaError(s.field("guess_period"), "must be positive");
        s.finish();
    }
    if (root.has("topology")) {
        auto s = root.child("topology");
        auto& t = c.topology;
        t.form = s.text("form", t.form);
        static const std::set<std::string> forms{"distance-weighted", "global-homogeneous", "nearest-neighbour", "circulant", "bidirectional"};
        if (!forms.count(t.form)) throw SchemaError(s.field("form"), "unknown topology form '" + t.form + "'");
        t.N = static_cast<int>(s.integer("N", t.N));
        t.weights = s.numbers("weights", t.weights);
        t.w1 = s.number("w1", t.w1);
        if ((t.form == "circulant" || t.form == "bidirectional") && t.weights.empty())
            throw SchemaError(s.field("weights"), "required for form '" + t.form + "'");
        if (!t.weights.empty()) {
            if (t.N != 0 && t.N != static_cast<int>(t.weights.size())) throw SchemaError(s.field("N"), "does not match the number of weights");
            t.N = static_cast<int>(t.weights.size());
        }
        if (t.N != 0 && t.N < 2) throw SchemaError(s.field("N"), "must be at least 2");
        s.finish();
    }
    if (root.has("solution")) {
        auto s = root.child("solution");
        if (s.has("q")) c.solution.q = static_cast<int>(s.integer("q", 0));
        if (s.has("alternating")) {
            const auto v = s.text("alternating", "A");
            if (v != "A" && v != "B") throw SchemaError(s.field("alternating"), "expected \"A\" or \"B\"");
            c.solution.alternating = v == "A" ? AlternatingVariant::A : AlternatingVariant::B;
        }
        if (c.solution.q && c.solution.alternating) throw SchemaError(s.field("alternating"), "give either q or alternating, not both");
        s.finish();
    }
    if (root.has("interaction")) {
        auto s = root.child("interaction");
        c.interaction.source = s.text("source", c.interaction.source);
        c.interaction.period = s.optional_number("period");
        if (c.interaction.source.empty()) throw SchemaError(s.field("source"), "must not be empty");
        s.finish();
    }
    if (root.has("coupling")) {
        auto s = root.child("coupling");
        c.coupling.epsilon = s.optional_number("epsilon");
        c.coupling.g_syn = s.optional_number("g_syn");
        if (c.coupling.epsilon && c.coupling.g_syn) throw SchemaError(s.field("g_syn"), "give either epsilon or g_syn, not both");
        const auto sign = s.text("sign", "positive");
        if (sign != "positive" && sign != "negative") throw SchemaError(s.field("sign"), "expected \"positive\" or \"negative\"");
        c.coupling.sign = sign == "positive" ? CouplingSign::positive : CouplingSign::negative;
        s.finish();
    }
    if (root.has("tau")) {
        auto s = root.child("tau");
        c.tau.value = s.optional_number("value");
        c.tau.max = s.optional_number("max");
        c.tau.grid = s.count("grid", c.tau.grid);
        if (c.tau.value && *c.tau.value < 0.0) throw SchemaError(s.field("value"), "must be non-negative");
        if (c.tau.max && !(*c.tau.max > 0.0)) throw SchemaError(s.field("max"), "range must be non-empty");
        if (c.tau.grid < 2) throw SchemaError(s.field("grid"), "must be at least 2");
        s.finish();
    }
    if (root.has("simulation")) {
        auto s = root.child("simulation");
        auto& m = c.simulation;
        m.horizon_periods = s.number("horizon_periods", m.horizon_periods);
        m.step = s.number("step", m.step);
        m.threshold = s.number("threshold", m.threshold);
        m.transient_fraction = s.number("transient_fraction", m.transient_fraction);
        m.tol_fraction = s.number("tol_fraction", m.tol_fraction);
        m.initial = s.text("initial", m.initial);
        m.jitter = s.number("jitter", m.jitter);
        m.perturb_weights = s.boolean("perturb_weights", m.perturb_weights);
        m.perturb_delays = s.boolean("perturb_delays", m.perturb_delays);
        m.snapshot_stride = s.count("snapshot_stride", m.snapshot_stride);
        if (s.has("constant_states")) {
            const auto& v = s.raw("constant_states");
            if (!v.is_array()) throw SchemaError(s.field("constant_states"), "expected an array of state arrays");
            for (const auto& row : v) {
                if (!row.is_array()) throw SchemaError(s.field("constant_states"), "expected an array of state arrays");
                std::vector<double> st;
                for (const auto& e : row) {
                    if (!e.is_number()) throw SchemaError(s.field("constant_states"), "expected numbers");
                    st.push_back(e.get<double>());
                }
                m.constant_states.push_back(std::move(st));
            }
        }
        if (m.initial != "catalog" && m.initial != "constant" && m.initial != "random-constant")
            throw SchemaError(s.field("initial"), "expected \"catalog\", \"constant\" or \"random-constant\"");
        if (m.initial == "constant" && m.constant_states.empty())
            throw SchemaError(s.field("constant_states"), "required when initial is \"constant\"");
        if (!(m.horizon_periods > 0.0)) throw SchemaError(s.field("horizon_periods"), "must be positive");
        if (!(m.step > 0.0)) throw SchemaError(s.field("step"), "must be positive");
        if (!(m.transient_fraction >= 0.0 && m.transient_fraction < 1.0))
            throw SchemaError(s.field("transient_fraction"), "must lie in [0, 1)");
        if (!(m.tol_fraction > 0.0 && m.tol_fraction < 0.5)) throw SchemaError(s.field("tol_fraction"), "must lie in (0, 0.5)");
        s.finish();
    }
    if (root.has("pulse")) {
        auto s = root.child("pulse");
        PulseConfig p;
        if (!s.has("targets")) throw SchemaError(s.field("targets"), "required");
        for (double t : s.numbers("targets", {})) {
            if (t != std::floor(t) || t < 1) throw SchemaError(s.field("targets"), "expected 1-based oscillator indices");
            p.targets.push_back(static_cast<int>(t));
        }
        if (!s.has("amplitude")) throw SchemaError(s.field("amplitude"), "required");
        p.amplitude = s.number("amplitude", 0.0);
        if (!s.has("window")) throw SchemaError(s.field("window"), "required");
        const auto w = s.numbers("window", {});
        if (w.size() != 2 || !(w[1] >= w[0]) || w[0] < 0.0) throw SchemaError(s.field("window"), "expected [t0, t1] with 0 <= t0 <= t1");
        p.t_begin = w[0];
        p.t_end = w[1];
        c.pulse = p;
        s.finish();
    }
    root.finish();
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("<document>", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline OscillatorSystem make_oscillator(const OscillatorConfig& c)
{
    if (c.model == "stuart_landau") return stuart_landau();
    if (!c.e_syn) throw SchemaError("oscillator.e_syn", "required for the Morris-Lecar synapse");
    return morris_lecar(c.morris_lecar, SynapseParams{*c.e_syn});
}

inline CouplingTopology make_topology(const TopologyConfig& t)
{
    if (t.N == 0) throw SchemaError("topology.N", "required");
    if (t.N < 2) throw SchemaError("topology.N", "must be at least 2");
    if (t.form == "distance-weighted") return CouplingTopology::distance_weighted(t.N);
    if (t.form == "global-homogeneous") return CouplingTopology::global_homogeneous(t.N);
    if (t.form == "nearest-neighbour") return CouplingTopology::nearest_neighbour(t.N, t.w1);
    if (t.form == "bidirectional") return CouplingTopology::bidirectional(t.weights);
    return CouplingTopology::circulant(t.weights);
}

/// epsilon directly, or g_syn / (N - 1).
inline double coupling_strength(const CouplingConfig& c, int n)
{
    if (c.epsilon) return *c.epsilon;
    if (c.g_syn) return *c.g_syn / static_cast<double>(n - 1);
    throw SchemaError("coupling.epsilon", "required (or give coupling.g_syn)");
}

} // namespace clustersync
