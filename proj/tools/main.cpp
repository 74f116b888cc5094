#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "clustersync/clustersync.hpp"

namespace fs = std::filesystem;
using namespace clustersync;
using nlohmann::json;

#ifndef CLUSTERSYNC_VERSION
#define CLUSTERSYNC_VERSION "0"
#endif

namespace {

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

/// Collects artifacts for the manifest.
struct Run {
    ExperimentConfig cfg;
    json resolved;
    fs::path dir;
    unsigned jobs = 1;
    json inputs = json::array();
    json outputs = json::array();

    void emit(const std::string& name, const std::string& content)
    {
        write_file((dir / name).string(), content);
        outputs.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }

    void emit_json(const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); }

    void input(const std::string& path)
    {
        inputs.push_back({{"path", path}, {"sha256", sha256_hex(read_file(path))}});
    }

    json metadata() const
    {
        return json{{"command", cfg.command}, {"seed", cfg.seed}, {"version", CLUSTERSYNC_VERSION}};
    }

    void finish()
    {
        json m{{"command", cfg.command}, {"seed", cfg.seed}, {"version", CLUSTERSYNC_VERSION},
               {"config", resolved}, {"inputs", inputs}, {"outputs", outputs}};
        write_file((dir / "manifest.json").string(), m.dump(2) + "\n");
    }
};

struct InteractionSource {
    FourierSeries h;
    double period = 0.0;
    std::string description;
    std::optional<PhaseModel> model;
    double omega() const { return kTwoPi / period; }
};

ReductionOptions reduction_options(const ReductionConfig& r)
{
    ReductionOptions o;
    o.cycle.sample_count = r.sample_count;
    o.cycle.transient = r.transient;
    o.grid_size = r.grid_size;
    o.order = r.order;
    o.tol = r.tol;
    return o;
}

Vec guess_state(const ReductionConfig& r, int dim)
{
    if (static_cast<int>(r.guess_state.size()) != dim)
        throw SchemaError("reduction.guess_state", "must have " + std::to_string(dim) + " components");
    return Eigen::Map<const Vec>(r.guess_state.data(), dim);
}

PhaseModel compute_model(const ExperimentConfig& cfg)
{
    const auto sys = make_oscillator(cfg.oscillator);
    return reduce(sys, guess_state(cfg.reduction, sys.dim), cfg.reduction.guess_period, reduction_options(cfg.reduction));
}

InteractionSource load_interaction(Run& run)
{
    const auto& cfg = run.cfg;
    InteractionSource s;
    const auto& src = cfg.interaction.source;
    if (src == "compute") {
        s.model = compute_model(cfg);
        s.h = s.model->h.series;
        s.period = s.model->cycle.period();
        s.description = "computed from the oscillator model";
    } else if (src == "printed-reference" || src == "printed-reference-negated") {
        s.h = src == "printed-reference" ? printed_reference_series() : printed_reference_series().negated();
        s.period = cfg.interaction.period.value_or(published_period());
        s.description = src;
    } else {
        if (!fs::exists(src)) throw SchemaError("interaction.source", "file '" + src + "' does not exist");
        run.input(src);
        const std::string text = read_file(src);
        std::optional<double> period = cfg.interaction.period;
        if (fs::path(src).extension() == ".csv") {
            s.h = fit(samples_from_csv(text), cfg.reduction.order).series;
        } else {
            const json j = json::parse(text);
            s.h = fourier_from_json(j);
            if (!period && j.contains("period")) period = j.at("period").get<double>();
        }
        if (!period) throw SchemaError("interaction.period", "required when the H file carries no period");
        s.period = *period;
        s.description = "file " + src;
    }
    if (!(s.period > 0.0)) throw SchemaError("interaction.period", "must be positive");
    return s;
}

std::vector<ClusterSolution> selected_solutions(const ExperimentConfig& cfg, const CouplingTopology& w)
{
    if (cfg.solution.alternating) {
        if (!alternating_exists(w).exists)
            throw InvalidArgument("the alternating 2-cluster state does not exist for this topology");
        return {alternating_solution(w.size(), *cfg.solution.alternating)};
    }
    if (cfg.solution.q) {
        auto s = symmetric_solution(w.size(), *cfg.solution.q);
        return {s};
    }
    auto all = enumerate_symmetric(w);
    for (auto& s : alternating_exists(w).solutions) all.push_back(s);
    return all;
}

int cmd_reduce(Run& run)
{
    const auto sys = make_oscillator(run.cfg.oscillator);
    const auto pm = compute_model(run.cfg);
    json cyc = to_json(pm.cycle);
    cyc["adjoint_normalization"] = adjoint_normalization(sys, pm.cycle);
    cyc["adjoint_invariant_spread"] = adjoint_invariant_spread(pm.cycle);
    cyc["metadata"] = run.metadata();
    run.emit_json("limit_cycle.json", cyc);
    json h = to_json(pm.h.series);
    h["period"] = pm.cycle.period();
    h["residual_rms"] = pm.h.residual_rms;
    run.emit_json("H.json", h);
    run.emit("H_samples.csv", samples_csv(pm.samples, &pm.h.series));
    std::ostringstream os;
    os << "t";
    for (int c = 0; c < sys.dim; ++c) os << ",x" << c;
    for (int c = 0; c < sys.dim; ++c) os << ",z" << c;
    os << '\n';
    for (std::size_t k = 0; k < pm.cycle.sample_count(); ++k) {
        os << format_double(pm.cycle.dt() * static_cast<double>(k));
        for (int c = 0; c < sys.dim; ++c) os << ',' << format_double(pm.cycle.orbit()[k][c]);
        for (int c = 0; c < sys.dim; ++c) os << ',' << format_double(pm.cycle.adjoint()[k][c]);
        os << '\n';
    }
    run.emit("orbit.csv", os.str());
    std::printf("period %.6f  omega %.6f  H fit residual %.2e\n", pm.cycle.period(), pm.cycle.omega(), pm.h.residual_rms);
    return 0;
}

int cmd_catalog(Run& run)
{
    const auto w = make_topology(run.cfg.topology);
    json sols = json::array();
    for (const auto& s : enumerate_symmetric(w)) sols.push_back(to_json(s));
    const auto cert = alternating_exists(w);
    json alt{{"exists", cert.exists}, {"p", cert.p}, {"sum_w_1_mod_4", cert.sum_1_mod_4}, {"sum_w_3_mod_4", cert.sum_3_mod_4}};
    json alts = json::array();
    for (const auto& s : cert.solutions) alts.push_back(to_json(s));
    alt["solutions"] = alts;
    json out{{"N", w.size()}, {"topology", to_string(w.form())}, {"weights", w.weights()}, {"solutions", sols},
             {"alternating", alt}, {"metadata", run.metadata()}};
    run.emit_json("catalog.json", out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

double tau_max_of(const ExperimentConfig& cfg, const InteractionSource& src) { return cfg.tau.max.value_or(src.period); }

int cmd_stability(Run& run)
{
    const auto src = load_interaction(run);
    const auto w = make_topology(run.cfg.topology);
    const auto sols = selected_solutions(run.cfg, w);
    SweepOptions opt;
    opt.grid = run.cfg.tau.grid;
    opt.sign = run.cfg.coupling.sign;
    const double tau_max = tau_max_of(run.cfg, src);
    const auto intervals = parallel_map<StabilityInterval>(sols.size(), run.jobs, [&](std::size_t i) {
        return sweep_tau(src.h, w, sols[i], src.omega(), tau_max, opt);
    });
    json iv = json::array();
    for (const auto& s : intervals) iv.push_back(to_json(s));
    json meta = run.metadata();
    meta["interaction"] = src.description;
    meta["period"] = src.period;
    run.emit_json("intervals.json", json{{"intervals", iv}, {"metadata", meta}});
    run.emit("intervals.csv", intervals_csv(intervals));
    if (run.cfg.tau.value) {
        const double eta = src.omega() * *run.cfg.tau.value;
        json specs = json::array();
        for (const auto& s : sols) {
            auto sp = spectrum_for(src.h, w, s, eta);
            json j = to_json(sp);
            j["solution"] = s.label();
            j["classification"] = to_string(classify(sp, run.cfg.coupling.sign));
            auto sc = s;
            sc.omega_correction = omega_correction(src.h, w, s, eta);
            j["omega_correction"] = *sc.omega_correction;
            specs.push_back(j);
        }
        run.emit_json("spectrum.json", json{{"tau", *run.cfg.tau.value}, {"eta", eta}, {"spectra", specs}, {"metadata", meta}});
    }
    for (const auto& s : intervals)
        std::printf("%-16s n=%-3d %s\n", s.solution.label().c_str(), s.solution.n, format_intervals(s.intervals).c_str());
    return 0;
}

int cmd_sweep(Run& run)
{
    const auto src = load_interaction(run);
    const auto w = make_topology(run.cfg.topology);
    const auto sols = selected_solutions(run.cfg, w);
    SweepOptions opt;
    opt.grid = run.cfg.tau.grid;
    opt.sign = run.cfg.coupling.sign;
    const double tau_max = tau_max_of(run.cfg, src);
    const auto profiles = parallel_map<std::vector<SweepPoint>>(sols.size(), run.jobs, [&](std::size_t i) {
        return sweep_profile(src.h, w, sols[i], src.omega(), tau_max, opt);
    });
    std::ostringstream os;
    os << "solution,tau,max_nonzero_real,min_nonzero_real,stability\n";
    for (std::size_t i = 0; i < sols.size(); ++i)
        for (const auto& p : profiles[i])
            os << sols[i].label() << ',' << format_double(p.tau) << ',' << format_double(p.max_nonzero_real) << ','
               << format_double(p.min_nonzero_real) << ',' << to_string(p.stability) << '\n';
    run.emit("sweep.csv", os.str());
    return 0;
}

struct PreparedSimulation {
    OscillatorSystem sys;
    LimitCycle cycle;
    NetworkSpec spec;
    std::optional<History> history;
    std::optional<ClusterSolution> solution;
    double step = 0.0;
    json meta;
};

PreparedSimulation prepare_simulation(Run& run)
{
    const auto& cfg = run.cfg;
    const auto& sim = cfg.simulation;
    PreparedSimulation p;
    p.sys = make_oscillator(cfg.oscillator);
    LimitCycleOptions lo;
    lo.sample_count = cfg.reduction.sample_count;
    lo.transient = cfg.reduction.transient;
    p.cycle = find_limit_cycle(p.sys, guess_state(cfg.reduction, p.sys.dim), cfg.reduction.guess_period, cfg.reduction.tol, lo);
    const auto w = make_topology(cfg.topology);
    if (!cfg.tau.value) throw SchemaError("tau.value", "required for simulations");
    p.spec = NetworkSpec{p.sys, w, coupling_strength(cfg.coupling, w.size()), *cfg.tau.value, std::nullopt, std::nullopt};
    if (cfg.coupling.sign == CouplingSign::negative) p.spec.epsilon = -p.spec.epsilon;
    p.meta = run.metadata();
    const int n = w.size();
    if (sim.perturb_weights || sim.perturb_delays) {
        const Mat m = sim.perturb_weights ? random_unit_matrix(n, cfg.seed) : Mat::Zero(n, n);
        const Mat s = sim.perturb_delays ? random_unit_matrix(n, cfg.seed + 1) : Mat::Zero(n, n);
        p.spec = apply_symmetry_breaking(p.spec, m, s);
        auto rows = [](const Mat& x) {
            json r = json::array();
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
                r.push_back(row);
            }
            return r;
        };
        p.meta["weight_perturbation"] = rows(m);
        p.meta["delay_perturbation"] = rows(s);
    }
    if (sim.initial == "catalog") {
        const auto sols = selected_solutions(cfg, w);
        if (!cfg.solution.q && !cfg.solution.alternating)
            throw SchemaError("solution.q", "required when simulation.initial is \"catalog\"");
        p.solution = sols.front();
        p.history = catalog_history(p.sys, p.cycle, *p.solution, sim.jitter, cfg.seed);
    } else if (sim.initial == "constant") {
        if (static_cast<int>(sim.constant_states.size()) != n)
            throw SchemaError("simulation.constant_states", "must list one state per oscillator");
        std::vector<Vec> st;
        for (const auto& s : sim.constant_states) {
            if (static_cast<int>(s.size()) != p.sys.dim) throw SchemaError("simulation.constant_states", "state has the wrong dimension");
            st.push_back(Eigen::Map<const Vec>(s.data(), p.sys.dim));
        }
        p.history = History::constant(std::move(st));
    } else {
        p.history = random_constant_history(p.cycle, n, cfg.seed);
    }
    p.step = p.spec.delay_override ? sim.step : aligned_step(p.spec.tau, sim.step);
    p.meta["step"] = p.step;
    p.meta["threshold"] = sim.threshold;
    p.meta["transient_fraction"] = sim.transient_fraction;
    p.meta["tol_fraction"] = sim.tol_fraction;
    p.meta["epsilon"] = p.spec.epsilon;
    p.meta["tau"] = p.spec.tau;
    p.meta["uncoupled_period"] = p.cycle.period();
    p.meta["horizon"] = sim.horizon_periods * p.cycle.period();
    p.meta["initial"] = sim.initial;
    p.meta["jitter"] = sim.jitter;
    return p;
}

int cmd_simulate(Run& run)
{
    auto p = prepare_simulation(run);
    const auto& sim = run.cfg.simulation;
    IntegrateOptions io;
    io.threshold = sim.threshold;
    io.snapshot_stride = sim.snapshot_stride;
    const auto res = integrate(p.spec, *p.history, sim.horizon_periods * p.cycle.period(), p.step, io);
    run.emit("raster.csv", raster_csv(res.raster));
    if (sim.snapshot_stride > 0) run.emit("trajectory.csv", trajectory_csv(res.trajectory, p.spec.size(), p.sys.dim));
    if (p.solution) {
        std::ostringstream os;
        os << "time,residual\n";
        for (const auto& [t, r] : residual_series(res.raster, *p.solution)) os << format_double(t) << ',' << format_double(r) << '\n';
        run.emit("residual.csv", os.str());
    }
    run.emit_json("metadata.json", p.meta);
    ClassifyOptions co;
    co.transient_fraction = sim.transient_fraction;
    const auto v = classify_clusters(res.raster, p.cycle.period(), sim.tol_fraction, co);
    json vj = to_json(v);
    vj["metadata"] = p.meta;
    run.emit_json("verdict.json", vj);
    std::printf("%s  residual %.4f  period %.4f  match %s\n", v.label().c_str(), v.residual, v.period,
                v.match ? v.match->label().c_str() : "unclassified");
    return 0;
}

int cmd_perturb(Run& run)
{
    if (!run.cfg.pulse) throw SchemaError("pulse", "required for the perturb command");
    auto p = prepare_simulation(run);
    const auto& sim = run.cfg.simulation;
    PulseExperimentOptions po;
    po.horizon = sim.horizon_periods * p.cycle.period();
    po.step = p.step;
    po.expected_period = p.cycle.period();
    po.tol_fraction = sim.tol_fraction;
    po.classify.transient_fraction = sim.transient_fraction;
    po.integrate.threshold = sim.threshold;
    po.integrate.snapshot_stride = sim.snapshot_stride;
    const InputPulse pulse{run.cfg.pulse->targets, run.cfg.pulse->amplitude, run.cfg.pulse->t_begin, run.cfg.pulse->t_end};
    const auto r = perturbation_experiment(p.spec, *p.history, pulse, po);
    run.emit("raster.csv", raster_csv(r.simulation.raster));
    if (sim.snapshot_stride > 0) run.emit("trajectory.csv", trajectory_csv(r.simulation.trajectory, p.spec.size(), p.sys.dim));
    p.meta["pulse"] = json{{"targets", pulse.targets}, {"amplitude", pulse.amplitude}, {"window", {pulse.t_begin, pulse.t_end}}};
    run.emit_json("metadata.json", p.meta);
    run.emit_json("verdicts.json", json{{"before", to_json(r.before)}, {"after", to_json(r.after)}, {"metadata", p.meta}});
    std::printf("before: %s\nafter:  %s\n", r.before.label().c_str(), r.after.label().c_str());
    return 0;
}

std::pair<int, int> parse_range(const std::string& s)
{
    const auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw SchemaError("N", "expected an integer or a range a..b");
    }
}

int cmd_reproduce(Run& run, const std::string& table_id, const std::string& n_range)
{
    std::vector<std::string> ids;
    if (table_id == "all") ids = published_table_ids();
    else ids = {table_id};
    for (const auto& id : ids) published_table(id);
    const auto src = load_interaction(run);
    SweepOptions opt;
    opt.grid = run.cfg.tau.grid;
    const double tau_max = tau_max_of(run.cfg, src);
    int lo = 0, hi = 1 << 30;
    if (!n_range.empty()) std::tie(lo, hi) = parse_range(n_range);

    struct Job {
        std::string table;
        std::string topology;
        PublishedRow row;
    };
    std::vector<Job> jobs;
    for (const auto& id : ids) {
        const auto t = published_table(id);
        for (const auto& r : t.rows)
            if (r.N >= lo && r.N <= hi) jobs.push_back({id, t.topology, r});
    }
    const auto results = parallel_map<RowComparison>(jobs.size(), run.jobs, [&](std::size_t i) {
        return compare_row(src.h, jobs[i].topology, jobs[i].row, src.omega(), tau_max, opt);
    });

    const double tol = 0.05;
    std::ostringstream os;
    os << "table,N,n,q,computed,published,max_endpoint_difference,within_tolerance\n";
    json rows = json::array();
    int matched = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& r = results[i];
        std::string qs;
        for (std::size_t k = 0; k < r.published.q.size(); ++k) qs += (k ? " " : "") + std::to_string(r.published.q[k]);
        const std::string computed = format_intervals(r.computed.front().intervals);
        const std::string published = format_intervals(r.published.intervals);
        const bool ok = r.within(tol);
        matched += ok ? 1 : 0;
        const std::string diff = std::isfinite(r.max_endpoint_difference) ? format_double(r.max_endpoint_difference) : "inf";
        os << jobs[i].table << ',' << r.published.N << ',' << r.published.n << ",\"" << qs << "\",\"" << computed << "\",\""
           << published << "\"," << diff << ',' << (ok ? "true" : "false") << '\n';
        json comp = json::array();
        for (const auto& c : r.computed) comp.push_back(to_json(c));
        rows.push_back({{"table", jobs[i].table}, {"N", r.published.N}, {"n", r.published.n}, {"q", r.published.q},
                        {"published", published}, {"computed", comp},
                        {"max_endpoint_difference", std::isfinite(r.max_endpoint_difference) ? json(r.max_endpoint_difference) : json(nullptr)},
                        {"within_tolerance", ok}});
        std::printf("%-14s N=%-4d n=%-3d q=%-10s computed %-32s published %-32s %s\n", jobs[i].table.c_str(), r.published.N,
                    r.published.n, qs.c_str(), computed.c_str(), published.c_str(), ok ? "ok" : "DIFF");
    }
    json meta = run.metadata();
    meta["interaction"] = src.description;
    meta["period"] = src.period;
    meta["tolerance"] = tol;
    meta["grid"] = opt.grid;
    const std::string stem = table_id == "all" ? "reproduce-all" : "reproduce-" + table_id;
    run.emit(stem + ".csv", os.str());
    run.emit_json(stem + "-diff.json", json{{"rows", rows}, {"matched", matched}, {"total", jobs.size()}, {"metadata", meta}});
    std::printf("%d of %zu rows within %.2f\n", matched, jobs.size(), tol);
    return 0;
}

/// Flags shared by every subcommand; unset flags leave the config file untouched.
struct Flags {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::int64_t> seed;
    unsigned jobs = 1;
    std::optional<int> n;
    std::optional<std::string> topology;
    std::vector<double> weights;
    std::optional<int> q;
    std::optional<std::string> alternating;
    std::optional<std::string> sign;
    std::optional<double> tau;
    std::optional<double> tau_max;
    std::optional<std::int64_t> grid;
    std::optional<std::string> h_source;
    std::optional<double> h_period;
    std::optional<double> e_syn;
    std::optional<double> epsilon;
    std::optional<double> g_syn;
    std::optional<std::int64_t> order;
    std::optional<std::int64_t> samples;
    std::optional<std::int64_t> h_grid;
    std::optional<double> horizon_periods;
    std::optional<double> step;
    std::optional<std::string> initial;
    std::optional<double> jitter;
    bool perturb_weights = false;
    bool perturb_delays = false;
    std::vector<int> targets;
    std::optional<double> amplitude;
    std::vector<double> window;
    std::string table;
    std::string n_range;
};

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "random seed recorded in every output");
    sub->add_option("--jobs", f.jobs, "parallel workers for independent sweeps")->check(CLI::PositiveNumber);
}

void add_model(CLI::App* sub, Flags& f)
{
    sub->add_option("--e-syn", f.e_syn, "synaptic reversal potential");
    sub->add_option("--order", f.order, "Fourier harmonics kept in H");
    sub->add_option("--samples", f.samples, "orbit samples per period");
    sub->add_option("--h-grid", f.h_grid, "phase-shift samples of H");
}

void add_network(CLI::App* sub, Flags& f, bool with_n = true)
{
    if (with_n) sub->add_option("--N", f.n, "network size");
    sub->add_option("--topology", f.topology, "distance-weighted | global-homogeneous | nearest-neighbour | circulant | bidirectional");
    sub->add_option("--weights", f.weights, "circulant first row w_0..w_{N-1}");
}

void add_solution(CLI::App* sub, Flags& f)
{
    sub->add_option("--q", f.q, "symmetric solution psi = 2 pi q / N");
    sub->add_option("--alternating", f.alternating, "alternating 2-cluster variant A or B");
}

void add_stability(CLI::App* sub, Flags& f)
{
    sub->add_option("--H", f.h_source, "compute | printed-reference | printed-reference-negated | path");
    sub->add_option("--H-period", f.h_period, "period paired with an H file");
    sub->add_option("--sign", f.sign, "sign of epsilon: positive | negative");
    sub->add_option("--tau", f.tau, "delay at which to report the spectrum");
    sub->add_option("--tau-max", f.tau_max, "upper end of the tau sweep (default: one period)");
    sub->add_option("--grid", f.grid, "tau grid points");
}

json build_document(const Flags& f, const std::string& command)
{
    json doc = json::object();
    if (!f.config_path.empty()) {
        try {
            doc = json::parse(read_file(f.config_path));
        } catch (const json::parse_error& e) {
            throw SchemaError("<document>", std::string("not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw SchemaError("<root>", "expected an object");
        if (doc.contains("command") && doc["command"].is_string() && doc["command"] != command)
            throw SchemaError("command", "config is for '" + doc["command"].get<std::string>() + "' but '" + command + "' was requested");
    }
    doc["command"] = command;
    auto set = [&](const std::string& a, const std::string& b, const json& v) { doc[a][b] = v; };
    if (f.out) doc["output_dir"] = *f.out;
    if (f.seed) doc["seed"] = *f.seed;
    if (f.n) set("topology", "N", *f.n);
    if (f.topology) set("topology", "form", *f.topology);
    if (!f.weights.empty()) {
        set("topology", "weights", f.weights);
        if (!f.topology && !(doc.contains("topology") && doc["topology"].contains("form"))) set("topology", "form", "circulant");
    }
    if (f.q) set("solution", "q", *f.q);
    if (f.alternating) set("solution", "alternating", *f.alternating);
    if (f.sign) set("coupling", "sign", *f.sign);
    if (f.tau) set("tau", "value", *f.tau);
    if (f.tau_max) set("tau", "max", *f.tau_max);
    if (f.grid) set("tau", "grid", *f.grid);
    if (f.h_source) set("interaction", "source", *f.h_source);
    if (f.h_period) set("interaction", "period", *f.h_period);
    if (f.e_syn) set("oscillator", "e_syn", *f.e_syn);
    if (f.epsilon) set("coupling", "epsilon", *f.epsilon);
    if (f.g_syn) set("coupling", "g_syn", *f.g_syn);
    if (f.order) set("reduction", "order", *f.order);
    if (f.samples) set("reduction", "sample_count", *f.samples);
    if (f.h_grid) set("reduction", "grid_size", *f.h_grid);
    if (f.horizon_periods) set("simulation", "horizon_periods", *f.horizon_periods);
    if (f.step) set("simulation", "step", *f.step);
    if (f.initial) set("simulation", "initial", *f.initial);
    if (f.jitter) set("simulation", "jitter", *f.jitter);
    if (f.perturb_weights) set("simulation", "perturb_weights", true);
    if (f.perturb_delays) set("simulation", "perturb_delays", true);
    if (!f.targets.empty()) set("pulse", "targets", f.targets);
    if (f.amplitude) set("pulse", "amplitude", *f.amplitude);
    if (!f.window.empty()) set("pulse", "window", f.window);
    // Without a config file the Morris-Lecar model runs at E_syn = 0 unless told otherwise.
    if (f.config_path.empty() && !(doc.contains("oscillator") && doc["oscillator"].contains("e_syn"))) set("oscillator", "e_syn", 0.0);
    return doc;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cluster solutions of delay-coupled oscillator networks: phase reduction, stability and simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CLUSTERSYNC_VERSION);
    Flags f;

    auto* reduce_cmd = app.add_subcommand("reduce", "limit cycle, adjoint and interaction function H");
    add_common(reduce_cmd, f);
    add_model(reduce_cmd, f);

    auto* catalog_cmd = app.add_subcommand("catalog", "symmetric and alternating cluster solutions");
    add_common(catalog_cmd, f);
    add_network(catalog_cmd, f);

    auto* stability_cmd = app.add_subcommand("stability", "spectra and tau stability intervals");
    auto* sweep_cmd = app.add_subcommand("sweep", "tau profile of the largest non-structural real part");
    for (auto* c : {stability_cmd, sweep_cmd}) {
        add_common(c, f);
        add_model(c, f);
        add_network(c, f);
        add_solution(c, f);
        add_stability(c, f);
    }

    auto* simulate_cmd = app.add_subcommand("simulate", "integrate the delay-coupled network and classify clusters");
    auto* perturb_cmd = app.add_subcommand("perturb", "simulate with an input pulse and classify before and after");
    for (auto* c : {simulate_cmd, perturb_cmd}) {
        add_common(c, f);
        add_model(c, f);
        add_network(c, f);
        add_solution(c, f);
        c->add_option("--sign", f.sign, "sign of epsilon: positive | negative");
        c->add_option("--tau", f.tau, "coupling delay");
        c->add_option("--epsilon", f.epsilon, "coupling strength");
        c->add_option("--g-syn", f.g_syn, "synaptic conductance; epsilon = g_syn / (N - 1)");
        c->add_option("--horizon-periods", f.horizon_periods, "run length in uncoupled periods");
        c->add_option("--step", f.step, "requested RK4 step (aligned to the delay)");
        c->add_option("--initial", f.initial, "catalog | constant | random-constant");
        c->add_option("--jitter", f.jitter, "seeded phase jitter of catalog starts, in periods");
        c->add_flag("--perturb-weights", f.perturb_weights, "apply seeded random weight perturbation");
        c->add_flag("--perturb-delays", f.perturb_delays, "apply seeded random delay perturbation");
    }
    perturb_cmd->add_option("--targets", f.targets, "1-based oscillators receiving the pulse");
    perturb_cmd->add_option("--amplitude", f.amplitude, "extra applied current during the pulse");
    perturb_cmd->add_option("--window", f.window, "pulse start and end time")->expected(2);

    auto* reproduce_cmd = app.add_subcommand("reproduce-table", "recompute a published interval table and diff it");
    add_common(reproduce_cmd, f);
    add_model(reproduce_cmd, f);
    reproduce_cmd->add_option("table", f.table, "table-W1 | table-W2 | table-N140-W1 | table-N140-W2 | all")->required();
    reproduce_cmd->add_option("--N", f.n_range, "network size or range a..b");
    reproduce_cmd->add_option("--H", f.h_source, "compute | printed-reference | printed-reference-negated | path");
    reproduce_cmd->add_option("--H-period", f.h_period, "period paired with an H file");
    reproduce_cmd->add_option("--grid", f.grid, "tau grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        Run run;
        run.resolved = build_document(f, command);
        run.cfg = parse_config(run.resolved);
        run.jobs = f.jobs;
        run.dir = run.cfg.output_dir;
        fs::create_directories(run.dir);
        if (!f.config_path.empty()) run.input(f.config_path);
        int status = 0;
        if (command == "reduce") status = cmd_reduce(run);
        else if (command == "catalog") status = cmd_catalog(run);
        else if (command == "stability") status = cmd_stability(run);
        else if (command == "sweep") status = cmd_sweep(run);
        else if (command == "simulate") status = cmd_simulate(run);
        else if (command == "perturb") status = cmd_perturb(run);
        else status = cmd_reproduce(run, f.table, f.n_range);
        run.finish();
        return status;
    } catch (const SchemaError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
